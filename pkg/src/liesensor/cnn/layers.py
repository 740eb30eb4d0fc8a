"""Network layers.

Convention: activations are float64 NHWC arrays; trainable parameters are
stored float32 (the value that weight files round-trip bit-exactly) and
upcast for arithmetic. After backward(), each layer's gradients sit in
``grads`` keyed like ``params()``.
"""

from __future__ import annotations

import numpy as np


def _he_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


def _pad_amounts(size: int, k: int, stride: int, padding: str) -> tuple[int, int, int]:
    """(out_size, pad_before, pad_after) for one spatial axis."""
    if padding == "valid":
        if size < k:
            raise ValueError(f"input size {size} smaller than kernel {k}")
        return (size - k) // stride + 1, 0, 0
    if padding == "same":
        out = -(-size // stride)  # ceil
        total = max((out - 1) * stride + k - size, 0)
        return out, total // 2, total - total // 2
    raise ValueError(f"unknown padding {padding!r}")


def _strided_slice(arr: np.ndarray, i: int, j: int, oh: int, ow: int, stride: int) -> np.ndarray:
    return arr[:, i : i + (oh - 1) * stride + 1 : stride, j : j + (ow - 1) * stride + 1 : stride, :]


class Layer:
    """Base layer: stateless ones only need forward/backward."""

    def params(self) -> dict[str, np.ndarray]:
        """All persistent arrays (what weight files carry)."""
        return {}

    def trainable_names(self) -> tuple[str, ...]:
        """Subset of params() that gradient updates apply to."""
        return tuple(self.params().keys())

    def set_param(self, name: str, value: np.ndarray) -> None:
        setattr(self, name, value)

    def kernel_names(self) -> tuple[str, ...]:
        """Parameter names the kernel regularizer applies to."""
        return ()

    def kernel_terms(self):
        """(l2_lambda, param_key, array) triples for the regularizer."""
        lam = getattr(self, "l2_lambda", 0.0)
        for name in self.kernel_names():
            yield lam, name, self.params()[name]

    def set_l2(self, l2_lambda: float) -> None:
        if hasattr(self, "l2_lambda"):
            self.l2_lambda = float(l2_lambda)

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


class Conv2D(Layer):
    """Cross-correlation with k x k x Cin x Cout kernels, no bias."""

    def __init__(self, in_channels, out_channels, kernel_size, stride=1,
                 padding="same", l2_lambda=0.0, rng=None):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        self.l2_lambda = float(l2_lambda)
        fan_in = kernel_size * kernel_size * in_channels
        shape = (kernel_size, kernel_size, in_channels, out_channels)
        if rng is None:
            self.kernels = np.zeros(shape, dtype=np.float32)
        else:
            self.kernels = _he_uniform(rng, shape, fan_in)
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def params(self):
        return {"kernels": self.kernels}

    def kernel_names(self):
        return ("kernels",)

    def forward(self, x, training):
        if x.shape[3] != self.in_channels:
            raise ValueError(
                f"conv expects {self.in_channels} input channels, got {x.shape[3]}"
            )
        n, h, w, _ = x.shape
        k, s = self.kernel_size, self.stride
        oh, pt, pb = _pad_amounts(h, k, s, self.padding)
        ow, pl, pr = _pad_amounts(w, k, s, self.padding)
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if (pt or pb or pl or pr) else x
        kern = self.kernels.astype(np.float64)
        y = np.zeros((n, oh, ow, self.out_channels))
        for i in range(k):
            for j in range(k):
                sl = _strided_slice(xp, i, j, oh, ow, s)
                y += sl @ kern[i, j]
        self._cache = (xp, (pt, pb, pl, pr), x.shape, oh, ow)
        return y

    def backward(self, grad):
        xp, pads, x_shape, oh, ow = self._cache
        k, s = self.kernel_size, self.stride
        kern = self.kernels.astype(np.float64)
        d_kern = np.zeros_like(kern)
        dxp = np.zeros_like(xp)
        grad2 = grad.reshape(-1, self.out_channels)
        for i in range(k):
            for j in range(k):
                sl = _strided_slice(xp, i, j, oh, ow, s)
                d_kern[i, j] = sl.reshape(-1, self.in_channels).T @ grad2
                _strided_slice(dxp, i, j, oh, ow, s)[...] += grad @ kern[i, j].T
        self.grads = {"kernels": d_kern}
        pt, pb, pl, pr = pads
        n, h, w, c = x_shape
        return dxp[:, pt : pt + h, pl : pl + w, :]

    def descriptor(self):
        return {
            "type": "conv",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel_size": self.kernel_size,
            "stride": self.stride,
            "padding": self.padding,
            "l2_lambda": self.l2_lambda,
        }


class SepConv2D(Layer):
    """Depthwise k x k per-channel convolution followed by a 1x1 channel mix.

    Parameter count k*k*Cin + Cin*Cout is checked to undercut the equivalent
    full convolution whenever k > 1 and Cout > 1.
    """

    def __init__(self, in_channels, out_channels, kernel_size, stride=1,
                 padding="same", l2_lambda=0.0, rng=None):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        self.l2_lambda = float(l2_lambda)
        k = kernel_size
        if k > 1 and out_channels > 1:
            sep_params = k * k * in_channels + in_channels * out_channels
            full_params = k * k * in_channels * out_channels
            assert sep_params < full_params, "separable conv must save parameters"
        if rng is None:
            self.depthwise = np.zeros((k, k, in_channels), dtype=np.float32)
            self.pointwise = np.zeros((in_channels, out_channels), dtype=np.float32)
        else:
            self.depthwise = _he_uniform(rng, (k, k, in_channels), k * k)
            self.pointwise = _he_uniform(rng, (in_channels, out_channels), in_channels)
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def params(self):
        return {"depthwise": self.depthwise, "pointwise": self.pointwise}

    def kernel_names(self):
        return ("depthwise", "pointwise")

    def forward(self, x, training):
        if x.shape[3] != self.in_channels:
            raise ValueError(
                f"sepconv expects {self.in_channels} input channels, got {x.shape[3]}"
            )
        n, h, w, _ = x.shape
        k, s = self.kernel_size, self.stride
        oh, pt, pb = _pad_amounts(h, k, s, self.padding)
        ow, pl, pr = _pad_amounts(w, k, s, self.padding)
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if (pt or pb or pl or pr) else x
        dw = self.depthwise.astype(np.float64)
        depth_out = np.zeros((n, oh, ow, self.in_channels))
        for i in range(k):
            for j in range(k):
                depth_out += _strided_slice(xp, i, j, oh, ow, s) * dw[i, j]
        y = depth_out @ self.pointwise.astype(np.float64)
        self._cache = (xp, (pt, pb, pl, pr), x.shape, oh, ow, depth_out)
        return y

    def backward(self, grad):
        xp, pads, x_shape, oh, ow, depth_out = self._cache
        k, s = self.kernel_size, self.stride
        dw = self.depthwise.astype(np.float64)
        pw = self.pointwise.astype(np.float64)
        d_pw = depth_out.reshape(-1, self.in_channels).T @ grad.reshape(-1, self.out_channels)
        d_depth_out = grad @ pw.T
        d_dw = np.zeros_like(dw)
        dxp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                sl = _strided_slice(xp, i, j, oh, ow, s)
                d_dw[i, j] = np.einsum("nhwc,nhwc->c", sl, d_depth_out)
                _strided_slice(dxp, i, j, oh, ow, s)[...] += d_depth_out * dw[i, j]
        self.grads = {"depthwise": d_dw, "pointwise": d_pw}
        pt, pb, pl, pr = pads
        n, h, w, c = x_shape
        return dxp[:, pt : pt + h, pl : pl + w, :]

    def descriptor(self):
        return {
            "type": "sepconv",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel_size": self.kernel_size,
            "stride": self.stride,
            "padding": self.padding,
            "l2_lambda": self.l2_lambda,
        }


class BatchNorm(Layer):
    """Per-channel batch normalization over NHWC inputs.

    Running statistics move only in training mode; eval mode is a fixed
    affine map of the input.
    """

    def __init__(self, channels, momentum=0.99, epsilon=1e-5):
        self.channels = channels
        self.momentum = float(momentum)
        self.epsilon = float(epsilon)
        self.gamma = np.ones(channels, dtype=np.float32)
        self.beta = np.zeros(channels, dtype=np.float32)
        self.running_mean = np.zeros(channels, dtype=np.float32)
        self.running_var = np.ones(channels, dtype=np.float32)
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def params(self):
        return {
            "gamma": self.gamma,
            "beta": self.beta,
            "running_mean": self.running_mean,
            "running_var": self.running_var,
        }

    def trainable_names(self):
        return ("gamma", "beta")

    def forward(self, x, training):
        if x.ndim != 4 or x.shape[3] != self.channels:
            raise ValueError(f"batchnorm expects NHWC with {self.channels} channels")
        gamma = self.gamma.astype(np.float64)
        beta = self.beta.astype(np.float64)
        if training:
            if x.shape[0] == 0:
                raise ValueError("batchnorm cannot run on an empty batch in train mode")
            mean = x.mean(axis=(0, 1, 2))
            var = x.var(axis=(0, 1, 2))
            m = self.momentum
            self.running_mean = (
                m * self.running_mean.astype(np.float64) + (1.0 - m) * mean
            ).astype(np.float32)
            self.running_var = (
                m * self.running_var.astype(np.float64) + (1.0 - m) * var
            ).astype(np.float32)
        else:
            mean = self.running_mean.astype(np.float64)
            var = self.running_var.astype(np.float64)
        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std, training, x.shape)
        return gamma * x_hat + beta

    def backward(self, grad):
        x_hat, inv_std, training, shape = self._cache
        gamma = self.gamma.astype(np.float64)
        d_gamma = np.einsum("nhwc,nhwc->c", grad, x_hat)
        d_beta = grad.sum(axis=(0, 1, 2))
        self.grads = {"gamma": d_gamma, "beta": d_beta}
        d_xhat = grad * gamma
        if not training:
            return d_xhat * inv_std
        m = shape[0] * shape[1] * shape[2]
        sum_d = d_xhat.sum(axis=(0, 1, 2))
        sum_dx = np.einsum("nhwc,nhwc->c", d_xhat, x_hat)
        return (inv_std / m) * (m * d_xhat - sum_d - x_hat * sum_dx)

    def descriptor(self):
        return {
            "type": "batchnorm",
            "channels": self.channels,
            "momentum": self.momentum,
            "epsilon": self.epsilon,
        }


class ReLU(Layer):
    def __init__(self):
        self._mask = None
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x, training):
        self._mask = x > 0.0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad):
        return np.where(self._mask, grad, 0.0)

    def descriptor(self):
        return {"type": "relu"}


class GlobalAvgPool(Layer):
    """Spatial mean per feature map: (N, H, W, C) -> (N, C)."""

    def __init__(self):
        self._shape = None
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x, training):
        if x.ndim != 4:
            raise ValueError("global average pooling expects a 4-D input")
        self._shape = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, grad):
        n, h, w, c = self._shape
        return np.broadcast_to(grad[:, None, None, :] / (h * w), self._shape).copy()

    def descriptor(self):
        return {"type": "global_avg_pool"}


class ResidualBlock(Layer):
    """main(x) + skip(x); an empty skip list is the identity path."""

    def __init__(self, main: list[Layer], skip: list[Layer]):
        self.main = main
        self.skip = skip
        self.grads: dict[str, np.ndarray] = {}

    def _branch_params(self):
        for branch, layers in (("main", self.main), ("skip", self.skip)):
            for i, layer in enumerate(layers):
                for name, arr in layer.params().items():
                    yield f"{branch}{i}.{name}", layer, name, arr

    def params(self):
        return {key: arr for key, _, _, arr in self._branch_params()}

    def set_param(self, key: str, value: np.ndarray) -> None:
        for pkey, layer, name, _ in self._branch_params():
            if pkey == key:
                setattr(layer, name, value)
                return
        raise KeyError(key)

    def trainable_names(self):
        return tuple(
            key
            for key, layer, name, _ in self._branch_params()
            if name in layer.trainable_names()
        )

    def kernel_names(self):
        return tuple(
            key
            for key, layer, name, _ in self._branch_params()
            if name in layer.kernel_names()
        )

    def kernel_terms(self):
        for key, layer, name, arr in self._branch_params():
            if name in layer.kernel_names():
                yield layer.l2_lambda, key, arr

    def set_l2(self, l2_lambda: float) -> None:
        for layer in self.main + self.skip:
            layer.set_l2(l2_lambda)

    def forward(self, x, training):
        y_main = x
        for layer in self.main:
            y_main = layer.forward(y_main, training)
        y_skip = x
        for layer in self.skip:
            y_skip = layer.forward(y_skip, training)
        if y_main.shape != y_skip.shape:
            raise ValueError(
                f"residual branches disagree: main {y_main.shape} vs skip {y_skip.shape}"
            )
        return y_main + y_skip

    def backward(self, grad):
        g_main = grad
        for layer in reversed(self.main):
            g_main = layer.backward(g_main)
        g_skip = grad
        for layer in reversed(self.skip):
            g_skip = layer.backward(g_skip)
        self.grads = {
            key: layer.grads[name]
            for key, layer, name, _ in self._branch_params()
            if name in layer.grads
        }
        return g_main + g_skip

    def descriptor(self):
        return {
            "type": "residual",
            "main": [layer.descriptor() for layer in self.main],
            "skip": [layer.descriptor() for layer in self.skip],
        }
