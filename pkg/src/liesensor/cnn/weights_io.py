"""Binary weight files: magic, format version, architecture descriptor,
named little-endian float32 parameter blocks, trailing CRC32."""

from __future__ import annotations

import io
import json
import struct
import zlib

import numpy as np

from liesensor.cnn.network import Network, build_network
from liesensor.errors import ChecksumError, DataFormatError

MAGIC = b"LSCW"
FORMAT_VERSION = 1


def _serialize(network: Network) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    desc = json.dumps(network.descriptor(), sort_keys=True).encode("utf-8")
    buf.write(struct.pack("<Q", len(desc)))
    buf.write(desc)
    for key, layer, name in network.named_params():
        arr = np.ascontiguousarray(layer.params()[name], dtype="<f4")
        encoded = key.encode("utf-8")
        buf.write(struct.pack("<I", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<Q", arr.nbytes))
        buf.write(arr.tobytes())
    return buf.getvalue()


def save_weights(network: Network, path) -> None:
    data = _serialize(network)
    with open(path, "wb") as fh:
        fh.write(data)
        fh.write(struct.pack("<I", zlib.crc32(data)))


def _read_blocks(body: bytes, offset: int) -> dict[str, bytes]:
    blocks: dict[str, bytes] = {}
    while offset < len(body):
        if offset + 4 > len(body):
            raise DataFormatError("truncated parameter block header")
        (name_len,) = struct.unpack_from("<I", body, offset)
        offset += 4
        if offset + name_len + 8 > len(body):
            raise DataFormatError("truncated parameter block header")
        name = body[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (size,) = struct.unpack_from("<Q", body, offset)
        offset += 8
        if offset + size > len(body):
            raise DataFormatError(f"truncated parameter block {name!r}")
        blocks[name] = body[offset : offset + size]
        offset += size
    return blocks


def _parse(path) -> tuple[dict, dict[str, bytes]]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 4 + 4 or raw[: len(MAGIC)] != MAGIC:
        raise DataFormatError(f"{path}: not a weight file")
    body, trailer = raw[:-4], raw[-4:]
    (stored_crc,) = struct.unpack("<I", trailer)
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch (truncated or corrupted)")
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<I", body, offset)
    offset += 4
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported weight format version {version}")
    (desc_len,) = struct.unpack_from("<Q", body, offset)
    offset += 8
    if offset + desc_len > len(body):
        raise DataFormatError(f"{path}: truncated architecture descriptor")
    try:
        descriptor = json.loads(body[offset : offset + desc_len].decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: bad architecture descriptor ({exc})") from exc
    blocks = _read_blocks(body, offset + desc_len)
    return descriptor, blocks


def _fill(network: Network, blocks: dict[str, bytes], path) -> Network:
    expected = {key: (layer, name) for key, layer, name in network.named_params()}
    missing = set(expected) - set(blocks)
    if missing:
        raise DataFormatError(f"{path}: missing parameter block(s) {sorted(missing)}")
    extra = set(blocks) - set(expected)
    if extra:
        raise DataFormatError(f"{path}: unexpected parameter block(s) {sorted(extra)}")
    for key, (layer, name) in expected.items():
        shape = layer.params()[name].shape
        want = int(np.prod(shape)) * 4
        payload = blocks[key]
        if len(payload) != want:
            raise DataFormatError(
                f"{path}: shape mismatch at {key}: file block is {len(payload)} bytes, "
                f"architecture wants {want} ({shape})"
            )
        layer.set_param(name, np.frombuffer(payload, dtype="<f4").reshape(shape).copy())
    return network


def load_weights(path) -> Network:
    """Rebuild the stored architecture and restore every parameter bit-exactly."""
    descriptor, blocks = _parse(path)
    return _fill(build_network(descriptor), blocks, path)


def load_weights_into(network: Network, path) -> Network:
    """Load a weight file into an existing network; shapes must agree."""
    _, blocks = _parse(path)
    return _fill(network, blocks, path)
