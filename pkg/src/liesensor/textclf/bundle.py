"""Trained text-model bundle: one binary file holding the vocabulary, the
optional IDF table, the feature kind, the chosen model's parameters and the
selection table.

Layout: magic, format version, then length-prefixed named sections, little-
endian 64-bit floats for all numeric blocks, and a trailing CRC32 over
everything before it.
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from liesensor.errors import ChecksumError, DataFormatError
from liesensor.features import IdfTable, SparseVector, count_vectorize, tfidf_vectorize
from liesensor.labels import EmotionLabel
from liesensor.textclf.forest import DecisionTree, ForestHyper, RandomForestModel
from liesensor.textclf.linear import LinearHyper, LinearModel
from liesensor.textclf.naive_bayes import NaiveBayesModel
from liesensor.textclf.predict import ModelSelection
from liesensor.textprep import TokenizedDoc, Vocabulary

MAGIC = b"LSTB"
FORMAT_VERSION = 1
BUNDLE_VERSION = "text-bundle/1"


def _write_section(buf: io.BytesIO, name: str, payload: bytes) -> None:
    encoded = name.encode("utf-8")
    buf.write(struct.pack("<I", len(encoded)))
    buf.write(encoded)
    buf.write(struct.pack("<Q", len(payload)))
    buf.write(payload)


def _read_sections(data: bytes, offset: int) -> dict[str, bytes]:
    sections: dict[str, bytes] = {}
    view = memoryview(data)
    while offset < len(data):
        if offset + 4 > len(data):
            raise DataFormatError("truncated section header")
        (name_len,) = struct.unpack_from("<I", view, offset)
        offset += 4
        if offset + name_len + 8 > len(data):
            raise DataFormatError("truncated section header")
        name = bytes(view[offset : offset + name_len]).decode("utf-8")
        offset += name_len
        (payload_len,) = struct.unpack_from("<Q", view, offset)
        offset += 8
        if offset + payload_len > len(data):
            raise DataFormatError(f"truncated section {name!r}")
        sections[name] = bytes(view[offset : offset + payload_len])
        offset += payload_len
    return sections


def _f64(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _i64(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<i8").tobytes()


def _from_f64(payload: bytes, shape) -> np.ndarray:
    return np.frombuffer(payload, dtype="<f8").reshape(shape).astype(np.float64)


def _from_i64(payload: bytes, shape) -> np.ndarray:
    return np.frombuffer(payload, dtype="<i8").reshape(shape).astype(np.int64)


def _classes_tuple(values) -> tuple[EmotionLabel, ...]:
    return tuple(EmotionLabel(int(v)) for v in values)


def _encode_model(model) -> tuple[str, bytes]:
    buf = io.BytesIO()
    if isinstance(model, NaiveBayesModel):
        kind = "naive_bayes"
        header = {
            "alpha": model.alpha,
            "classes": [int(c) for c in model.classes],
            "dimension": model.dimension,
        }
        _write_section(buf, "header", json.dumps(header).encode("utf-8"))
        _write_section(buf, "class_log_prior", _f64(model.class_log_prior))
        _write_section(buf, "feature_log_prob", _f64(model.feature_log_prob))
    elif isinstance(model, LinearModel):
        kind = model.kind  # "logistic" or "svm"
        header = {
            "kind": model.kind,
            "classes": [int(c) for c in model.classes],
            "dimension": model.dimension,
            "hyper": {
                "learning_rate": model.hyper.learning_rate,
                "epochs": model.hyper.epochs,
                "l2_lambda": model.hyper.l2_lambda,
                "seed": model.hyper.seed,
                "batch_size": model.hyper.batch_size,
            },
        }
        _write_section(buf, "header", json.dumps(header).encode("utf-8"))
        _write_section(buf, "weights", _f64(model.weights))
        _write_section(buf, "bias", _f64(model.bias))
    elif isinstance(model, RandomForestModel):
        kind = "random_forest"
        header = {
            "classes": [int(c) for c in model.classes],
            "dimension": model.dimension,
            "n_trees": len(model.trees),
            "node_counts": [t.n_nodes for t in model.trees],
            "hyper": {
                "n_trees": model.hyper.n_trees,
                "max_depth": model.hyper.max_depth,
                "min_leaf": model.hyper.min_leaf,
                "feature_subsample": model.hyper.feature_subsample,
                "bootstrap": model.hyper.bootstrap,
                "seed": model.hyper.seed,
            },
        }
        _write_section(buf, "header", json.dumps(header).encode("utf-8"))
        for i, tree in enumerate(model.trees):
            _write_section(buf, f"tree{i}/feature", _i64(tree.feature))
            _write_section(buf, f"tree{i}/threshold", _f64(tree.threshold))
            _write_section(buf, f"tree{i}/left", _i64(tree.left))
            _write_section(buf, f"tree{i}/right", _i64(tree.right))
            _write_section(buf, f"tree{i}/distribution", _f64(tree.distribution))
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return kind, buf.getvalue()


def _decode_model(kind: str, payload: bytes):
    sections = _read_sections(payload, 0)
    header = json.loads(sections["header"].decode("utf-8"))
    classes = _classes_tuple(header["classes"])
    c, v = len(classes), int(header["dimension"])
    if kind == "naive_bayes":
        return NaiveBayesModel(
            classes=classes,
            class_log_prior=_from_f64(sections["class_log_prior"], (c,)),
            feature_log_prob=_from_f64(sections["feature_log_prob"], (c, v)),
            alpha=float(header["alpha"]),
        )
    if kind in ("logistic", "svm"):
        hyper = LinearHyper(**header["hyper"])
        return LinearModel(
            classes=classes,
            weights=_from_f64(sections["weights"], (c, v)),
            bias=_from_f64(sections["bias"], (c,)),
            kind=header["kind"],
            hyper=hyper,
        )
    if kind == "random_forest":
        hyper_raw = dict(header["hyper"])
        hyper = ForestHyper(**hyper_raw)
        trees = []
        for i, n_nodes in enumerate(header["node_counts"]):
            trees.append(
                DecisionTree(
                    feature=_from_i64(sections[f"tree{i}/feature"], (n_nodes,)),
                    threshold=_from_f64(sections[f"tree{i}/threshold"], (n_nodes,)),
                    left=_from_i64(sections[f"tree{i}/left"], (n_nodes,)),
                    right=_from_i64(sections[f"tree{i}/right"], (n_nodes,)),
                    distribution=_from_f64(sections[f"tree{i}/distribution"], (n_nodes, c)),
                )
            )
        return RandomForestModel(classes=classes, trees=trees, hyper=hyper, dimension=v)
    raise DataFormatError(f"unknown model kind {kind!r}")


@dataclass
class TextModelBundle:
    """Everything the text channel needs at prediction time."""

    vocabulary: Vocabulary
    feature_kind: str  # "count" or "tfidf"
    model_kind: str
    model: object
    selection: ModelSelection
    idf: Optional[IdfTable] = None
    version: str = BUNDLE_VERSION

    def vectorize(self, tokens: TokenizedDoc) -> SparseVector:
        if self.feature_kind == "tfidf":
            if self.idf is None:
                raise DataFormatError("bundle marked tfidf but has no idf table")
            return tfidf_vectorize(tokens, self.vocabulary, self.idf)
        return count_vectorize(tokens, self.vocabulary)


def save_bundle(bundle: TextModelBundle, path) -> None:
    body = io.BytesIO()
    body.write(MAGIC)
    body.write(struct.pack("<I", FORMAT_VERSION))
    meta = {
        "version": bundle.version,
        "feature_kind": bundle.feature_kind,
        "model_kind": bundle.model_kind,
    }
    _write_section(body, "meta", json.dumps(meta).encode("utf-8"))
    _write_section(body, "vocabulary", bundle.vocabulary.dumps().encode("utf-8"))
    if bundle.idf is not None:
        payload = struct.pack("<Q", bundle.idf.doc_count) + _f64(bundle.idf.idf)
        _write_section(body, "idf", payload)
    _write_section(body, "selection", json.dumps(bundle.selection.to_dict()).encode("utf-8"))
    kind, model_payload = _encode_model(bundle.model)
    if kind != bundle.model_kind and not (
        bundle.model_kind in ("linear_svm", "logistic_regression") and kind in ("svm", "logistic")
    ):
        raise ValueError(f"model kind mismatch: bundle says {bundle.model_kind}, model is {kind}")
    _write_section(body, "model", model_payload)
    data = body.getvalue()
    with open(path, "wb") as fh:
        fh.write(data)
        fh.write(struct.pack("<I", zlib.crc32(data)))


def load_bundle(path) -> TextModelBundle:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise DataFormatError(f"{path}: not a text model bundle")
    body, trailer = raw[:-4], raw[-4:]
    (stored_crc,) = struct.unpack("<I", trailer)
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch (truncated or corrupted)")
    (fmt_version,) = struct.unpack_from("<I", body, len(MAGIC))
    if fmt_version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported bundle format version {fmt_version}")
    sections = _read_sections(body, len(MAGIC) + 4)
    try:
        meta = json.loads(sections["meta"].decode("utf-8"))
        vocabulary = Vocabulary.loads(sections["vocabulary"].decode("utf-8"))
        sel_raw = json.loads(sections["selection"].decode("utf-8"))
        selection = ModelSelection(
            per_model_accuracy=sel_raw["per_model_accuracy"], chosen=sel_raw["chosen"]
        )
        idf = None
        if "idf" in sections:
            payload = sections["idf"]
            (doc_count,) = struct.unpack_from("<Q", payload, 0)
            idf_arr = np.frombuffer(payload, dtype="<f8", offset=8)
            idf = IdfTable(dimension=idf_arr.size, idf=idf_arr.copy(), doc_count=doc_count)
        model_kind = meta["model_kind"]
        wire_kind = {"linear_svm": "svm", "logistic_regression": "logistic"}.get(
            model_kind, model_kind
        )
        model = _decode_model(wire_kind, sections["model"])
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: malformed bundle ({exc})") from exc
    return TextModelBundle(
        vocabulary=vocabulary,
        feature_kind=meta["feature_kind"],
        model_kind=model_kind,
        model=model,
        selection=selection,
        idf=idf,
        version=meta["version"],
    )
