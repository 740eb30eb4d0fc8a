"""Numeric features for the text channel: count vectors and TF-IDF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from liesensor.textprep import TokenizedDoc, Vocabulary


@dataclass
class SparseVector:
    """Sparse feature row: strictly increasing indices, no explicit zeros."""

    dimension: int
    indices: np.ndarray  # int64, sorted ascending
    values: np.ndarray  # float64

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values length mismatch")
        if self.indices.size:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dimension:
                raise ValueError("index out of range")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension, dtype=np.float64)
        dense[self.indices] = self.values
        return dense

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))


@dataclass
class IdfTable:
    """Per-index inverse document frequency weights (all finite, >= 0)."""

    dimension: int
    idf: np.ndarray  # float64, length == dimension
    doc_count: int

    def __post_init__(self):
        self.idf = np.asarray(self.idf, dtype=np.float64)
        if self.idf.shape != (self.dimension,):
            raise ValueError("idf length must equal dimension")


def count_vectorize(doc: TokenizedDoc, vocab: Vocabulary) -> SparseVector:
    """Term occurrence counts over the vocabulary; OOV tokens ignored."""
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    counts: dict[int, int] = {}
    for tok in doc:
        idx = vocab.term_to_index.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector(len(vocab), np.empty(0, np.int64), np.empty(0, np.float64))
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    return SparseVector(len(vocab), indices, values)


def fit_idf(docs: Sequence[TokenizedDoc], vocab: Vocabulary) -> IdfTable:
    """Smoothed IDF over the given documents: ln((1+N)/(1+df)) + 1."""
    if not docs:
        raise ValueError("cannot fit idf on an empty document list")
    n_docs = len(docs)
    df = np.zeros(len(vocab), dtype=np.int64)
    for doc in docs:
        seen = {vocab.term_to_index[t] for t in set(doc) if t in vocab}
        for idx in seen:
            df[idx] += 1
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    return IdfTable(dimension=len(vocab), idf=idf, doc_count=n_docs)


def tfidf_vectorize(doc: TokenizedDoc, vocab: Vocabulary, idf: IdfTable) -> SparseVector:
    """Count vector reweighted by IDF, then L2-normalized.

    An empty or fully-OOV document gives the zero vector (no normalization).
    """
    if idf.dimension != len(vocab):
        raise ValueError(
            f"idf dimension {idf.dimension} != vocabulary size {len(vocab)}"
        )
    counts = count_vectorize(doc, vocab)
    if counts.nnz == 0:
        return counts
    values = counts.values * idf.idf[counts.indices]
    norm = math.sqrt(float(np.dot(values, values)))
    if norm > 0.0:
        values = values / norm
    return SparseVector(counts.dimension, counts.indices, values)


def stack_rows(rows: Sequence[SparseVector]) -> sp.csr_matrix:
    """Stack sparse rows into a CSR matrix (training-time container)."""
    if not rows:
        raise ValueError("no rows to stack")
    dim = rows[0].dimension
    for r in rows:
        if r.dimension != dim:
            raise ValueError("inconsistent row dimensions")
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, r in enumerate(rows):
        indptr[i + 1] = indptr[i] + r.nnz
    indices = np.concatenate([r.indices for r in rows]) if indptr[-1] else np.empty(0, np.int64)
    data = np.concatenate([r.values for r in rows]) if indptr[-1] else np.empty(0, np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), dim))


def vectorize_corpus(
    docs: Sequence[TokenizedDoc],
    vocab: Vocabulary,
    feature_kind: str = "count",
    idf: IdfTable | None = None,
) -> list[SparseVector]:
    """Vectorize documents with the named feature kind ("count" or "tfidf")."""
    if feature_kind == "count":
        return [count_vectorize(d, vocab) for d in docs]
    if feature_kind == "tfidf":
        if idf is None:
            raise ValueError("tfidf vectorization needs a fitted IdfTable")
        return [tfidf_vectorize(d, vocab, idf) for d in docs]
    raise ValueError(f"unknown feature kind {feature_kind!r}")
