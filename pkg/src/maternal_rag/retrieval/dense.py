"""Exact (flat-scan) cosine retrieval over provider embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError, ProviderError
from .scored import ScoredList

NORM_TOL = 1e-6


def _unit(vec, dimension: int) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.shape != (dimension,):
        raise ProviderError(f"embedding has shape {arr.shape}, expected ({dimension},)")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > NORM_TOL:
        raise ProviderError(f"embedding not L2-normalized (norm={norm:.8f})")
    return arr


@dataclass(frozen=True)
class DenseIndex:
    doc_ids: tuple[str, ...]
    matrix: np.ndarray
    provider_name: str

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])


def build_dense_index(store, provider) -> DenseIndex:
    if len(store) == 0:
        raise InputError("cannot build a dense index over an empty corpus")
    rows = [_unit(provider.embed(c.text), provider.dimension) for c in store]
    matrix = np.vstack(rows)
    matrix.setflags(write=False)
    return DenseIndex(tuple(store.ids()), matrix, getattr(provider, "name", type(provider).__name__))


def dense_retrieve(index: DenseIndex, query: str, k: int, provider, allowed=None) -> ScoredList:
    if provider.dimension != index.dimension:
        raise ValueError(f"provider dimension {provider.dimension} != index dimension {index.dimension}")
    z = _unit(provider.embed(query), index.dimension)
    sims = index.matrix @ z
    pairs = [(cid, float(s)) for cid, s in zip(index.doc_ids, sims) if allowed is None or cid in allowed]
    return ScoredList.ranked(pairs).top(k)
