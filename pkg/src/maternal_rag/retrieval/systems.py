"""Standalone and hybrid rankings of one query, for side-by-side evaluation."""

from __future__ import annotations

from .bm25 import bm25_retrieve
from .dense import dense_retrieve
from .fusion import deduplicate, rrf_fuse
from .rerank import rerank


def system_rankings(query: str, indexes, embedder, *, depth: int, k_rrf: int = 60, reranker=None,
                    reranker_name: str = "rerank") -> dict:
    """Rank the corpus for ``query`` with each retrieval variant, each list cut at ``depth``."""
    sparse = bm25_retrieve(indexes.sparse, query)
    dense = dense_retrieve(indexes.dense, query, depth, embedder)
    fused = deduplicate(rrf_fuse([dense, sparse], k_rrf))
    out = {}
    if reranker is not None:
        out[f"Hybrid RRF + {reranker_name}"] = rerank(reranker, query, fused, depth, indexes.texts())
    out["Hybrid RRF"] = fused.top(depth)
    out["Dense"] = dense
    out["BM25"] = sparse.top(depth)
    return out
