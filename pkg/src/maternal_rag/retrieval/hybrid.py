"""Dense + BM25 candidates, RRF fusion, dedup, rerank, top-K."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..errors import ProviderError
from ..text import digest
from .bm25 import SparseIndex, bm25_retrieve
from .dense import DenseIndex, dense_retrieve
from .fusion import deduplicate, rrf_fuse
from .rerank import rerank
from .scored import ScoredList

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetrievalConfig:
    k_dense: int = 15
    k_rrf: int = 60
    k_rerank: int = 7
    top_k: int = 7
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    stage_filter: bool = False

    def __post_init__(self):
        for name in ("k_dense", "k_rrf", "k_rerank", "top_k", "bm25_k1"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.top_k > self.k_rerank:
            raise ValueError("top_k must not exceed k_rerank")


@dataclass(frozen=True)
class Indexes:
    store: object
    sparse: SparseIndex
    dense: DenseIndex

    def texts(self) -> dict[str, str]:
        return {c.id: c.text for c in self.store}


@dataclass
class RetrievalResult:
    evidence: ScoredList
    steps: list = field(default_factory=list)
    flags: list = field(default_factory=list)


def _stage_allowed(store, stage):
    return {c.id for c in store if not c.stages or stage in c.stages}


def retrieve_and_rerank(query: str, query_en: str | None, stage: str, concerns, config: RetrievalConfig,
                        indexes: Indexes, embedder, reranker=None) -> RetrievalResult:
    """Both retrievers see the original query; only the reranker sees the English view.

    ``query_en=None`` (translation failed) or ``reranker=None`` skip reranking
    and keep the fused order.
    """
    allowed = _stage_allowed(indexes.store, stage) if config.stage_filter else None
    result = RetrievalResult(ScoredList())
    qd = digest(query)

    r_dense = dense_retrieve(indexes.dense, query, config.k_dense, embedder, allowed=allowed)
    result.steps.append({"step": "dense", "query_view": "original", "query_digest": qd,
                         "k": config.k_dense, "results": r_dense.to_json()})
    r_sparse = bm25_retrieve(indexes.sparse, query, None, allowed=allowed)
    result.steps.append({"step": "sparse", "query_view": "original", "query_digest": qd,
                         "results": r_sparse.to_json()})

    fused = rrf_fuse([r_dense, r_sparse], config.k_rrf)
    result.steps.append({"step": "fuse", "k_rrf": config.k_rrf, "results": fused.to_json()})
    candidates = deduplicate(fused)
    result.steps.append({"step": "dedup", "results": candidates.to_json()})

    ranked = candidates.top(config.k_rerank)
    if not len(candidates):
        result.steps.append({"step": "rerank", "skipped": "no_candidates"})
    elif reranker is None:
        result.steps.append({"step": "rerank", "skipped": "disabled", "results": ranked.to_json()})
    elif query_en is None:
        result.flags.append("rerank_skipped_no_translation")
        result.steps.append({"step": "rerank", "skipped": "no_english_view", "results": ranked.to_json()})
    else:
        try:
            ranked = rerank(reranker, query_en, candidates, config.k_rerank, indexes.texts())
            result.steps.append({"step": "rerank", "query_view": "english", "query_digest": digest(query_en),
                                 "results": ranked.to_json()})
        except ProviderError as exc:
            log.warning("reranker failed, falling back to fused order: %s", exc)
            result.flags.append("rerank_failed")
            result.steps.append({"step": "rerank", "skipped": "error", "error": str(exc),
                                 "results": ranked.to_json()})

    result.evidence = ranked.top(config.top_k)
    result.steps.append({"step": "select_top_k", "k": config.top_k, "results": result.evidence.to_json()})
    return result
