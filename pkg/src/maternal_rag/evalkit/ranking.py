"""Ranking metrics over DIRECT evidence sets."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

DEFAULT_KS = (5, 10, 50)


@dataclass(frozen=True)
class RetrievalMetrics:
    recall_at: dict[int, float]
    hit_at: dict[int, float]
    mrr: float
    n: int = 1
    flags: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {"n": self.n, "recall_at": {str(k): v for k, v in self.recall_at.items()},
                "hit_at": {str(k): v for k, v in self.hit_at.items()}, "mrr": self.mrr,
                "flags": list(self.flags)}


def _ids(ranked) -> list[str]:
    if hasattr(ranked, "ids"):
        return list(ranked.ids())
    return [r[0] if isinstance(r, (tuple, list)) else r for r in ranked]


def retrieval_metrics(ranked, direct_ids, ks=DEFAULT_KS) -> RetrievalMetrics:
    """Recall@K, Hit@K and reciprocal rank of a single ranked list.

    ``ranked`` may be a ScoredList or a plain sequence of ids.
    """
    direct = set(direct_ids)
    if not direct:
        raise ValueError("direct_ids must be non-empty")
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("ks must be positive integers")
    ids = _ids(ranked)
    first = next((i for i, cid in enumerate(ids) if cid in direct), None)
    rr = 0.0 if first is None else 1.0 / (first + 1)
    recall, hit = {}, {}
    for k in ks:
        found = direct.intersection(ids[:k])
        recall[k] = len(found) / len(direct)
        hit[k] = 1.0 if found else 0.0
    return RetrievalMetrics(recall, hit, rr)


def aggregate_metrics(per_item: list[RetrievalMetrics]) -> RetrievalMetrics:
    """Macro-average over items (MRR is the mean reciprocal rank)."""
    if not per_item:
        raise ValueError("no items to aggregate")
    ks = sorted(per_item[0].recall_at)
    if any(sorted(m.recall_at) != ks for m in per_item):
        raise ValueError("items were scored at different K values")
    recall = {k: statistics.fmean(m.recall_at[k] for m in per_item) for k in ks}
    hit = {k: statistics.fmean(m.hit_at[k] for m in per_item) for k in ks}
    mrr = statistics.fmean(m.mrr for m in per_item)
    return RetrievalMetrics(recall, hit, mrr, n=len(per_item))


def evaluate_rankings(bench, rankings, ks=DEFAULT_KS) -> tuple[RetrievalMetrics, list[RetrievalMetrics]]:
    """Score one ranking per benchmark item against that item's DIRECT set."""
    if len(rankings) != len(bench.items):
        raise ValueError(f"{len(rankings)} rankings for {len(bench.items)} benchmark items")
    per_item = [retrieval_metrics(r, it.direct_ids(), ks) for it, r in zip(bench.items, rankings)]
    return aggregate_metrics(per_item), per_item
