"""Synthetic multi-evidence retrieval benchmark: anchor, expand, ask, re-expand, label."""

from __future__ import annotations

import json
import logging
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import InputError, ProviderError
from .text import dumps

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DIRECT, RELATED, IRRELEVANT = "DIRECT", "RELATED", "IRRELEVANT"
EVIDENCE_LABELS = (DIRECT, RELATED, IRRELEVANT)
MIN_DIRECT = 2


@dataclass
class BenchmarkItem:
    question: str
    anchor_id: str
    labels: dict
    provenance: dict = field(default_factory=dict)

    def direct_ids(self) -> set[str]:
        return {cid for cid, lab in self.labels.items() if lab == DIRECT}

    def to_json(self) -> dict:
        return {"question": self.question, "anchor_id": self.anchor_id, "labels": dict(self.labels),
                "provenance": self.provenance}


@dataclass
class Benchmark:
    corpus_digest: str
    items: list
    skipped: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {"version": self.version, "corpus_digest": self.corpus_digest, "config": self.config,
                "items": [it.to_json() for it in self.items], "skipped": self.skipped}

    def dumps(self) -> str:
        return dumps(self.to_json())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Benchmark":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read benchmark: {exc}", path=path) from exc
        if data.get("version") != SCHEMA_VERSION:
            raise InputError(f"unsupported benchmark version {data.get('version')!r}", path=path)
        items = []
        for i, rec in enumerate(data.get("items", [])):
            labels = rec.get("labels") or {}
            bad = {v for v in labels.values() if v not in EVIDENCE_LABELS}
            if bad or rec.get("anchor_id") not in labels:
                raise InputError(f"item {i}: bad labels {sorted(bad)} or anchor not labelled", path=path)
            items.append(BenchmarkItem(rec["question"], rec["anchor_id"], labels, rec.get("provenance", {})))
        return cls(data["corpus_digest"], items, data.get("skipped", []), data.get("config", {}))


def dense_retriever(index, provider) -> Callable:
    from .retrieval import dense_retrieve

    return lambda text, k: dense_retrieve(index, text, k, provider)


def _anchor_order(store, seed: int) -> list[str]:
    ids = store.ids()
    random.Random(f"anchors/{seed}").shuffle(ids)
    return ids


def _build_item(store, anchor_id, retriever, qgen, labeler, k_dense):
    anchor = store.get(anchor_id)
    step2 = retriever(anchor.text, k_dense).ids()
    neighbours = [store.get(c) for c in step2 if c != anchor_id]
    question = qgen.generate_question([anchor, *neighbours])
    if not isinstance(question, str) or not question.strip():
        raise ProviderError("question generator returned empty text")
    step4 = retriever(question, k_dense).ids()

    candidates = []
    for cid in [anchor_id, *step2, *step4]:
        if cid not in candidates:
            candidates.append(cid)
    labels = {}
    for cid in candidates:
        lab = labeler.label(question, store.get(cid))
        if lab not in EVIDENCE_LABELS:
            raise ProviderError(f"labeler returned {lab!r} for {cid}")
        labels[cid] = lab
    provenance = {
        "step1_anchor": anchor_id,
        "step2_candidates": step2,
        "step3_question": question,
        "step4_candidates": step4,
        "step5_labels": [[cid, labels[cid]] for cid in candidates],
    }
    return BenchmarkItem(question, anchor_id, labels, provenance)


def build_benchmark(store, n_items: int, retriever, qgen, labeler, seed: int, *, k_dense: int = 15,
                    max_attempts: int = 3, corpus_digest: str | None = None) -> Benchmark:
    """Build up to ``n_items`` items; each item index owns its own anchors, so order doesn't matter.

    Items with fewer than two DIRECT chunks, or whose providers fail, are
    retried with the next anchor; after ``max_attempts`` the slot is skipped.
    """
    if len(store) == 0:
        raise InputError("cannot build a benchmark from an empty corpus")
    order = _anchor_order(store, seed)
    items, skipped = [], []
    for idx in range(n_items):
        reasons = []
        for attempt in range(max_attempts):
            anchor_id = order[(idx * max_attempts + attempt) % len(order)]
            try:
                item = _build_item(store, anchor_id, retriever, qgen, labeler, k_dense)
            except ProviderError as exc:
                reasons.append(f"attempt {attempt}: provider error: {exc}")
                continue
            n_direct = len(item.direct_ids())
            if n_direct < MIN_DIRECT:
                reasons.append(f"attempt {attempt}: anchor {anchor_id} gave {n_direct} DIRECT")
                continue
            item.provenance.update(item_index=idx, attempt=attempt)
            items.append(item)
            break
        else:
            skipped.append({"item_index": idx, "reasons": reasons})
    if len(items) < n_items:
        log.warning("benchmark has %d of %d requested items", len(items), n_items)
    config = {"seed": seed, "n_items": n_items, "k_dense": k_dense, "max_attempts": max_attempts}
    return Benchmark(corpus_digest or store.digest(), items, skipped, config)


def benchmark_stats(bench: Benchmark) -> dict:
    if not bench.items:
        raise ValueError("benchmark has no items")
    sizes = [len(it.direct_ids()) for it in bench.items]
    return {"n_items": len(sizes), "mean_direct": statistics.fmean(sizes),
            "min_direct": min(sizes), "max_direct": max(sizes)}


@dataclass(frozen=True)
class AuditReport:
    n_audited: int
    counts: dict

    def fractions(self) -> dict:
        if not self.n_audited:
            return {}
        return {k: v / self.n_audited for k, v in self.counts.items()}

    def to_json(self) -> dict:
        return {"n_audited": self.n_audited, "counts": self.counts, "fractions": self.fractions()}


def audit_gold(bench: Benchmark, rankings, auditor, depth: int, store) -> AuditReport:
    """Re-label top-``depth`` retrieved chunks that were not gold DIRECT.

    ``counts['DIRECT']`` is the number newly found answer-bearing.
    """
    counts = {lab: 0 for lab in EVIDENCE_LABELS}
    n = 0
    if depth <= 0:
        return AuditReport(0, counts)
    if len(rankings) != len(bench.items):
        raise ValueError("need one ranking per benchmark item")
    for item, ranked in zip(bench.items, rankings):
        direct = item.direct_ids()
        for cid in list(ranked.ids())[:depth]:
            if cid in direct:
                continue
            counts[auditor.label(item.question, store.get(cid))] += 1
            n += 1
    return AuditReport(n, counts)
