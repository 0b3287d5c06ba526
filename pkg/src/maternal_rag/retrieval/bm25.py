"""Okapi BM25 over an in-memory inverted index."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ..errors import InputError
from ..text import tokenize
from .scored import ScoredList


@dataclass(frozen=True)
class SparseIndex:
    doc_ids: tuple[str, ...]
    doc_lens: tuple[int, ...]
    # term -> ((doc position, term frequency), ...) sorted by position
    postings: dict
    k1: float = 1.2
    b: float = 0.75

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def avgdl(self) -> float:
        return sum(self.doc_lens) / self.n_docs

    def vocabulary(self) -> set[str]:
        return set(self.postings)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        # +1 inside the log keeps idf positive even for terms in most documents
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    def scores(self, query: str) -> dict[str, float]:
        avgdl = self.avgdl
        acc: dict[int, float] = {}
        for term, qtf in Counter(tokenize(query)).items():
            plist = self.postings.get(term)
            if not plist:
                continue
            idf = self.idf(term)
            for pos, tf in plist:
                norm = self.k1 * (1.0 - self.b + self.b * self.doc_lens[pos] / avgdl)
                acc[pos] = acc.get(pos, 0.0) + qtf * idf * tf * (self.k1 + 1.0) / (tf + norm)
        return {self.doc_ids[p]: s for p, s in acc.items()}


def build_bm25_index(store, k1: float = 1.2, b: float = 0.75) -> SparseIndex:
    if len(store) == 0:
        raise InputError("cannot build a BM25 index over an empty corpus")
    if k1 <= 0 or not 0 <= b <= 1:
        raise ValueError("bm25 parameters out of range")
    doc_ids, doc_lens = [], []
    postings: dict[str, list] = {}
    for pos, chunk in enumerate(store):
        tokens = tokenize(chunk.text)
        doc_ids.append(chunk.id)
        doc_lens.append(len(tokens))
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((pos, tf))
    frozen = {t: tuple(p) for t, p in sorted(postings.items())}
    return SparseIndex(tuple(doc_ids), tuple(doc_lens), frozen, k1, b)


def bm25_retrieve(index: SparseIndex, query: str, k: int | None = None, allowed=None) -> ScoredList:
    """Top-k documents with a positive BM25 score; ``k=None`` keeps all of them."""
    scored = [(cid, s) for cid, s in index.scores(query).items()
              if s > 0 and (allowed is None or cid in allowed)]
    out = ScoredList.ranked(scored)
    return out if k is None else out.top(k)
