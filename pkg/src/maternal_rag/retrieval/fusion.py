from __future__ import annotations

from typing import Iterable, Sequence

from .scored import Scored, ScoredList

K_RRF = 60


def rrf_fuse(lists: Sequence[ScoredList], k_rrf: int = K_RRF) -> ScoredList:
    """Reciprocal Rank Fusion with 1-based ranks: sum of 1/(rank + k_rrf) per list."""
    if not lists:
        raise ValueError("rrf_fuse needs at least one list")
    fused: dict[str, float] = {}
    for lst in lists:
        for rank, entry in enumerate(lst, start=1):
            fused[entry[0]] = fused.get(entry[0], 0.0) + 1.0 / (rank + k_rrf)
    return ScoredList.ranked(fused.items())


def deduplicate(entries: Iterable) -> ScoredList:
    """Keep the first occurrence of each chunk id, preserving order."""
    seen, out = set(), []
    for cid, score in entries:
        if cid not in seen:
            seen.add(cid)
            out.append(Scored(cid, score))
    return ScoredList(tuple(out))
