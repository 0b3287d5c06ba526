from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple


class Scored(NamedTuple):
    chunk_id: str
    score: float


def canonical_key(entry: Scored):
    return (-entry.score, entry.chunk_id)


@dataclass(frozen=True)
class ScoredList:
    """Ordered (chunk_id, score) pairs without duplicate ids.

    ``ranked`` builds the canonical order: score descending, ties by id.
    Reranked lists keep the previous order on ties instead (see ``rerank``).
    """

    entries: tuple[Scored, ...] = ()

    def __post_init__(self):
        entries = tuple(Scored(str(cid), float(s)) for cid, s in self.entries)
        ids = [e.chunk_id for e in entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate chunk ids in ScoredList")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def ranked(cls, pairs: Iterable[tuple[str, float]]) -> "ScoredList":
        return cls(tuple(sorted((Scored(c, float(s)) for c, s in pairs), key=canonical_key)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Scored]:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def ids(self) -> list[str]:
        return [e.chunk_id for e in self.entries]

    def top(self, k: int) -> "ScoredList":
        return ScoredList(self.entries[: max(k, 0)])

    def to_json(self) -> list:
        return [[e.chunk_id, e.score] for e in self.entries]


def is_canonical(entries) -> bool:
    """Shared validator: descending score, ties broken by ascending chunk id, no duplicates."""
    entries = list(entries)
    ids = [e[0] for e in entries]
    if len(set(ids)) != len(ids):
        return False
    return all(canonical_key(Scored(*a)) <= canonical_key(Scored(*b)) for a, b in zip(entries, entries[1:]))


def is_descending(entries) -> bool:
    entries = list(entries)
    return all(a[1] >= b[1] for a, b in zip(entries, entries[1:]))
