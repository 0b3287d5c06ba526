"""Guideline chunk store loaded from a JSONL corpus file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import InputError
from .text import iter_jsonl, sha256_hex

LANGUAGES = frozenset({"en", "hi", "as", "und"})


@dataclass(frozen=True)
class Chunk:
    id: str
    text: str
    source_doc: str = ""
    language: str = "en"
    section_title: str | None = None
    # optional life-stage tags, only consulted when stage filtering is enabled
    stages: tuple[str, ...] = ()

    def to_record(self) -> dict:
        rec = asdict(self)
        if not self.stages:
            del rec["stages"]
        else:
            rec["stages"] = list(self.stages)
        return rec


@dataclass(frozen=True)
class ChunkStore:
    chunks: tuple[Chunk, ...] = ()
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for pos, chunk in enumerate(self.chunks):
            if chunk.id in index:
                raise ValueError(f"duplicate chunk id {chunk.id!r}")
            index[chunk.id] = pos
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.chunks)

    def __iter__(self) -> Iterator[Chunk]:
        return iter(self.chunks)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._index

    def get(self, chunk_id: str) -> Chunk | None:
        pos = self._index.get(chunk_id)
        return None if pos is None else self.chunks[pos]

    def ids(self) -> list[str]:
        return [c.id for c in self.chunks]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(c.to_record(), ensure_ascii=False) + "\n" for c in self.chunks)

    def digest(self) -> str:
        return sha256_hex(self.to_jsonl())


def _chunk_from_record(rec: dict, lineno: int, path, languages) -> Chunk:
    cid = rec.get("id")
    if not isinstance(cid, str) or not cid:
        raise InputError("missing or empty 'id'", path=path, line=lineno)
    text = rec.get("text")
    if not isinstance(text, str) or not text.strip():
        raise InputError(f"chunk {cid!r} has empty text", path=path, line=lineno)
    lang = rec.get("language", "en")
    if lang not in languages:
        raise InputError(f"chunk {cid!r} has unknown language tag {lang!r}", path=path, line=lineno)
    stages = rec.get("stages") or ()
    return Chunk(
        id=cid,
        text=text,
        source_doc=str(rec.get("source_doc", "")),
        language=lang,
        section_title=rec.get("section_title"),
        stages=tuple(stages),
    )


def load_corpus(path: str | Path, languages=LANGUAGES) -> ChunkStore:
    """Load and validate a JSONL corpus.

    Duplicate ids are a hard error: benchmark labels refer to chunks by id.
    """
    chunks = []
    seen: dict[str, int] = {}
    for lineno, rec in iter_jsonl(path):
        chunk = _chunk_from_record(rec, lineno, path, languages)
        if chunk.id in seen:
            raise InputError(
                f"duplicate chunk id {chunk.id!r} (first seen on line {seen[chunk.id]})",
                path=path,
                line=lineno,
            )
        seen[chunk.id] = lineno
        chunks.append(chunk)
    return ChunkStore(tuple(chunks))


def get_chunk(store: ChunkStore, chunk_id: str) -> Chunk | None:
    return store.get(chunk_id)


def save_corpus(store: ChunkStore, path: str | Path) -> None:
    Path(path).write_text(store.to_jsonl(), encoding="utf-8")
