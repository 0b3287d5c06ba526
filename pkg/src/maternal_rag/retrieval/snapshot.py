"""JSON snapshots of built indexes, versioned and checked on load."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..text import dumps
from .bm25 import SparseIndex
from .dense import DenseIndex

FORMAT_VERSION = 1


def sparse_to_json(index: SparseIndex, corpus_digest: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "bm25",
        "corpus_digest": corpus_digest,
        "config": {"bm25_k1": index.k1, "bm25_b": index.b},
        "doc_ids": list(index.doc_ids),
        "doc_lens": list(index.doc_lens),
        "postings": {t: [list(p) for p in plist] for t, plist in index.postings.items()},
    }


def dense_to_json(index: DenseIndex, corpus_digest: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "dense",
        "corpus_digest": corpus_digest,
        "config": {"provider": index.provider_name, "dimension": index.dimension},
        "doc_ids": list(index.doc_ids),
        "vectors": index.matrix.tolist(),
    }


def write_snapshot(data: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(data), encoding="utf-8")


def _read(path, kind):
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"unreadable index snapshot: {exc}", path=path) from exc
    if data.get("format_version") != FORMAT_VERSION:
        raise InputError(f"unsupported snapshot version {data.get('format_version')!r}", path=path)
    if data.get("kind") != kind:
        raise InputError(f"expected a {kind} snapshot, got {data.get('kind')!r}", path=path)
    return data


def load_sparse(path, *, k1: float, b: float, corpus_digest: str | None = None) -> SparseIndex:
    data = _read(path, "bm25")
    if data["config"] != {"bm25_k1": k1, "bm25_b": b}:
        raise InputError(f"snapshot built with {data['config']}, config asks k1={k1} b={b}", path=path)
    if corpus_digest is not None and data["corpus_digest"] != corpus_digest:
        raise InputError("snapshot was built from a different corpus", path=path)
    postings = {t: tuple((p, tf) for p, tf in plist) for t, plist in data["postings"].items()}
    return SparseIndex(tuple(data["doc_ids"]), tuple(data["doc_lens"]), postings, k1, b)


def load_dense(path, *, provider, corpus_digest: str | None = None) -> DenseIndex:
    data = _read(path, "dense")
    want = {"provider": provider.name, "dimension": provider.dimension}
    if data["config"] != want:
        raise InputError(f"snapshot built with {data['config']}, provider is {want}", path=path)
    if corpus_digest is not None and data["corpus_digest"] != corpus_digest:
        raise InputError("snapshot was built from a different corpus", path=path)
    matrix = np.asarray(data["vectors"], dtype=np.float64)
    matrix.setflags(write=False)
    return DenseIndex(tuple(data["doc_ids"]), matrix, data["config"]["provider"])
