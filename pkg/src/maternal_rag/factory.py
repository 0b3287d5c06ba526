"""Turn a RunConfig into providers, packs, indexes and a ready Engine."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .config import RunConfig
from .corpus import load_corpus
from .errors import InputError, MissingArtifactError, ProviderError
from .pipeline import Engine, PromptSpec, TemplatePack
from .providers import HashEmbedder, LookupTranslator, OverlapScorer, EchoGenerator
from .retrieval import Indexes, build_bm25_index, build_dense_index
from .retrieval.snapshot import dense_to_json, load_dense, load_sparse, sparse_to_json, write_snapshot
from .stage import load_pattern_pack
from .text import dumps, sha256_hex
from .triage import SemanticMatcher, load_rule_pack, load_symptom_bank

log = logging.getLogger(__name__)

SPARSE_FILE = "bm25.json"
DENSE_FILE = "dense.json"
MANIFEST_FILE = "manifest.json"


def make_embedder(name: str, dimension: int):
    if name == "hash":
        return HashEmbedder(dimension)
    raise ProviderError(f"unknown embedding provider {name!r}")


def make_reranker(name: str):
    if name == "overlap":
        return OverlapScorer()
    if name == "none":
        return None
    raise ProviderError(f"unknown reranker {name!r}")


def make_generator(name: str):
    if name == "echo":
        return EchoGenerator()
    raise ProviderError(f"unknown generator {name!r}")


def make_translator(name: str, table_path: str):
    if name == "lookup":
        return LookupTranslator.from_json(table_path)
    if name == "none":
        return None
    raise ProviderError(f"unknown translator {name!r}")


def index_manifest(cfg: RunConfig, store, embedder) -> dict:
    return {
        "corpus": str(cfg.corpus),
        "corpus_digest": store.digest(),
        "config": {"bm25_k1": cfg.bm25_k1, "bm25_b": cfg.bm25_b,
                   "embedder": embedder.name, "dimension": embedder.dimension},
    }


def _file_digests(index_dir: Path) -> dict:
    return {name: sha256_hex((index_dir / name).read_bytes()) for name in (SPARSE_FILE, DENSE_FILE)}


def build_indexes(cfg: RunConfig, force: bool = False) -> tuple[dict, bool]:
    """Write BM25 and dense snapshots plus a manifest; return (manifest, rebuilt).

    When the stored manifest matches the corpus digest, config and file hashes
    nothing is rewritten.
    """
    store = load_corpus(cfg.corpus)
    embedder = make_embedder(cfg.embedder, cfg.embed_dim)
    index_dir = Path(cfg.index_dir)
    manifest = index_manifest(cfg, store, embedder)
    mpath = index_dir / MANIFEST_FILE
    if not force and mpath.exists():
        try:
            old = json.loads(mpath.read_text(encoding="utf-8"))
            files = _file_digests(index_dir)
        except (OSError, json.JSONDecodeError):
            old, files = None, None
        if old and {k: old.get(k) for k in manifest} == manifest and old.get("files") == files:
            return old, False
    index_dir.mkdir(parents=True, exist_ok=True)
    digest = manifest["corpus_digest"]
    write_snapshot(sparse_to_json(build_bm25_index(store, cfg.bm25_k1, cfg.bm25_b), digest), index_dir / SPARSE_FILE)
    write_snapshot(dense_to_json(build_dense_index(store, embedder), digest), index_dir / DENSE_FILE)
    manifest["files"] = _file_digests(index_dir)
    mpath.write_text(dumps(manifest), encoding="utf-8")
    return manifest, True


def load_indexes(cfg: RunConfig, store, embedder) -> Indexes:
    index_dir = Path(cfg.index_dir)
    for name in (SPARSE_FILE, DENSE_FILE):
        if not (index_dir / name).exists():
            raise MissingArtifactError(f"index snapshot {index_dir / name} not found; run `index` first")
    digest = store.digest()
    try:
        sparse = load_sparse(index_dir / SPARSE_FILE, k1=cfg.bm25_k1, b=cfg.bm25_b, corpus_digest=digest)
        dense = load_dense(index_dir / DENSE_FILE, provider=embedder, corpus_digest=digest)
    except InputError as exc:
        raise MissingArtifactError(f"index snapshot is stale or incompatible ({exc}); rebuild with `index`") from exc
    return Indexes(store, sparse, dense)


def build_matcher(cfg: RunConfig) -> SemanticMatcher:
    if cfg.triage_encoder != "hash":
        raise ProviderError(f"unknown triage encoder {cfg.triage_encoder!r}")
    encoder = HashEmbedder(cfg.triage_embed_dim)
    return SemanticMatcher.from_entries(load_symptom_bank(cfg.symptom_bank), encoder,
                                        tau_now=cfg.tau_now, tau_sd=cfg.tau_sd)


def build_engine(cfg: RunConfig, *, in_memory: bool = False) -> Engine:
    """Assemble an Engine. With ``in_memory`` the indexes are built instead of loaded."""
    store = load_corpus(cfg.corpus)
    embedder = make_embedder(cfg.embedder, cfg.embed_dim)
    if in_memory:
        indexes = Indexes(store, build_bm25_index(store, cfg.bm25_k1, cfg.bm25_b), build_dense_index(store, embedder))
    else:
        indexes = load_indexes(cfg, store, embedder)
    try:
        retrieval = cfg.retrieval()
        matcher = build_matcher(cfg)
    except ValueError as exc:
        raise InputError(f"invalid configuration: {exc}") from exc
    return Engine(
        patterns=load_pattern_pack(cfg.patterns),
        rules=load_rule_pack(cfg.rules),
        matcher=matcher,
        templates=TemplatePack.load(cfg.templates),
        prompt=PromptSpec.load(cfg.prompt),
        indexes=indexes,
        retrieval=retrieval,
        embedder=embedder,
        reranker=make_reranker(cfg.reranker),
        generator=make_generator(cfg.generator),
        translator=make_translator(cfg.translator, cfg.translations),
        temperature=cfg.temperature,
        max_retries=cfg.max_retries,
        timeout=cfg.timeout,
        same_day_addendum=cfg.same_day_addendum,
    )


def build_triage_engine(cfg: RunConfig) -> Engine:
    """Engine with only the pre-generation pieces; retrieval and generation are absent."""
    try:
        matcher = build_matcher(cfg)
    except ValueError as exc:
        raise InputError(f"invalid configuration: {exc}") from exc
    return Engine(
        patterns=load_pattern_pack(cfg.patterns),
        rules=load_rule_pack(cfg.rules),
        matcher=matcher,
        templates=TemplatePack.load(cfg.templates),
        prompt=None,
        indexes=None,
        retrieval=None,
        embedder=None,
        translator=make_translator(cfg.translator, cfg.translations),
    )
