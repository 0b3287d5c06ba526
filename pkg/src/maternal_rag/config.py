"""Run configuration: file paths, retrieval depths, thresholds, provider choices."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import InputError


def data_path(name: str) -> str:
    return str(resources.files("maternal_rag") / "data" / name)


@dataclass
class RunConfig:
    corpus: str = data_path("demo_corpus.jsonl")
    patterns: str = data_path("patterns.jsonl")
    rules: str = data_path("rules.jsonl")
    symptom_bank: str = data_path("symptom_bank.jsonl")
    templates: str = data_path("templates.jsonl")
    prompt: str = data_path("prompt.json")
    translations: str = data_path("translations.json")
    index_dir: str = "indexes"
    # retrieval
    k_dense: int = 15
    k_rrf: int = 60
    k_rerank: int = 7
    top_k: int = 7
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    stage_filter: bool = False
    # triage
    tau_now: float = 0.50
    tau_sd: float = 0.30
    # generation
    temperature: float = 0.1
    max_retries: int = 3
    timeout: float = 60.0
    same_day_addendum: bool = False
    # providers: only deterministic doubles ship with the package
    embedder: str = "hash"
    embed_dim: int = 64
    triage_encoder: str = "hash"
    triage_embed_dim: int = 4096
    reranker: str = "overlap"
    generator: str = "echo"
    translator: str = "lookup"
    seed: int = 42

    HELP = {
        "corpus": "guideline chunk corpus (JSONL)",
        "patterns": "stage pattern / concern keyword pack (JSONL)",
        "rules": "triage trigger rule pack (JSONL)",
        "symptom_bank": "canonical emergency descriptions (JSONL)",
        "templates": "escalation template pack (JSONL)",
        "prompt": "generation prompt skeleton (JSON)",
        "translations": "lookup table for the translation double (JSON)",
        "index_dir": "directory for index snapshots and manifest",
        "k_dense": "dense retrieval depth",
        "k_rrf": "RRF rank constant",
        "k_rerank": "rerank depth",
        "top_k": "evidence chunks passed to the generator",
        "bm25_k1": "BM25 term-frequency saturation",
        "bm25_b": "BM25 length normalization",
        "stage_filter": "restrict retrieval to chunks tagged with the query stage",
        "tau_now": "semantic similarity threshold for EMERGENCY_NOW",
        "tau_sd": "semantic similarity threshold for SAME_DAY",
        "temperature": "generator sampling temperature",
        "max_retries": "generator retries after a failed call",
        "timeout": "generator timeout per call, seconds",
        "same_day_addendum": "append an evidence sentence to SAME-DAY templates",
        "embedder": "dense embedding provider (hash)",
        "embed_dim": "dimension of the hash embedder",
        "triage_encoder": "semantic backstop encoder (hash)",
        "triage_embed_dim": "dimension of the triage hash encoder",
        "reranker": "rerank scorer (overlap | none)",
        "generator": "answer generator (echo)",
        "translator": "translation provider (lookup | none)",
        "seed": "random seed",
    }

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls()
        for f in fields(cls):
            if f.name in data:
                value = data[f.name]
                default = getattr(cfg, f.name)
                if isinstance(default, bool) and not isinstance(value, bool):
                    raise InputError(f"config field {f.name!r} must be a boolean")
                if isinstance(default, (int, float)) and not isinstance(default, bool):
                    try:
                        value = type(default)(value)
                    except (TypeError, ValueError) as exc:
                        raise InputError(f"config field {f.name!r}: {exc}") from exc
                setattr(cfg, f.name, value)
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}", path=path) from exc
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object", path=path)
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def retrieval(self):
        from .retrieval import RetrievalConfig

        return RetrievalConfig(self.k_dense, self.k_rrf, self.k_rerank, self.top_k,
                               self.bm25_k1, self.bm25_b, self.stage_filter)
