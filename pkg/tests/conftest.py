from __future__ import annotations

import pytest

from maternal_rag.config import RunConfig, data_path
from maternal_rag.corpus import load_corpus
from maternal_rag.factory import build_engine, build_matcher
from maternal_rag.stage import load_pattern_pack
from maternal_rag.triage import load_rule_pack


@pytest.fixture(scope="session")
def cfg() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def store():
    return load_corpus(data_path("demo_corpus.jsonl"))


@pytest.fixture(scope="session")
def patterns():
    return load_pattern_pack(data_path("patterns.jsonl"))


@pytest.fixture(scope="session")
def rules():
    return load_rule_pack(data_path("rules.jsonl"))


@pytest.fixture(scope="session")
def matcher(cfg):
    return build_matcher(cfg)


@pytest.fixture(scope="session")
def engine(cfg):
    return build_engine(cfg, in_memory=True)


def write_jsonl(path, records) -> str:
    import json

    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records), encoding="utf-8")
    return str(path)
