"""Provider interfaces for every model call, plus deterministic test doubles.

Real models (sentence encoders, cross-encoders, chat LLMs, MT) plug in by
implementing the matching protocol; nothing else in the package imports a
model library.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ProviderError, TranslationError
from .text import tokenize

# function words ignored by the lexical doubles; they carry no symptom content
STOPWORDS = frozenset(
    """a an and are as at be been but by can could do does for from had has have
    he her his how i if in is it its me my of on or our she should so that the
    their them then there they this to was we were what when where which while who
    will with would you your am been being any some no not never without denies""".split()
)

# too vague to anchor a synthetic question
GENERIC_WORDS = frozenset(
    """about above after again also before both each every first good include keep less like
    more most need needs next only other over same seek should side signs some such than
    these they those through under until very well with within""".split()
)


@runtime_checkable
class EmbeddingProvider(Protocol):
    name: str
    dimension: int
    deterministic: bool

    def embed(self, text: str) -> np.ndarray: ...


@runtime_checkable
class TranslatorProvider(Protocol):
    deterministic: bool

    def translate(self, text: str, target: str = "en") -> str: ...


@runtime_checkable
class RerankScorer(Protocol):
    deterministic: bool

    def score(self, query_en: str, chunk_text: str) -> float: ...


@runtime_checkable
class GeneratorProvider(Protocol):
    deterministic: bool

    def generate(self, prompt_parts: Mapping[str, object]) -> str: ...


@runtime_checkable
class QuestionGenProvider(Protocol):
    deterministic: bool

    def generate_question(self, chunks: Sequence) -> str: ...


@runtime_checkable
class LabelerProvider(Protocol):
    deterministic: bool

    def label(self, question: str, chunk) -> str: ...


def normalize_vector(vec) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ProviderError("cannot normalize a zero vector")
    return arr / norm


def content_tokens(text: str, stopwords=STOPWORDS) -> list[str]:
    return [t for t in tokenize(text) if t not in stopwords]


class HashEmbedder:
    """Signed token-hash bag of words, L2-normalized.

    Keeps lexical-overlap geometry: two texts sharing most content words
    get a high cosine, disjoint texts land near zero (up to bucket collisions).
    """

    deterministic = True

    def __init__(self, dimension: int = 64, stopwords=STOPWORDS):
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension
        self.stopwords = frozenset(stopwords)
        self.name = f"hash-{dimension}"

    def _slot(self, token: str) -> tuple[int, float]:
        h = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(h, "big")
        return value % self.dimension, (1.0 if (value >> 40) & 1 else -1.0)

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        tokens = content_tokens(text, self.stopwords) or [""]
        for tok, n in Counter(tokens).items():
            slot, sign = self._slot(tok)
            vec[slot] += sign * n
        if not vec.any():
            # every token cancelled out in shared buckets
            slot, _ = self._slot(tokens[0])
            vec[slot] = 1.0
        return normalize_vector(vec)


class TableEmbedder:
    """Looks up fixed vectors by exact text; optional fallback embedder for misses."""

    deterministic = True

    def __init__(self, vectors: Mapping[str, Sequence[float]], fallback: EmbeddingProvider | None = None,
                 name: str = "table"):
        if not vectors:
            raise ValueError("empty vector table")
        self._vectors = {k: normalize_vector(v) for k, v in vectors.items()}
        dims = {v.shape[0] for v in self._vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions {sorted(dims)}")
        self.dimension = dims.pop()
        if fallback is not None and fallback.dimension != self.dimension:
            raise ValueError("fallback embedder dimension mismatch")
        self.fallback = fallback
        self.name = name

    @classmethod
    def from_json(cls, path: str | Path, **kwargs) -> "TableEmbedder":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data["vectors"] if "vectors" in data else data, **kwargs)

    def embed(self, text: str) -> np.ndarray:
        try:
            return self._vectors[text]
        except KeyError:
            if self.fallback is None:
                raise ProviderError(f"no vector for text {text[:40]!r}") from None
            return self.fallback.embed(text)


class LookupTranslator:
    """Translation double backed by a {source: english} table."""

    deterministic = True

    def __init__(self, table: Mapping[str, str] | None = None, strict: bool = True):
        self.table = dict(table or {})
        self.strict = strict

    @classmethod
    def from_json(cls, path: str | Path, strict: bool = True) -> "LookupTranslator":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")), strict=strict)

    def translate(self, text: str, target: str = "en") -> str:
        if target != "en":
            raise TranslationError(f"unsupported target language {target!r}", text)
        if text in self.table:
            return self.table[text]
        if self.strict:
            raise TranslationError("no translation available", text)
        return text


class OverlapScorer:
    """Rerank double: share of the query's content words present in the chunk."""

    deterministic = True

    def score(self, query_en: str, chunk_text: str) -> float:
        q = set(content_tokens(query_en))
        if not q:
            return 0.0
        return len(q & set(content_tokens(chunk_text))) / len(q)


class ConstantScorer:
    deterministic = True

    def __init__(self, value: float = 0.0):
        self.value = value

    def score(self, query_en: str, chunk_text: str) -> float:
        return self.value


class FunctionScorer:
    deterministic = True

    def __init__(self, fn: Callable[[str, str], float]):
        self.fn = fn

    def score(self, query_en: str, chunk_text: str) -> float:
        return float(self.fn(query_en, chunk_text))


def _first_sentence(text: str) -> str:
    for end in (". ", "। ", "? ", "! "):
        pos = text.find(end)
        if pos != -1:
            return text[: pos + 1]
    return text.strip()


class EchoGenerator:
    """Label-first generator double that answers from the first two context chunks."""

    deterministic = True

    def __init__(self, label: str = "PASS", n_cite: int = 2):
        self.label = label
        self.n_cite = n_cite

    def generate(self, prompt_parts):
        chunks = list(prompt_parts.get("context") or [])[: self.n_cite]
        if not chunks:
            body = "I don't have enough information to answer that accurately."
        else:
            body = " ".join(f"{_first_sentence(c['text'])} [{c['id']}]" for c in chunks)
        return f"{self.label}\n{body}"


class ScriptedGenerator:
    """Returns the first scripted response whose trigger occurs in the question."""

    deterministic = True

    def __init__(self, script: Sequence[tuple[str, str]] = (), default: str = "PASS\nNo scripted answer."):
        self.script = list(script)
        self.default = default

    def generate(self, prompt_parts):
        question = str(prompt_parts.get("question", ""))
        for trigger, response in self.script:
            if trigger in question:
                return response
        return self.default


class KeywordQuestionGenerator:
    """Question double: asks about the content words the anchor shares with its neighbours."""

    deterministic = True

    def __init__(self, n_terms: int = 2, stem: int = 5):
        self.n_terms = n_terms
        self.stem = stem

    def generate_question(self, chunks):
        if not chunks:
            raise ProviderError("no chunks to generate a question from")
        anchor, *others = chunks
        first_pos = {}
        for i, t in enumerate(content_tokens(anchor.text)):
            if len(t) > 3 and t not in GENERIC_WORDS:
                first_pos.setdefault(t[: self.stem], (i, t))
        if not first_pos:
            first_pos = {t[: self.stem]: (i, t) for i, t in enumerate(content_tokens(anchor.text))}
        if not first_pos:
            raise ProviderError("anchor has no usable terms")
        neighbour_stems = [{t[: self.stem] for t in content_tokens(o.text)} for o in others]
        # pick the term set most neighbours share in full, skipping ones that nearly all share
        cap = max(1, len(others) // 2)
        stems = list(first_pos)
        best, best_key = stems[: self.n_terms], None
        for combo in combinations(stems, min(self.n_terms, len(stems))):
            support = sum(1 for ns in neighbour_stems if ns.issuperset(combo))
            if support > cap:
                continue
            key = (-support, [first_pos[s][0] for s in combo])
            if best_key is None or key < best_key:
                best, best_key = list(combo), key
        return "what should i know about " + " and ".join(first_pos[s][1] for s in best) + "?"


class OverlapLabeler:
    """Labels DIRECT when a chunk holds every key term of the question, RELATED for some.

    Terms are compared on their first ``stem`` characters so plurals match.
    """

    deterministic = True

    def __init__(self, skip=("know", "should", "about"), stem: int = 5):
        self.skip = frozenset(skip)
        self.stem = stem

    def label(self, question, chunk):
        terms = {t[: self.stem] for t in content_tokens(question) if t not in self.skip}
        text_terms = {t[: self.stem] for t in content_tokens(chunk.text)}
        hit = len(terms & text_terms)
        if terms and hit == len(terms):
            return "DIRECT"
        if hit:
            return "RELATED"
        return "IRRELEVANT"


class Serialized:
    """Wraps a provider that is not safe for concurrent calls behind a lock."""

    def __init__(self, inner):
        self._inner = inner
        self._lock = threading.Lock()

    def __getattr__(self, name):
        attr = getattr(self._inner, name)
        if not callable(attr):
            return attr

        def locked(*args, **kwargs):
            with self._lock:
                return attr(*args, **kwargs)

        return locked
