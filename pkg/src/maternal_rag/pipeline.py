"""End-to-end inference: triage before retrieval, templates short-circuit, label-first generation."""

from __future__ import annotations

import concurrent.futures
import json
import logging
import re
import time
import unicodedata
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from . import LABELS
from .errors import InputError, ProviderError, TranslationError
from .lang import detect_language, english_view
from .retrieval import Indexes, RetrievalConfig, retrieve_and_rerank
from .stage import PlatformMetadata, extract_concerns, extract_stage
from .text import digest, iter_jsonl
from .triage import PASS, SAME_DAY, EMERGENCY_NOW, pre_gen_triage

log = logging.getLogger(__name__)

TEMPLATE_IDS = ("NOW-MH", "NOW-DV", "NOW-MED", "SAME-DAY")
_WS = re.compile(r"\s+")


class PipelineError(ProviderError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


def normalize(raw: str) -> str:
    """Strip control characters, collapse whitespace runs, trim."""
    kept = []
    for ch in raw:
        cat = unicodedata.category(ch)
        if cat == "Cc" and not ch.isspace():
            continue
        if cat == "Cf" and ch not in "‌‍":  # keep ZWNJ/ZWJ, they shape Indic text
            continue
        kept.append(ch)
    out = _WS.sub(" ", "".join(kept)).strip()
    if not out:
        raise InputError("empty query")
    return out


@dataclass(frozen=True)
class QueryEnvelope:
    raw: str
    normalized: str
    lang: str
    english: str
    meta: PlatformMetadata
    stage: str
    concerns: frozenset
    english_available: bool = True

    def __post_init__(self):
        if not self.normalized:
            raise ValueError("normalized query is empty")
        if self.lang == "en" and self.english != self.normalized:
            raise ValueError("english view must equal the query for English input")

    @property
    def query_en(self) -> str | None:
        return self.english if self.english_available else None


@dataclass
class Trace:
    steps: list = field(default_factory=list)

    @contextmanager
    def step(self, name: str, inputs=None, **detail):
        entry = {"step": name, "inputs_digest": digest(inputs), **detail}
        start = time.perf_counter()
        out = {}
        try:
            yield out
        finally:
            entry["outputs_digest"] = digest(out.get("value"))
            entry.update({k: v for k, v in out.items() if k != "value"})
            entry["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
            self.steps.append(entry)

    def names(self) -> list[str]:
        return [s["step"] for s in self.steps]

    def get(self, name: str) -> dict | None:
        for s in self.steps:
            if s["step"] == name:
                return s
        return None

    def to_json(self, timing: bool = True) -> list[dict]:
        if timing:
            return [dict(s) for s in self.steps]
        return [{k: v for k, v in s.items() if k != "elapsed_ms"} for s in self.steps]

    def ref(self) -> str:
        return digest(self.to_json(timing=False))


@dataclass
class FinalResponse:
    text: str
    kind: str
    sources: tuple = ()
    label: str = PASS
    trace: Trace = field(default_factory=Trace)
    flags: tuple = ()

    def __post_init__(self):
        if self.kind not in ("template", "informational"):
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.kind == "template" and self.sources:
            raise ValueError("template responses carry no sources")

    def envelope(self) -> dict:
        return {"text": self.text, "kind": self.kind, "sources": list(self.sources),
                "label": self.label, "flags": list(self.flags), "trace_ref": self.trace.ref()}


@dataclass(frozen=True)
class GeneratedAnswer:
    label: str
    body: str
    cited_chunk_ids: tuple = ()
    malformed: bool = False


@dataclass(frozen=True)
class TemplatePack:
    texts: dict

    @classmethod
    def load(cls, path: str | Path) -> "TemplatePack":
        texts = {}
        for lineno, rec in iter_jsonl(path):
            tid, lang, text = rec.get("template"), rec.get("lang"), rec.get("text")
            if tid not in TEMPLATE_IDS:
                raise InputError(f"unknown template id {tid!r}", path=path, line=lineno)
            if not lang or not isinstance(text, str) or not text.strip():
                raise InputError("template records need lang and non-empty text", path=path, line=lineno)
            texts[(tid, lang)] = text
        missing = [t for t in TEMPLATE_IDS if (t, "en") not in texts]
        if missing:
            raise InputError(f"English text missing for templates {missing}", path=path)
        return cls(texts)

    def lookup(self, template: str, lang: str) -> tuple[str, bool]:
        """Template text for ``lang``; falls back to English (second value True)."""
        if template not in TEMPLATE_IDS:
            raise KeyError(f"unknown template {template!r}")
        if (template, lang) in self.texts:
            return self.texts[(template, lang)], False
        return self.texts[(template, "en")], lang != "en"


def render_template(template: str, envelope: QueryEnvelope, pack: TemplatePack, trace: Trace | None = None
                    ) -> FinalResponse:
    if template == PASS:
        raise ValueError("PASS has no template")
    text, fell_back = pack.lookup(template, envelope.lang)
    flags = ("lang_fallback",) if fell_back else ()
    trace = trace if trace is not None else Trace()
    with trace.step("render_template", [template, envelope.lang], template=template, lang=envelope.lang,
                    flags=list(flags)) as out:
        out["value"] = text
    return FinalResponse(text, "template", (), template, trace, flags)


def parse_leading_label(raw: str) -> GeneratedAnswer:
    first, _, rest = raw.partition("\n")
    label = first.strip()
    if label in LABELS:
        return GeneratedAnswer(label, rest.strip())
    return GeneratedAnswer(PASS, raw.strip(), malformed=True)


_CITE = re.compile(r"\[([^\[\]\s]+)\]")


def cited_ids(body: str, evidence_ids) -> tuple:
    allowed = set(evidence_ids)
    seen = []
    for cid in _CITE.findall(body):
        if cid in allowed and cid not in seen:
            seen.append(cid)
    return tuple(seen)


@dataclass(frozen=True)
class PromptSpec:
    system: str
    skeleton: str
    chunk_format: str = "[{id}] {text}"

    @classmethod
    def load(cls, path: str | Path) -> "PromptSpec":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data["system"], data["skeleton"], data.get("chunk_format", "[{id}] {text}"))

    def parts(self, question: str, chunks, temperature: float) -> dict:
        context = [{"id": c.id, "text": c.text} for c in chunks]
        body = self.skeleton.format(
            context="\n\n".join(self.chunk_format.format(**c) for c in context), question=question)
        return {"system": self.system, "context": context, "question": question,
                "prompt": self.system + "\n\n" + body, "temperature": temperature}


def call_with_retries(fn, *args, max_retries: int = 3, timeout: float = 60.0):
    """Call ``fn`` with a per-attempt timeout, retrying up to ``max_retries`` times."""
    last = None
    for attempt in range(max_retries + 1):
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=1)
        try:
            return pool.submit(fn, *args).result(timeout=timeout)
        except concurrent.futures.TimeoutError:
            last = ProviderError(f"provider timed out after {timeout}s")
        except Exception as exc:
            last = exc
        finally:
            pool.shutdown(wait=False, cancel_futures=True)
        log.warning("provider call failed (attempt %d/%d): %s", attempt + 1, max_retries + 1, last)
    raise ProviderError(f"provider failed after {max_retries + 1} attempts: {last}") from last


@dataclass
class Engine:
    """Everything a request needs; immutable in practice and shared across requests."""

    patterns: object
    rules: tuple
    matcher: object
    templates: TemplatePack
    prompt: PromptSpec
    indexes: Indexes
    retrieval: RetrievalConfig
    embedder: object
    reranker: object = None
    generator: object = None
    translator: object = None
    temperature: float = 0.1
    max_retries: int = 3
    timeout: float = 60.0
    same_day_addendum: bool = False


def build_envelope(raw: str, meta: PlatformMetadata | None, engine: Engine, trace: Trace,
                   stage_override: str | None = None) -> QueryEnvelope:
    meta = meta or PlatformMetadata()
    with trace.step("normalize", raw) as out:
        q = normalize(raw)
        out["value"] = q
    with trace.step("language", q) as out:
        lang = detect_language(q)
        available, english = True, q
        if lang != "en":
            try:
                if engine.translator is None:
                    raise TranslationError("no translator configured", q)
                english = english_view(q, lang, engine.translator)
            except TranslationError as exc:
                log.warning("translation unavailable, using original-language processing: %s", exc)
                available, english = False, q
        out.update(value=[lang, english], lang=lang, english_available=available)
    with trace.step("stage", [q, meta.to_dict()]) as out:
        stage = stage_override or extract_stage(q, meta, engine.patterns)
        out.update(value=stage, stage=stage, override=stage_override is not None)
    with trace.step("concerns", q) as out:
        concerns = extract_concerns(q, stage, engine.patterns)
        out.update(value=sorted(concerns), concerns=sorted(concerns))
    return QueryEnvelope(raw, q, lang, english, meta, stage, concerns, available)


def triage_envelope(env: QueryEnvelope, engine: Engine, trace: Trace):
    with trace.step("triage", [env.normalized, env.english, env.stage]) as out:
        outcome = pre_gen_triage(env.normalized, env.query_en, env.stage, env.concerns,
                                 rules=engine.rules, matcher=engine.matcher)
        out.update(value=[outcome.level, outcome.template], level=outcome.level, template=outcome.template,
                   provenance=outcome.provenance, degraded=outcome.degraded)
    return outcome


def _retrieve(env: QueryEnvelope, engine: Engine, trace: Trace):
    with trace.step("retrieval", [env.normalized, env.stage]) as out:
        result = retrieve_and_rerank(env.normalized, env.query_en, env.stage, env.concerns, engine.retrieval,
                                     engine.indexes, engine.embedder, engine.reranker)
        out.update(value=result.evidence.to_json(), substeps=result.steps, flags=result.flags)
    return result


def run_pipeline(raw_query: str, meta: PlatformMetadata | None, engine: Engine,
                 stage_override: str | None = None) -> FinalResponse:
    trace = Trace()
    env = build_envelope(raw_query, meta, engine, trace, stage_override)
    outcome = triage_envelope(env, engine, trace)

    if outcome.level in (EMERGENCY_NOW, SAME_DAY):
        resp = render_template(outcome.template, env, engine.templates, trace)
        if outcome.level == SAME_DAY and engine.same_day_addendum:
            result = _retrieve(env, engine, trace)
            if len(result.evidence):
                top = engine.indexes.store.get(result.evidence[0].chunk_id)
                resp.text += "\n\n" + top.text.split(". ")[0].rstrip(".") + "."
                resp.flags += ("same_day_addendum",)
        return resp

    result = _retrieve(env, engine, trace)
    chunks = [engine.indexes.store.get(cid) for cid in result.evidence.ids()]
    parts = engine.prompt.parts(env.normalized, chunks, engine.temperature)
    with trace.step("generate", parts["prompt"]) as out:
        try:
            raw = call_with_retries(engine.generator.generate, parts,
                                    max_retries=engine.max_retries, timeout=engine.timeout)
        except ProviderError as exc:
            out.update(value=None, error=str(exc))
            raise PipelineError(f"generation failed: {exc}", trace) from exc
        out["value"] = raw
    answer = parse_leading_label(raw)
    answer = GeneratedAnswer(answer.label, answer.body, cited_ids(answer.body, result.evidence.ids()),
                             answer.malformed)
    with trace.step("post_check", raw, label=answer.label, malformed=answer.malformed) as out:
        out["value"] = answer.label
    if answer.malformed:
        log.warning("generation did not start with a routing label; treating as PASS")

    if answer.label != PASS:
        return render_template(answer.label, env, engine.templates, trace)
    flags = ("malformed_label",) if answer.malformed else ()
    flags += tuple(result.flags)
    return FinalResponse(answer.body, "informational", tuple(result.evidence.ids()), PASS, trace, flags)
