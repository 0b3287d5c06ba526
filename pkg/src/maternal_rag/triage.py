"""Pre-generation safety routing: rules, negation guard, semantic backstop, crisis subtype."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError, ProviderError
from .stage import STAGES, compile_portable
from .text import iter_jsonl

log = logging.getLogger(__name__)

EMERGENCY_NOW = "EMERGENCY_NOW"
SAME_DAY = "SAME_DAY"
PASS = "PASS"
LEVELS = (EMERGENCY_NOW, SAME_DAY, PASS)

NOW_TEMPLATES = ("NOW-MH", "NOW-DV", "NOW-MED")
TEMPLATE_FOR_LEVEL = {SAME_DAY: "SAME-DAY", PASS: "PASS"}

NEGATION_TERMS = ("not", "no", "never", "without", "denies")
NEGATION_WINDOW = 50
_NEGATION_RE = re.compile(r"\b(?:" + "|".join(NEGATION_TERMS) + r")\b", re.IGNORECASE)

TAU_NOW = 0.50
TAU_SD = 0.30

MH_KEYWORDS = (
    r"suicid", r"want\s+to\s+die", r"\bend(ing)?\s+(my|her)\s+life", r"can[’']?t\s+go\s+on",
    r"(kill|harm|hurt)\s+(myself|herself)", r"self[-\s]?harm", r"hopeless", r"no\s+reason\s+to\s+live",
    r"self\s+destruction", r"better\s+off\s+dead",
)
DV_KEYWORDS = (
    r"he\s+(hit|hurts?|beats?|kicks?)\s+me", r"afraid.*safety", r"not\s+safe\s+at\s+home",
    r"\babuse", r"\bbeats?\s+me", r"threatens?\s+(me|to)", r"violen(t|ce)",
)
_MH_RE = [re.compile(p, re.IGNORECASE) for p in MH_KEYWORDS]
_DV_RE = [re.compile(p, re.IGNORECASE) for p in DV_KEYWORDS]


@dataclass(frozen=True)
class TriggerRule:
    id: str
    level: str
    category: str
    pattern: str
    stages: frozenset[str]
    example: str | None = None
    regex: re.Pattern = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class RuleMatch:
    rule: TriggerRule
    start: int
    matched: str


@dataclass(frozen=True)
class RoutingOutcome:
    level: str
    template: str
    provenance: dict
    degraded: bool = False

    def __post_init__(self):
        if self.level == EMERGENCY_NOW:
            ok = self.template in NOW_TEMPLATES
        else:
            ok = TEMPLATE_FOR_LEVEL.get(self.level) == self.template
        if not ok:
            raise ValueError(f"template {self.template!r} inconsistent with level {self.level!r}")


def load_rule_pack(path: str | Path) -> tuple[TriggerRule, ...]:
    rules, seen = [], set()
    for lineno, rec in iter_jsonl(path):
        where = {"path": path, "line": lineno}
        rid = rec.get("id")
        if not rid or rid in seen:
            raise InputError(f"missing or duplicate rule id {rid!r}", **where)
        seen.add(rid)
        level = rec.get("level")
        if level not in (EMERGENCY_NOW, SAME_DAY):
            raise InputError(f"rule {rid}: level must be EMERGENCY_NOW or SAME_DAY", **where)
        stages = frozenset(rec.get("stages") or ())
        if not stages or not stages <= set(STAGES):
            raise InputError(f"rule {rid}: stages must be a non-empty subset of {STAGES}", **where)
        regex = compile_portable(rec.get("pattern", ""), where=where)
        rules.append(TriggerRule(rid, level, rec.get("category", ""), rec["pattern"], stages,
                                 rec.get("example"), regex))
    return tuple(rules)


def negation_guard(text: str, match_start: int, window: int = NEGATION_WINDOW) -> bool:
    """True when a whole-word negation term sits in the ``window`` chars before the match."""
    if not 0 <= match_start <= len(text):
        raise ValueError("match_start outside text")
    lookbehind = text[max(0, match_start - window):match_start]
    return _NEGATION_RE.search(lookbehind) is not None


def rule_match(query: str, stage: str, level: str, rules: Sequence[TriggerRule]) -> RuleMatch | None:
    """First rule (in pack order) for this stage/level with an un-negated occurrence."""
    for rule in rules:
        if rule.level != level or stage not in rule.stages:
            continue
        for m in rule.regex.finditer(query):
            if not negation_guard(query, m.start()):
                return RuleMatch(rule, m.start(), m.group(0))
    return None


def classify_crisis_subtype(query_en: str) -> str:
    if any(r.search(query_en) for r in _MH_RE):
        return "NOW-MH"
    if any(r.search(query_en) for r in _DV_RE):
        return "NOW-DV"
    return "NOW-MED"


@dataclass
class SemanticMatcher:
    """Stage-conditioned bank of canonical emergency descriptions with unit vectors."""

    bank: dict[str, list[tuple[str, np.ndarray]]]
    encoder: object
    tau_now: float = TAU_NOW
    tau_sd: float = TAU_SD

    def __post_init__(self):
        if not 0 < self.tau_sd < self.tau_now <= 1:
            raise ValueError("thresholds must satisfy 0 < tau_sd < tau_now <= 1")
        for stage in STAGES:
            if not self.bank.get(stage):
                raise ValueError(f"symptom bank has no entries for stage {stage!r}")

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[Sequence[str], str]], encoder, **thresholds):
        bank: dict[str, list] = {s: [] for s in STAGES}
        for stages, text in entries:
            vec = np.asarray(encoder.embed(text), dtype=np.float64)
            vec = vec / np.linalg.norm(vec)
            for stage in stages:
                bank[stage].append((text, vec))
        return cls(bank, encoder, **thresholds)

    def with_thresholds(self, tau_now: float, tau_sd: float) -> "SemanticMatcher":
        return SemanticMatcher(self.bank, self.encoder, tau_now, tau_sd)

    def n_descriptions(self) -> int:
        return len({text for entries in self.bank.values() for text, _ in entries})


def load_symptom_bank(path: str | Path) -> list[tuple[tuple[str, ...], str]]:
    entries = []
    for lineno, rec in iter_jsonl(path):
        stages = rec.get("stage")
        stages = (stages,) if isinstance(stages, str) else tuple(stages or ())
        if not stages or not set(stages) <= set(STAGES):
            raise InputError(f"bad stage {rec.get('stage')!r}", path=path, line=lineno)
        text = rec.get("canonical_text")
        if not isinstance(text, str) or not text.strip():
            raise InputError("empty canonical_text", path=path, line=lineno)
        entries.append((stages, text))
    return entries


def semantic_match(query_en: str, stage: str, matcher: SemanticMatcher) -> tuple[str, float]:
    """Most similar bank entry for the stage; ties go to the earlier entry."""
    entries = matcher.bank.get(stage)
    if not entries:
        raise ValueError(f"no symptom bank entries for stage {stage!r}")
    try:
        z = np.asarray(matcher.encoder.embed(query_en), dtype=np.float64)
    except ProviderError:
        raise
    except Exception as exc:
        raise ProviderError(f"encoder failed: {exc}") from exc
    z = z / np.linalg.norm(z)
    best_text, best_sim = entries[0][0], -np.inf
    for text, vec in entries:
        sim = float(np.dot(z, vec))
        if sim > best_sim:
            best_text, best_sim = text, sim
    return best_text, float(np.clip(best_sim, -1.0, 1.0))


def pre_gen_triage(
    query: str,
    query_en: str | None,
    stage: str,
    concerns=frozenset(),
    *,
    rules: Sequence[TriggerRule],
    matcher: SemanticMatcher | None,
) -> RoutingOutcome:
    """Route a query before any retrieval or generation.

    ``query_en=None`` means no English view is available: the semantic
    backstop is skipped and the crisis subtype is read from the original text.
    """
    subtype_text = query if query_en is None else query_en
    concerns = sorted(concerns)

    hit = rule_match(query, stage, EMERGENCY_NOW, rules)
    if hit is not None:
        return RoutingOutcome(EMERGENCY_NOW, classify_crisis_subtype(subtype_text), {
            "step": "rule_now", "rule_id": hit.rule.id, "category": hit.rule.category,
            "matched": hit.matched, "concerns": concerns,
        })

    hit = rule_match(query, stage, SAME_DAY, rules)
    if hit is not None:
        return RoutingOutcome(SAME_DAY, "SAME-DAY", {
            "step": "rule_same_day", "rule_id": hit.rule.id, "category": hit.rule.category,
            "matched": hit.matched, "concerns": concerns,
        })

    if query_en is None or matcher is None:
        reason = "no_english_view" if query_en is None else "no_matcher"
        return RoutingOutcome(PASS, "PASS", {"step": "pass", "semantic": "skipped", "reason": reason,
                                             "concerns": concerns})
    try:
        canonical, sim = semantic_match(query_en, stage, matcher)
    except ProviderError as exc:
        log.warning("semantic backstop unavailable, passing through: %s", exc)
        return RoutingOutcome(PASS, "PASS", {"step": "pass", "semantic": "error", "error": str(exc),
                                             "concerns": concerns}, degraded=True)

    prov = {"canonical": canonical, "similarity": round(sim, 12), "concerns": concerns}
    if sim >= matcher.tau_now:
        return RoutingOutcome(EMERGENCY_NOW, classify_crisis_subtype(query_en), {"step": "semantic_now", **prov})
    if sim >= matcher.tau_sd:
        return RoutingOutcome(SAME_DAY, "SAME-DAY", {"step": "semantic_same_day", **prov})
    return RoutingOutcome(PASS, "PASS", {"step": "pass", **prov})
