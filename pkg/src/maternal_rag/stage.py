"""Life-stage inference and concern tagging from query text plus platform metadata."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError
from .text import iter_jsonl

PREGNANT = "maternal_pregnant"
POSTPARTUM = "postpartum"
NEWBORN = "newborn"
STAGES = (PREGNANT, POSTPARTUM, NEWBORN)
DEFAULT_STAGE = PREGNANT

# when several stages have text cues, the most specific wins
STAGE_PRECEDENCE = (NEWBORN, POSTPARTUM, PREGNANT)

CONCERN_TAGS = frozenset({
    "bleeding", "fever", "headache_vision", "fetal_movement", "mental_health",
    "domestic_violence", "breastfeeding", "wound", "breathing_chest", "other",
})

_BACKREF = re.compile(r"\\[1-9]|\(\?P=|\\k<|\(\?<?[=!]")


def compile_portable(pattern: str, *, where=None) -> re.Pattern:
    """Compile a case-insensitive pattern from the portable regex subset.

    Backreferences and lookaround are rejected so packs stay portable
    across regex engines.
    """
    if _BACKREF.search(pattern):
        raise InputError(f"pattern uses unsupported construct: {pattern!r}", **(where or {}))
    try:
        return re.compile(pattern, re.IGNORECASE)
    except re.error as exc:
        raise InputError(f"pattern does not compile ({exc}): {pattern!r}", **(where or {})) from exc


@dataclass(frozen=True)
class PlatformMetadata:
    gestational_week: int | None = None
    postpartum_weeks: int | None = None
    newborn_age_days: int | None = None

    def __post_init__(self):
        gw = self.gestational_week
        if gw is not None and not 1 <= gw <= 45:
            raise ValueError(f"gestational_week must be in 1..45, got {gw}")
        for name in ("postpartum_weeks", "newborn_age_days"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    @classmethod
    def from_dict(cls, data: dict | None) -> "PlatformMetadata":
        data = data or {}
        return cls(**{k: data.get(k) for k in ("gestational_week", "postpartum_weeks", "newborn_age_days")})

    def to_dict(self) -> dict:
        return {k: v for k, v in vars(self).items() if v is not None}


@dataclass(frozen=True)
class StagePattern:
    regex: re.Pattern
    stage: str
    example: str | None = None


@dataclass(frozen=True)
class PatternPack:
    stage_patterns: tuple[StagePattern, ...] = ()
    concern_keywords: tuple[tuple[re.Pattern, str], ...] = ()
    source: str = field(default="", compare=False)


def load_pattern_pack(path: str | Path) -> PatternPack:
    stage_patterns, keywords = [], []
    for lineno, rec in iter_jsonl(path):
        where = {"path": path, "line": lineno}
        if "pattern" in rec:
            stage = rec.get("stage")
            if stage not in STAGES:
                raise InputError(f"unknown stage {stage!r}", **where)
            stage_patterns.append(StagePattern(compile_portable(rec["pattern"], where=where), stage, rec.get("example")))
        elif "keyword" in rec:
            tag = rec.get("concern_tag")
            if tag not in CONCERN_TAGS:
                raise InputError(f"unknown concern tag {tag!r}", **where)
            kw = re.compile(r"(?<!\w)" + re.escape(rec["keyword"]), re.IGNORECASE)
            keywords.append((kw, tag))
        else:
            raise InputError("record needs either 'pattern' or 'keyword'", **where)
    return PatternPack(tuple(stage_patterns), tuple(keywords), str(path))


def stage_from_metadata(meta: PlatformMetadata | None) -> str | None:
    if meta is None:
        return None
    if meta.newborn_age_days is not None:
        return NEWBORN
    if meta.gestational_week is not None:
        return PREGNANT
    if meta.postpartum_weeks is not None:
        return POSTPARTUM
    return None


def text_stage_cues(query: str, pack: PatternPack) -> set[str]:
    return {p.stage for p in pack.stage_patterns if p.regex.search(query)}


def extract_stage(query: str, meta: PlatformMetadata | None, pack: PatternPack) -> str:
    from_meta = stage_from_metadata(meta)
    if from_meta is not None:
        return from_meta
    cues = text_stage_cues(query, pack)
    for stage in STAGE_PRECEDENCE:
        if stage in cues:
            return stage
    return DEFAULT_STAGE


def extract_concerns(query: str, stage: str, pack: PatternPack) -> frozenset[str]:
    # stage is accepted for interface parity; the keyword table is stage-independent
    return frozenset(tag for kw, tag in pack.concern_keywords if kw.search(query))
