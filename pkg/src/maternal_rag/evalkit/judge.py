"""Judge-score tables with significance marks, and judge-to-expert dimension mapping."""

from __future__ import annotations

import json
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InputError
from .stats import paired_ttest

STAR_LEVELS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


def stars(p: float) -> str:
    for cut, mark in STAR_LEVELS:
        if p < cut:
            return mark
    return ""


def _as_mapping(scores) -> dict:
    if isinstance(scores, dict):
        return {str(k): float(v) for k, v in scores.items()}
    return {str(i): float(v) for i, v in enumerate(scores)}


@dataclass
class JudgeRow:
    criterion: str
    means: dict[str, float]
    best: str | None = None
    second: str | None = None
    test: dict | None = None
    stars: str = ""

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "means": self.means, "best": self.best, "second": self.second,
                "test": self.test, "stars": self.stars}


@dataclass
class JudgeTable:
    systems: list[str]
    rows: list[JudgeRow] = field(default_factory=list)
    lower_is_better: bool = True

    def to_json(self) -> dict:
        return {"systems": self.systems, "lower_is_better": self.lower_is_better,
                "rows": [r.to_json() for r in self.rows]}


def aggregate_judge_scores(per_query: dict, lower_is_better: bool = True, criteria=None) -> JudgeTable:
    """Mean score per system and criterion, testing the best system against the runner-up.

    ``per_query`` maps system -> criterion -> scores, where scores is either a
    list aligned by position or a mapping from query id. A system may lack a
    criterion entirely; every system that has it must cover the same queries.
    """
    if not per_query:
        raise ValueError("no systems to aggregate")
    systems = list(per_query)
    if criteria is None:
        criteria = []
        for sys_scores in per_query.values():
            criteria.extend(c for c in sys_scores if c not in criteria)
    table = JudgeTable(systems, lower_is_better=lower_is_better)
    for crit in criteria:
        data = {s: _as_mapping(per_query[s][crit]) for s in systems if crit in per_query[s]}
        if not data:
            continue
        keys = None
        for s, m in data.items():
            if not m:
                raise ValueError(f"{s}/{crit}: no scores")
            if keys is None:
                keys = sorted(m)
            elif sorted(m) != keys:
                raise ValueError(f"{s}/{crit}: query ids do not match the other systems")
        means = {s: statistics.fmean(m.values()) for s, m in data.items()}
        row = JudgeRow(crit, means)
        if len(means) >= 2:
            sign = 1 if lower_is_better else -1
            order = sorted(means, key=lambda s: (sign * means[s], systems.index(s)))
            row.best, row.second = order[0], order[1]
            res = paired_ttest([data[row.best][k] for k in keys], [data[row.second][k] for k in keys])
            row.test = res.to_json()
            row.stars = stars(res.p_two_sided)
        elif means:
            row.best = next(iter(means))
        table.rows.append(row)
    return table


@dataclass(frozen=True)
class DimensionMap:
    """Expert dimension -> judge criteria combined by their unweighted mean."""

    mapping: dict[str, tuple[str, ...]]

    @classmethod
    def from_json(cls, data: dict) -> "DimensionMap":
        mapping = {}
        for dim, entry in data.items():
            crits = entry.get("criteria") if isinstance(entry, dict) else entry
            combiner = entry.get("combiner", "mean") if isinstance(entry, dict) else "mean"
            if combiner != "mean":
                raise ValueError(f"{dim}: unsupported combiner {combiner!r}")
            if not crits or not all(isinstance(c, str) for c in crits):
                raise ValueError(f"{dim}: criteria must be a non-empty list of names")
            mapping[dim] = tuple(crits)
        return cls(mapping)

    @classmethod
    def load(cls, path: str | Path) -> "DimensionMap":
        try:
            return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, ValueError, AttributeError) as exc:
            raise InputError(f"bad dimension map: {exc}", path=path) from exc

    def apply(self, judge_records) -> dict[str, dict[str, float]]:
        """Collapse per-criterion judge records to per-item scores on each expert dimension.

        Items missing any criterion of a dimension are left out of that dimension.
        """
        by_item: dict[str, dict[str, float]] = defaultdict(dict)
        for r in judge_records:
            by_item[r.item_id][r.dimension] = r.score
        out = {}
        for dim, crits in self.mapping.items():
            out[dim] = {item: statistics.fmean(sc[c] for c in crits)
                        for item, sc in sorted(by_item.items()) if all(c in sc for c in crits)}
        return out


def significance_mark(row: JudgeRow) -> str:
    if row.test is None or not isinstance(row.test.get("p_two_sided"), float):
        return ""
    p = row.test["p_two_sided"]
    return stars(p) if not math.isnan(p) else ""
