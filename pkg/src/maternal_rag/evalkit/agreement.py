"""Ordinal agreement: quadratic-weighted kappa, pairwise expert agreement, judge closeness."""

from __future__ import annotations

import csv
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..text import iter_jsonl


@dataclass(frozen=True)
class RatingRecord:
    item_id: str
    rater_id: str
    dimension: str
    score: float


@dataclass(frozen=True)
class Kappa:
    value: float
    degenerate: bool = False


def qwk_detail(ratings_a, ratings_b, scale: int = 3, low: int = 1) -> Kappa:
    """Quadratic-weighted Cohen's kappa over categories ``low .. low+scale-1``.

    When both raters use one identical category the chance term vanishes;
    that case is reported as 1.0 with ``degenerate`` set.
    """
    a = [int(x) for x in ratings_a]
    b = [int(x) for x in ratings_b]
    if len(a) != len(b):
        raise ValueError("rating vectors differ in length")
    if len(a) < 2:
        raise ValueError("need at least two paired ratings")
    if scale < 2:
        raise ValueError("scale needs at least two categories")
    hi = low + scale - 1
    for x in (*a, *b):
        if not low <= x <= hi:
            raise ValueError(f"rating {x} outside scale {low}..{hi}")
    obs = np.zeros((scale, scale))
    for x, y in zip(a, b):
        obs[x - low, y - low] += 1
    obs /= len(a)
    exp = np.outer(obs.sum(axis=1), obs.sum(axis=0))
    idx = np.arange(scale)
    w = (idx[:, None] - idx[None, :]) ** 2 / (scale - 1) ** 2
    den = float((w * exp).sum())
    num = float((w * obs).sum())
    if den == 0:
        return Kappa(1.0, True)
    return Kappa(1.0 - num / den)


def qwk(ratings_a, ratings_b, scale: int = 3, low: int = 1) -> float:
    return qwk_detail(ratings_a, ratings_b, scale, low).value


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def weighted_mean(values, weights) -> float:
    values, weights = list(values), list(weights)
    total = sum(weights)
    if not values or total <= 0:
        raise ValueError("weighted mean needs positive total weight")
    return sum(v * w for v, w in zip(values, weights)) / total


def _by_rater(records, dimension) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = defaultdict(dict)
    for r in records:
        if r.dimension == dimension:
            table[r.rater_id][r.item_id] = r.score
    return table


def _by_item(records, dimension) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = defaultdict(dict)
    for r in records:
        if r.dimension == dimension:
            table[r.item_id][r.rater_id] = r.score
    return table


def pairwise_qwk_weighted(records, dimension: str, scale: int = 3, low: int = 1, min_overlap: int = 2) -> dict:
    """QWK for every rater pair on their shared items, pooled with overlap sizes as weights."""
    raters = _by_rater(records, dimension)
    per_pair = []
    for ra, rb in combinations(sorted(raters), 2):
        shared = sorted(set(raters[ra]) & set(raters[rb]))
        if len(shared) < min_overlap:
            continue
        k = qwk_detail([raters[ra][i] for i in shared], [raters[rb][i] for i in shared], scale, low)
        per_pair.append({"raters": [ra, rb], "n": len(shared), "kappa": k.value, "degenerate": k.degenerate})
    if not per_pair:
        raise ValueError(f"no rater pair shares {min_overlap}+ items on {dimension!r}")
    agg = weighted_mean([p["kappa"] for p in per_pair], [p["n"] for p in per_pair])
    kappas = [p["kappa"] for p in per_pair]
    return {"dimension": dimension, "aggregate": agg, "range": [min(kappas), max(kappas)], "per_pair": per_pair}


def expert_consensus(records, dimension: str) -> dict[str, float]:
    """Unrounded mean expert score per item."""
    return {item: statistics.fmean(by.values()) for item, by in sorted(_by_item(records, dimension).items())}


def judge_agreement(judge: dict, experts, dimension: str, threshold: float = 0.5, scale: int = 3,
                    low: int = 1) -> dict:
    """Compare judge scores with the expert mean on items both cover.

    ``judge`` maps item id to a (possibly fractional) score. QWK rounds both
    sides to the nearest category, halves going up.
    """
    consensus = expert_consensus(experts, dimension)
    items = [i for i in sorted(judge) if i in consensus]
    if not items:
        raise ValueError(f"no judged item has an expert rating on {dimension!r}")
    diffs = [abs(float(judge[i]) - consensus[i]) for i in items]
    out = {
        "dimension": dimension,
        "n": len(items),
        "mae": statistics.fmean(diffs),
        "frac_within": sum(d <= threshold for d in diffs) / len(diffs),
        "n_judge_only": sum(1 for i in judge if i not in consensus),
        "flags": ["qwk_rounds_half_up"],
    }
    if len(items) >= 2:
        k = qwk_detail([round_half_up(float(judge[i])) for i in items],
                       [round_half_up(consensus[i]) for i in items], scale, low)
        out["qwk"] = k.value
        if k.degenerate:
            out["flags"].append("degenerate_kappa")
    return out


def leave_one_out_agreement(experts, dimension: str, threshold: float = 0.5) -> dict:
    """Each expert against the mean of the other experts on the same item.

    Items with exactly two experts contribute two comparisons, each against a single rating.
    """
    diffs = []
    two_rater_items = 0
    for item, by in sorted(_by_item(experts, dimension).items()):
        if len(by) < 2:
            continue
        two_rater_items += len(by) == 2
        for rater, score in sorted(by.items()):
            others = [s for r, s in by.items() if r != rater]
            diffs.append(abs(score - statistics.fmean(others)))
    if not diffs:
        raise ValueError(f"no item on {dimension!r} has two or more experts")
    return {"dimension": dimension, "n_comparisons": len(diffs), "n_two_rater_items": two_rater_items,
            "mae": statistics.fmean(diffs), "frac_within": sum(d <= threshold for d in diffs) / len(diffs)}


RATING_FIELDS = ("item_id", "rater_id", "dimension", "score")


def _check_records(rows, path, scale, low) -> list[RatingRecord]:
    seen: dict[tuple, int] = {}
    out = []
    hi = low + scale - 1
    for line, row in rows:
        missing = [f for f in RATING_FIELDS if row.get(f) in (None, "")]
        if missing:
            raise InputError(f"missing field(s) {missing}", path=path, line=line)
        try:
            score = float(row["score"])
        except (TypeError, ValueError):
            raise InputError(f"score {row['score']!r} is not a number", path=path, line=line) from None
        if not low <= score <= hi:
            raise InputError(f"score {score:g} outside scale {low}..{hi}", path=path, line=line)
        key = (str(row["item_id"]), str(row["rater_id"]), str(row["dimension"]))
        if key in seen:
            raise InputError(f"duplicate rating {key} (first at line {seen[key]})", path=path, line=line)
        seen[key] = line
        out.append(RatingRecord(*key, score))
    return out


def load_ratings(path: str | Path, scale: int = 3, low: int = 1) -> list[RatingRecord]:
    """Read rating records from CSV (header row) or JSONL, by file suffix."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read ratings: {exc}", path=path) from exc
    if path.suffix.lower() == ".csv":
        reader = csv.DictReader(text.splitlines())
        if reader.fieldnames is None or not set(RATING_FIELDS) <= set(reader.fieldnames):
            raise InputError(f"CSV header must contain {list(RATING_FIELDS)}", path=path, line=1)
        rows = [(reader.line_num, row) for row in reader]
    else:
        rows = list(iter_jsonl(path))
    return _check_records(rows, path, scale, low)
