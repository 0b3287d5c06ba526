"""Regenerate the shipped evaluation fixtures (ratings, judge scores, dimension map)."""

from __future__ import annotations

import csv
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "maternal_rag" / "data"
EXPERT_DIMS = ("Correctness", "Communication", "Localization")
JUDGE_CRITERIA = ("Correctness", "Completeness", "Tone", "Language Match", "Cultural Appropriateness")
SYSTEMS = ("Simple NoRAG", "NoRAG + Safety Triage", "Simple RAG", "RAG + Safety Triage")


def clamp(x: float) -> int:
    return max(1, min(3, round(x)))


def make_ratings(rng: random.Random, n_items: int = 30):
    experts, judge = [], []
    raters = ("E1", "E2", "E3")
    for i in range(n_items):
        item = f"q{i + 1:03d}"
        quality = rng.choice((1.0, 1.0, 1.3, 1.6, 2.0, 2.6))
        k = rng.choice((1, 2, 2, 3, 3))
        for rater in sorted(rng.sample(raters, k)):
            for dim in EXPERT_DIMS:
                experts.append((item, rater, dim, clamp(quality + rng.gauss(0, 0.45))))
        for crit in JUDGE_CRITERIA:
            judge.append((item, "judge", crit, clamp(quality + rng.gauss(0, 0.5))))
    return experts, judge


def write_csv(path: Path, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(("item_id", "rater_id", "dimension", "score"))
        w.writerows(rows)


def make_judge_scores(rng: random.Random, n_queries: int = 40):
    # per-system offsets: lower is better
    offsets = {"Correctness": (0.5, 0.45, 0.55, 0.25), "Completeness": (0.55, 0.6, 0.62, 0.65),
               "Tone": (0.05, 0.2, 0.06, 0.08), "Spillage": (0.1, 0.06, 0.2, 0.0)}
    rows = []
    for q in range(n_queries):
        base = rng.uniform(1.0, 1.4)
        for crit, offs in offsets.items():
            for system, off in zip(SYSTEMS, offs):
                rows.append({"system": system, "query_id": f"u{q + 1:03d}", "criterion": crit,
                             "score": clamp(base + off + rng.gauss(0, 0.35))})
        for system, off in zip(SYSTEMS[2:], (1.4, 0.8)):
            rows.append({"system": system, "query_id": f"u{q + 1:03d}", "criterion": "RAG Grounding",
                         "score": clamp(base + off + rng.gauss(0, 0.35))})
    return rows


def main() -> None:
    rng = random.Random(20240601)
    experts, judge = make_ratings(rng)
    write_csv(DATA / "expert_ratings.csv", experts)
    write_csv(DATA / "judge_ratings.csv", judge)
    with (DATA / "judge_scores.jsonl").open("w", encoding="utf-8") as f:
        for row in make_judge_scores(rng):
            f.write(json.dumps(row) + "\n")
    dmap = {"Correctness": {"criteria": ["Correctness"], "combiner": "mean"},
            "Communication": {"criteria": ["Completeness", "Tone"], "combiner": "mean"},
            "Localization": {"criteria": ["Language Match", "Cultural Appropriateness"], "combiner": "mean"}}
    (DATA / "dimension_map.json").write_text(json.dumps(dmap, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
