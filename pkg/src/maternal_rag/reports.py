"""Plain-text tables and JSON documents for evaluation results."""

from __future__ import annotations

import math
from pathlib import Path

from .text import dumps


def render_table(header, rows, align=None) -> str:
    """Fixed-width table; first column left-aligned, the rest right-aligned."""
    cells = [[str(c) for c in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    align = align or ["<"] + [">"] * (len(header) - 1)
    lines = []
    for n, row in enumerate(cells):
        lines.append("  ".join(f"{c:{a}{w}}" for c, a, w in zip(row, align, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def pct(x, dp: int = 1) -> str:
    return "--" if x is None else f"{100 * x:.{dp}f}%"


def num(x, dp: int = 3) -> str:
    if x is None:
        return "--"
    if isinstance(x, float) and math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return f"{x:.{dp}f}"


def retrieval_table(results: dict, ks) -> str:
    header = ["Retriever"]
    for k in ks:
        header += [f"R@{k}", f"Hit@{k}"]
    header.append("MRR")
    rows = []
    for name, m in results.items():
        row = [name]
        for k in ks:
            row += [num(m.recall_at[k]), num(m.hit_at[k])]
        rows.append(row + [num(m.mrr)])
    return render_table(header, rows)


def triage_table(conf, scores: dict, breakdown: dict | None = None) -> str:
    out = render_table(
        ["", "Pred. Escalation (Template)", "Pred. Pass-through"],
        [[f"GT Emergency (n={conf.tp + conf.fn})", conf.tp, conf.fn],
         [f"GT Non-emergency (n={conf.fp + conf.tn})", conf.fp, conf.tn]],
    )
    metric_rows = [["Emergency Recall", pct(scores["recall"])],
                   ["Emergency Precision", pct(scores["precision"])],
                   ["Missed Emergencies (FN)", pct(scores["fn_rate"])],
                   ["False Alarms (FP)", pct(scores["fp_rate"])]]
    out += "\n" + render_table(["Metric", "Value"], metric_rows)
    if breakdown:
        out += "\n" + render_table(["Gold class", "Correct", "n", "Recall"],
                                   [[c, v["correct"], v["n"], pct(v["recall"])] for c, v in breakdown.items()])
    return out


def distance_table(rows: list[dict]) -> str:
    return render_table(
        ["Dimension", "J-H MAE", "J-H <=0.5", "H-H MAE", "H-H <=0.5"],
        [[r["dimension"], num(r.get("jh_mae"), 2), pct(r.get("jh_within"), 0),
          num(r.get("hh_mae"), 2), pct(r.get("hh_within"), 0)] for r in rows],
    )


def kappa_table(rows: list[dict]) -> str:
    def rng(r):
        lo_hi = r.get("hh_range")
        return "--" if not lo_hi else f"[{lo_hi[0]:.2f}, {lo_hi[1]:.2f}]"

    return render_table(
        ["Dimension", "J-H QWK", "H-H QWK", "H-H Range"],
        [[r["dimension"], num(r.get("jh_qwk"), 3), num(r.get("hh_qwk"), 2), rng(r)] for r in rows],
    )


def judge_table(table, dp: int = 2) -> str:
    header = ["Metric", *table.systems]
    rows = []
    for r in table.rows:
        row = [r.criterion]
        for s in table.systems:
            if s not in r.means:
                row.append("--")
                continue
            cell = f"{r.means[s]:.{dp}f}"
            if s == r.best:
                cell += r.stars or ""
                cell = f"[{cell}]"
            row.append(cell)
        rows.append(row)
    note = "[x] marks the best system; * p<0.05, ** p<0.01, *** p<0.001 (paired t-test vs second-best)\n"
    return render_table(header, rows) + note


def serious_issue_table(rows: list[dict]) -> str:
    def cell(v):
        lo, hi = v["ci"]
        return f"{v['count']}/{v['n']} ({pct(v['rate'])}) [{pct(lo)}, {pct(hi)}]"

    return render_table(["Dimension", "Serious issues (95% CI)"], [[r["dimension"], cell(r)] for r in rows])


def write_report(out_dir: str | Path, stem: str, data: dict, text: str) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath, tpath = out_dir / f"{stem}.json", out_dir / f"{stem}.txt"
    jpath.write_text(dumps(data), encoding="utf-8")
    tpath.write_text(text, encoding="utf-8")
    return [jpath, tpath]
