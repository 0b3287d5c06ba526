"""Figures written next to the text reports (Agg backend, PNG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# drop the version string so reruns produce identical files
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def recall_curves(results: dict, ks, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, m in results.items():
        ax.plot(ks, [m.recall_at[k] for k in ks], marker="o", label=name)
    ax.set_xscale("log")
    ax.set_xticks(list(ks), [str(k) for k in ks])
    ax.set_xlabel("K")
    ax.set_ylabel("Recall@K (DIRECT)")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    return _save(fig, path)


def confusion_heatmap(conf, path) -> Path:
    mat = np.array([[conf.tp, conf.fn], [conf.fp, conf.tn]])
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.imshow(mat, cmap="Blues")
    for (i, j), v in np.ndenumerate(mat):
        ax.text(j, i, str(v), ha="center", va="center",
                color="white" if v > mat.max() / 2 else "black")
    ax.set_xticks([0, 1], ["escalate", "pass"])
    ax.set_yticks([0, 1], ["emergency", "non-emergency"])
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    return _save(fig, path)


def agreement_bars(rows: list[dict], path) -> Path:
    dims = [r["dimension"] for r in rows]
    x = np.arange(len(dims))
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    for ax, (jh, hh, title) in zip(axes, [("jh_qwk", "hh_qwk", "QWK"), ("jh_mae", "hh_mae", "MAE")]):
        ax.bar(x - 0.2, [r.get(jh) or 0 for r in rows], 0.4, label="judge vs experts")
        ax.bar(x + 0.2, [r.get(hh) or 0 for r in rows], 0.4, label="expert vs experts")
        ax.set_xticks(x, dims, rotation=15, fontsize=8)
        ax.set_title(title)
    axes[0].legend(fontsize=8)
    return _save(fig, path)


def judge_heatmap(table, path) -> Path:
    crits = [r.criterion for r in table.rows]
    mat = np.full((len(crits), len(table.systems)), np.nan)
    for i, r in enumerate(table.rows):
        for j, s in enumerate(table.systems):
            if s in r.means:
                mat[i, j] = r.means[s]
    fig, ax = plt.subplots(figsize=(1.6 + 1.4 * len(table.systems), 0.9 + 0.35 * len(crits)))
    ax.imshow(np.ma.masked_invalid(mat), cmap="RdYlGn_r" if table.lower_is_better else "RdYlGn", aspect="auto")
    for (i, j), v in np.ndenumerate(mat):
        if not np.isnan(v):
            ax.text(j, i, f"{v:.2f}", ha="center", va="center", fontsize=7)
    ax.set_xticks(range(len(table.systems)), table.systems, rotation=20, fontsize=8)
    ax.set_yticks(range(len(crits)), crits, fontsize=8)
    return _save(fig, path)
