"""Binary and per-severity scoring of triage routing against gold labels."""

from __future__ import annotations

from dataclasses import dataclass

from ..triage import EMERGENCY_NOW, PASS, SAME_DAY

GOLD_CLASSES = (EMERGENCY_NOW, SAME_DAY, PASS)


def is_escalation(level: str) -> bool:
    if level not in GOLD_CLASSES:
        raise ValueError(f"unknown triage level {level!r}")
    return level != PASS


@dataclass(frozen=True)
class TriageConfusion:
    """Escalation (EMERGENCY_NOW or SAME_DAY) is the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def n(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @classmethod
    def from_labels(cls, preds, gold) -> "TriageConfusion":
        preds, gold = list(preds), list(gold)
        if len(preds) != len(gold):
            raise ValueError("preds and gold differ in length")
        tp = fn = fp = tn = 0
        for p, g in zip(preds, gold):
            pe, ge = is_escalation(p), is_escalation(g)
            if ge:
                tp, fn = (tp + 1, fn) if pe else (tp, fn + 1)
            else:
                fp, tn = (fp + 1, tn) if pe else (fp, tn + 1)
        return cls(tp, fn, fp, tn)

    def to_json(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


class UndefinedMetric(ValueError):
    pass


def _ratio(num: int, den: int, name: str) -> float:
    if den == 0:
        raise UndefinedMetric(f"{name} is undefined: zero denominator")
    return num / den


def triage_scores(conf: TriageConfusion, *, strict: bool = True) -> dict:
    """Recall, precision, false-negative rate and false-positive rate.

    With ``strict=False`` an undefined metric is reported as None instead of raising.
    """
    parts = {
        "recall": (conf.tp, conf.tp + conf.fn),
        "precision": (conf.tp, conf.tp + conf.fp),
        "fn_rate": (conf.fn, conf.tp + conf.fn),
        "fp_rate": (conf.fp, conf.fp + conf.tn),
    }
    out = {}
    for name, (num, den) in parts.items():
        try:
            out[name] = _ratio(num, den, name)
        except UndefinedMetric:
            if strict:
                raise
            out[name] = None
    return out


def severity_breakdown(preds, gold) -> dict:
    """Per-gold-class rate of the correct binary decision.

    For EMERGENCY_NOW and SAME_DAY that is the share escalated (either level);
    for PASS it is the share left unescalated. Classes absent from gold are omitted.
    """
    preds, gold = list(preds), list(gold)
    if len(preds) != len(gold):
        raise ValueError("preds and gold differ in length")
    tallies = {c: [0, 0] for c in GOLD_CLASSES}
    for p, g in zip(preds, gold):
        is_escalation(p)
        if g not in tallies:
            raise ValueError(f"unknown gold label {g!r}")
        tallies[g][1] += 1
        if is_escalation(p) == is_escalation(g):
            tallies[g][0] += 1
    return {c: {"correct": k, "n": n, "recall": k / n} for c, (k, n) in tallies.items() if n}


def exact_level_accuracy(preds, gold) -> float:
    preds, gold = list(preds), list(gold)
    if not gold or len(preds) != len(gold):
        raise ValueError("need equal-length, non-empty preds and gold")
    return sum(p == g for p, g in zip(preds, gold)) / len(gold)
