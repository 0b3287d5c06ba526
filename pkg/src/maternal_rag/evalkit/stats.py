"""Wilson intervals, paired t-tests, serious-issue rates."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from scipy.special import betainc


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    z = statistics.NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the bounds are exactly 0 and 1 at the ends; rounding would leave ~1e-19
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return float(betainc(df / 2, 0.5, x))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_two_sided: float
    df: int
    mean_diff: float
    flags: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        t = self.t if math.isfinite(self.t) else ("+inf" if self.t > 0 else "-inf")
        return {"t": t, "p_two_sided": self.p_two_sided, "df": self.df, "mean_diff": self.mean_diff,
                "flags": list(self.flags)}


def paired_ttest(a, b) -> TTestResult:
    """Paired t-test on a - b; t > 0 when mean(a) > mean(b)."""
    a, b = [float(x) for x in a], [float(x) for x in b]
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two pairs")
    d = [x - y for x, y in zip(a, b)]
    mean = statistics.fmean(d)
    sd = statistics.stdev(d)
    df = n - 1
    if sd == 0:
        if mean == 0:
            return TTestResult(0.0, 1.0, df, 0.0, ("zero_differences",))
        return TTestResult(math.copysign(math.inf, mean), 0.0, df, mean, ("infinite_t",))
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t, student_t_sf2(t, df), df, mean)


def serious_issue_rate(item_means, threshold: float = 2.5, confidence: float = 0.95) -> dict:
    """Share of items whose mean expert score is at or above ``threshold``, with a Wilson interval."""
    vals = list(item_means)
    if not vals:
        raise ValueError("no items")
    k = sum(1 for v in vals if v >= threshold)
    lo, hi = wilson_interval(k, len(vals), confidence)
    return {"count": k, "n": len(vals), "rate": k / len(vals), "ci": [lo, hi]}
