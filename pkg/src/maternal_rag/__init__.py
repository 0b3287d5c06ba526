"""Safety-first question routing and hybrid retrieval for maternal-health queries."""

__version__ = "0.1.0"

LABELS = ("NOW-MH", "NOW-DV", "NOW-MED", "SAME-DAY", "PASS")
