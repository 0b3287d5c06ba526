from .agreement import (Kappa, RatingRecord, expert_consensus, judge_agreement, leave_one_out_agreement,
                        load_ratings, pairwise_qwk_weighted, qwk, qwk_detail, round_half_up, weighted_mean)
from .judge import DimensionMap, JudgeRow, JudgeTable, aggregate_judge_scores, stars
from .ranking import DEFAULT_KS, RetrievalMetrics, aggregate_metrics, evaluate_rankings, retrieval_metrics
from .stats import TTestResult, paired_ttest, serious_issue_rate, student_t_sf2, wilson_interval
from .triage_metrics import (TriageConfusion, UndefinedMetric, exact_level_accuracy, is_escalation,
                             severity_breakdown, triage_scores)

__all__ = [
    "DEFAULT_KS", "DimensionMap", "JudgeRow", "JudgeTable", "Kappa", "RatingRecord", "RetrievalMetrics",
    "TTestResult", "TriageConfusion", "UndefinedMetric", "aggregate_judge_scores", "aggregate_metrics",
    "evaluate_rankings", "exact_level_accuracy", "expert_consensus", "is_escalation", "judge_agreement",
    "leave_one_out_agreement", "load_ratings", "paired_ttest", "pairwise_qwk_weighted", "qwk", "qwk_detail",
    "retrieval_metrics", "round_half_up", "serious_issue_rate", "severity_breakdown", "stars",
    "student_t_sf2", "triage_scores", "weighted_mean", "wilson_interval",
]
