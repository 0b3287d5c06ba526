from __future__ import annotations

import math
import random

import pytest
from hypothesis import assume, given, strategies as st
from scipy import stats as sps
from sklearn.metrics import cohen_kappa_score

from maternal_rag.errors import InputError
from maternal_rag.evalkit import (DimensionMap, RatingRecord, TriageConfusion, UndefinedMetric,
                                  aggregate_judge_scores, aggregate_metrics, exact_level_accuracy,
                                  judge_agreement, leave_one_out_agreement, load_ratings, paired_ttest,
                                  pairwise_qwk_weighted, qwk, qwk_detail, retrieval_metrics, round_half_up,
                                  serious_issue_rate, severity_breakdown, stars, triage_scores, weighted_mean,
                                  wilson_interval)


class TestRetrievalMetrics:
    def test_worked_example(self):
        ranked = ["a", "x", "b", "y", "c", "d"]
        m = retrieval_metrics(ranked, {"a", "b", "c", "d"}, ks=(5, 10))
        assert m.recall_at[5] == 0.75 and m.recall_at[10] == 1.0
        assert m.hit_at[5] == 1.0 and m.mrr == 1.0

    def test_mrr_first_hit(self):
        assert retrieval_metrics(["x", "y", "a"], {"a"}, ks=(1,)).mrr == pytest.approx(1 / 3)

    def test_no_hit(self):
        m = retrieval_metrics(["x"], {"a"}, ks=(5,))
        assert m.mrr == 0 and m.hit_at[5] == 0

    def test_empty_gold(self):
        with pytest.raises(ValueError):
            retrieval_metrics(["x"], set())

    def test_macro_average(self):
        a = retrieval_metrics(["a"], {"a", "b"}, ks=(1,))
        b = retrieval_metrics(["c"], {"c"}, ks=(1,))
        agg = aggregate_metrics([a, b])
        assert agg.recall_at[1] == pytest.approx(0.75) and agg.n == 2

    @given(st.permutations(list("abcdefgh")), st.sets(st.sampled_from("abcdefgh"), min_size=1))
    def test_recall_monotone_in_k(self, ranked, gold):
        m = retrieval_metrics(list(ranked), gold, ks=(1, 3, 5, 8))
        vals = [m.recall_at[k] for k in (1, 3, 5, 8)]
        assert vals == sorted(vals) and vals[-1] == 1.0


class TestTriageMetrics:
    def test_balanced(self):
        s = triage_scores(TriageConfusion(1, 1, 1, 1))
        assert s == {"recall": 0.5, "precision": 0.5, "fn_rate": 0.5, "fp_rate": 0.5}

    def test_from_labels(self):
        preds = ["EMERGENCY_NOW", "PASS", "SAME_DAY", "PASS"]
        gold = ["SAME_DAY", "EMERGENCY_NOW", "PASS", "PASS"]
        assert TriageConfusion.from_labels(preds, gold) == TriageConfusion(tp=1, fn=1, fp=1, tn=1)

    def test_undefined(self):
        conf = TriageConfusion(0, 0, 0, 5)
        with pytest.raises(UndefinedMetric):
            triage_scores(conf)
        assert triage_scores(conf, strict=False)["recall"] is None

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            TriageConfusion(-1, 0, 0, 0)

    def test_severity(self):
        gold = ["EMERGENCY_NOW"] * 10 + ["PASS"] * 2
        preds = ["SAME_DAY"] * 9 + ["PASS"] + ["PASS", "EMERGENCY_NOW"]
        out = severity_breakdown(preds, gold)
        assert out["EMERGENCY_NOW"] == {"correct": 9, "n": 10, "recall": 0.9}
        assert out["PASS"]["correct"] == 1
        assert "SAME_DAY" not in out

    def test_exact_level(self):
        assert exact_level_accuracy(["PASS", "SAME_DAY"], ["PASS", "EMERGENCY_NOW"]) == 0.5


def qwk_oracle(a, b, cats):
    # textbook definition with explicit loops
    n, k = len(a), len(cats)
    idx = {c: i for i, c in enumerate(cats)}
    obs = [[0.0] * k for _ in range(k)]
    for x, y in zip(a, b):
        obs[idx[x]][idx[y]] += 1
    ra = [sum(row) for row in obs]
    cb = [sum(obs[i][j] for i in range(k)) for j in range(k)]
    num = den = 0.0
    for i in range(k):
        for j in range(k):
            w = (i - j) ** 2 / (k - 1) ** 2
            num += w * obs[i][j]
            den += w * ra[i] * cb[j] / n
    return 1 - num / den


ratings = st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=2, max_size=30)


class TestQWK:
    def test_perfect(self):
        assert qwk([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_reversed_negative(self):
        assert qwk([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_degenerate(self):
        k = qwk_detail([2, 2, 2], [2, 2, 2])
        assert k.value == 1.0 and k.degenerate

    @given(ratings)
    def test_matches_oracle(self, pairs):
        a, b = zip(*pairs)
        assume(len(set(a)) > 1 or len(set(b)) > 1)
        assert qwk(a, b) == pytest.approx(qwk_oracle(a, b, [1, 2, 3]))

    @given(ratings)
    def test_matches_sklearn(self, pairs):
        a, b = zip(*pairs)
        assume(len(set(a)) > 1 or len(set(b)) > 1)
        ref = cohen_kappa_score(a, b, weights="quadratic", labels=[1, 2, 3])
        assert qwk(a, b) == pytest.approx(ref)

    @given(ratings)
    def test_symmetric(self, pairs):
        a, b = zip(*pairs)
        assume(len(set(a)) > 1 or len(set(b)) > 1)
        assert qwk(a, b) == pytest.approx(qwk(b, a))

    def test_independent_raters_near_zero(self):
        rng = random.Random(0)
        a = [rng.randint(1, 3) for _ in range(20000)]
        b = [rng.randint(1, 3) for _ in range(20000)]
        assert abs(qwk(a, b)) < 0.03

    def test_out_of_scale(self):
        with pytest.raises(ValueError):
            qwk([1, 4], [1, 2])

    def test_weighted_aggregate(self):
        assert weighted_mean([0.34, 0.70, 0.41], [39, 18, 22]) == pytest.approx(34.88 / 79)
        assert round(weighted_mean([0.34, 0.70, 0.41], [39, 18, 22]), 2) == 0.44

    def test_pairwise_uses_overlap(self):
        recs = [RatingRecord(f"i{i}", r, "C", s) for i, (r, s) in enumerate(
            [("A", 1), ("A", 2), ("A", 3), ("A", 1)])]
        recs += [RatingRecord(f"i{i}", "B", "C", s) for i, s in enumerate([1, 2, 3, 2])]
        recs += [RatingRecord("i0", "C", "C", 1), RatingRecord("i1", "C", "C", 3)]
        out = pairwise_qwk_weighted(recs, "C")
        pairs = {tuple(p["raters"]): p for p in out["per_pair"]}
        assert pairs[("A", "B")]["n"] == 4 and pairs[("A", "C")]["n"] == 2
        want = weighted_mean([p["kappa"] for p in out["per_pair"]], [p["n"] for p in out["per_pair"]])
        assert out["aggregate"] == pytest.approx(want)

    @pytest.mark.parametrize("x,r", [(1.5, 2), (2.5, 3), (2.49, 2), (1.0, 1), (2.75, 3)])
    def test_round_half_up(self, x, r):
        assert round_half_up(x) == r


def experts(table):
    return [RatingRecord(item, rater, "C", s) for item, by in table.items() for rater, s in by.items()]


class TestJudgeAgreement:
    def test_mae_and_boundary(self):
        ex = experts({"i1": {"A": 2, "B": 3}, "i2": {"A": 1, "B": 1}, "i3": {"A": 3, "B": 3}})
        out = judge_agreement({"i1": 3.0, "i2": 1.5, "i3": 3.0, "extra": 2.0}, ex, "C")
        # diffs 0.5, 0.5, 0.0; 0.5 counts as within
        assert out["mae"] == pytest.approx(1 / 3)
        assert out["frac_within"] == 1.0
        assert out["n"] == 3 and out["n_judge_only"] == 1

    def test_no_shared_items(self):
        with pytest.raises(ValueError):
            judge_agreement({"zz": 1.0}, experts({"i1": {"A": 1}}), "C")

    def test_leave_one_out_by_hand(self):
        ex = experts({"i1": {"A": 1, "B": 2, "C": 3}, "i2": {"A": 2, "B": 3}, "i3": {"A": 1}})
        out = leave_one_out_agreement(ex, "C")
        # i1: |1-2.5|, |2-2|, |3-1.5|; i2: 1, 1
        diffs = [1.5, 0.0, 1.5, 1.0, 1.0]
        assert out["n_comparisons"] == 5 and out["n_two_rater_items"] == 1
        assert out["mae"] == pytest.approx(sum(diffs) / 5)
        assert out["frac_within"] == pytest.approx(1 / 5)


class TestStats:
    @pytest.mark.parametrize("x,n", [(0, 59), (2, 59), (30, 100), (100, 100)])
    def test_wilson_closed_form(self, x, n):
        z = 1.959963984540054
        p = x / n
        c = (p + z * z / (2 * n)) / (1 + z * z / n)
        h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
        assert wilson_interval(x, n) == pytest.approx((max(0.0, c - h), min(1.0, c + h)), abs=1e-15)

    @given(st.integers(1, 500).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
    def test_wilson_properties(self, xn):
        x, n = xn
        lo, hi = wilson_interval(x, n)
        assert 0 <= lo <= x / n <= hi <= 1
        rlo, rhi = wilson_interval(n - x, n)
        assert (lo, hi) == pytest.approx((1 - rhi, 1 - rlo), abs=1e-12)

    def test_wilson_bad_input(self):
        with pytest.raises(ValueError):
            wilson_interval(3, 2)

    def test_ttest_matches_scipy(self):
        a = [2.1, 1.8, 2.5, 2.0, 1.7, 2.2]
        b = [2.4, 2.0, 2.6, 2.5, 1.9, 2.6]
        res = paired_ttest(a, b)
        ref = sps.ttest_rel(a, b)
        assert res.t == pytest.approx(ref.statistic) and res.p_two_sided == pytest.approx(ref.pvalue)
        assert res.t < 0 and res.df == 5

    def test_ttest_degenerate(self):
        same = paired_ttest([1, 2], [1, 2])
        assert (same.t, same.p_two_sided) == (0.0, 1.0) and "zero_differences" in same.flags
        res = paired_ttest([2, 3], [1, 2])
        assert math.isinf(res.t) and res.p_two_sided == 0.0

    def test_ttest_needs_two(self):
        with pytest.raises(ValueError):
            paired_ttest([1], [2])

    def test_serious_issue_rate(self):
        out = serious_issue_rate([3.0, 2.5, 2.4, 1.0])
        assert out["count"] == 2 and out["n"] == 4 and out["rate"] == 0.5

    @pytest.mark.parametrize("p,mark", [(0.0005, "***"), (0.005, "**"), (0.03, "*"), (0.05, ""), (0.2, "")])
    def test_stars(self, p, mark):
        assert stars(p) == mark


class TestJudgeTable:
    def planted(self):
        rng = random.Random(5)
        base = [rng.uniform(1.5, 2.5) for _ in range(30)]
        return {
            "Sys A": {"Correctness": [b - 0.6 + rng.gauss(0, 0.05) for b in base],
                      "Tone": [b + rng.gauss(0, 0.3) for b in base]},
            "Sys B": {"Correctness": [b + rng.gauss(0, 0.05) for b in base],
                      "Tone": [b + rng.gauss(0, 0.3) for b in base]},
            "Sys C": {"Correctness": [b + 0.5 for b in base]},
        }

    def test_best_and_stars_match_direct_test(self):
        data = self.planted()
        table = aggregate_judge_scores(data)
        row = {r.criterion: r for r in table.rows}
        corr = row["Correctness"]
        assert (corr.best, corr.second) == ("Sys A", "Sys B")
        direct = paired_ttest(data["Sys A"]["Correctness"], data["Sys B"]["Correctness"])
        assert corr.test["p_two_sided"] == direct.p_two_sided and corr.stars == "***"
        assert set(row["Tone"].means) == {"Sys A", "Sys B"}

    def test_higher_is_better(self):
        table = aggregate_judge_scores(self.planted(), lower_is_better=False)
        assert table.rows[0].best == "Sys C"

    def test_tie_goes_to_first_system(self):
        table = aggregate_judge_scores({"X": {"c": [1, 2]}, "Y": {"c": [2, 1]}})
        assert table.rows[0].best == "X"

    def test_mismatched_queries(self):
        with pytest.raises(ValueError):
            aggregate_judge_scores({"X": {"c": {"q1": 1}}, "Y": {"c": {"q2": 1}}})


class TestDimensionMap:
    def test_apply(self):
        dm = DimensionMap.from_json({"Correctness": ["Correctness"],
                                     "Communication": {"criteria": ["Completeness", "Tone"], "combiner": "mean"}})
        recs = [RatingRecord("i1", "judge", c, s) for c, s in
                [("Correctness", 2), ("Completeness", 1), ("Tone", 2)]]
        recs.append(RatingRecord("i2", "judge", "Tone", 3))
        out = dm.apply(recs)
        assert out == {"Correctness": {"i1": 2.0}, "Communication": {"i1": 1.5}}

    @pytest.mark.parametrize("bad", [{"X": []}, {"X": {"criteria": ["a"], "combiner": "max"}}])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            DimensionMap.from_json(bad)


class TestLoadRatings:
    def test_csv_line_numbers(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("item_id,rater_id,dimension,score\ni1,A,C,2\ni1,A,C,3\n")
        with pytest.raises(InputError) as err:
            load_ratings(p)
        assert err.value.line == 3

    def test_out_of_scale(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("item_id,rater_id,dimension,score\ni1,A,C,7\n")
        with pytest.raises(InputError, match="outside"):
            load_ratings(p)

    def test_jsonl(self, tmp_path):
        from conftest import write_jsonl

        p = write_jsonl(tmp_path / "r.jsonl", [{"item_id": "i1", "rater_id": "A", "dimension": "C", "score": 2}])
        assert load_ratings(p) == [RatingRecord("i1", "A", "C", 2.0)]
