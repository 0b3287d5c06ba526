"""Acceptance checks 1-12. Each prints one PASS/FAIL line with its measurement."""

from __future__ import annotations

import json
import math
import random
import re
import time
from collections import defaultdict

import numpy as np
import pytest
from scipy import integrate

from maternal_rag.benchgen import MIN_DIRECT, build_benchmark, dense_retriever
from maternal_rag.config import data_path
from maternal_rag.corpus import Chunk, ChunkStore, load_corpus
from maternal_rag.evalkit import (TriageConfusion, paired_ttest, qwk, retrieval_metrics, triage_scores,
                                  wilson_interval)
from maternal_rag.pipeline import run_pipeline
from maternal_rag.providers import (HashEmbedder, KeywordQuestionGenerator, OverlapLabeler, ScriptedGenerator,
                                    TableEmbedder)
from maternal_rag.retrieval import (Scored, ScoredList, bm25_retrieve, build_bm25_index, build_dense_index,
                                    dense_retrieve, rrf_fuse)
from maternal_rag.stage import NEWBORN, POSTPARTUM, PREGNANT, extract_stage
from maternal_rag.triage import EMERGENCY_NOW, PASS, SAME_DAY, pre_gen_triage


def report(n: int, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    ok = ok and elapsed < limit
    print(f"\nCRITERION {n:>2}: {'PASS' if ok else 'FAIL'} | {detail} | {elapsed:.3f}s (limit {limit:g}s)")


TRIAGE_ROWS = [
    ("Bleeding heavily since morning", PREGNANT, EMERGENCY_NOW),
    ("Baby has fever and is not feeding", NEWBORN, EMERGENCY_NOW),
    ("I can't go on anymore", PREGNANT, EMERGENCY_NOW),
    ("Breast is red and painful, have fever", POSTPARTUM, SAME_DAY),
    ("Baby moving less than usual", PREGNANT, SAME_DAY),
    ("Mild back pain at 24 weeks", PREGNANT, PASS),
    ("What foods increase iron?", PREGNANT, PASS),
]


def test_c01_triage_fixture_reproduction(rules, matcher, patterns):
    t0 = time.perf_counter()
    got = []
    for query, stage, _ in TRIAGE_ROWS:
        out = pre_gen_triage(query, query, stage, rules=rules, matcher=matcher)
        got.append(out.level)
    elapsed = time.perf_counter() - t0
    hits = sum(g == want for g, (_, _, want) in zip(got, TRIAGE_ROWS))
    report(1, hits == 7, f"{hits}/7 routing rows exact", elapsed, 1.0)
    assert got == [want for _, _, want in TRIAGE_ROWS]
    assert elapsed < 1.0


def test_c02_triage_metric_arithmetic():
    t0 = time.perf_counter()
    s = triage_scores(TriageConfusion(tp=78, fn=12, fp=9, tn=51))
    shown = {k: round(100 * v, 1) for k, v in s.items()}
    elapsed = time.perf_counter() - t0
    want = {"recall": 86.7, "precision": 89.7, "fn_rate": 13.3, "fp_rate": 15.0}
    report(2, shown == want, f"got {shown}", elapsed, 1.0)
    assert shown == want
    assert elapsed < 1.0


def test_c03_wilson_intervals():
    t0 = time.perf_counter()
    got = {case: tuple(round(100 * x, 1) for x in wilson_interval(*case)) for case in [(2, 59), (0, 59)]}
    elapsed = time.perf_counter() - t0
    want = {(2, 59): (0.9, 11.7), (0, 59): (0.0, 6.1)}
    report(3, got == want, f"got {got}, expected {want}", elapsed, 1.0)
    assert got == want
    assert elapsed < 1.0


def brute_rrf(lists, k=60):
    scores = defaultdict(float)
    for lst in lists:
        for rank, cid in enumerate(lst, start=1):
            scores[cid] += 1.0 / (rank + k)
    return [cid for cid, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))]


def test_c04_rrf_oracle_equivalence():
    rng = random.Random(4)
    t0 = time.perf_counter()
    agree = 0
    for _ in range(1000):
        pool = [f"d{i:02d}" for i in range(rng.randint(1, 50))]
        lists = []
        for _ in range(rng.randint(1, 5)):
            ids = rng.sample(pool, rng.randint(0, len(pool)))
            lists.append(ScoredList(tuple(Scored(c, float(len(ids) - i)) for i, c in enumerate(ids))))
        fused = rrf_fuse(lists)
        agree += fused.ids() == brute_rrf([l.ids() for l in lists])
    elapsed = time.perf_counter() - t0
    report(4, agree == 1000, f"{agree}/1000 orderings agree", elapsed, 10.0)
    assert agree == 1000
    assert elapsed < 10.0


def brute_metrics(ranking, direct, k):
    top = ranking[:k]
    found = [c for c in top if c in direct]
    rr = 0.0
    for pos, c in enumerate(ranking, start=1):
        if c in direct:
            rr = 1 / pos
            break
    return len(found) / len(direct), float(bool(found)), rr


def test_c05_retrieval_metric_oracle():
    rng = random.Random(5)
    ks = (1, 3, 5, 10, 20)
    t0 = time.perf_counter()
    agree = 0
    for _ in range(1000):
        pool = [f"c{i}" for i in range(rng.randint(1, 60))]
        ranking = rng.sample(pool, rng.randint(0, len(pool)))
        direct = set(rng.sample(pool, rng.randint(1, len(pool))))
        m = retrieval_metrics(ranking, direct, ks)
        ok = all((m.recall_at[k], m.hit_at[k], m.mrr) == brute_metrics(ranking, direct, k) for k in ks)
        agree += ok
    elapsed = time.perf_counter() - t0
    report(5, agree == 1000, f"{agree}/1000 instances agree", elapsed, 10.0)
    assert agree == 1000
    assert elapsed < 10.0


def textbook_bm25(docs: dict[str, str], query: str, k1=1.2, b=0.75) -> dict[str, float]:
    toks = {d: re.findall(r"\w+", t.lower()) for d, t in docs.items()}
    n = len(docs)
    avgdl = sum(len(t) for t in toks.values()) / n
    out = {}
    for d, words in toks.items():
        total = 0.0
        for term in re.findall(r"\w+", query.lower()):
            df = sum(1 for w in toks.values() if term in w)
            if df == 0:
                continue
            idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
            tf = words.count(term)
            total += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(words) / avgdl))
        out[d] = total
    return out


def test_c06_bm25_reference():
    docs = {
        "a": "iron tablets every day in pregnancy",
        "b": "iron rich foods and iron tablets help anaemia during pregnancy and after birth",
        "c": "count the baby kicks every day",
    }
    query = "iron tablets kicks anaemia pregnancy iron"
    t0 = time.perf_counter()
    store = ChunkStore([Chunk(k, v, "fixture", "en", "", ()) for k, v in docs.items()])
    got = {s.chunk_id: s.score for s in bm25_retrieve(build_bm25_index(store), query)}
    elapsed = time.perf_counter() - t0
    want = textbook_bm25(docs, query)
    worst = max(abs(got.get(d, 0.0) - w) for d, w in want.items())
    report(6, worst <= 1e-9, f"max |diff| = {worst:.2e}", elapsed, 1.0)
    assert worst <= 1e-9
    assert elapsed < 1.0


def test_c07_hybrid_coverage_planted():
    t0 = time.perf_counter()
    store = load_corpus(data_path("planted_corpus.jsonl"))
    planted = json.loads(open(data_path("planted_vectors.json"), encoding="utf-8").read())
    emb = TableEmbedder.from_json(data_path("planted_vectors.json"))
    query, lex, sem = planted["query"], planted["lexical_only"], planted["semantic_only"]
    dense = dense_retrieve(build_dense_index(store, emb), query, 15, emb)
    sparse = bm25_retrieve(build_bm25_index(store), query)
    fused = rrf_fuse([dense, sparse])
    d5, s5, f5 = set(dense.ids()[:5]), set(sparse.ids()[:5]), set(fused.ids()[:5])
    elapsed = time.perf_counter() - t0
    ok = {lex, sem} <= f5 and not {lex, sem} <= d5 and not {lex, sem} <= s5
    report(7, ok, f"fused@5 has both={ {lex, sem} <= f5}, dense@5 both={ {lex, sem} <= d5}, "
                  f"bm25@5 both={ {lex, sem} <= s5}", elapsed, 1.0)
    assert ok
    assert elapsed < 1.0


def brute_qwk(a, b, k=3):
    n = len(a)
    o = [[0.0] * k for _ in range(k)]
    for x, y in zip(a, b):
        o[x - 1][y - 1] += 1
    ra = [sum(row) for row in o]
    cb = [sum(o[i][j] for i in range(k)) for j in range(k)]
    num = den = 0.0
    for i in range(k):
        for j in range(k):
            w = (i - j) ** 2 / (k - 1) ** 2
            num += w * o[i][j] / n
            den += w * ra[i] * cb[j] / (n * n)
    return 1 - num / den


def test_c08_qwk_oracle():
    rng = random.Random(8)
    t0 = time.perf_counter()
    worst = 0.0
    self_ok = True
    for _ in range(100):
        a = [rng.randint(1, 3) for _ in range(200)]
        b = [rng.randint(1, 3) for _ in range(200)]
        worst = max(worst, abs(qwk(a, b) - brute_qwk(a, b)))
        self_ok &= qwk(a, a) == 1.0
    elapsed = time.perf_counter() - t0
    report(8, worst <= 1e-12 and self_ok, f"max |diff| = {worst:.2e}, self-kappa 1: {self_ok}", elapsed, 5.0)
    assert worst <= 1e-12 and self_ok
    assert elapsed < 5.0


def quad_t_two_sided(t: float, df: int) -> float:
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    density = lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2)  # noqa: E731
    tail, _ = integrate.quad(density, abs(t), math.inf, epsabs=1e-13, epsrel=1e-12)
    return 2 * tail


def test_c09_paired_ttest_quadrature():
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 40))
        a = rng.normal(1.5, 0.4, n)
        b = a + rng.normal(rng.uniform(-0.3, 0.3), 0.3, n)
        res = paired_ttest(a, b)
        worst = max(worst, abs(res.p_two_sided - quad_t_two_sided(res.t, res.df)))
    elapsed = time.perf_counter() - t0
    report(9, worst <= 1e-6, f"max |p diff| = {worst:.2e}", elapsed, 5.0)
    assert worst <= 1e-6
    assert elapsed < 5.0


def fuzz_queries(rules, n: int, seed: int = 10) -> list[str]:
    rng = random.Random(seed)
    now_examples = [r.example for r in rules if r.level == EMERGENCY_NOW]
    sd_examples = [r.example for r in rules if r.level == SAME_DAY]
    benign = ["what foods increase iron?", "how often should I breastfeed", "is walking safe",
              "mild back pain at 24 weeks", "when is the next vaccine", "how to count kicks",
              "can I drink tea", "tips for sleep in pregnancy", "baby vaccination schedule"]
    prefixes = ["", "I am 30 weeks pregnant and ", "my baby is 5 days old and ", "after my delivery ",
                "hello, ", "please help: "]
    out = []
    for i in range(n):
        kind = i % 4
        if kind == 0:
            body = rng.choice(now_examples)
        elif kind == 1:
            body = rng.choice(["no ", "not ", "never ", "without "]) + rng.choice(now_examples)
        elif kind == 2:
            body = rng.choice(sd_examples)
        else:
            body = rng.choice(benign)
        out.append(rng.choice(prefixes) + body + rng.choice(["", "?", " since morning", " today"]))
    return out


def test_c10_pipeline_safety_invariants(engine, rules):
    queries = fuzz_queries(rules, 500)
    # the generator sometimes emits an escalation label, sometimes garbage
    script = [("iron", "NOW-MED\nsee a doctor [x]"), ("vaccine", "SAME-DAY\ngo today"),
              ("kicks", "no label here")]
    eng = type(engine)(**{**vars(engine), "generator": ScriptedGenerator(script, default="PASS\nok")})
    t0 = time.perf_counter()
    violations = []
    for q in queries:
        resp = run_pipeline(q, None, eng)
        names = resp.trace.names()
        triage = resp.trace.get("triage")
        if triage["level"] != PASS:
            if "retrieval" in names or "generate" in names or resp.kind != "template":
                violations.append(("short_circuit", q))
        if resp.kind == "template" and resp.sources:
            violations.append(("template_sources", q))
        if resp.kind == "informational":
            post = resp.trace.get("post_check")
            if resp.label != PASS or post is None or post["label"] != PASS:
                violations.append(("post_check", q))
        gen = resp.trace.get("post_check")
        if gen is not None and gen["label"] != PASS and resp.kind != "template":
            violations.append(("label_surfaced", q))
    elapsed = time.perf_counter() - t0
    report(10, not violations, f"{len(violations)} violations over {len(queries)} fuzzed queries", elapsed, 30.0)
    assert not violations, violations[:5]
    assert elapsed < 30.0


def test_c11_benchmark_determinism(store):
    emb = HashEmbedder()
    t0 = time.perf_counter()
    texts = []
    benches = []
    for _ in range(2):
        retriever = dense_retriever(build_dense_index(store, emb), emb)
        b = build_benchmark(store, 10, retriever, KeywordQuestionGenerator(), OverlapLabeler(), seed=42)
        benches.append(b)
        texts.append(b.dumps())
    elapsed = time.perf_counter() - t0
    bench = benches[0]
    n_ok = sum(len(it.direct_ids()) >= MIN_DIRECT for it in bench.items)
    ok = texts[0] == texts[1] and len(bench.items) == 10 and n_ok == 10
    report(11, ok, f"identical={texts[0] == texts[1]}, items={len(bench.items)}/10, >=2 DIRECT: {n_ok}",
           elapsed, 10.0)
    assert ok
    assert elapsed < 10.0


def test_c12_negation_guard(rules, matcher):
    now_rules = [r for r in rules if r.level == EMERGENCY_NOW]
    t0 = time.perf_counter()
    failures = []
    for r in now_rules:
        query = "no " + r.example
        for stage in r.stages:
            out = pre_gen_triage(query, query, stage, rules=rules, matcher=matcher)
            if out.level != PASS:
                failures.append((r.id, stage, out.level, out.provenance.get("step")))
    elapsed = time.perf_counter() - t0
    report(12, not failures, f"{len(now_rules) - len({f[0] for f in failures})}/{len(now_rules)} "
                             f"NOW rules suppressed", elapsed, 1.0)
    assert not failures, failures
    assert elapsed < 1.0


@pytest.mark.parametrize("query,stage,_", TRIAGE_ROWS)
def test_inferred_stage_matches_row(query, stage, _, patterns):
    # the routing rows also resolve to their stage from text alone
    assert extract_stage(query, None, patterns) == stage
