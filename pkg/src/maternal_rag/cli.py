"""Command-line entry point: index, ask, triage, benchgen, eval."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path

from . import factory, plotting, reports
from .benchgen import Benchmark, audit_gold, benchmark_stats, build_benchmark, dense_retriever
from .config import RunConfig, data_path
from .corpus import load_corpus
from .errors import InputError, MissingArtifactError, ProviderError
from .evalkit import (DEFAULT_KS, DimensionMap, TriageConfusion, aggregate_judge_scores, evaluate_rankings,
                      expert_consensus, judge_agreement, leave_one_out_agreement, load_ratings,
                      pairwise_qwk_weighted, serious_issue_rate, severity_breakdown, triage_scores)
from .pipeline import PipelineError, Trace, build_envelope, run_pipeline, triage_envelope
from .providers import KeywordQuestionGenerator, OverlapLabeler
from .retrieval import build_dense_index, system_rankings
from .stage import STAGES, PlatformMetadata
from .text import dumps, iter_jsonl
from .triage import LEVELS

log = logging.getLogger("maternal_rag")

EXIT_OK, EXIT_INPUT, EXIT_MISSING, EXIT_PROVIDER = 0, 2, 3, 4


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run configuration (flags override --config)")
    group.add_argument("--config", help="JSON config file; fields below override it")
    group.add_argument("--jobs", type=int, default=1, help="worker threads for batch evaluation (default: 1)")
    defaults = RunConfig()
    for f in fields(RunConfig):
        default = getattr(defaults, f.name)
        help_text = f"{RunConfig.HELP.get(f.name, '')} (default: {default})"
        if isinstance(default, bool):
            group.add_argument(_flag(f.name), dest=f.name, action=argparse.BooleanOptionalAction,
                               default=argparse.SUPPRESS, help=help_text)
        else:
            group.add_argument(_flag(f.name), dest=f.name, type=type(default), default=argparse.SUPPRESS,
                               metavar=f.name.upper(), help=help_text)
    return parent


def resolve_config(args) -> RunConfig:
    base = RunConfig.from_file(args.config).to_dict() if getattr(args, "config", None) else {}
    for name in RunConfig.field_names():
        if name in vars(args):
            base[name] = getattr(args, name)
    return RunConfig.from_dict(base)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def _meta(args) -> PlatformMetadata:
    try:
        return PlatformMetadata(args.gestational_week, args.postpartum_weeks, args.newborn_age_days)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _pool_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# commands

def cmd_index(cfg: RunConfig, args) -> int:
    manifest, rebuilt = factory.build_indexes(cfg, force=args.force)
    _emit({"index_dir": cfg.index_dir, "rebuilt": rebuilt, **manifest})
    return EXIT_OK


def cmd_ask(cfg: RunConfig, args) -> int:
    engine = factory.build_engine(cfg)
    try:
        resp = run_pipeline(args.query, _meta(args), engine, stage_override=args.stage_override)
    except PipelineError as exc:
        trace = exc.trace or Trace()
        out = {"kind": "error", "error": str(exc), "trace_ref": trace.ref()}
        if args.trace:
            out["trace"] = trace.to_json()
        _emit(out)
        return EXIT_PROVIDER
    out = resp.envelope()
    if args.trace:
        out["trace"] = resp.trace.to_json(timing=not args.no_timing)
    _emit(out)
    return EXIT_OK


def _triage_one(engine, query: str, meta: PlatformMetadata, stage_override=None) -> dict:
    trace = Trace()
    env = build_envelope(query, meta, engine, trace, stage_override)
    outcome = triage_envelope(env, engine, trace)
    return {"query": env.normalized, "lang": env.lang, "english_available": env.english_available,
            "stage": env.stage, "concerns": sorted(env.concerns), "level": outcome.level,
            "template": outcome.template, "degraded": outcome.degraded, "provenance": outcome.provenance}


def cmd_triage(cfg: RunConfig, args) -> int:
    engine = factory.build_triage_engine(cfg)
    _emit(_triage_one(engine, args.query, _meta(args), args.stage_override))
    return EXIT_OK


def cmd_benchgen(cfg: RunConfig, args) -> int:
    store = load_corpus(cfg.corpus)
    embedder = factory.make_embedder(cfg.embedder, cfg.embed_dim)
    retriever = dense_retriever(build_dense_index(store, embedder), embedder)
    bench = build_benchmark(store, args.n_items, retriever, KeywordQuestionGenerator(), OverlapLabeler(),
                            cfg.seed, k_dense=cfg.k_dense)
    bench.save(args.out)
    stats = benchmark_stats(bench) if bench.items else {"n_items": 0}
    _emit({"out": str(args.out), "stats": stats, "skipped": bench.skipped})
    return EXIT_OK


def _eval_retrieval(cfg: RunConfig, args) -> int:
    bench = Benchmark.load(args.benchmark)
    if not bench.items:
        raise InputError("benchmark has no items", path=args.benchmark)
    engine = factory.build_engine(cfg)
    store = engine.indexes.store
    if bench.corpus_digest != store.digest():
        raise InputError("benchmark was built from a different corpus than the configured one",
                         path=args.benchmark)
    ks = sorted(set(args.ks)) if args.ks else list(DEFAULT_KS)
    depth = max(max(ks), args.audit_depth)
    per_query = _pool_map(
        lambda it: system_rankings(it.question, engine.indexes, engine.embedder, depth=depth, k_rrf=cfg.k_rrf,
                                   reranker=engine.reranker, reranker_name=f"{cfg.reranker} rerank"),
        bench.items, args.jobs)
    systems = list(per_query[0])
    results, data = {}, {"n_items": len(bench.items), "ks": ks, "systems": {}}
    for name in systems:
        agg, _ = evaluate_rankings(bench, [q[name] for q in per_query], ks)
        results[name] = agg
        data["systems"][name] = agg.to_json()
    data["benchmark_stats"] = benchmark_stats(bench)
    text = reports.retrieval_table(results, ks)
    if args.audit_depth:
        best = systems[0]
        audit = audit_gold(bench, [q[best] for q in per_query], OverlapLabeler(), args.audit_depth, store)
        data["audit"] = {"system": best, **audit.to_json()}
        fr = audit.fractions()
        text += (f"\nGold audit ({best}, depth {args.audit_depth}): {audit.n_audited} audited, "
                 f"{reports.pct(fr.get('DIRECT', 0.0))} newly DIRECT\n")
    paths = reports.write_report(args.out, "retrieval", data, text)
    paths.append(plotting.recall_curves(results, ks, Path(args.out) / "retrieval_recall.png"))
    sys.stdout.write(text)
    return EXIT_OK


def load_triage_fixture(path) -> list[dict]:
    items = []
    for lineno, rec in iter_jsonl(path):
        if not isinstance(rec.get("query"), str) or rec.get("gold") not in LEVELS:
            raise InputError(f"need a string 'query' and 'gold' in {list(LEVELS)}", path=path, line=lineno)
        try:
            meta = PlatformMetadata.from_dict(rec.get("meta"))
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad meta: {exc}", path=path, line=lineno) from exc
        if rec.get("stage") is not None and rec["stage"] not in STAGES:
            raise InputError(f"unknown stage {rec['stage']!r}", path=path, line=lineno)
        items.append({"id": str(rec.get("id", lineno)), "query": rec["query"], "meta": meta,
                      "stage": rec.get("stage"), "gold": rec["gold"], "lang": rec.get("lang")})
    if not items:
        raise InputError("triage fixture is empty", path=path)
    return items


def _eval_triage(cfg: RunConfig, args) -> int:
    items = load_triage_fixture(args.fixture)
    engine = factory.build_triage_engine(cfg)
    preds = _pool_map(lambda it: _triage_one(engine, it["query"], it["meta"], it["stage"]), items, args.jobs)
    levels = [p["level"] for p in preds]
    gold = [it["gold"] for it in items]
    conf = TriageConfusion.from_labels(levels, gold)
    scores = triage_scores(conf, strict=False)
    breakdown = severity_breakdown(levels, gold)
    by_lang = {}
    for it, p in zip(items, preds):
        by_lang.setdefault(it["lang"] or p["lang"], ([], []))
        by_lang[it["lang"] or p["lang"]][0].append(p["level"])
        by_lang[it["lang"] or p["lang"]][1].append(it["gold"])
    lang_rows = {}
    for lang, (pl, gl) in sorted(by_lang.items()):
        c = TriageConfusion.from_labels(pl, gl)
        lang_rows[lang] = {"n": c.n, "accuracy": (c.tp + c.tn) / c.n,
                           "recall": triage_scores(c, strict=False)["recall"]}
    missed = [it["gold"] for it, p in zip(items, preds) if it["gold"] != "PASS" and p["level"] == "PASS"]
    data = {"n": len(items), "confusion": conf.to_json(), "scores": scores, "severity": breakdown,
            "by_language": lang_rows,
            "missed_by_gold": {g: missed.count(g) for g in sorted(set(missed))},
            "items": [{"id": it["id"], "gold": it["gold"], "pred": p["level"], "stage": p["stage"]}
                      for it, p in zip(items, preds)]}
    text = reports.triage_table(conf, scores, breakdown)
    text += "\n" + reports.render_table(
        ["Language", "n", "Accuracy", "Recall"],
        [[lang, r["n"], reports.pct(r["accuracy"]), reports.pct(r["recall"])] for lang, r in lang_rows.items()])
    reports.write_report(args.out, "triage", data, text)
    plotting.confusion_heatmap(conf, Path(args.out) / "triage_confusion.png")
    sys.stdout.write(text)
    return EXIT_OK


def _eval_agreement(cfg: RunConfig, args) -> int:
    experts = load_ratings(args.experts, scale=args.scale)
    judge_records = load_ratings(args.judge, scale=args.scale) if args.judge else []
    dmap = DimensionMap.load(args.dimension_map) if args.dimension_map else None
    judge_by_dim = dmap.apply(judge_records) if (dmap and judge_records) else {}
    dims = args.dimensions or sorted({r.dimension for r in experts})
    rows, data = [], {"dimensions": {}}
    for dim in dims:
        row, entry = {"dimension": dim}, {}
        try:
            pw = pairwise_qwk_weighted(experts, dim, scale=args.scale)
            row.update(hh_qwk=pw["aggregate"], hh_range=pw["range"])
            entry["pairwise"] = pw
        except ValueError as exc:
            entry["pairwise_error"] = str(exc)
        try:
            loo = leave_one_out_agreement(experts, dim)
            row.update(hh_mae=loo["mae"], hh_within=loo["frac_within"])
            entry["leave_one_out"] = loo
        except ValueError as exc:
            entry["leave_one_out_error"] = str(exc)
        judge = judge_by_dim.get(dim) or {r.item_id: r.score for r in judge_records if r.dimension == dim}
        if judge:
            ja = judge_agreement(judge, experts, dim, scale=args.scale)
            row.update(jh_mae=ja["mae"], jh_within=ja["frac_within"], jh_qwk=ja.get("qwk"))
            entry["judge"] = ja
        entry["serious_issues"] = serious_issue_rate(expert_consensus(experts, dim).values())
        rows.append(row)
        data["dimensions"][dim] = entry
    text = reports.distance_table(rows) + "\n" + reports.kappa_table(rows)
    text += "\n" + reports.serious_issue_table(
        [{"dimension": d, **e["serious_issues"]} for d, e in data["dimensions"].items()])
    text += "QWK against the expert mean rounds both sides half-up to the nearest category.\n"
    reports.write_report(args.out, "agreement", data, text)
    plotting.agreement_bars(rows, Path(args.out) / "agreement.png")
    sys.stdout.write(text)
    return EXIT_OK


def load_judge_scores(path) -> dict:
    """JSONL {system, query_id, criterion, score} -> system -> criterion -> query_id -> score."""
    out: dict = {}
    seen = set()
    for lineno, rec in iter_jsonl(path):
        try:
            key = (str(rec["system"]), str(rec["criterion"]), str(rec["query_id"]))
            score = float(rec["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"need system, criterion, query_id and numeric score ({exc})",
                             path=path, line=lineno) from None
        if key in seen:
            raise InputError(f"duplicate score for {key}", path=path, line=lineno)
        seen.add(key)
        out.setdefault(key[0], {}).setdefault(key[1], {})[key[2]] = score
    if not out:
        raise InputError("no judge scores", path=path)
    return out


def _eval_judge_table(cfg: RunConfig, args) -> int:
    per_query = load_judge_scores(args.scores)
    try:
        table = aggregate_judge_scores(per_query, lower_is_better=not args.higher_is_better)
    except ValueError as exc:
        raise InputError(str(exc), path=args.scores) from exc
    text = reports.judge_table(table)
    reports.write_report(args.out, "judge_table", table.to_json(), text)
    plotting.judge_heatmap(table, Path(args.out) / "judge_table.png")
    sys.stdout.write(text)
    return EXIT_OK


EVAL_COMMANDS = {"retrieval": _eval_retrieval, "triage": _eval_triage, "agreement": _eval_agreement,
                 "judge-table": _eval_judge_table}


def cmd_eval(cfg: RunConfig, args) -> int:
    return EVAL_COMMANDS[args.eval_command](cfg, args)


def _add_meta(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gestational-week", type=int, help="host-supplied gestational week")
    p.add_argument("--postpartum-weeks", type=int, help="host-supplied weeks since delivery")
    p.add_argument("--newborn-age-days", type=int, help="host-supplied newborn age in days")
    p.add_argument("--stage-override", choices=STAGES, help="force the life stage")


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(
        prog="maternal-rag", parents=[parent],
        description="Stage-aware triage and retrieval-grounded answering over a guideline corpus.",
        epilog="Exit codes: 0 ok, 2 input error, 3 missing artifact, 4 provider failure.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", parents=[parent], help="build BM25 and dense index snapshots")
    p.add_argument("--force", action="store_true", help="rebuild even if the manifest matches")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ask", parents=[parent], help="answer one query through the full pipeline")
    p.add_argument("query")
    _add_meta(p)
    p.add_argument("--trace", action="store_true", help="include the step-by-step trace")
    p.add_argument("--no-timing", action="store_true", help="omit step timings from the trace")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("triage", parents=[parent], help="run stage detection and triage only")
    p.add_argument("query")
    _add_meta(p)
    p.set_defaults(func=cmd_triage)

    p = sub.add_parser("benchgen", parents=[parent], help="build a synthetic multi-evidence benchmark")
    p.add_argument("--n-items", type=int, default=10, help="items to generate (default: 10)")
    p.add_argument("--out", required=True, help="benchmark JSON path")
    p.set_defaults(func=cmd_benchgen)

    p = sub.add_parser("eval", parents=[parent], help="evaluation reports (JSON, text, PNG)")
    esub = p.add_subparsers(dest="eval_command", required=True)
    e = esub.add_parser("retrieval", parents=[parent], help="Recall/Hit@K and MRR per retriever")
    e.add_argument("--benchmark", required=True)
    e.add_argument("--ks", type=int, nargs="+", help=f"cutoffs (default: {' '.join(map(str, DEFAULT_KS))})")
    e.add_argument("--audit-depth", type=int, default=0, help="re-label top-N non-gold chunks (default: 0)")
    e.add_argument("--out", default="reports")
    e = esub.add_parser("triage", parents=[parent], help="binary and per-severity triage scores")
    e.add_argument("--fixture", default=data_path("triage_fixture.jsonl"),
                   help="JSONL {id, query, gold, meta?, stage?, lang?} (default: shipped fixture)")
    e.add_argument("--out", default="reports")
    e = esub.add_parser("agreement", parents=[parent], help="QWK, MAE and within-0.5 agreement tables")
    e.add_argument("--experts", required=True, help="expert ratings CSV/JSONL")
    e.add_argument("--judge", help="judge ratings CSV/JSONL (judge criteria as dimensions)")
    e.add_argument("--dimension-map", help="JSON map expert dimension -> judge criteria")
    e.add_argument("--dimensions", nargs="+", help="expert dimensions to report (default: all)")
    e.add_argument("--scale", type=int, default=3, help="rating categories, starting at 1 (default: 3)")
    e.add_argument("--out", default="reports")
    e = esub.add_parser("judge-table", parents=[parent], help="mean judge scores with significance marks")
    e.add_argument("--scores", required=True, help="JSONL {system, query_id, criterion, score}")
    e.add_argument("--higher-is-better", action="store_true")
    e.add_argument("--out", default="reports")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return args.func(cfg, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
