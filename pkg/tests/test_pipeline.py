from __future__ import annotations

import dataclasses
import time

import pytest

from maternal_rag.errors import InputError, ProviderError
from maternal_rag.pipeline import (FinalResponse, PipelineError, QueryEnvelope, TemplatePack, call_with_retries,
                                   cited_ids, normalize, parse_leading_label, render_template, run_pipeline)
from maternal_rag.providers import EchoGenerator, ScriptedGenerator
from maternal_rag.stage import NEWBORN, POSTPARTUM, PREGNANT, PlatformMetadata


class TestNormalize:
    @pytest.mark.parametrize("raw,out", [
        ("  hello   world \n", "hello world"),
        ("a\x00b\tc", "ab c"),
        ("x​y", "xy"),
        ("क‍ष", "क‍ष"),
    ])
    def test_cases(self, raw, out):
        assert normalize(raw) == out

    @pytest.mark.parametrize("raw", ["", "   ", "\x00\x01"])
    def test_empty(self, raw):
        with pytest.raises(InputError):
            normalize(raw)


class TestLabels:
    @pytest.mark.parametrize("raw,label,body", [
        ("PASS\nEat greens [c1].", "PASS", "Eat greens [c1]."),
        ("NOW-MED\nGo now", "NOW-MED", "Go now"),
        ("  SAME-DAY  \nCall today", "SAME-DAY", "Call today"),
    ])
    def test_parse(self, raw, label, body):
        ans = parse_leading_label(raw)
        assert (ans.label, ans.body, ans.malformed) == (label, body, False)

    @pytest.mark.parametrize("raw", ["Eat greens", "pass\nlower case", "NOW\nx", ""])
    def test_malformed(self, raw):
        ans = parse_leading_label(raw)
        assert ans.malformed and ans.label == "PASS"

    def test_cited_ids_filters_and_dedups(self):
        assert cited_ids("a [c2] b [zz] c [c1] [c2]", ["c1", "c2"]) == ("c2", "c1")


class TestRetries:
    def test_succeeds_after_failures(self):
        calls = []

        def flaky():
            calls.append(1)
            if len(calls) < 3:
                raise RuntimeError("again")
            return "ok"

        assert call_with_retries(flaky, max_retries=3, timeout=1) == "ok"
        assert len(calls) == 3

    def test_gives_up(self):
        calls = []

        def broken():
            calls.append(1)
            raise RuntimeError("no")

        with pytest.raises(ProviderError, match="4 attempts"):
            call_with_retries(broken, max_retries=3, timeout=1)
        assert len(calls) == 4

    def test_timeout(self):
        with pytest.raises(ProviderError, match="timed out"):
            call_with_retries(time.sleep, 0.5, max_retries=0, timeout=0.05)


def envelope(lang="en"):
    q = "test query"
    return QueryEnvelope(q, q, lang, q, PlatformMetadata(), PREGNANT, frozenset())


class TestTemplates:
    def test_fallback_to_english(self, engine):
        resp = render_template("SAME-DAY", envelope("as"), engine.templates)
        en, _ = engine.templates.lookup("SAME-DAY", "en")
        assert resp.text == en and "lang_fallback" in resp.flags

    def test_native(self, engine):
        resp = render_template("NOW-MED", envelope("hi"), engine.templates)
        assert resp.flags == () and resp.text == engine.templates.lookup("NOW-MED", "hi")[0]

    def test_pass_has_no_template(self, engine):
        with pytest.raises(ValueError):
            render_template("PASS", envelope(), engine.templates)

    def test_template_response_has_no_sources(self):
        with pytest.raises(ValueError):
            FinalResponse("x", "template", ("c1",))

    def test_pack_requires_english(self, tmp_path):
        from conftest import write_jsonl

        path = write_jsonl(tmp_path / "t.jsonl", [{"template": "NOW-MH", "lang": "hi", "text": "x"}])
        with pytest.raises(InputError, match="English"):
            TemplatePack.load(path)


def with_generator(engine, gen, **kw):
    return dataclasses.replace(engine, generator=gen, **kw)


class TestRunPipeline:
    def test_emergency_skips_retrieval(self, engine):
        resp = run_pipeline("I am bleeding heavily", None, engine)
        assert resp.kind == "template" and resp.label == "NOW-MED"
        assert "retrieval" not in resp.trace.names() and "generate" not in resp.trace.names()

    def test_informational(self, engine):
        resp = run_pipeline("What foods increase iron?", None, with_generator(engine, EchoGenerator()))
        assert resp.kind == "informational" and 0 < len(resp.sources) <= 7
        assert resp.trace.names()[-2:] == ["generate", "post_check"]

    def test_post_check_escalates(self, engine):
        gen = ScriptedGenerator([("iron", "NOW-MED\nThis needs care.")])
        resp = run_pipeline("What foods increase iron?", None, with_generator(engine, gen))
        assert resp.kind == "template" and resp.label == "NOW-MED" and resp.sources == ()

    def test_malformed_flagged(self, engine):
        gen = ScriptedGenerator(default="no label at all")
        resp = run_pipeline("What foods increase iron?", None, with_generator(engine, gen))
        assert resp.label == "PASS" and "malformed_label" in resp.flags

    def test_generator_failure(self, engine):
        class Down:
            def generate(self, parts):
                raise RuntimeError("503")

        with pytest.raises(PipelineError) as err:
            run_pipeline("What foods increase iron?", None, with_generator(engine, Down(), max_retries=0))
        assert err.value.trace.get("generate")["error"]

    def test_stage_override(self, engine):
        resp = run_pipeline("What foods increase iron?", None, with_generator(engine, EchoGenerator()),
                            stage_override=NEWBORN)
        assert resp.trace.get("stage")["stage"] == NEWBORN and resp.trace.get("stage")["override"]

    def test_metadata_stage(self, engine):
        resp = run_pipeline("What foods increase iron?", PlatformMetadata(postpartum_weeks=2),
                            with_generator(engine, EchoGenerator()))
        assert resp.trace.get("stage")["stage"] == POSTPARTUM

    def test_trace_ref_stable(self, engine):
        eng = with_generator(engine, EchoGenerator())
        a = run_pipeline("What foods increase iron?", None, eng).envelope()
        b = run_pipeline("What foods increase iron?", None, eng).envelope()
        assert a == b

    def test_no_translator_degrades(self, engine):
        eng = with_generator(engine, EchoGenerator(), translator=None)
        resp = run_pipeline("गर्भावस्था में आयरन के लिए क्या खाएं?", None, eng)
        assert resp.trace.get("language")["english_available"] is False
