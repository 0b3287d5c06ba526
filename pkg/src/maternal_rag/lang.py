"""Script-based language detection and the English view of a query."""

from __future__ import annotations

import unicodedata

from .errors import TranslationError

SCRIPT_LANG = {"LATIN": "en", "DEVANAGARI": "hi", "BENGALI": "as"}
# tie-break order when two scripts have equal counts
_PRIORITY = ("en", "hi", "as")
MIN_CONFIDENCE = 0.5


def script_of(ch: str) -> str | None:
    if not unicodedata.category(ch).startswith(("L", "M")):
        return None
    try:
        name = unicodedata.name(ch)
    except ValueError:
        return "OTHER"
    first = name.split(" ", 1)[0]
    return first if first in SCRIPT_LANG else "OTHER"


def script_histogram(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for ch in text:
        script = script_of(ch)
        if script is not None:
            counts[script] = counts.get(script, 0) + 1
    return counts


def detect_language(text: str, min_confidence: float = MIN_CONFIDENCE) -> str:
    """Tag text as en/hi/as by majority script; ``und`` when no script dominates.

    Latin-script Hindi (code-mixed) comes out as ``en``.
    """
    if not text or not text.strip():
        raise ValueError("cannot detect language of empty text")
    counts = script_histogram(text)
    total = sum(counts.values())
    if total == 0:
        return "und"
    by_lang = {lang: counts.get(script, 0) for script, lang in SCRIPT_LANG.items()}
    best = max(_PRIORITY, key=lambda lang: (by_lang[lang], -_PRIORITY.index(lang)))
    if by_lang[best] == 0 or by_lang[best] / total < min_confidence:
        return "und"
    return best


def english_view(query: str, lang: str, translator) -> str:
    if lang == "en":
        return query
    try:
        out = translator.translate(query, "en")
    except TranslationError:
        raise
    except Exception as exc:
        raise TranslationError(f"translator failed: {exc}", query) from exc
    if not isinstance(out, str) or not out.strip():
        raise TranslationError("translator returned empty text", query)
    return out
