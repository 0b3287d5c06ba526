"""Tokenization, hashing and JSONL helpers shared by every module."""

from __future__ import annotations

import hashlib
import json
import unicodedata
from pathlib import Path
from typing import Any, Iterator

from .errors import InputError


def _is_word_char(ch: str) -> bool:
    # letters, digits and combining marks (Indic vowel signs are Mn/Mc)
    return unicodedata.category(ch)[0] in "LNM"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-letter/non-digit boundary.

    No stemming and no stopwords, so it behaves the same for every script.
    """
    tokens = []
    buf: list[str] = []
    for ch in text.lower():
        if _is_word_char(ch):
            buf.append(ch)
        elif buf:
            tokens.append("".join(buf))
            buf = []
    if buf:
        tokens.append("".join(buf))
    return tokens


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def digest(obj: Any) -> str:
    """Short stable digest of any JSON-serializable value."""
    blob = json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return sha256_hex(blob)[:16]


def dumps(obj: Any) -> str:
    """Canonical JSON used for every artifact written to disk."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, record)`` for each non-blank line of a UTF-8 JSONL file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read file: {exc.strerror}", path=path) from exc
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"file is not valid UTF-8 ({exc.reason})", path=path) from exc
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc.msg}", path=path, line=lineno) from exc
        if not isinstance(record, dict):
            raise InputError("record must be a JSON object", path=path, line=lineno)
        yield lineno, record
