"""Strict parsers for the three model output grammars.

Every parser is total: it either returns a value or raises FormatError,
regardless of input bytes.
"""

from __future__ import annotations

import json
import re
from typing import Optional, Tuple

from .model import SafetyState


class FormatError(Exception):
    """Model output does not follow the required grammar."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


def _first_json_object(text: str) -> Optional[dict]:
    """Return the first balanced JSON object embedded in text, if any."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(text[start:i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj
                    break
        start = text.find("{", start + 1)
    return None


def parse_fast_output(raw: str) -> Tuple[SafetyState, str]:
    """Parse the traffic-light JSON reply: {"category": ..., "reason": ...}.

    Takes the first JSON object in the text; model preamble and trailing
    prose are ignored.  The category is matched case-insensitively.
    """
    obj = _first_json_object(raw)
    if obj is None:
        raise FormatError("no_json_object", raw[:80])
    category = obj.get("category")
    if not isinstance(category, str):
        raise FormatError("missing_category")
    try:
        state = SafetyState(category.strip().lower())
    except ValueError:
        raise FormatError("unknown_category", category) from None
    reason = obj.get("reason")
    return state, reason if isinstance(reason, str) else ""


_VERDICT_RE = re.compile(r"VERDICT[^A-Za-z]*?\**\s*\[?\s*(DANGER|SAFE)\s*\]?", re.IGNORECASE)


def parse_slow_output(raw: str) -> int:
    """Parse the structured-reasoning reply; returns 1 for DANGER, 0 for SAFE.

    Scans for the last line containing a VERDICT marker so trailing prose
    after the analysis block does not confuse the result.
    """
    verdict_lines = [line for line in raw.splitlines() if "VERDICT" in line.upper()]
    if not verdict_lines:
        raise FormatError("missing_verdict", raw[:80])
    match = _VERDICT_RE.search(verdict_lines[-1])
    if not match:
        raise FormatError("unknown_verdict", verdict_lines[-1][:80])
    return 1 if match.group(1).upper() == "DANGER" else 0


_PART_RE = re.compile(r"Part\s*(\d)\s*[:.]", re.IGNORECASE)


def _part_text(raw: str, part: int) -> Optional[str]:
    """Text between the 'Part N:' marker and the next part marker (or EOF)."""
    matches = list(_PART_RE.finditer(raw))
    for i, m in enumerate(matches):
        if m.group(1) == str(part):
            end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
            return raw[m.end():end]
    return None


def _clean_token(text: str) -> str:
    token = text.strip()
    token = re.sub(r"^\[?(Verdict|Severity|Reasoning)\]?\s*:?", "", token, flags=re.IGNORECASE)
    return token.strip().strip("*[]'\"` \n").strip()


def _first_token(text: str) -> Optional[str]:
    """First non-empty cleaned line; labels like '[Verdict]' may occupy a
    line of their own before the actual token."""
    for line in text.splitlines():
        token = _clean_token(line)
        if token:
            return token
    return None


def parse_baseline_verdict(raw: str, window_start: float, window_end: float):
    """Parse a Part-2 verdict: 'Safe' or a timestamp inside the window.

    Returns "safe" or the hazard timestamp (float).  Timestamps outside
    [window_start, window_end] are a grammar violation and raise
    FormatError(out_of_range).
    """
    if window_start > window_end:
        raise ValueError("window_start must not exceed window_end")
    text = _part_text(raw, 2)
    token = None if text is None else _first_token(text)
    if token is None:
        raise FormatError("missing_part2", raw[:80])
    if token.lower() == "safe":
        return "safe"
    token = token.rstrip("s")  # tolerate a trailing seconds unit
    try:
        value = float(token)
    except ValueError:
        raise FormatError("not_a_number", token[:80]) from None
    if not (window_start <= value <= window_end):
        raise FormatError("out_of_range", f"{value} not in [{window_start}, {window_end}]")
    return value


_LEVELS = {"none": "none", "l1": "L1", "l2": "L2", "l3": "L3", "l4": "L4"}


def parse_severity_verdict(raw: str) -> str:
    """Parse the Part-3 severity token: 'None' or 'L1'..'L4'."""
    text = _part_text(raw, 3)
    token = None if text is None else _first_token(text)
    if token is None:
        raise FormatError("missing_part3", raw[:80])
    level = _LEVELS.get(token.lower())
    if level is None:
        raise FormatError("unknown_level", token[:80])
    return level
