"""Canned corpora and fuzzing for the strict output parsers."""

import json
import random
import string

import pytest

from streamguard.model import SafetyState
from streamguard.parsing import (
    FormatError,
    parse_baseline_verdict,
    parse_fast_output,
    parse_severity_verdict,
    parse_slow_output,
)


# --- traffic-light grammar ---------------------------------------------------

FAST_OK = [
    # the exact shape the prompt asks for
    ('{\n"category": "green",\n"reason": "Robot stationary, no obstacles."\n}',
     SafetyState.GREEN),
    ('{\n"category": "yellow",\n"reason": "Robot holding a cup near the sink."\n}',
     SafetyState.YELLOW),
    ('{\n"category": "red",\n"reason": "Contact happening now."\n}',
     SafetyState.RED),
    # compact and reordered keys
    ('{"category":"green","reason":"ok"}', SafetyState.GREEN),
    ('{"reason":"near stove","category":"yellow"}', SafetyState.YELLOW),
    # casing and whitespace in the category token
    ('{"category": "RED", "reason": "fire"}', SafetyState.RED),
    ('{"category": " Green ", "reason": ""}', SafetyState.GREEN),
    ('{"category": "Yellow"}', SafetyState.YELLOW),
    # preamble / trailing prose around the object
    ('Sure! Here is my assessment:\n{"category": "red", "reason": "smoke"}\nStay safe.',
     SafetyState.RED),
    ('```json\n{"category": "yellow", "reason": "approaching chair"}\n```',
     SafetyState.YELLOW),
    # first object wins
    ('{"category": "green", "reason": "a"} {"category": "red", "reason": "b"}',
     SafetyState.GREEN),
    # nested braces and escapes inside strings are not confused with structure
    ('{"category": "yellow", "reason": "holding {sealed} box"}', SafetyState.YELLOW),
    ('{"category": "red", "reason": "say \\"stop\\" now"}', SafetyState.RED),
    # extra fields are ignored
    ('{"category": "green", "reason": "clear", "confidence": 0.9}', SafetyState.GREEN),
    # a leading non-dict brace group is skipped in favour of the real object
    ('{"oops"} then {"category": "red", "reason": "x"}', SafetyState.RED),
    # an object wrapped in an array is still found
    ('[{"category": "green", "reason": "clear"}]', SafetyState.GREEN),
]

FAST_BAD = [
    "",
    "the scene looks fine",
    "category: green",                         # not JSON
    '{"reason": "no category"}',
    '{"category": 3}',
    '{"category": "blue", "reason": "?"}',     # outside the closed set
    '{"category": "greenish"}',
    '{"category": "green"',                    # unbalanced
    "{}",
]


@pytest.mark.parametrize("raw,state", FAST_OK, ids=range(len(FAST_OK)))
def test_fast_accepts(raw, state):
    got, reason = parse_fast_output(raw)
    assert got == state
    assert isinstance(reason, str)


@pytest.mark.parametrize("raw", FAST_BAD, ids=range(len(FAST_BAD)))
def test_fast_rejects(raw):
    with pytest.raises(FormatError):
        parse_fast_output(raw)


def test_fast_reason_passthrough():
    _, reason = parse_fast_output('{"category": "red", "reason": "fire near sofa"}')
    assert reason == "fire near sofa"


# --- structured-reasoning grammar --------------------------------------------

SLOW_OK = [
    # the exact shape the prompt asks for
    ("**ANALYSIS**: [Robot inserts sealed box into microwave.]\n**VERDICT**: [DANGER | SAFE]"
     .replace("[DANGER | SAFE]", "DANGER"), 1),
    ("**ANALYSIS**: [Robot is idle.]\n**VERDICT**: SAFE", 0),
    ("**ANALYSIS**: x\n**VERDICT**: [DANGER]", 1),
    ("**ANALYSIS**: x\n**VERDICT**: [SAFE]", 0),
    ("ANALYSIS: nothing alarming\nVERDICT: SAFE", 0),
    ("verdict: danger", 1),
    ("Verdict - SAFE", 0),
    ("**VERDICT:** DANGER", 1),
    ("**VERDICT**:  safe", 0),
    ("VERDICT = DANGER", 1),
    # last verdict line wins
    ("**VERDICT**: SAFE\nRe-checking the thermodynamics rule...\n**VERDICT**: DANGER", 1),
    ("VERDICT: DANGER\n(on reflection)\nVERDICT: SAFE", 0),
    # prose after the verdict on later lines does not matter
    ("**ANALYSIS**: long text\n**VERDICT**: DANGER\nPlease evacuate.", 1),
    # mixed-case marker
    ("verdict: Danger", 1),
    ("The Verdict: SAFE overall", 0),
]

SLOW_BAD = [
    "",
    "**ANALYSIS**: everything seems fine",
    "VERDICT:",
    "VERDICT: MAYBE",
    "VERDICT: UNSAFE-ish??",   # SAFE is not reachable past the letters guard
    "judgment: danger",
]


@pytest.mark.parametrize("raw,verdict", SLOW_OK, ids=range(len(SLOW_OK)))
def test_slow_accepts(raw, verdict):
    assert parse_slow_output(raw) == verdict


@pytest.mark.parametrize("raw", SLOW_BAD, ids=range(len(SLOW_BAD)))
def test_slow_rejects(raw):
    with pytest.raises(FormatError):
        parse_slow_output(raw)


def test_slow_unsafe_token():
    # UNSAFE contains SAFE only after a letter, which the grammar forbids
    with pytest.raises(FormatError):
        parse_slow_output("VERDICT: UNSAFE")


# --- sliding-window verdict grammar ------------------------------------------

BASE_OK = [
    # the exact three-part shape the prompt asks for
    ("Part 1: [Reasoning]\n  - Robot reaches toward the stove.\n"
     "Part 2: [Verdict]\n  3.7", (0.0, 5.0), 3.7),
    ("Part 1: [Reasoning]\n  - Nothing risky.\nPart 2: [Verdict]\n  Safe", (0.0, 2.0), "safe"),
    ("Part 1: fine\nPart 2: Safe", (1.5, 3.5), "safe"),
    ("Part 1: fine\nPart 2: safe", (1.5, 3.5), "safe"),
    ("Part 1: fine\nPart 2: SAFE", (1.5, 3.5), "safe"),
    ("Part 1: risk\nPart 2: 1.5", (1.5, 3.5), 1.5),     # window edges inclusive
    ("Part 1: risk\nPart 2: 3.5", (1.5, 3.5), 3.5),
    ("Part 1: risk\nPart 2: 2", (1.5, 3.5), 2.0),       # bare integer
    ("Part 1: risk\nPart 2: 2.25s", (1.5, 3.5), 2.25),  # trailing unit tolerated
    ("Part 2: 0.0", (0.0, 2.0), 0.0),                   # Part 1 optional for parsing
    ("Part 2: [Verdict] 1.8", (0.0, 2.0), 1.8),         # label kept from the template
    ("Part 2: **1.8**", (0.0, 2.0), 1.8),
    ("Part 1. reasoning text\nPart 2. Safe", (0.0, 2.0), "safe"),
    ("Part 1: risky\nPart 2: 1.8\nPart 3: L2", (0.0, 2.0), 1.8),  # later parts ignored
    ("part 2: 1.9", (0.0, 2.0), 1.9),                   # case-insensitive marker
]

BASE_BAD = [
    ("", (0.0, 2.0)),
    ("Part 1: only reasoning", (0.0, 2.0)),
    ("Part 2:", (0.0, 2.0)),
    ("Part 2: The answer is 1.5", (0.0, 2.0)),       # prose instead of a number
    ("Part 2: dangerous", (0.0, 2.0)),
    ("Part 2: 2.5", (0.0, 2.0)),                     # above the window
    ("Part 2: 1.0", (1.5, 3.5)),                     # below the window
    ("Part 2: -1.0", (0.0, 2.0)),
    ("Part 2: 1.5 or so", (0.0, 2.0)),
    ("no parts at all 1.5", (0.0, 2.0)),
]


@pytest.mark.parametrize("raw,window,expected", BASE_OK, ids=range(len(BASE_OK)))
def test_baseline_accepts(raw, window, expected):
    assert parse_baseline_verdict(raw, *window) == expected


@pytest.mark.parametrize("raw,window", BASE_BAD, ids=range(len(BASE_BAD)))
def test_baseline_rejects(raw, window):
    with pytest.raises(FormatError):
        parse_baseline_verdict(raw, *window)


def test_baseline_reasons():
    with pytest.raises(FormatError) as exc:
        parse_baseline_verdict("Part 2: 9.0", 0.0, 2.0)
    assert exc.value.reason == "out_of_range"
    with pytest.raises(FormatError) as exc:
        parse_baseline_verdict("Part 2: wat", 0.0, 2.0)
    assert exc.value.reason == "not_a_number"
    with pytest.raises(FormatError) as exc:
        parse_baseline_verdict("hello", 0.0, 2.0)
    assert exc.value.reason == "missing_part2"


def test_baseline_invalid_window():
    with pytest.raises(ValueError):
        parse_baseline_verdict("Part 2: Safe", 2.0, 1.0)


# --- severity grammar --------------------------------------------------------

SEV_OK = [
    ("Part 1: minor scrape\nPart 2: Dangerous\nPart 3: L1", "L1"),
    ("Part 1: x\nPart 2: Dangerous\nPart 3: L2", "L2"),
    ("Part 1: x\nPart 2: Dangerous\nPart 3: l3", "L3"),
    ("Part 1: x\nPart 2: Dangerous\nPart 3: [L4]", "L4"),
    ("Part 1: x\nPart 2: Safe\nPart 3: None", "none"),
    ("Part 1: x\nPart 2: Safe\nPart 3: 'None'", "none"),
    ("Part 3: **L2**", "L2"),
    ("part 3: none", "none"),
]

SEV_BAD = ["", "Part 3:", "Part 3: L5", "Part 3: moderate", "Part 2: Safe",
           "Part 3: L1 or L2"]


@pytest.mark.parametrize("raw,level", SEV_OK, ids=range(len(SEV_OK)))
def test_severity_accepts(raw, level):
    assert parse_severity_verdict(raw) == level


@pytest.mark.parametrize("raw", SEV_BAD, ids=range(len(SEV_BAD)))
def test_severity_rejects(raw):
    with pytest.raises(FormatError):
        parse_severity_verdict(raw)


# --- fuzz: parsers are total -------------------------------------------------

_POOL = (string.ascii_letters + string.digits +
         '{}[]":,.*\n\t ()-_' + "Part VERDICT category Safe DANGER green red yellow")


def _random_text(rng):
    kind = rng.random()
    if kind < 0.3:
        return "".join(rng.choice(_POOL) for _ in range(rng.randrange(0, 120)))
    if kind < 0.5:
        words = ["Part", "1", "2", "3", ":", "Safe", "VERDICT", "DANGER", "{", "}",
                 '"category"', '"red"', '"yellow"', "4.2", "-1", "json", "**", "[", "]"]
        return " ".join(rng.choice(words) for _ in range(rng.randrange(0, 30)))
    if kind < 0.7:
        obj = {rng.choice(["category", "reason", "x"]): rng.choice(
            ["green", "red", "blue", 3, None, ["red"]]) for _ in range(rng.randrange(0, 3))}
        return rng.choice(["", "noise "]) + json.dumps(obj)
    return "".join(chr(rng.randrange(1, 0x2000)) for _ in range(rng.randrange(0, 60)))


def test_fuzz_parsers_never_crash():
    rng = random.Random(20260823)
    for i in range(10_000):
        raw = _random_text(rng)
        for call in (
            lambda: parse_fast_output(raw),
            lambda: parse_slow_output(raw),
            lambda: parse_baseline_verdict(raw, 0.0, 2.0),
            lambda: parse_severity_verdict(raw),
        ):
            try:
                call()
            except FormatError:
                pass  # a rejection is a valid outcome; anything else is a bug
