"""Model backends: deterministic scripted stand-ins and a remote VLM client.

Both backend kinds expose the same raw-text surface; ``query_fast`` and
``query_slow`` run the matching grammar parser on top and attach latency.
"""

from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import requests

from .model import Frame, SafetyState, SchemaError
from .parsing import FormatError, parse_fast_output, parse_slow_output


class BackendError(Exception):
    """Base class for backend failures."""


class TransportError(BackendError):
    """The remote endpoint could not be reached or replied abnormally."""


class BackendTimeoutError(BackendError):
    """The query did not complete within the configured budget."""


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt with <Start>/<End>/<Timestamps> placeholders."""

    name: str
    text: str

    def render(self, start: Optional[float] = None, end: Optional[float] = None,
               timestamps: Optional[Sequence[float]] = None) -> str:
        out = self.text
        if "<Start>" in out:
            if start is None:
                raise ValueError(f"prompt {self.name} needs a start time")
            out = out.replace("<Start>", f"{start:.1f}")
        if "<End>" in out:
            if end is None:
                raise ValueError(f"prompt {self.name} needs an end time")
            out = out.replace("<End>", f"{end:.1f}")
        if timestamps is not None:
            listing = ", ".join(f"{t:.1f}s" for t in timestamps)
            out = out + f"\n\nFrame timestamps (in order): {listing}\n"
        return out


def load_prompt(name: str) -> PromptTemplate:
    """Load one of the bundled templates: fast, slow, baseline_detect, severity."""
    text = resources.files("streamguard.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")
    return PromptTemplate(name=name, text=text)


@dataclass(frozen=True)
class FastQuery:
    frame: Frame
    prompt: PromptTemplate


@dataclass(frozen=True)
class FastReply:
    state: SafetyState
    reason: str
    latency: float
    raw: str


@dataclass(frozen=True)
class SlowQuery:
    window: tuple[Frame, ...]
    prompt: PromptTemplate

    def __post_init__(self):
        if not self.window:
            raise SchemaError("slow query window must contain at least one frame")
        times = [f.t for f in self.window]
        if any(a > b for a, b in zip(times, times[1:])):
            raise SchemaError("slow query window frames must be time-ordered")

    @property
    def trigger_time(self) -> float:
        return self.window[-1].t


@dataclass(frozen=True)
class SlowReply:
    verdict: int
    analysis: str
    latency: float
    raw: str


@dataclass(frozen=True)
class ScheduleRule:
    """One scripted reply, valid on the half-open interval [t_start, t_end)."""

    t_start: float
    t_end: float
    payload: dict

    def contains(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


def _check_non_overlapping(rules: Sequence[ScheduleRule], label: str) -> None:
    ordered = sorted(rules, key=lambda r: r.t_start)
    for a, b in zip(ordered, ordered[1:]):
        if b.t_start < a.t_end:
            raise SchemaError(
                f"{label} rules overlap: [{a.t_start}, {a.t_end}) and [{b.t_start}, {b.t_end})"
            )


class ScriptedBackend:
    """Deterministic backend mapping query times to canned raw outputs.

    The script is a plain dict (see ``from_file``) with ``fast_schedule``,
    ``slow_responses`` and optional ``baseline_responses`` rule lists, plus
    optional ``malformed`` / ``timeout`` fault intervals applied to the
    FastBrain output.
    """

    DEFAULT_FAST_LATENCY = 0.05

    def __init__(self, fast_schedule=(), slow_responses=(), baseline_responses=(),
                 malformed=(), timeout=()):
        self.fast_schedule = tuple(fast_schedule)
        self.slow_responses = tuple(slow_responses)
        self.baseline_responses = tuple(baseline_responses)
        self.malformed = tuple(tuple(iv) for iv in malformed)
        self.timeout = tuple(tuple(iv) for iv in timeout)
        _check_non_overlapping(self.fast_schedule, "fast_schedule")
        _check_non_overlapping(self.slow_responses, "slow_responses")
        _check_non_overlapping(self.baseline_responses, "baseline_responses")

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> "ScriptedBackend":
        def rules(key):
            return tuple(
                ScheduleRule(float(r["t_start"]), float(r["t_end"]),
                             {k: v for k, v in r.items() if k not in ("t_start", "t_end")})
                for r in d.get(key, [])
            )

        faults = d.get("faults", {})
        return cls(
            fast_schedule=rules("fast_schedule"),
            slow_responses=rules("slow_responses"),
            baseline_responses=rules("baseline_responses"),
            malformed=faults.get("malformed", []),
            timeout=faults.get("timeout", []),
        )

    @classmethod
    def from_file(cls, path: str) -> "ScriptedBackend":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        def dump(rules):
            return [{"t_start": r.t_start, "t_end": r.t_end, **r.payload} for r in rules]

        return {
            "fast_schedule": dump(self.fast_schedule),
            "slow_responses": dump(self.slow_responses),
            "baseline_responses": dump(self.baseline_responses),
            "faults": {"malformed": [list(iv) for iv in self.malformed],
                       "timeout": [list(iv) for iv in self.timeout]},
        }

    # -- raw queries ----------------------------------------------------------

    def _in_fault(self, intervals, t: float) -> bool:
        return any(a <= t < b for a, b in intervals)

    def fast_raw(self, query: FastQuery) -> tuple[str, float]:
        t = query.frame.t
        if self._in_fault(self.timeout, t):
            raise BackendTimeoutError(f"scripted timeout at t={t}")
        if self._in_fault(self.malformed, t):
            return "the scene looks fine", self.DEFAULT_FAST_LATENCY
        for rule in self.fast_schedule:
            if rule.contains(t):
                raw = json.dumps({"category": rule.payload.get("state", "green"),
                                  "reason": rule.payload.get("reason", "")})
                return raw, float(rule.payload.get("latency", self.DEFAULT_FAST_LATENCY))
        # Outside every rule the world is nominal.
        return json.dumps({"category": "green", "reason": ""}), self.DEFAULT_FAST_LATENCY

    def slow_raw(self, query: SlowQuery) -> tuple[str, float]:
        t = query.trigger_time
        if self._in_fault(self.timeout, t):
            raise BackendTimeoutError(f"scripted timeout at t={t}")
        for rule in self.slow_responses:
            if rule.contains(t):
                verdict = "DANGER" if int(rule.payload.get("verdict", 0)) else "SAFE"
                raw = f"**ANALYSIS**: scripted response\n**VERDICT**: {verdict}"
                return raw, float(rule.payload.get("latency", 1.0))
        return "**ANALYSIS**: scripted response\n**VERDICT**: SAFE", 1.0

    def baseline_raw(self, window_start: float, window_end: float,
                     frames: Sequence[Frame], prompt_text: str) -> tuple[str, float]:
        for rule in self.baseline_responses:
            if rule.contains(window_start):
                return str(rule.payload.get("raw", "Part 2: Safe")), \
                    float(rule.payload.get("latency", 0.5))
        return "Part 1: nothing notable.\nPart 2: Safe", 0.5


@dataclass(frozen=True)
class EndpointConfig:
    """Connection settings for a chat-completions style endpoint."""

    base_url: str
    model_name: str
    auth_token_env_var_name: str = ""
    timeout: float = 60.0
    max_retries: int = 2
    image_mode: str = "base64"  # "base64" | "path"

    def __post_init__(self):
        if self.timeout <= 0:
            raise SchemaError("endpoint timeout must be positive")
        if self.image_mode not in ("base64", "path"):
            raise SchemaError(f"unknown image_mode {self.image_mode!r}")

    @classmethod
    def from_file(cls, path: str) -> "EndpointConfig":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        return cls(
            base_url=d["base_url"],
            model_name=d["model_name"],
            auth_token_env_var_name=d.get("auth_token_env_var_name", ""),
            timeout=float(d.get("timeout", 60.0)),
            max_retries=int(d.get("max_retries", 2)),
            image_mode=d.get("image_mode", "base64"),
        )


class RemoteBackend:
    """Client for a remote VLM behind a chat-completions endpoint.

    Auth tokens come only from the environment variable named in the
    config, never from files.
    """

    def __init__(self, config: EndpointConfig, session: Optional[requests.Session] = None,
                 frames_pre_overlaid: bool = True):
        self.config = config
        self.session = session or requests.Session()
        self.frames_pre_overlaid = frames_pre_overlaid

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_token_env_var_name:
            token = os.environ.get(self.config.auth_token_env_var_name, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _image_part(self, frame: Frame) -> dict:
        if self.config.image_mode == "path":
            return {"type": "image_url", "image_url": {"url": frame.image_path}}
        with open(frame.image_path, "rb") as fh:
            payload = base64.b64encode(fh.read()).decode("ascii")
        return {"type": "image_url",
                "image_url": {"url": f"data:image/jpeg;base64,{payload}"}}

    def _chat(self, prompt_text: str, frames: Sequence[Frame]) -> tuple[str, float]:
        import time

        content = [{"type": "text", "text": prompt_text}]
        content.extend(self._image_part(f) for f in frames)
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": content}],
        }
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_exc: Exception = TransportError("no attempt made")
        for _ in range(self.config.max_retries + 1):
            start = time.monotonic()
            try:
                resp = self.session.post(url, json=body, headers=self._headers(),
                                         timeout=self.config.timeout)
                resp.raise_for_status()
                text = resp.json()["choices"][0]["message"]["content"]
                return text, time.monotonic() - start
            except requests.Timeout as exc:
                last_exc = BackendTimeoutError(str(exc))
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_exc = TransportError(str(exc))
        raise last_exc

    def _prompt_text(self, prompt: PromptTemplate, frames: Sequence[Frame]) -> str:
        # Clean frames carry no burned-in timestamps, so list them in text.
        if self.frames_pre_overlaid:
            return prompt.render()
        return prompt.render(timestamps=[f.t for f in frames])

    def fast_raw(self, query: FastQuery) -> tuple[str, float]:
        return self._chat(self._prompt_text(query.prompt, [query.frame]), [query.frame])

    def slow_raw(self, query: SlowQuery) -> tuple[str, float]:
        return self._chat(self._prompt_text(query.prompt, query.window), query.window)

    def baseline_raw(self, window_start: float, window_end: float,
                     frames: Sequence[Frame], prompt_text: str) -> tuple[str, float]:
        return self._chat(prompt_text, frames)


def query_fast(backend, query: FastQuery) -> FastReply:
    """Run a FastBrain query and parse the traffic-light grammar."""
    raw, latency = backend.fast_raw(query)
    state, reason = parse_fast_output(raw)
    return FastReply(state=state, reason=reason, latency=latency, raw=raw)


def query_slow(backend, query: SlowQuery) -> SlowReply:
    """Run a SlowBrain query and parse the VERDICT grammar."""
    raw, latency = backend.slow_raw(query)
    verdict = parse_slow_output(raw)
    return SlowReply(verdict=verdict, analysis=raw, latency=latency, raw=raw)
