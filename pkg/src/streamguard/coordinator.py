"""The dual-brain runtime: per-frame piecewise decisions, dynamic sampling,
asynchronous slow-path dispatch with fast-path override, trace emission.

Under the simulated clock the run is a deterministic single-threaded event
loop: sample times live on an integer microsecond grid and the slow worker
is serialized with the frame loop.  Under the wall clock the slow query
runs in a background thread while sampling continues.
"""

from __future__ import annotations

import logging
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .backends import (
    BackendError,
    FastQuery,
    PromptTemplate,
    SlowQuery,
    load_prompt,
    query_fast,
)
from .model import (
    Alert,
    AlertSource,
    CaseAnnotation,
    DecisionTrace,
    FastState,
    FrameManifest,
    FrameSampled,
    Override,
    RateChange,
    SafetyState,
    SlowDispatched,
    SlowVerdict,
)
from .parsing import FormatError, parse_slow_output

log = logging.getLogger(__name__)

_EPS = 1e-9
_US = 1_000_000


class NoAlert(Exception):
    """The trace contains no alert; the case is excluded from latency means."""


@dataclass
class SamplingController:
    """Two-rate camera controller driven by the last observed safety state."""

    gamma_low: float = 1.0
    gamma_high: float = 5.0
    current: float = field(default=0.0)

    def __post_init__(self):
        if self.gamma_low <= 0 or self.gamma_high <= 0:
            raise ValueError("sampling rates must be positive")
        if self.current == 0.0:
            self.current = self.gamma_low


def next_sample_interval(state: SafetyState, ctl: SamplingController) -> float:
    """Interval until the next sample, per the two-rate rule."""
    ctl.current = ctl.gamma_low if state == SafetyState.GREEN else ctl.gamma_high
    return 1.0 / ctl.current


@dataclass(frozen=True)
class CoordinatorConfig:
    window_size: int = 3
    stop_on_first_alert: bool = True
    clock: str = "sim"  # "sim" | "real"
    fail_toward_caution: bool = True
    gamma_low: float = 1.0
    gamma_high: float = 5.0
    actuation_lag: float = 0.0

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if self.clock not in ("sim", "real"):
            raise ValueError(f"unknown clock {self.clock!r}")


class SimulatedClock:
    """Virtual clock: waiting is instantaneous and exactly reproducible."""

    def __init__(self):
        self._now = 0.0

    def now(self) -> float:
        return self._now

    def wait_until(self, t: float) -> None:
        if t > self._now:
            self._now = t


class WallClock:
    def __init__(self):
        import time

        self._time = time
        self._origin = time.monotonic()

    def now(self) -> float:
        return self._time.monotonic() - self._origin

    def wait_until(self, t: float) -> None:
        delta = t - self.now()
        if delta > 0:
            self._time.sleep(delta)


@dataclass
class _PendingSlow:
    trigger_t: float
    arrival_t: Optional[float] = None  # known immediately under the sim clock
    verdict: Optional[int] = None
    future: Optional[Future] = None

    def resolve(self, now: float) -> bool:
        """Try to fix arrival/verdict from the background future (real clock)."""
        if self.arrival_t is not None:
            return True
        if self.future is not None and self.future.done():
            try:
                raw, latency = self.future.result()
                self.verdict = parse_slow_output(raw)
            except FormatError as exc:
                log.warning("slow output unparseable (%s); treating as no-danger", exc)
                self.verdict = 0
                latency = 0.0
            self.arrival_t = max(now, self.trigger_t + latency)
            return True
        return False


def run_case(manifest: FrameManifest, fast, slow, cfg: CoordinatorConfig,
             fast_prompt: Optional[PromptTemplate] = None,
             slow_prompt: Optional[PromptTemplate] = None) -> DecisionTrace:
    """Run the dual-brain protocol over one frame stream.

    Returns the full event trace.  Backend failures abort the case with a
    partial trace flagged ``aborted``; unparseable FastBrain output is
    treated as Yellow when ``fail_toward_caution`` is set.
    """
    fast_prompt = fast_prompt or load_prompt("fast")
    slow_prompt = slow_prompt or load_prompt("slow")
    controller = SamplingController(cfg.gamma_low, cfg.gamma_high)
    clock = SimulatedClock() if cfg.clock == "sim" else WallClock()
    executor = ThreadPoolExecutor(max_workers=1) if cfg.clock == "real" else None

    events: list = []
    sampled_frames: list = []
    pending: Optional[_PendingSlow] = None
    alert: Optional[Alert] = None
    end_to_end: Optional[float] = None
    aborted = False
    duration = manifest.duration

    t_next_us = 0
    interval_us = round(_US / controller.gamma_low)

    def deliver_verdict(p: _PendingSlow) -> bool:
        """Record an arrived slow verdict; returns True when the run stops."""
        nonlocal alert, end_to_end
        clock.wait_until(p.arrival_t)
        events.append(SlowVerdict(trigger_t=p.trigger_t, arrival_t=p.arrival_t,
                                  verdict=p.verdict))
        if p.verdict == 1 and alert is None:
            alert = Alert(t_alert=p.arrival_t, source=AlertSource.SLOW)
            events.append(alert)
            end_to_end = p.arrival_t - p.trigger_t
            return cfg.stop_on_first_alert
        return False

    try:
        while True:
            t_next = t_next_us / _US
            past_end = t_next > duration + _EPS

            if pending is not None and pending.resolve(clock.now()):
                if pending.arrival_t <= t_next + _EPS or past_end:
                    p, pending = pending, None
                    if deliver_verdict(p):
                        break
                    continue
            if past_end:
                if pending is not None:
                    if pending.future is not None:
                        # Block for the in-flight result once the stream ends.
                        pending.future.result()
                        continue
                    continue
                break

            clock.wait_until(t_next)
            frame = manifest.latest_frame_at(t_next)
            events.append(FrameSampled(t=t_next, rate=controller.current))
            try:
                reply = query_fast(fast, FastQuery(frame=frame, prompt=fast_prompt))
                state, latency = reply.state, reply.latency
            except FormatError as exc:
                if not cfg.fail_toward_caution:
                    raise BackendError(f"unparseable fast output at t={t_next}: {exc}")
                log.warning("fast output unparseable at t=%s (%s); treating as yellow",
                            t_next, exc)
                state, latency = SafetyState.YELLOW, 0.0
            events.append(FastState(t=t_next, state=state, fast_latency=latency))
            sampled_frames.append(frame)

            if state == SafetyState.RED:
                if pending is not None:
                    events.append(Override(t=t_next))
                    if pending.future is not None:
                        pending.future.cancel()
                    pending = None  # a Red decision makes the verdict moot
                if alert is None:
                    alert = Alert(t_alert=frame.t, source=AlertSource.FAST)
                    events.append(alert)
                    end_to_end = (t_next - frame.t) + latency
                if cfg.stop_on_first_alert:
                    break
            elif state == SafetyState.YELLOW:
                if pending is None:
                    window = tuple(sampled_frames[-cfg.window_size:])
                    events.append(SlowDispatched(
                        trigger_t=t_next, window_frame_times=tuple(f.t for f in window)))
                    query = SlowQuery(window=window, prompt=slow_prompt)
                    if executor is None:
                        raw, slow_latency = slow.slow_raw(query)
                        try:
                            verdict = parse_slow_output(raw)
                        except FormatError as exc:
                            log.warning("slow output unparseable (%s); treating as no-danger", exc)
                            verdict = 0
                        pending = _PendingSlow(trigger_t=t_next,
                                               arrival_t=t_next + slow_latency,
                                               verdict=verdict)
                    else:
                        pending = _PendingSlow(trigger_t=t_next,
                                               future=executor.submit(slow.slow_raw, query))
            elif pending is not None:
                # A Green does not cancel an in-flight query; a later DANGER
                # verdict still alerts.
                log.debug("green at t=%s with slow query pending (trigger %s)",
                          t_next, pending.trigger_t)

            previous_rate = controller.current
            interval_us = round(_US * next_sample_interval(state, controller))
            if controller.current != previous_rate:
                events.append(RateChange(t=t_next, new_rate=controller.current))
            t_next_us += interval_us
    except BackendError as exc:
        log.error("case %s aborted: %s", manifest.case_id, exc)
        aborted = True
    finally:
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)

    return DecisionTrace(
        case_id=manifest.case_id,
        events=tuple(events),
        end_to_end_latency=end_to_end,
        alert_stream_time=None if alert is None else alert.t_alert,
        alert_source=None if alert is None else alert.source,
        physical_stop_time=None if alert is None else alert.t_alert + cfg.actuation_lag,
        aborted=aborted,
    )


def summarize_latency(trace: DecisionTrace, ann: CaseAnnotation) -> dict:
    """End-to-end latency and reaction bias (negative = early) for one trace."""
    if trace.alert_stream_time is None:
        raise NoAlert(f"case {trace.case_id} produced no alert")
    return {
        "end_to_end": trace.end_to_end_latency,
        "reaction_bias": trace.alert_stream_time - ann.key_frames.intent_onset,
    }
