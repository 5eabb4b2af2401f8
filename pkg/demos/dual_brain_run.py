"""Walk one video case through the dual-brain coordinator.

A scripted FastBrain sees a calm scene turn ambiguous at 1.0 s and
clearly dangerous at 2.1 s; a scripted SlowBrain is still thinking when
the fast path escalates, so its query is cancelled by the override.

Run with:  python3 demos/dual_brain_run.py
"""

from streamguard import (
    CoordinatorConfig,
    Frame,
    FrameManifest,
    ScheduleRule,
    ScriptedBackend,
    run_case,
)

manifest = FrameManifest(
    case_id="demo-kettle",
    fps_native=10.0,
    frames=tuple(Frame(t=round(0.1 * i, 1), image_path=f"frames/{i:03d}.jpg")
                 for i in range(51)),
)

fast = ScriptedBackend(fast_schedule=[
    ScheduleRule(0.0, 1.0, {"state": "green", "reason": "robot idle"}),
    ScheduleRule(1.0, 2.1, {"state": "yellow", "reason": "reaching toward kettle"}),
    ScheduleRule(2.1, 99.0, {"state": "red", "reason": "contact imminent"}),
])
slow = ScriptedBackend(slow_responses=[
    ScheduleRule(0.5, 1.5, {"verdict": 1, "latency": 4.0}),  # too slow to matter
])

trace = run_case(manifest, fast, slow, CoordinatorConfig(actuation_lag=0.5))

print(f"case: {trace.case_id}")
for event in trace.events:
    print(f"  {event}")
print(f"decision:        {trace.decision.name}")
print(f"alert at:        {trace.alert_stream_time:.2f}s ({trace.alert_source.value})")
print(f"end-to-end:      {trace.end_to_end_latency:.3f}s")
print(f"physical stop:   {trace.physical_stop_time:.2f}s")
