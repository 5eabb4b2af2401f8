"""Evaluate one case with the sliding-window baseline protocol.

A 5 s stream is split into overlapping 2 s windows (stride 1.5 s); each
window gets a canned model reply, and the per-window verdicts aggregate
to one prediction for the case.

Run with:  python3 demos/baseline_eval.py
"""

from streamguard import Frame, FrameManifest, ScheduleRule, ScriptedBackend
from streamguard.baseline import build_windows, run_baseline_case

manifest = FrameManifest(
    case_id="demo-spill",
    fps_native=10.0,
    frames=tuple(Frame(t=round(0.1 * i, 1)) for i in range(51)),
)

plan = build_windows(manifest.duration)
print("window plan:")
for window in plan.windows:
    print(f"  [{window.start:.1f}, {window.end:.1f}]  ({len(window.frame_times)} frames)")

backend = ScriptedBackend(baseline_responses=[
    ScheduleRule(-0.01, 0.01, {"raw": "Part 1: robot idle near table.\nPart 2: Safe"}),
    ScheduleRule(1.49, 1.51, {"raw": "Part 1: cup tips at the table edge.\nPart 2: 2.8"}),
    ScheduleRule(2.99, 3.01, {"raw": "Part 1: liquid already spreading.\nPart 2: 3.1"}),
])

pred = run_baseline_case(manifest, backend)
print(f"\naggregated verdict: {pred.verdict}  t={pred.timestamp}")
print("(the earliest hazardous window timestamp wins)")
