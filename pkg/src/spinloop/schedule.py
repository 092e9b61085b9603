"""Compilation of the two-waveform field-sweep protocol.

The programmed timeline holds the anneal fraction at a target value while the
global field multiplier g(t) runs through five equal linear segments
(0 -> +H -> 0 -> -H -> 0 -> +H).  Measurements happen on truncated copies
("slices") that quench the field to zero and ramp the anneal fraction to 1
for readout.  All knot times land on the device time-resolution grid.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .device import DeviceProfile
from .errors import ValidationError

INITIAL_RAMP = "initial-ramp"
FORWARD = "forward"
BACKWARD = "backward"
SWEEP_TAGS = (INITIAL_RAMP, FORWARD, BACKWARD)


@dataclass(frozen=True)
class Waveform:
    """Piecewise-linear control waveform; knot times strictly increase."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(v)) for t, v in self.points)
        if len(pts) < 2:
            raise ValidationError("waveform needs at least two points")
        times = [t for t, _ in pts]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValidationError("waveform knot times must strictly increase")
        object.__setattr__(self, "points", pts)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points])

    @property
    def start(self) -> float:
        return self.points[0][0]

    @property
    def end(self) -> float:
        return self.points[-1][0]

    def value_at(self, t: float) -> float:
        return evaluate(self, t)

    def sample(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; every t must lie within the knot range."""
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < self.start or ts.max() > self.end):
            raise ValidationError(
                f"time outside waveform range [{self.start}, {self.end}]"
            )
        return np.interp(ts, self.times, self.values)


def evaluate(waveform: Waveform, t: float) -> float:
    """Exact linear interpolation between knots; exact at knots."""
    pts = waveform.points
    if t < pts[0][0] or t > pts[-1][0]:
        raise ValidationError(
            f"t={t} outside waveform range [{pts[0][0]}, {pts[-1][0]}]"
        )
    times = [p[0] for p in pts]
    k = bisect.bisect_right(times, t) - 1
    if k == len(pts) - 1:
        return pts[-1][1]
    t0, v0 = pts[k]
    t1, v1 = pts[k + 1]
    return v0 + (t - t0) * (v1 - v0) / (t1 - t0)


def _ticks(t: float, resolution: float) -> int:
    """Snap a time to the resolution grid, rounding half up."""
    return int(math.floor(t / resolution + 0.5))


@dataclass(frozen=True)
class SliceSchedule:
    """One measurement program: the truncated field waveform plus readout ramp."""

    anneal: Waveform
    hgain: Waveform
    total_time: float
    target_field: float
    slice_index: int
    sweep_tag: str


@dataclass(frozen=True)
class ProtocolTimeline:
    """The full compiled protocol and its per-slice measurement grid."""

    s_target: float
    h_max: float
    total_time: float
    ramp_time: float
    pause_time: float
    gquench_time: float
    points_per_segment: int
    field_coefficient: float
    time_resolution: float
    max_hgain_points: int
    max_anneal_points: int
    anneal_waveform: Waveform
    hgain_waveform: Waveform
    slice_times: np.ndarray
    slice_fields: np.ndarray
    sweep_tags: tuple[str, ...]

    @property
    def n_slices(self) -> int:
        return len(self.slice_times)

    def loop_slice_indices(self) -> range:
        """Slices forming the closed loop (initial polarization ramp excluded)."""
        return range(self.points_per_segment, self.n_slices)


def build_timeline(
    profile: DeviceProfile,
    s_target: float,
    h_max: float | None = None,
    total_time: float = 11.2,
    ramp_time: float = 0.5,
    pause_time: float = 0.1,
    gquench_time: float = 0.020,
    points_per_segment: int = 100,
    field_coefficient: float = 1.0,
) -> ProtocolTimeline:
    """Compile the five-segment field sweep into waveforms and slice times.

    The field region spans total_time - 2 (ramp_time + pause_time), split into
    five equal linear segments; each segment contributes points_per_segment
    measurement times (segment start excluded, end included), so the closed
    loop holds the last 4 * points_per_segment slices.
    """
    if h_max is None:
        h_max = profile.h_gain_max
    if not 0.0 < s_target <= 1.0:
        raise ValidationError("s_target must lie in (0, 1]")
    if not 0.0 < h_max <= profile.h_gain_max:
        raise ValidationError(
            f"h_max={h_max} exceeds the device limit {profile.h_gain_max}"
        )
    if points_per_segment < 1:
        raise ValidationError("points_per_segment must be >= 1")
    res = profile.time_resolution
    ramp_tk = _ticks(ramp_time, res)
    pause_tk = _ticks(pause_time, res)
    quench_tk = _ticks(gquench_time, res)
    total_tk = _ticks(total_time, res)
    if min(ramp_tk, pause_tk, quench_tk) < 1:
        raise ValidationError("ramp, pause, and quench must each span >= 1 grid step")
    if quench_tk >= pause_tk:
        raise ValidationError("field quench must fit inside the pre-readout pause")
    if total_time < profile.min_anneal_time:
        raise ValidationError(
            f"total_time below the device minimum {profile.min_anneal_time}"
        )
    span_tk = total_tk - 2 * (ramp_tk + pause_tk)
    if span_tk <= 0:
        raise ValidationError("total_time leaves no room for the field sweep")
    if span_tk < 5 * points_per_segment:
        raise ValidationError(
            "segment point spacing falls below the device time resolution"
        )

    field_start = ramp_tk + pause_tk
    # Segment boundaries in ticks; values 0, +H, 0, -H, 0, +H.
    bounds = [field_start + _ticks(j * span_tk / 5.0, 1.0) for j in range(6)]
    levels = [0.0, h_max, 0.0, -h_max, 0.0, h_max]

    hgain_knots: list[tuple[int, float]] = [(0, 0.0), (field_start, 0.0)]
    for j in range(1, 6):
        # Consecutive collinear segments share one straight line; keep the
        # minimal knot set (7 points for the complete final program).
        if j < 5 and (levels[j - 1] - levels[j]) == (levels[j] - levels[j + 1]):
            continue
        hgain_knots.append((bounds[j], levels[j]))
    hgain_wf = Waveform(tuple((tk * res, v) for tk, v in hgain_knots))

    anneal_wf = Waveform(
        (
            (0.0, 0.0),
            (ramp_tk * res, s_target),
            ((total_tk - ramp_tk) * res, s_target),
            (total_tk * res, 1.0),
        )
    )

    slice_tks: list[int] = []
    tags: list[str] = []
    for j in range(5):
        b0, b1 = bounds[j], bounds[j + 1]
        seg_len = b1 - b0
        prev = b0
        for i in range(1, points_per_segment + 1):
            tk = b0 + _ticks(i * seg_len / points_per_segment, 1.0)
            if tk <= prev:
                raise ValidationError(
                    "slice times collide after snapping to the resolution grid"
                )
            prev = tk
            slice_tks.append(tk)
            tags.append(INITIAL_RAMP if j == 0 else FORWARD if j <= 2 else BACKWARD)

    slice_times = np.array([tk * res for tk in slice_tks])
    slice_fields = np.array(
        [evaluate(hgain_wf, t) * field_coefficient for t in slice_times]
    )
    return ProtocolTimeline(
        s_target=s_target,
        h_max=h_max,
        total_time=total_tk * res,
        ramp_time=ramp_tk * res,
        pause_time=pause_tk * res,
        gquench_time=quench_tk * res,
        points_per_segment=points_per_segment,
        field_coefficient=field_coefficient,
        time_resolution=res,
        max_hgain_points=profile.max_hgain_points,
        max_anneal_points=profile.max_anneal_points,
        anneal_waveform=anneal_wf,
        hgain_waveform=hgain_wf,
        slice_times=slice_times,
        slice_fields=slice_fields,
        sweep_tags=tuple(tags),
    )


def slice_at(timeline: ProtocolTimeline, k: int) -> SliceSchedule:
    """Truncate the timeline at slice k: quench the field to zero inside a
    pause at fixed s, then ramp the anneal fraction to 1 for readout."""
    if not 0 <= k < timeline.n_slices:
        raise ValidationError(f"slice index {k} outside [0, {timeline.n_slices})")
    res = timeline.time_resolution
    t_k = float(timeline.slice_times[k])
    tk_tk = _ticks(t_k, res)
    end_tk = tk_tk + _ticks(timeline.pause_time, res) + _ticks(timeline.ramp_time, res)
    quench_tk = tk_tk + _ticks(timeline.gquench_time, res)

    kept = [(t, v) for t, v in timeline.hgain_waveform.points if _ticks(t, res) < tk_tk]
    g_k = evaluate(timeline.hgain_waveform, t_k)
    hgain_pts = kept + [(t_k, g_k), (quench_tk * res, 0.0), (end_tk * res, 0.0)]
    hgain = Waveform(tuple(hgain_pts))

    anneal = Waveform(
        (
            (0.0, 0.0),
            (timeline.ramp_time, timeline.s_target),
            ((end_tk - _ticks(timeline.ramp_time, res)) * res, timeline.s_target),
            (end_tk * res, 1.0),
        )
    )
    if len(hgain.points) > timeline.max_hgain_points:
        raise ValidationError(
            f"slice {k} needs {len(hgain.points)} field points; device allows "
            f"{timeline.max_hgain_points}"
        )
    if len(anneal.points) > timeline.max_anneal_points:
        raise ValidationError(
            f"slice {k} needs {len(anneal.points)} anneal points; device allows "
            f"{timeline.max_anneal_points}"
        )
    return SliceSchedule(
        anneal=anneal,
        hgain=hgain,
        total_time=end_tk * res,
        target_field=float(timeline.slice_fields[k]),
        slice_index=k,
        sweep_tag=timeline.sweep_tags[k],
    )


def hold_schedule(
    s: float,
    g: float,
    duration: float,
    slice_index: int = 0,
    tag: str = FORWARD,
) -> SliceSchedule:
    """Frozen schedule (constant s and g) for calibration and oracle tests."""
    wf_s = Waveform(((0.0, s), (duration, s)))
    wf_g = Waveform(((0.0, g), (duration, g)))
    return SliceSchedule(wf_s, wf_g, duration, g, slice_index, tag)


def slice_to_json(slc: SliceSchedule) -> str:
    """Vendor-API-shaped export: arrays of (time, value) pairs per waveform."""
    return json.dumps(
        {
            "anneal_schedule": [[t, v] for t, v in slc.anneal.points],
            "h_gain_schedule": [[t, v] for t, v in slc.hgain.points],
            "total_time_us": slc.total_time,
            "target_field": slc.target_field,
            "slice_index": slc.slice_index,
            "sweep_tag": slc.sweep_tag,
        },
        indent=2,
    )


def write_slice_json(slc: SliceSchedule, stream: IO[str]) -> None:
    stream.write(slice_to_json(slc))
    stream.write("\n")
