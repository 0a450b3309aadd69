"""Waveform planning, switch scheduling, and exact first-order settling.

The electrode follows a single-pole RC response: toward the commanded
voltage through the closed-switch resistance, and discharging through the
open-switch resistance while isolated.  Both regimes integrate in closed
form, so sampled trajectories carry no step-size error beyond float
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .analog import IsolationSwitch, RcNetwork, SwitchState
from .dac import IdealTransfer, Transfer, code_for_voltage
from .errors import OutOfRangeError, ScheduleGapError
from .protocol import NUM_CHANNELS, BusConfig, Frame, update_rate


@dataclass(frozen=True)
class Waveform:
    """Timestamped frame sequence; times strictly increasing."""

    entries: tuple[tuple[float, Frame], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("waveform needs at least one entry")
        times = [t for t, _ in self.entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("entry times must be strictly increasing")

    @property
    def t_start(self) -> float:
        return self.entries[0][0]

    @property
    def t_end(self) -> float:
        return self.entries[-1][0]

    def min_spacing_s(self) -> float | None:
        times = [t for t, _ in self.entries]
        if len(times) < 2:
            return None
        return min(b - a for a, b in zip(times, times[1:]))


@dataclass(frozen=True)
class EisSchedule:
    """Contiguous switch intervals: (t_start, t_end, state), gap-free."""

    intervals: tuple[tuple[float, float, SwitchState], ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("schedule needs at least one interval")
        for t0, t1, _ in self.intervals:
            if t1 <= t0:
                raise ValueError("each interval needs t_end > t_start")
        for (_, end, _), (start, _, _) in zip(self.intervals, self.intervals[1:]):
            if start != end:
                raise ValueError("intervals must be contiguous and ascending")

    @classmethod
    def constant(cls, state: SwitchState, t_start: float, t_end: float) -> "EisSchedule":
        return cls(((t_start, t_end, state),))

    @property
    def t_start(self) -> float:
        return self.intervals[0][0]

    @property
    def t_end(self) -> float:
        return self.intervals[-1][1]

    def require_covers(self, t0: float, t1: float) -> None:
        if t0 < self.t_start or t1 > self.t_end:
            raise ScheduleGapError(
                f"schedule covers [{self.t_start:g}, {self.t_end:g}] s but the "
                f"simulation needs [{t0:g}, {t1:g}] s"
            )

    def state_at(self, t: float) -> SwitchState:
        self.require_covers(t, t)
        for t0, t1, state in self.intervals:
            if t0 <= t < t1:
                return state
        return self.intervals[-1][2]  # t == t_end


@dataclass(frozen=True)
class SimulationTrace:
    """Sampled per-channel electrode voltages."""

    times_s: np.ndarray          # shape (n,)
    volts: np.ndarray            # shape (NUM_CHANNELS, n)
    command_volts: np.ndarray    # shape (NUM_CHANNELS, n), zero-order hold


@dataclass(frozen=True)
class ChannelSettling:
    settle_time_s: float      # worst analytic step-settle on this channel
    max_overshoot_v: float    # excursion beyond the command envelope
    final_error_v: float      # |v - command| at the end of the window
    flagged_steps: int        # steps whose settle time exceeds the frame period


@dataclass(frozen=True)
class SettlingReport:
    channels: tuple[ChannelSettling, ...]
    droop_v: float            # worst voltage lost across any open interval

    @property
    def flagged_steps(self) -> int:
        return sum(c.flagged_steps for c in self.channels)

    @property
    def max_settle_time_s(self) -> float:
        return max(c.settle_time_s for c in self.channels)

    @property
    def max_final_error_v(self) -> float:
        return max(abs(c.final_error_v) for c in self.channels)


@dataclass(frozen=True)
class ShuttleReport:
    duration_s: float
    frame_count: int
    settling: SettlingReport
    feasible: bool            # no flagged steps and monotone voltage tracking
    round_trip_s: float       # one out-and-back cycle; cycles repeat identically


def _ideal_transfers() -> list[Transfer]:
    ideal = IdealTransfer()
    return [ideal] * NUM_CHANNELS


def plan_linear_ramp(
    v_start: Sequence[float],
    v_end: Sequence[float],
    duration_s: float,
    bus: BusConfig,
    transfers: Sequence[Transfer] | None = None,
) -> Waveform:
    """Uniformly spaced frames interpolating v_start -> v_end, endpoints inclusive.

    Emits floor(duration * update_rate) + 1 frames so the spacing never
    beats the bus frame period; a duration shorter than one frame period
    degenerates to the single endpoint frame.
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    if len(v_start) != NUM_CHANNELS or len(v_end) != NUM_CHANNELS:
        raise ValueError(f"need {NUM_CHANNELS} start and end voltages")
    transfers = list(transfers) if transfers is not None else _ideal_transfers()

    n = math.floor(duration_s * update_rate(bus)) + 1
    entries = []
    for i in range(n):
        frac = i / (n - 1) if n > 1 else 1.0
        t = duration_s * frac if n > 1 else 0.0
        codes = []
        for ch in range(NUM_CHANNELS):
            target = v_start[ch] + (v_end[ch] - v_start[ch]) * frac
            try:
                codes.append(code_for_voltage(transfers[ch], target))
            except OutOfRangeError as err:
                raise OutOfRangeError(f"channel {ch}: {err}", nearest_v=err.nearest_v) from err
        entries.append((t, Frame(tuple(codes))))
    return Waveform(tuple(entries))


def _command_table(wf: Waveform, transfers: Sequence[Transfer]) -> tuple[np.ndarray, np.ndarray]:
    times = np.array([t for t, _ in wf.entries])
    volts = np.array(
        [[transfers[ch].voltage(frame.codes[ch]) for _, frame in wf.entries]
         for ch in range(NUM_CHANNELS)]
    )
    return times, volts


def simulate_electrode_voltage(
    wf: Waveform,
    net: RcNetwork,
    switch: IsolationSwitch,
    sched: EisSchedule,
    sample_dt_s: float,
    transfers: Sequence[Transfer] | None = None,
    v_initial: Sequence[float] | None = None,
    t_end_s: float | None = None,
) -> SimulationTrace:
    """Exact piecewise-exponential electrode response to a waveform.

    Within each stretch of constant command and switch state,
    v(t) = target + (v0 - target) * exp(-dt/tau) with tau = R(state) * C;
    closed drives toward the command, open discharges toward 0 through the
    open-switch resistance (droop).  Segment boundaries are propagated in
    closed form, so refining sample_dt_s does not change sampled values.
    """
    if sample_dt_s <= 0:
        raise ValueError("sample_dt_s must be positive")
    transfers = list(transfers) if transfers is not None else _ideal_transfers()
    cmd_times, cmd_volts = _command_table(wf, transfers)

    t0 = wf.t_start
    t_end = sched.t_end if t_end_s is None else t_end_s
    if t_end < t0:
        raise ValueError("t_end_s precedes the waveform start")
    sched.require_covers(t0, t_end)

    # Segment boundaries: every command change and switch transition.
    bounds = set(cmd_times.tolist())
    bounds.update(t for t, _, _ in sched.intervals)
    bounds.update(t for _, t, _ in sched.intervals)
    bounds.add(t0)
    bounds.add(t_end)
    bounds = sorted(b for b in bounds if t0 <= b <= t_end)

    c_total = net.c_total_f
    n_samples = math.floor((t_end - t0) / sample_dt_s + 1e-9) + 1
    sample_t = t0 + np.arange(n_samples) * sample_dt_s
    if n_samples > 1 and sample_t[-1] > t_end:
        sample_t[-1] = t_end  # guard float overshoot of the window edge

    v = (np.array(cmd_volts[:, 0], dtype=float) if v_initial is None
         else np.array(v_initial, dtype=float))
    if v.shape != (NUM_CHANNELS,):
        raise ValueError(f"v_initial needs {NUM_CHANNELS} entries")

    volts = np.empty((NUM_CHANNELS, n_samples))
    command = np.empty((NUM_CHANNELS, n_samples))
    for a, b in zip(bounds, bounds[1:] + [t_end]):
        if b <= a and not (a == b == t_end):
            continue
        state = sched.state_at(a)
        k = np.searchsorted(cmd_times, a, side="right") - 1
        cmd = cmd_volts[:, max(k, 0)]
        tau = switch.resistance_in(state) * c_total
        target = cmd if state is SwitchState.CLOSED else np.zeros(NUM_CHANNELS)

        last = b == t_end
        mask = (sample_t >= a) & ((sample_t <= b) if last else (sample_t < b))
        if mask.any():
            decay = np.exp(-(sample_t[mask] - a) / tau)
            volts[:, mask] = target[:, None] + (v - target)[:, None] * decay[None, :]
            command[:, mask] = cmd[:, None]
        v = target + (v - target) * math.exp(-(b - a) / tau)
        if last:
            break
    return SimulationTrace(sample_t, volts, command)


def settling_check(
    wf: Waveform,
    net: RcNetwork,
    switch: IsolationSwitch,
    sched: EisSchedule,
    tolerance_v: float,
    transfers: Sequence[Transfer] | None = None,
    sample_dt_s: float | None = None,
) -> SettlingReport:
    """Per-step settle times against the frame period, plus simulated errors.

    The analytic settle time for a command step of size dv through the
    closed switch is tau * ln(|dv| / tolerance); steps that cannot settle
    within one frame period are flagged (not failed).  Final error,
    overshoot, and open-interval droop come from the exact simulation.
    """
    if tolerance_v <= 0:
        raise ValueError("tolerance_v must be positive")
    transfers = list(transfers) if transfers is not None else _ideal_transfers()
    _, cmd_volts = _command_table(wf, transfers)

    tau = switch.resistance_in(SwitchState.CLOSED) * net.c_total_f
    period = wf.min_spacing_s()
    if sample_dt_s is None:
        span = max(sched.t_end - wf.t_start, tau)
        sample_dt_s = span / 2000.0
    trace = simulate_electrode_voltage(
        wf, net, switch, sched, sample_dt_s, transfers=transfers
    )

    channels = []
    for ch in range(NUM_CHANNELS):
        worst = 0.0
        flagged = 0
        for prev, new in zip(cmd_volts[ch], cmd_volts[ch][1:]):
            dv = abs(new - prev)
            settle = tau * math.log(dv / tolerance_v) if dv > tolerance_v else 0.0
            worst = max(worst, settle)
            if period is not None and settle > period:
                flagged += 1
        lo, hi = cmd_volts[ch].min(), cmd_volts[ch].max()
        overshoot = max(
            0.0,
            float(trace.volts[ch].max() - hi),
            float(lo - trace.volts[ch].min()),
        )
        final_error = float(trace.volts[ch, -1] - cmd_volts[ch, -1])
        channels.append(ChannelSettling(worst, overshoot, final_error, flagged))

    droop = 0.0
    for t0, t1, state in sched.intervals:
        if state is not SwitchState.OPEN:
            continue
        inside = (trace.times_s >= t0) & (trace.times_s <= t1)
        if inside.sum() >= 2:
            seg = trace.volts[:, inside]
            droop = max(droop, float(np.abs(seg[:, 0] - seg[:, -1]).max()))
    return SettlingReport(tuple(channels), droop)


def shuttle_scenario(
    distance_m: float,
    speed_m_s: float,
    bus: BusConfig,
    net: RcNetwork,
    switch: IsolationSwitch | None = None,
    transfers: Sequence[Transfer] | None = None,
    v_start: Sequence[float] | None = None,
    v_end: Sequence[float] | None = None,
    tolerance_v: float = 3.955078125e-3,  # one ideal LSB
) -> ShuttleReport:
    """Voltage-level feasibility of shuttling at a given distance and speed.

    Plans a closed-switch linear ramp across the full span (default -8 V to
    +8 V on every channel), simulates it, and reports whether every step
    settles inside a frame period with monotone tracking; a feasible leg
    repeats identically, so round trips extend to arbitrarily many cycles.
    """
    if distance_m <= 0 or speed_m_s <= 0:
        raise ValueError("distance_m and speed_m_s must be positive")
    switch = switch or IsolationSwitch(SwitchState.CLOSED)
    v_start = list(v_start) if v_start is not None else [-8.0] * NUM_CHANNELS
    v_end = list(v_end) if v_end is not None else [8.0] * NUM_CHANNELS

    duration = distance_m / speed_m_s
    wf = plan_linear_ramp(v_start, v_end, duration, bus, transfers)
    sched = EisSchedule.constant(SwitchState.CLOSED, wf.t_start, wf.t_start + duration)
    report = settling_check(wf, net, switch, sched, tolerance_v, transfers=transfers)

    _, cmd_volts = _command_table(wf, transfers or _ideal_transfers())
    diffs = np.diff(cmd_volts, axis=1)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0)) if diffs.size else True
    feasible = report.flagged_steps == 0 and monotone
    return ShuttleReport(
        duration_s=duration,
        frame_count=len(wf.entries),
        settling=report,
        feasible=feasible,
        round_trip_s=2.0 * duration,
    )


def waveform_lines(wf: Waveform) -> list[str]:
    """File rows: header then "t_s,code0,...,code15" per frame."""
    header = "t_s," + ",".join(f"code{ch}" for ch in range(NUM_CHANNELS))
    rows = [header]
    for t, frame in wf.entries:
        rows.append(f"{t!r}," + ",".join(str(c) for c in frame.codes))
    return rows


def waveform_from_lines(lines: Iterable[str]) -> Waveform:
    entries = []
    for i, line in enumerate(lines):
        line = line.strip()
        if not line or (i == 0 and line.startswith("t_s")):
            continue
        fields = line.split(",")
        entries.append((float(fields[0]), Frame(tuple(int(f) for f in fields[1:]))))
    return Waveform(tuple(entries))


def schedule_lines(sched: EisSchedule) -> list[str]:
    rows = ["t_start,t_end,state"]
    for t0, t1, state in sched.intervals:
        rows.append(f"{t0!r},{t1!r},{state.value}")
    return rows


def schedule_from_lines(lines: Iterable[str]) -> EisSchedule:
    intervals = []
    for i, line in enumerate(lines):
        line = line.strip()
        if not line or (i == 0 and line.startswith("t_start")):
            continue
        t0, t1, state = line.split(",")
        intervals.append((float(t0), float(t1), SwitchState(state)))
    return EisSchedule(tuple(intervals))


def trace_lines(trace: SimulationTrace) -> list[str]:
    """File rows: "t_s,channel,volts", channel-major within each timestamp."""
    rows = ["t_s,channel,volts"]
    for j, t in enumerate(trace.times_s):
        for ch in range(NUM_CHANNELS):
            rows.append(f"{float(t)!r},{ch},{float(trace.volts[ch, j])!r}")
    return rows
