"""Code-to-voltage transfer of the R-2R ladder, buffer, and HV amplifier.

The behavioral chain maps a 12-bit code to vref*code/4096 at the ladder
output, then through a gain stage that centers the range on 0 V and clamps
at the amplifier rails.  Channels whose cold transfer goes nonlinear are
replaced by a measured monotone lookup table fitted from a code sweep.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .errors import CalibrationRejectedError, OutOfRangeError
from .protocol import CODE_MAX

CODE_SPAN = CODE_MAX + 1  # 4096, the R-2R denominator

# Dips below this are treated as measurement wiggle and flattened to the
# running maximum; anything larger makes the table non-invertible.
MONOTONIC_TOLERANCE_V = 0.050


class Transfer(Protocol):
    """Anything that maps an integer code to a voltage, monotonically."""

    def voltage(self, code: int) -> float: ...


def _require_code(code: int) -> int:
    code = int(code)
    if not 0 <= code <= CODE_MAX:
        raise ValueError(f"code {code} outside 0..{CODE_MAX}")
    return code


@dataclass(frozen=True)
class IdealTransfer:
    """Nominal chain: ladder 0..vref, gain stage centered on 0 V, rail clamp."""

    vref_v: float = 1.8
    gain: float = 9.0
    offset_v: float = 0.9
    rail_v: float = 8.0

    def __post_init__(self):
        if self.vref_v <= 0 or self.gain <= 0 or self.rail_v <= 0:
            raise ValueError("vref_v, gain, and rail_v must be positive")

    @property
    def lsb_v(self) -> float:
        """Ideal step at the electrode, away from the rails."""
        return self.gain * self.vref_v / CODE_SPAN

    def voltage(self, code: int) -> float:
        code = _require_code(code)
        v = self.gain * (self.vref_v * code / CODE_SPAN - self.offset_v)
        return max(-self.rail_v, min(self.rail_v, v))


@dataclass(frozen=True)
class AmplifierSpec:
    """As-built amplifier component values.

    Recorded for reference only; the behavioral model uses
    IdealTransfer.gain rather than deriving gain from the resistors.
    """

    r1_ohm: float = 70e3
    r2_ohm: float = 2e3
    r3_ohm: float = 8e3
    c_comp_f: float = 200e-15

    def __post_init__(self):
        for name in ("r1_ohm", "r2_ohm", "r3_ohm", "c_comp_f"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ChannelCalibration:
    """Measured monotone code->voltage table for one electrode.

    Between samples the table interpolates linearly; outside the sampled
    code range it extrapolates along the nearest segment, clamped to the
    rails.  Tables are immutable and independent per channel.
    """

    channel: int
    codes: tuple[int, ...]
    volts: tuple[float, ...]
    rail_v: float = 8.0

    def __post_init__(self):
        if len(self.codes) < 2 or len(self.codes) != len(self.volts):
            raise ValueError("need at least 2 (code, volts) samples")
        if any(b <= a for a, b in zip(self.codes, self.codes[1:])):
            raise ValueError("sample codes must be strictly increasing")
        if any(b < a for a, b in zip(self.volts, self.volts[1:])):
            raise ValueError("sample voltages must be non-decreasing")

    def voltage(self, code: int) -> float:
        code = _require_code(code)
        codes, volts = self.codes, self.volts
        if codes[0] <= code <= codes[-1]:
            k = bisect.bisect_right(codes, code) - 1
            if k == len(codes) - 1:
                return volts[-1]
            frac = (code - codes[k]) / (codes[k + 1] - codes[k])
            return volts[k] + frac * (volts[k + 1] - volts[k])
        if code < codes[0]:
            slope = (volts[1] - volts[0]) / (codes[1] - codes[0])
            v = volts[0] + slope * (code - codes[0])
        else:
            slope = (volts[-1] - volts[-2]) / (codes[-1] - codes[-2])
            v = volts[-1] + slope * (code - codes[-1])
        return max(-self.rail_v, min(self.rail_v, v))


def fit_calibration(
    channel: int,
    sweep: Iterable[tuple[int, float]],
    tolerance_v: float = MONOTONIC_TOLERANCE_V,
    rail_v: float = 8.0,
) -> ChannelCalibration:
    """Fit a monotone lookup table from a measured code sweep.

    Downward dips no deeper than tolerance_v are flattened to the running
    maximum; a deeper dip raises CalibrationRejectedError and the channel
    must be treated as unusable.
    """
    samples = sorted((int(c), float(v)) for c, v in sweep)
    if len(samples) < 2:
        raise CalibrationRejectedError(f"channel {channel}: need >= 2 sweep samples")
    codes = tuple(c for c, _ in samples)
    if any(b <= a for a, b in zip(codes, codes[1:])):
        raise CalibrationRejectedError(f"channel {channel}: duplicate sweep codes")
    if codes[0] < 0 or codes[-1] > CODE_MAX:
        raise CalibrationRejectedError(f"channel {channel}: sweep codes outside 0..{CODE_MAX}")

    flattened = []
    running_max = -math.inf
    for code, v in samples:
        if not math.isfinite(v) or abs(v) > rail_v:
            raise CalibrationRejectedError(
                f"channel {channel}: measured {v!r} V at code {code} is outside +/-{rail_v} V"
            )
        dip = running_max - v
        if dip > tolerance_v:
            raise CalibrationRejectedError(
                f"channel {channel}: {dip * 1e3:.1f} mV dip at code {code} exceeds "
                f"{tolerance_v * 1e3:.1f} mV monotonicity tolerance"
            )
        running_max = max(running_max, v)
        flattened.append(running_max)
    return ChannelCalibration(channel, codes, tuple(flattened), rail_v)


def code_for_voltage(transfer: Transfer, target_v: float) -> int:
    """Integer code whose voltage is nearest target_v; ties go to the lower code.

    Raises OutOfRangeError (carrying the nearest achievable voltage) when
    the target lies outside the channel's achievable range.
    """
    v_min = transfer.voltage(0)
    v_max = transfer.voltage(CODE_MAX)
    if not v_min <= target_v <= v_max:
        nearest = v_min if target_v < v_min else v_max
        raise OutOfRangeError(
            f"target {target_v:g} V outside achievable [{v_min:g}, {v_max:g}] V; "
            f"nearest achievable {nearest:g} V",
            nearest_v=nearest,
        )
    # First code at or above the target, then compare against its neighbor.
    hi = bisect.bisect_left(range(CODE_SPAN), target_v, key=transfer.voltage)
    hi = min(hi, CODE_MAX)
    lo = max(hi - 1, 0)
    best = lo if abs(target_v - transfer.voltage(lo)) <= abs(transfer.voltage(hi) - target_v) else hi
    # Flat stretches (rail clamps, flattened dips) share one voltage; the
    # tie-break demands the lowest code attaining it.
    best_v = transfer.voltage(best)
    return bisect.bisect_left(range(CODE_SPAN), best_v, key=transfer.voltage)


def read_sweep_file(lines: Iterable[str]) -> dict[int, list[tuple[int, float]]]:
    """Parse "channel,code,volts" lines into per-channel sweeps.

    A leading header row is skipped.  Returns {channel: [(code, volts), ...]}
    in file order.
    """
    sweeps: dict[int, list[tuple[int, float]]] = {}
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"line {i + 1}: expected 'channel,code,volts', got {line!r}")
        if i == 0 and not fields[0].lstrip("-").isdigit():
            continue  # header
        channel, code, volts = int(fields[0]), int(fields[1]), float(fields[2])
        sweeps.setdefault(channel, []).append((code, volts))
    return sweeps


def sweep_rows(channel: int, transfer: Transfer, code_step: int = 1) -> list[tuple[int, int, float]]:
    """(channel, code, volts) rows over the full code range at code_step."""
    if code_step < 1:
        raise ValueError("code_step must be >= 1")
    codes = list(range(0, CODE_SPAN, code_step))
    if codes[-1] != CODE_MAX:
        codes.append(CODE_MAX)
    return [(channel, code, transfer.voltage(code)) for code in codes]


def transfer_set(
    calibrations: dict[int, ChannelCalibration] | None = None,
    ideal: IdealTransfer | None = None,
    n_channels: int = 16,
) -> list[Transfer]:
    """Per-channel transfers: the channel's calibration if present, else ideal."""
    ideal = ideal or IdealTransfer()
    calibrations = calibrations or {}
    return [calibrations.get(ch, ideal) for ch in range(n_channels)]
