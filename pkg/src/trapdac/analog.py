"""Isolation switch, RC filter networks, noise sources, and power draw.

Everything here is a single-pole behavioral model: each filtering claim
reduces to a corner at 1/(2*pi*R*C), and independent noise sources add in
power at the electrode node.  Amplitudes are one-sided spectral densities,
V/sqrt(Hz); PSDs are their squares, V^2/Hz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

BOLTZMANN_J_PER_K = 1.380649e-23  # exact since the 2019 SI redefinition

# Chip surface temperature with the converters powered in the cold mount,
# used for any on-chip thermal source.
CHIP_TEMP_K = 50.0

ACTIVE_POWER_W = 0.500
POWER_DOWN_POWER_W = 0.016


class SwitchState(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class PowerMode(enum.Enum):
    ACTIVE = "active"
    POWER_DOWN = "power_down"


@dataclass(frozen=True)
class IsolationSwitch:
    """Complementary FET pair between amplifier and electrode.

    A voltage-variable resistance: a few kOhm closed, ~TOhm open, so the
    electrode can be charged quickly and then cut off from amplifier noise.
    """

    state: SwitchState = SwitchState.CLOSED
    r_closed_ohm: float = 3.3e3
    r_open_ohm: float = 1e12

    def __post_init__(self):
        if not 0 < self.r_closed_ohm < self.r_open_ohm:
            raise ValueError("need 0 < r_closed_ohm < r_open_ohm")

    @property
    def resistance_ohm(self) -> float:
        return self.resistance_in(self.state)

    def resistance_in(self, state: SwitchState) -> float:
        return self.r_closed_ohm if state is SwitchState.CLOSED else self.r_open_ohm

    def with_state(self, state: SwitchState) -> "IsolationSwitch":
        return replace(self, state=state)


@dataclass(frozen=True)
class RcNetwork:
    """Series R into the electrode node capacitance, optionally probed.

    r_series_ohm is the source resistance used when no switch is in the
    path; ops that take an IsolationSwitch use its state resistance
    instead.  r_parallel_ohm models an instrument input resistance across
    the node and is absent (None) in normal operation.
    """

    r_series_ohm: float = 3.3e3
    c_electrode_f: float = 1e-12
    c_parallel_f: float = 1e-9
    r_parallel_ohm: float | None = None

    def __post_init__(self):
        if self.r_series_ohm <= 0 or self.c_electrode_f <= 0 or self.c_parallel_f < 0:
            raise ValueError("need r_series_ohm > 0, c_electrode_f > 0, c_parallel_f >= 0")
        if self.r_parallel_ohm is not None and self.r_parallel_ohm <= 0:
            raise ValueError("r_parallel_ohm must be positive when present")

    @property
    def c_total_f(self) -> float:
        return self.c_electrode_f + self.c_parallel_f


@dataclass(frozen=True)
class OneOverFNoise:
    """Pink source: power density anchor_amplitude^2 * anchor_freq / f."""

    anchor_freq_hz: float
    anchor_amplitude_v: float  # V/sqrt(Hz) at anchor_freq_hz

    def psd(self, f_hz):
        return self.anchor_amplitude_v**2 * self.anchor_freq_hz / f_hz


@dataclass(frozen=True)
class JohnsonNoise:
    """Thermal noise of a shunt resistance at the measurement node, 4kTR."""

    r_ohm: float
    temp_k: float

    def psd(self, f_hz):
        return 4.0 * BOLTZMANN_J_PER_K * self.temp_k * self.r_ohm * np.ones_like(np.asarray(f_hz, dtype=float))


@dataclass(frozen=True)
class FloorNoise:
    """Flat instrument floor, added unfiltered at the measurement point."""

    amplitude_v: float  # V/sqrt(Hz)

    def psd(self, f_hz):
        return self.amplitude_v**2 * np.ones_like(np.asarray(f_hz, dtype=float))


NoiseSource = Union[OneOverFNoise, JohnsonNoise, FloorNoise]


def source_psd(source: NoiseSource, f_hz):
    """One-sided power density of a bare source, V^2/Hz."""
    return source.psd(f_hz)


def pole_frequency(r_ohm: float, c_f: float) -> float:
    """First-order corner 1/(2*pi*R*C) in Hz."""
    if r_ohm <= 0 or c_f <= 0:
        raise ValueError("pole needs positive R and C")
    return 1.0 / (2.0 * math.pi * r_ohm * c_f)


def _series_resistance(net: RcNetwork, switch: IsolationSwitch | None) -> float:
    return switch.resistance_ohm if switch is not None else net.r_series_ohm


def network_transfer_sq(net: RcNetwork, switch: IsolationSwitch | None, f_hz):
    """Power transfer from the amplifier side to the electrode node.

    Single pole from the series resistance (per switch state) and the total
    node capacitance; when a probe resistance is present it adds its DC
    divider and shifts the pole to the parallel combination.
    """
    r_s = _series_resistance(net, switch)
    c = net.c_total_f
    if net.r_parallel_ohm is None:
        f_c = pole_frequency(r_s, c)
        return 1.0 / (1.0 + (np.asarray(f_hz, dtype=float) / f_c) ** 2)
    r_p = net.r_parallel_ohm
    divider = r_p / (r_s + r_p)
    f_c = pole_frequency(r_s * r_p / (r_s + r_p), c)
    return divider**2 / (1.0 + (np.asarray(f_hz, dtype=float) / f_c) ** 2)


def shunt_transfer_sq(net: RcNetwork, switch: IsolationSwitch | None, f_hz, r_shunt_ohm: float):
    """Power transfer of a source sitting in a shunt branch at the node.

    The branch resistance divides against the series branch, with the node
    pole set by their parallel combination and the total capacitance.  This
    is how an instrument's input-resistance noise reaches the electrode:
    nearly unity with the switch open, divided down ~r_closed/r_shunt when
    closed.
    """
    r_s = _series_resistance(net, switch)
    divider = r_s / (r_s + r_shunt_ohm)
    f_c = pole_frequency(r_s * r_shunt_ohm / (r_s + r_shunt_ohm), net.c_total_f)
    return divider**2 / (1.0 + (np.asarray(f_hz, dtype=float) / f_c) ** 2)


def electrode_noise_psd(
    sources: Sequence[NoiseSource],
    net: RcNetwork,
    switch: IsolationSwitch | None,
    f_hz,
):
    """Total one-sided PSD at the electrode node, V^2/Hz.

    Sources are uncorrelated and add in power, each through its own
    transfer: amplifier-side sources through the series path, Johnson
    sources through their shunt branch, floors unfiltered.
    """
    total = np.zeros_like(np.asarray(f_hz, dtype=float))
    for src in sources:
        if isinstance(src, FloorNoise):
            total = total + src.psd(f_hz)
        elif isinstance(src, JohnsonNoise):
            total = total + src.psd(f_hz) * shunt_transfer_sq(net, switch, f_hz, src.r_ohm)
        else:
            total = total + src.psd(f_hz) * network_transfer_sq(net, switch, f_hz)
    if np.ndim(f_hz) == 0:
        return float(total)
    return total


def eis_isolation_db(switch: IsolationSwitch, c_total_f: float, f_hz: float) -> float:
    """Power transfer through the switch into the node capacitance, in dB.

    10*log10 |Z_C / (Z_C + R_switch)|^2 with Z_C = 1/(2*pi*f*C); negative,
    and very large in magnitude with the switch open.
    """
    if f_hz <= 0 or c_total_f <= 0:
        raise ValueError("need f_hz > 0 and c_total_f > 0")
    x = 2.0 * math.pi * f_hz * switch.resistance_ohm * c_total_f
    return -10.0 * math.log10(1.0 + x * x)


def rf_leakage_fraction(c_couple_f: float, c_shunt_f: float) -> float:
    """Capacitive divider from the drive electrode onto a control electrode."""
    if c_couple_f <= 0 or c_shunt_f <= 0:
        raise ValueError("capacitances must be positive")
    return c_couple_f / (c_couple_f + c_shunt_f)


def power_draw_w(mode: PowerMode) -> float:
    """Chip power: full conversion chain active, or parked after charge-up."""
    return ACTIVE_POWER_W if mode is PowerMode.ACTIVE else POWER_DOWN_POWER_W


def log_frequency_grid(f_min_hz: float, f_max_hz: float, points_per_decade: int) -> np.ndarray:
    """Logarithmic grid including both endpoints."""
    if not 0 < f_min_hz < f_max_hz:
        raise ValueError("need 0 < f_min_hz < f_max_hz")
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be >= 1")
    decades = math.log10(f_max_hz / f_min_hz)
    n = int(round(decades * points_per_decade)) + 1
    return np.logspace(math.log10(f_min_hz), math.log10(f_max_hz), max(n, 2))
