"""Electrode voltage noise to motional heating and back.

The mean occupation of a trapped ion's motional mode grows linearly under
voltage noise on the control electrodes:

    rate = q^2 * S_V(omega) / (4 * m * hbar * omega * d_eff^2) + baseline

with S_V the one-sided voltage-noise power density (V^2/Hz) at the mode
frequency and d_eff the effective distance converting electrode voltage to
field at the ion.  The baseline is the surface-noise (anomalous) floor,
additive and independent of the voltage sources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InfeasibleRateError

# CODATA-2018, fixed here so results do not drift with library versions.
HBAR_J_S = 1.054571817e-34
ELEMENTARY_CHARGE_C = 1.602176634e-19
ATOMIC_MASS_KG = 1.66053906660e-27

CA40_MASS_U = 39.9626  # isotopic mass of calcium-40, not the integer 40

# Effective distance fitted from the measured closed-switch pair
# (18.2 nV/sqrt(Hz) <-> 1090 quanta/s) at omega = 2*pi*1.5 MHz for Ca-40:
# d_eff = sqrt(q^2 * S_V / (4*m*hbar*omega*rate)) = 5.4377 mm.
MEASURED_D_EFF_M = 5.4377e-3


@dataclass(frozen=True)
class IonSpecies:
    mass_kg: float = CA40_MASS_U * ATOMIC_MASS_KG
    charge_c: float = ELEMENTARY_CHARGE_C

    def __post_init__(self):
        if self.mass_kg <= 0 or self.charge_c <= 0:
            raise ValueError("mass_kg and charge_c must be positive")


CA40_ION = IonSpecies()


@dataclass(frozen=True)
class TrapMode:
    """One motional mode: angular frequency, geometry factor, noise floor."""

    omega_rad_s: float
    d_eff_m: float = MEASURED_D_EFF_M
    anomalous_baseline_quanta_s: float = 0.0

    def __post_init__(self):
        if self.omega_rad_s <= 0 or self.d_eff_m <= 0:
            raise ValueError("omega_rad_s and d_eff_m must be positive")
        if self.anomalous_baseline_quanta_s < 0:
            raise ValueError("anomalous_baseline_quanta_s must be >= 0")


@dataclass(frozen=True)
class HeatingMeasurement:
    """A measured (voltage noise amplitude, heating rate) pair."""

    s_v_amplitude_v: float  # V/sqrt(Hz)
    rate_quanta_s: float
    rate_sigma_quanta_s: float

    def __post_init__(self):
        if min(self.s_v_amplitude_v, self.rate_quanta_s, self.rate_sigma_quanta_s) <= 0:
            raise ValueError("measurement fields must be positive")


def noise_to_rate_factor(omega_rad_s: float, ion: IonSpecies = CA40_ION) -> float:
    """q^2 / (4*m*hbar*omega): quanta/s per (V^2/Hz)/m^2."""
    return ion.charge_c**2 / (4.0 * ion.mass_kg * HBAR_J_S * omega_rad_s)


def heating_rate(s_v: float, mode: TrapMode, ion: IonSpecies = CA40_ION) -> float:
    """Heating rate in quanta/s for power density s_v (V^2/Hz) at the mode."""
    if s_v < 0:
        raise ValueError("s_v must be >= 0")
    k = noise_to_rate_factor(mode.omega_rad_s, ion)
    return k * s_v / mode.d_eff_m**2 + mode.anomalous_baseline_quanta_s


def noise_from_heating(rate: float, mode: TrapMode, ion: IonSpecies = CA40_ION) -> float:
    """Voltage-noise amplitude (V/sqrt(Hz)) implied by a measured rate.

    Subtracts the anomalous baseline first; rates below it are infeasible.
    """
    excess = rate - mode.anomalous_baseline_quanta_s
    if excess < 0:
        raise InfeasibleRateError(
            f"rate {rate:g} quanta/s is below the {mode.anomalous_baseline_quanta_s:g} "
            "quanta/s anomalous baseline"
        )
    k = noise_to_rate_factor(mode.omega_rad_s, ion)
    return math.sqrt(excess * mode.d_eff_m**2 / k)


def fit_deff(
    measurements: Sequence[HeatingMeasurement],
    omega_rad_s: float,
    ion: IonSpecies = CA40_ION,
) -> float:
    """Weighted least-squares d_eff over (noise, rate) pairs.

    The model is linear in x = 1/d_eff^2 (rate_i = k*S_i*x), so the
    1/sigma^2-weighted fit has the closed form
    x = sum(w r kS) / sum(w (kS)^2); with one pair this reduces to the
    direct inversion.
    """
    if not measurements:
        raise ValueError("need at least one measurement to fit d_eff")
    k = noise_to_rate_factor(omega_rad_s, ion)
    num = 0.0
    den = 0.0
    for m in measurements:
        ks = k * m.s_v_amplitude_v**2
        w = 1.0 / m.rate_sigma_quanta_s**2
        num += w * m.rate_quanta_s * ks
        den += w * ks * ks
    return 1.0 / math.sqrt(num / den)


def nbar_after_delay(n0: float, rate: float, t_s: float) -> float:
    """Mean occupation after a delay under linear heating."""
    if n0 < 0 or t_s < 0:
        raise ValueError("n0 and t_s must be >= 0")
    return n0 + rate * t_s


def expected_open_rate_bound(
    noise_floor_amplitude_v: float,
    mode: TrapMode,
    ion: IonSpecies = CA40_ION,
) -> float:
    """Upper bound on the isolated-electrode heating rate.

    With the switch open the electrode noise is below the instrument floor,
    so the rate at the floor's PSD (plus baseline) bounds the true rate.
    """
    return heating_rate(noise_floor_amplitude_v**2, mode, ion)
