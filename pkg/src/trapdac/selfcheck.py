"""Built-in verification: recompute every headline number and compare.

Each check pins an independently derived expected value (analytic
closed form or frozen hand computation) and fails loudly if the model
drifts.  The CLI's `selfcheck` subcommand runs all of them.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import analog, dac, ion, protocol, transport
from .analog import (
    FloorNoise,
    IsolationSwitch,
    JohnsonNoise,
    OneOverFNoise,
    RcNetwork,
    SwitchState,
)
from .errors import CalibrationRejectedError
from .ion import CA40_ION, HeatingMeasurement, TrapMode
from .protocol import BusConfig, Frame

SEED = 20260810
TAU = 2.0 * math.pi

_OPEN = IsolationSwitch(SwitchState.OPEN)
_CLOSED = IsolationSwitch(SwitchState.CLOSED)


class CheckError(AssertionError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _expect(cond: bool, detail: str) -> None:
    if not cond:
        raise CheckError(detail)


def _close(actual: float, expected: float, rel: float) -> bool:
    return abs(actual - expected) <= rel * abs(expected)


def check_pole_reproduction() -> str:
    cases = [
        (3.3e3, 1e-9, 48228.77),
        (3.3e3, 400e-12, 120571.93),
        (1e6, 400e-12, 397.887),
    ]
    for r, c, expected in cases:
        got = analog.pole_frequency(r, c)
        _expect(_close(got, expected, 5e-3), f"pole({r:g},{c:g}) = {got:.6g}, want {expected:g}")
    return "48.23 kHz / 120.6 kHz / 397.9 Hz"


def check_filter_attenuation() -> str:
    net = RcNetwork(c_electrode_f=1e-12, c_parallel_f=999e-12)
    amp = 0.98e-6 * math.sqrt(analog.network_transfer_sq(net, _CLOSED, 1.5e6))
    _expect(_close(amp, 32e-9, 0.05), f"closed-switch amplitude at 1.5 MHz = {amp:.4g}, want ~32 nV")
    return f"0.98 uV -> {amp * 1e9:.1f} nV/rtHz at 1.5 MHz"


def check_heating_consistency() -> str:
    omega = TAU * 1.5e6
    closed = HeatingMeasurement(18.2e-9, 1090.0, 20.0)
    d = ion.fit_deff([closed], omega)
    mode = TrapMode(omega, d)
    predicted = ion.heating_rate((6.0e-9) ** 2, mode)
    _expect(118.0 <= predicted <= 119.0, f"predicted open-pair rate {predicted:.4g} outside 118..119")
    _expect(abs(predicted - 120.0) <= 30.0, "prediction outside the measured error bar")
    inferred = ion.noise_from_heating(120.0, mode)
    _expect(abs(inferred - 6.0e-9) <= 0.8e-9, f"inverse noise {inferred:.4g} not within 0.8 nV of 6 nV")
    return f"d_eff = {d * 1e3:.3f} mm, predicted {predicted:.1f} quanta/s, inverse {inferred * 1e9:.2f} nV"


def check_roundtrip_identities() -> str:
    rng = random.Random(SEED)
    for _ in range(10_000):
        frame = Frame(tuple(rng.randrange(4096) for _ in range(16)))
        _expect(protocol.decode_frame(protocol.encode_frame(frame)) == frame, "frame roundtrip broke")
    mode = TrapMode(TAU * 1.5e6, ion.MEASURED_D_EFF_M)
    for _ in range(10_000):
        amp = 10 ** rng.uniform(-10, -6)
        rate = ion.heating_rate(amp * amp, mode)
        back = ion.noise_from_heating(rate, mode)
        _expect(abs(back - amp) <= 1e-9 * amp, f"noise roundtrip error {abs(back - amp) / amp:g}")
    return "10^4 frame and 10^4 noise roundtrips exact"


def check_protocol_rates() -> str:
    fast = protocol.update_rate(BusConfig(50e6))
    slow = protocol.update_rate(BusConfig(200e3))
    _expect(_close(fast, 260416.667, 1e-6), f"update_rate(50 MHz) = {fast:g}")
    _expect(abs(fast - 250e3) <= 0.05 * 250e3, "50 MHz rate not within 5% of 250 kHz")
    _expect(_close(slow, 1041.667, 1e-5), f"update_rate(200 kHz) = {slow:g}")
    return "260.4 kHz / 1.0417 kHz"


def check_design_space() -> str:
    for c_couple, c_shunt in [(0.1e-12, 10e-12), (0.5e-12, 50e-12)]:
        leak = analog.rf_leakage_fraction(c_couple, c_shunt)
        _expect(leak <= 0.010, f"leakage {leak:.4g} above 1% for matched pair")
    bw_lo = analog.pole_frequency(3.3e3, 50e-12)
    bw_hi = analog.pole_frequency(3.3e3, 10e-12)
    _expect(_close(bw_lo, 0.9646e6, 5e-3), f"slow corner {bw_lo:g}")
    _expect(_close(bw_hi, 4.8229e6, 5e-3), f"fast corner {bw_hi:g}")
    iso = analog.eis_isolation_db(_OPEN, 10e-12, 1.5e6)
    _expect(iso <= -159.0, f"isolation {iso:.2f} dB above -159 dB")
    _expect(abs(iso - (-160.0)) <= 1.5, f"isolation {iso:.2f} dB not within 1.5 dB of -160")
    return f"bandwidth {bw_lo / 1e6:.2f}-{bw_hi / 1e6:.2f} MHz, isolation {iso:.1f} dB"


def _bench_setup():
    net = RcNetwork(c_electrode_f=1e-12, c_parallel_f=400e-12, r_parallel_ohm=1e6)
    sources = [OneOverFNoise(1.5e6, 0.98e-6), JohnsonNoise(1e6, 300.0), FloorNoise(8e-9)]
    freqs = analog.log_frequency_grid(10.0, 2e6, 24)
    return net, sources, freqs


def _fit_slope(freqs, amps, f_lo, f_hi) -> float:
    sel = (freqs >= f_lo) & (freqs <= f_hi)
    return float(np.polyfit(np.log10(freqs[sel]), np.log10(amps[sel]), 1)[0])


def check_trace_shape() -> str:
    net, sources, freqs = _bench_setup()
    open_amp = np.sqrt(analog.electrode_noise_psd(sources, net, _OPEN, freqs))
    closed_amp = np.sqrt(analog.electrode_noise_psd(sources, net, _CLOSED, freqs))

    low = open_amp[freqs <= 100.0]
    _expect(bool(np.all(np.abs(low / 128.7e-9 - 1) <= 0.05)), "open trace misses 128.7 nV asymptote")
    high = open_amp[freqs >= 50e3]
    _expect(bool(np.all(np.abs(high / 8e-9 - 1) <= 0.05)), "open trace misses 8 nV floor")

    slope_mid = _fit_slope(freqs, closed_amp, 1e3, 30e3)
    _expect(abs(slope_mid + 0.5) <= 0.05, f"closed trace slope {slope_mid:.3f} not -0.5 +/- 0.05")
    slope_high = _fit_slope(freqs, closed_amp, 5e5, 2e6)
    _expect(slope_high <= -1.0, f"closed trace slope {slope_high:.3f} above -1 past the pole")
    return f"asymptotes ok, slopes {slope_mid:.2f} / {slope_high:.2f}"


def check_transport_shuttle() -> str:
    net = RcNetwork(c_electrode_f=1e-12, c_parallel_f=1e-9)
    report = transport.shuttle_scenario(80e-6, 2e-3, BusConfig(200e3), net)
    _expect(_close(report.duration_s, 0.040, 1e-9), f"duration {report.duration_s:g}")
    _expect(report.frame_count == 42, f"frame count {report.frame_count}, want 42")
    _expect(report.settling.flagged_steps == 0 and report.feasible, "shuttle not feasible")

    step_net = RcNetwork(c_electrode_f=1e-12, c_parallel_f=999e-12)
    tau = 3.3e3 * step_net.c_total_f
    ideal = dac.IdealTransfer()
    code = dac.code_for_voltage(ideal, 1.0)
    wf = transport.Waveform(((0.0, Frame.uniform(code)),))
    sched = transport.EisSchedule.constant(SwitchState.CLOSED, 0.0, 5 * tau)
    trace = transport.simulate_electrode_voltage(
        wf, step_net, _CLOSED, sched, sample_dt_s=tau, v_initial=[0.0] * 16
    )
    cmd = ideal.voltage(code)
    expected = cmd * (1.0 - math.exp(-1.0))
    got = float(trace.volts[0, 1])
    _expect(abs(got - expected) <= 1e-6 * abs(expected), f"step response {got:g} vs {expected:g}")
    return f"40 ms / 42 frames / step at tau = {got:.6f} V"


def check_calibration_roundtrip() -> str:
    rng = random.Random(SEED + 1)
    total = 0
    for _ in range(200):
        n = rng.randrange(2, 30)
        codes = sorted(rng.sample(range(1, 4095), n - 2) + [0, 4095]) if n > 2 else [0, 4095]
        base = sorted(rng.uniform(-8.0, 8.0) for _ in range(2))
        steps = [rng.random() for _ in range(len(codes) - 1)]
        scale = (base[1] - base[0]) / (sum(steps) or 1.0)
        volts = [base[0]]
        for s in steps:
            volts.append(volts[-1] + s * scale)
        cal = dac.fit_calibration(0, list(zip(codes, volts)))
        v_lo, v_hi = cal.voltage(0), cal.voltage(4095)
        for _ in range(50):
            target = rng.uniform(v_lo, v_hi)
            code = dac.code_for_voltage(cal, target)
            got = cal.voltage(code)
            if got <= target:
                gap = (cal.voltage(code + 1) - got) if code < 4095 else 0.0
            else:
                gap = (got - cal.voltage(code - 1)) if code > 0 else 0.0
            _expect(abs(got - target) <= 0.5 * gap + 1e-12,
                    f"roundtrip error {abs(got - target):g} beyond half step {gap / 2:g}")
            total += 1
    try:
        dac.fit_calibration(0, [(0, -8.0), (1000, -2.0), (2000, -2.2), (4095, 8.0)])
    except CalibrationRejectedError:
        pass
    else:
        raise CheckError("200 mV dip was not rejected")
    return f"{total} randomized roundtrips within half a step; deep dip rejected"


def check_output_determinism() -> str:
    from . import cli
    from .config import load_config

    cfg = load_config(None)
    first = (cli.build_noise_spectrum_rows(cfg), cli.build_heating_rows(cfg),
             cli.build_leakage_rows(cfg), cli.build_transport_rows(cfg)[0])
    second = (cli.build_noise_spectrum_rows(cfg), cli.build_heating_rows(cfg),
              cli.build_leakage_rows(cfg), cli.build_transport_rows(cfg)[0])
    _expect(first == second, "repeated table builds differ")
    return "repeated table builds byte-identical"


CHECKS = [
    ("pole_reproduction", check_pole_reproduction),
    ("filter_attenuation", check_filter_attenuation),
    ("heating_consistency", check_heating_consistency),
    ("roundtrip_identities", check_roundtrip_identities),
    ("protocol_rates", check_protocol_rates),
    ("design_space", check_design_space),
    ("trace_shape", check_trace_shape),
    ("transport_shuttle", check_transport_shuttle),
    ("calibration_roundtrip", check_calibration_roundtrip),
    ("output_determinism", check_output_determinism),
]


def run_all() -> list[CheckResult]:
    results = []
    for name, func in CHECKS:
        try:
            detail = func()
            results.append(CheckResult(name, True, detail))
        except CheckError as err:
            results.append(CheckResult(name, False, str(err)))
    return results
