"""Scenario runner: named experiments over a shared config, CSV out.

Subcommands map to the quantities the hardware was characterized by:
transfer sweeps, in-situ calibration, noise spectra for both switch
states, heating-rate conversions, the shunt-sizing design table, the
shuttle feasibility report, and a selfcheck that reruns every headline
number.  Identical config and inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Sequence

from . import analog, dac, ion, transport
from .analog import SwitchState
from .config import ScenarioConfig, load_config
from .errors import ConfigError, TrapDacError
from .protocol import NUM_CHANNELS, BusConfig
from .selfcheck import run_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_SELFCHECK = 4


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _write_table(path: str, rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _load_calibrations(cfg: ScenarioConfig) -> dict[int, dac.ChannelCalibration]:
    if cfg.calibration_file is None:
        return {}
    with open(cfg.calibration_file) as fh:
        sweeps = dac.read_sweep_file(fh)
    return {
        ch: dac.fit_calibration(ch, sweeps[ch], cfg.monotonic_tolerance_v, cfg.ideal.rail_v)
        for ch in sorted(sweeps)
    }


def _transfers(cfg: ScenarioConfig) -> list[dac.Transfer]:
    return dac.transfer_set(_load_calibrations(cfg), cfg.ideal, NUM_CHANNELS)


def build_transfer_sweep_rows(cfg: ScenarioConfig) -> list[list[str]]:
    rows = [["channel", "code", "volts"]]
    transfers = _transfers(cfg)
    for ch in range(NUM_CHANNELS):
        for channel, code, volts in dac.sweep_rows(ch, transfers[ch], cfg.sweep_code_step):
            rows.append([str(channel), str(code), _fmt(volts)])
    return rows


def build_calibrate_rows(cfg: ScenarioConfig) -> tuple[list[list[str]], list[str]]:
    if cfg.sweep_file is None:
        raise ConfigError("calibrate needs [dac] sweep_file")
    with open(cfg.sweep_file) as fh:
        sweeps = dac.read_sweep_file(fh)
    rows = [["channel", "code", "volts"]]
    statuses = []
    for ch in sorted(sweeps):
        try:
            cal = dac.fit_calibration(ch, sweeps[ch], cfg.monotonic_tolerance_v, cfg.ideal.rail_v)
        except TrapDacError as err:
            statuses.append(f"channel {ch}: rejected ({err})")
            continue
        statuses.append(f"channel {ch}: ok ({len(cal.codes)} samples)")
        for code, volts in zip(cal.codes, cal.volts):
            rows.append([str(ch), str(code), _fmt(volts)])
    return rows, statuses


def build_noise_spectrum_rows(cfg: ScenarioConfig) -> list[list[str]]:
    freqs = analog.log_frequency_grid(cfg.grid_min_hz, cfg.grid_max_hz, cfg.grid_points_per_decade)
    rows = [["eis_state", "freq_hz", "psd_v2_per_hz", "amplitude_v_per_rthz"]]
    for state in (SwitchState.CLOSED, SwitchState.OPEN):
        psd = analog.electrode_noise_psd(cfg.sources, cfg.network, cfg.switch.with_state(state), freqs)
        for f, s in zip(freqs, psd):
            rows.append([state.value, _fmt(f), _fmt(s), _fmt(math.sqrt(s))])
    return rows


def build_heating_rows(cfg: ScenarioConfig) -> list[list[str]]:
    omega = cfg.mode.omega_rad_s
    d_fit = ion.fit_deff(cfg.measurements, omega, cfg.ion)
    mode = ion.TrapMode(omega, d_fit, cfg.mode.anomalous_baseline_quanta_s)
    rows = [["s_v_amplitude_v_per_rthz", "rate_quanta_s", "d_eff_m", "omega_hz"]]
    for m in cfg.measurements:
        predicted = ion.heating_rate(m.s_v_amplitude_v**2, mode, cfg.ion)
        rows.append([_fmt(m.s_v_amplitude_v), _fmt(predicted), _fmt(d_fit), _fmt(omega / (2 * math.pi))])
    bound = ion.expected_open_rate_bound(cfg.noise_floor_v, mode, cfg.ion)
    rows.append([_fmt(cfg.noise_floor_v), _fmt(bound), _fmt(d_fit), _fmt(omega / (2 * math.pi))])
    return rows


def build_leakage_rows(cfg: ScenarioConfig) -> list[list[str]]:
    rows = [["c_couple_f", "c_shunt_f", "leakage_fraction", "closed_bandwidth_hz",
             "open_isolation_db", "meets_1pct"]]
    open_switch = cfg.switch.with_state(SwitchState.OPEN)
    for c_couple in cfg.leakage_c_couple_f:
        for c_shunt in cfg.leakage_c_shunt_f:
            leak = analog.rf_leakage_fraction(c_couple, c_shunt)
            bw = analog.pole_frequency(cfg.switch.r_closed_ohm, c_shunt)
            iso = analog.eis_isolation_db(open_switch, c_shunt, cfg.leakage_freq_hz)
            rows.append([_fmt(c_couple), _fmt(c_shunt), _fmt(leak), _fmt(bw),
                         _fmt(iso), str(int(leak <= 0.010))])
    return rows


def build_transport_rows(cfg: ScenarioConfig) -> tuple[list[list[str]], transport.SimulationTrace | None]:
    bus = BusConfig(cfg.transport_clock_hz, cfg.bus.max_reliable_clock_hz)
    transfers = _transfers(cfg)
    report = transport.shuttle_scenario(
        cfg.transport_distance_m,
        cfg.transport_speed_m_s,
        bus,
        cfg.network,
        switch=cfg.switch.with_state(SwitchState.CLOSED),
        transfers=transfers,
        v_start=[cfg.transport_v_start_v] * NUM_CHANNELS,
        v_end=[cfg.transport_v_end_v] * NUM_CHANNELS,
        tolerance_v=cfg.transport_settle_tolerance_v,
    )
    s = report.settling
    rows = [
        ["duration_s", "frame_count", "update_rate_hz", "max_settle_s", "flagged_steps",
         "max_overshoot_v", "max_final_error_v", "droop_v", "feasible"],
        [_fmt(report.duration_s), str(report.frame_count),
         _fmt(cfg.transport_clock_hz / 192.0), _fmt(s.max_settle_time_s),
         str(s.flagged_steps), _fmt(max(c.max_overshoot_v for c in s.channels)),
         _fmt(s.max_final_error_v), _fmt(s.droop_v), str(int(report.feasible))],
    ]
    trace = None
    if cfg.trace_file is not None:
        wf = transport.plan_linear_ramp(
            [cfg.transport_v_start_v] * NUM_CHANNELS,
            [cfg.transport_v_end_v] * NUM_CHANNELS,
            report.duration_s, bus, transfers,
        )
        sched = transport.EisSchedule.constant(SwitchState.CLOSED, wf.t_start, wf.t_start + report.duration_s)
        trace = transport.simulate_electrode_voltage(
            wf, cfg.network, cfg.switch.with_state(SwitchState.CLOSED), sched,
            cfg.transport_sample_dt_s, transfers=transfers,
        )
    return rows, trace


def _run_selfcheck(out_path: str | None) -> int:
    results = run_all()
    rows = [["check", "result", "detail"]]
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"{verdict} {r.name}: {r.detail}")
        rows.append([r.name, verdict, r.detail])
    if out_path is not None:
        _write_table(out_path, rows)
    if all(r.passed for r in results):
        print(f"selfcheck: {len(results)}/{len(results)} checks passed")
        return EXIT_OK
    failed = sum(not r.passed for r in results)
    print(f"selfcheck: {failed} of {len(results)} checks FAILED")
    return EXIT_SELFCHECK


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trapdac",
        description="Deterministic simulator of chip-integrated electrode voltage sources",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "transfer-sweep": "code-to-voltage sweep for every channel",
        "calibrate": "fit monotone tables from a measured sweep file",
        "noise-spectrum": "electrode noise spectra, switch closed and open",
        "heating": "heating rates, fitted effective distance, floor bound",
        "leakage": "shunt-sizing table: leakage, bandwidth, isolation",
        "transport": "shuttle feasibility report",
        "selfcheck": "recompute and verify every headline quantity",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="scenario config file (defaults used if omitted)")
        p.add_argument("--out", default=None, required=(name != "selfcheck"),
                       help="output CSV path")
        p.add_argument("--format", default="csv", choices=["csv"], help="output format")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.command == "selfcheck":
            return _run_selfcheck(args.out)
        if args.command == "transfer-sweep":
            rows = build_transfer_sweep_rows(cfg)
        elif args.command == "calibrate":
            rows, statuses = build_calibrate_rows(cfg)
            for line in statuses:
                print(line)
        elif args.command == "noise-spectrum":
            rows = build_noise_spectrum_rows(cfg)
        elif args.command == "heating":
            rows = build_heating_rows(cfg)
        elif args.command == "leakage":
            rows = build_leakage_rows(cfg)
        else:
            rows, trace = build_transport_rows(cfg)
            if trace is not None:
                with open(cfg.trace_file, "w") as fh:
                    fh.write("\n".join(transport.trace_lines(trace)) + "\n")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except TrapDacError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN

    _write_table(args.out, rows)
    print(f"wrote {args.out} ({len(rows) - 1} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
