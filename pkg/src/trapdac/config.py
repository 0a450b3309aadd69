"""Scenario configuration: INI-style sections with strict key checking.

Missing sections and keys fall back to the documented hardware defaults
(3.3 kOhm closed switch, 1 pF electrode, 1 nF filter board, 50 MHz bus,
2*pi*1.5 MHz axial mode, and so on); unknown sections or keys are
rejected so typos cannot silently revert a value to its default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .analog import (
    CHIP_TEMP_K,
    FloorNoise,
    IsolationSwitch,
    JohnsonNoise,
    NoiseSource,
    OneOverFNoise,
    RcNetwork,
    SwitchState,
)
from .dac import MONOTONIC_TOLERANCE_V, IdealTransfer
from .errors import ConfigError
from .ion import ATOMIC_MASS_KG, ELEMENTARY_CHARGE_C, CA40_MASS_U, MEASURED_D_EFF_M, HeatingMeasurement, IonSpecies, TrapMode
from .protocol import BusConfig

TAU = 6.283185307179586  # 2*pi

# Schema: section -> key -> ("float" | "int" | "str" | "floatlist", default).
# A None default marks an optional key that stays absent unless configured.
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "bus": {
        "clock_hz": ("float", 50e6),
        "max_reliable_clock_hz": ("float", 50e6),
    },
    "dac": {
        "vref_v": ("float", 1.8),
        "gain": ("float", 9.0),
        "offset_v": ("float", 0.9),
        "rail_v": ("float", 8.0),
        "monotonic_tolerance_v": ("float", MONOTONIC_TOLERANCE_V),
        "sweep_code_step": ("int", 64),
        "calibration_file": ("str", None),
        "sweep_file": ("str", None),
    },
    "analog": {
        "r_closed_ohm": ("float", 3.3e3),
        "r_open_ohm": ("float", 1e12),
        "c_electrode_f": ("float", 1e-12),
        "c_parallel_f": ("float", 1e-9),
        "r_parallel_ohm": ("float", None),
        "chip_temp_k": ("float", CHIP_TEMP_K),
        "grid_min_hz": ("float", 10.0),
        "grid_max_hz": ("float", 2e6),
        "grid_points_per_decade": ("int", 24),
    },
    "noise": {
        "oneoverf_anchor_hz": ("float", 1.5e6),
        "oneoverf_amplitude_v": ("float", 0.98e-6),
        "floor_v": ("float", 8e-9),
        "johnson_r_ohm": ("float", None),
        "johnson_temp_k": ("float", 300.0),
    },
    "ion": {
        "mass_u": ("float", CA40_MASS_U),
        "charge_e": ("float", 1.0),
        "trap_freq_hz": ("float", 1.5e6),
        "d_eff_m": ("float", MEASURED_D_EFF_M),
        "anomalous_baseline_quanta_s": ("float", 0.0),
    },
    "heating": {
        "closed_amplitude_v": ("float", 18.2e-9),
        "closed_rate_quanta_s": ("float", 1090.0),
        "closed_sigma_quanta_s": ("float", 20.0),
        "open_amplitude_v": ("float", 6.0e-9),
        "open_rate_quanta_s": ("float", 120.0),
        "open_sigma_quanta_s": ("float", 30.0),
    },
    "leakage": {
        "c_couple_f": ("floatlist", [0.1e-12, 0.5e-12]),
        "c_shunt_f": ("floatlist", [10e-12, 50e-12]),
        "freq_hz": ("float", 1.5e6),
    },
    "transport": {
        "distance_m": ("float", 80e-6),
        "speed_m_s": ("float", 2e-3),
        "clock_hz": ("float", 200e3),
        "v_start_v": ("float", -8.0),
        "v_end_v": ("float", 8.0),
        "settle_tolerance_v": ("float", 3.955078125e-3),
        "sample_dt_s": ("float", 2e-5),
        "trace_file": ("str", None),
    },
}


@dataclass
class ScenarioConfig:
    bus: BusConfig = field(default_factory=lambda: BusConfig(50e6))
    ideal: IdealTransfer = field(default_factory=IdealTransfer)
    monotonic_tolerance_v: float = MONOTONIC_TOLERANCE_V
    sweep_code_step: int = 64
    calibration_file: str | None = None
    sweep_file: str | None = None
    network: RcNetwork = field(default_factory=RcNetwork)
    switch: IsolationSwitch = field(default_factory=IsolationSwitch)
    chip_temp_k: float = CHIP_TEMP_K
    grid_min_hz: float = 10.0
    grid_max_hz: float = 2e6
    grid_points_per_decade: int = 24
    sources: list[NoiseSource] = field(default_factory=list)
    ion: IonSpecies = field(default_factory=IonSpecies)
    mode: TrapMode = field(default_factory=lambda: TrapMode(TAU * 1.5e6))
    measurements: list[HeatingMeasurement] = field(default_factory=list)
    noise_floor_v: float = 8e-9
    leakage_c_couple_f: list[float] = field(default_factory=lambda: [0.1e-12, 0.5e-12])
    leakage_c_shunt_f: list[float] = field(default_factory=lambda: [10e-12, 50e-12])
    leakage_freq_hz: float = 1.5e6
    transport_distance_m: float = 80e-6
    transport_speed_m_s: float = 2e-3
    transport_clock_hz: float = 200e3
    transport_v_start_v: float = -8.0
    transport_v_end_v: float = 8.0
    transport_settle_tolerance_v: float = 3.955078125e-3
    transport_sample_dt_s: float = 2e-5
    trace_file: str | None = None


def _parse_value(section: str, key: str, kind: str, raw: str):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "floatlist":
            return [float(f) for f in raw.split(",") if f.strip()]
        return raw.strip()
    except ValueError as err:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({err})") from err


def _read_values(path: str | None) -> dict[str, dict[str, object]]:
    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    if path is None:
        return values
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"config {path!r} failed to parse: {err}") from err
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser[section].items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            kind = SCHEMA[section][key][0]
            values[section][key] = _parse_value(section, key, kind, raw)
    return values


def load_config(path: str | None = None) -> ScenarioConfig:
    """Build a validated scenario from a config file (or pure defaults)."""
    v = _read_values(path)
    try:
        bus = BusConfig(v["bus"]["clock_hz"], v["bus"]["max_reliable_clock_hz"])
        ideal = IdealTransfer(
            vref_v=v["dac"]["vref_v"],
            gain=v["dac"]["gain"],
            offset_v=v["dac"]["offset_v"],
            rail_v=v["dac"]["rail_v"],
        )
        network = RcNetwork(
            r_series_ohm=v["analog"]["r_closed_ohm"],
            c_electrode_f=v["analog"]["c_electrode_f"],
            c_parallel_f=v["analog"]["c_parallel_f"],
            r_parallel_ohm=v["analog"]["r_parallel_ohm"],
        )
        switch = IsolationSwitch(
            SwitchState.CLOSED,
            r_closed_ohm=v["analog"]["r_closed_ohm"],
            r_open_ohm=v["analog"]["r_open_ohm"],
        )
        sources: list[NoiseSource] = [
            OneOverFNoise(v["noise"]["oneoverf_anchor_hz"], v["noise"]["oneoverf_amplitude_v"]),
        ]
        if v["noise"]["johnson_r_ohm"] is not None:
            sources.append(JohnsonNoise(v["noise"]["johnson_r_ohm"], v["noise"]["johnson_temp_k"]))
        sources.append(FloorNoise(v["noise"]["floor_v"]))
        ion = IonSpecies(
            mass_kg=v["ion"]["mass_u"] * ATOMIC_MASS_KG,
            charge_c=v["ion"]["charge_e"] * ELEMENTARY_CHARGE_C,
        )
        mode = TrapMode(
            omega_rad_s=TAU * v["ion"]["trap_freq_hz"],
            d_eff_m=v["ion"]["d_eff_m"],
            anomalous_baseline_quanta_s=v["ion"]["anomalous_baseline_quanta_s"],
        )
        h = v["heating"]
        measurements = [
            HeatingMeasurement(h["closed_amplitude_v"], h["closed_rate_quanta_s"], h["closed_sigma_quanta_s"]),
            HeatingMeasurement(h["open_amplitude_v"], h["open_rate_quanta_s"], h["open_sigma_quanta_s"]),
        ]
    except (ValueError, TypeError) as err:
        raise ConfigError(f"invalid config value: {err}") from err
    return ScenarioConfig(
        bus=bus,
        ideal=ideal,
        monotonic_tolerance_v=v["dac"]["monotonic_tolerance_v"],
        sweep_code_step=v["dac"]["sweep_code_step"],
        calibration_file=v["dac"]["calibration_file"],
        sweep_file=v["dac"]["sweep_file"],
        network=network,
        switch=switch,
        chip_temp_k=v["analog"]["chip_temp_k"],
        grid_min_hz=v["analog"]["grid_min_hz"],
        grid_max_hz=v["analog"]["grid_max_hz"],
        grid_points_per_decade=v["analog"]["grid_points_per_decade"],
        sources=sources,
        ion=ion,
        mode=mode,
        measurements=measurements,
        noise_floor_v=v["noise"]["floor_v"],
        leakage_c_couple_f=v["leakage"]["c_couple_f"],
        leakage_c_shunt_f=v["leakage"]["c_shunt_f"],
        leakage_freq_hz=v["leakage"]["freq_hz"],
        transport_distance_m=v["transport"]["distance_m"],
        transport_speed_m_s=v["transport"]["speed_m_s"],
        transport_clock_hz=v["transport"]["clock_hz"],
        transport_v_start_v=v["transport"]["v_start_v"],
        transport_v_end_v=v["transport"]["v_end_v"],
        transport_settle_tolerance_v=v["transport"]["settle_tolerance_v"],
        transport_sample_dt_s=v["transport"]["sample_dt_s"],
        trace_file=v["transport"]["trace_file"],
    )
