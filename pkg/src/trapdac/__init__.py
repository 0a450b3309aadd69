"""Behavioral simulator for chip-integrated electrode voltage sources.

Models the serial programming bus, the DAC/amplifier/switch analog chain,
the resulting electrode voltage noise, its effect on a trapped ion's
motional heating, and voltage-waveform transport planning.
"""

from .analog import (
    FloorNoise,
    IsolationSwitch,
    JohnsonNoise,
    OneOverFNoise,
    PowerMode,
    RcNetwork,
    SwitchState,
    eis_isolation_db,
    electrode_noise_psd,
    network_transfer_sq,
    pole_frequency,
    power_draw_w,
    rf_leakage_fraction,
    source_psd,
)
from .dac import (
    AmplifierSpec,
    ChannelCalibration,
    IdealTransfer,
    code_for_voltage,
    fit_calibration,
)
from .errors import (
    CalibrationRejectedError,
    ConfigError,
    InfeasibleRateError,
    MalformedFrameError,
    OutOfRangeError,
    OverclockError,
    ScheduleGapError,
    TrapDacError,
)
from .ion import (
    CA40_ION,
    HeatingMeasurement,
    IonSpecies,
    TrapMode,
    expected_open_rate_bound,
    fit_deff,
    heating_rate,
    nbar_after_delay,
    noise_from_heating,
)
from .protocol import (
    BusConfig,
    Frame,
    decode_frame,
    encode_frame,
    simulate_bus,
    update_rate,
)
from .transport import (
    EisSchedule,
    SettlingReport,
    ShuttleReport,
    Waveform,
    plan_linear_ramp,
    settling_check,
    shuttle_scenario,
    simulate_electrode_voltage,
)

__version__ = "0.1.0"
