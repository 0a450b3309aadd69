"""Bit-exact model of the 16-channel daisy-chained serial programming bus.

Voltage data for all 16 electrodes travels as a single 192-bit shift
string: 12 bits per channel, most-significant bit first, with channel 15
shifted out first so that after 192 clock cycles channel 0's bits sit at
the far end of the chain.  No electrode updates until the whole string has
been clocked in; all 16 then latch at once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedFrameError, OverclockError

CODE_BITS = 12
CODE_MAX = (1 << CODE_BITS) - 1  # 4095
NUM_CHANNELS = 16
FRAME_BITS = NUM_CHANNELS * CODE_BITS  # 192


@dataclass(frozen=True)
class Frame:
    """One programming frame: a 12-bit code for each of the 16 channels."""

    codes: tuple[int, ...]

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        if len(codes) != NUM_CHANNELS:
            raise ValueError(f"frame needs {NUM_CHANNELS} codes, got {len(codes)}")
        for ch, code in enumerate(codes):
            if not 0 <= code <= CODE_MAX:
                raise ValueError(f"channel {ch}: code {code} outside 0..{CODE_MAX}")
        object.__setattr__(self, "codes", codes)

    @classmethod
    def uniform(cls, code: int) -> "Frame":
        return cls((code,) * NUM_CHANNELS)


@dataclass(frozen=True)
class BusConfig:
    """Serial bus clock settings.

    max_reliable_clock_hz is the rate above which conversion fidelity
    degrades; the default is the highest rate demonstrated on hardware.
    """

    clock_hz: float
    max_reliable_clock_hz: float = 50e6

    def __post_init__(self):
        if self.clock_hz <= 0:
            raise ValueError("clock_hz must be positive")
        if self.max_reliable_clock_hz <= 0:
            raise ValueError("max_reliable_clock_hz must be positive")

    @property
    def frame_period_s(self) -> float:
        return FRAME_BITS / self.clock_hz


def encode_frame(frame: Frame) -> str:
    """Serialize a frame to its 192-character '0'/'1' shift string."""
    # Channel 15 is shifted out first, MSB first within each channel.
    return "".join(format(code, "012b") for code in reversed(frame.codes))


def decode_frame(bits: str) -> Frame:
    """Exact inverse of encode_frame.

    Raises MalformedFrameError unless `bits` is exactly 192 '0'/'1'
    characters.
    """
    if len(bits) != FRAME_BITS:
        raise MalformedFrameError(f"expected {FRAME_BITS} bits, got {len(bits)}")
    if set(bits) - {"0", "1"}:
        raise MalformedFrameError("bitstring may only contain '0' and '1'")
    codes = [int(bits[i:i + CODE_BITS], 2) for i in range(0, FRAME_BITS, CODE_BITS)]
    return Frame(tuple(reversed(codes)))


def update_rate(cfg: BusConfig) -> float:
    """Electrode update rate in Hz: one full 192-bit frame per update."""
    return cfg.clock_hz / FRAME_BITS


def simulate_bus(cfg: BusConfig, frames: list[Frame]) -> list[tuple[float, Frame]]:
    """Latch timeline for a back-to-back frame stream.

    Frame k latches atomically (all 16 channels at once) when its last bit
    has been shifted in, at (k + 1) * 192 / clock_hz.  Raises
    OverclockError if the clock is above the reliable limit.
    """
    if cfg.clock_hz > cfg.max_reliable_clock_hz:
        raise OverclockError(
            f"clock {cfg.clock_hz:g} Hz exceeds reliable limit "
            f"{cfg.max_reliable_clock_hz:g} Hz"
        )
    if not frames:
        raise ValueError("frames must be non-empty")
    period = cfg.frame_period_s
    return [((k + 1) * period, frame) for k, frame in enumerate(frames)]


def format_frame(frame: Frame) -> str:
    """One dump line: 16 comma-separated decimal codes, channel 0 first."""
    return ",".join(str(c) for c in frame.codes)


def parse_frame(line: str) -> Frame:
    fields = line.strip().split(",")
    if len(fields) != NUM_CHANNELS:
        raise MalformedFrameError(f"expected {NUM_CHANNELS} codes, got {len(fields)}")
    try:
        codes = tuple(int(f) for f in fields)
    except ValueError as err:
        raise MalformedFrameError(f"bad code in frame line: {err}") from err
    return Frame(codes)
