"""First-order behavioral models of the analog periphery.

Only checkpoint values are computed: the write-driver output, the RC
settling of the voltage across a cell at a given time, the differential
signal developed by the sense amplifier, and the sense output level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import MemoryGeometry
from .technology import TechnologyProfile

# test thresholds, as fractions of the relevant supply
WRITE_THRESHOLD = 0.7
READ_HIGH_THRESHOLD = 0.83
READ_LOW_THRESHOLD = 0.16
CHECKPOINT_FRACTION = 0.4

WORST_CASE_MEMRISTANCE = 1e6


@dataclass(frozen=True)
class MemristorState:
    resistance: float
    last_write_ok: bool = True

    def __post_init__(self):
        if not self.resistance > 0:
            raise ValueError(f"memristance must be > 0, got {self.resistance}")


@dataclass(frozen=True)
class DrivePair:
    v_p: float
    v_n: float

    @property
    def v_pn(self) -> float:
        return self.v_p - self.v_n


@dataclass(frozen=True)
class SettlingModel:
    r_drive: float
    r_path: float
    c_node: float
    r_cell: float

    def __post_init__(self):
        for name in ("r_drive", "r_path", "c_node", "r_cell"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def r_series(self) -> float:
        return self.r_drive + self.r_path

    @property
    def divider(self) -> float:
        return self.r_cell / (self.r_cell + self.r_series)

    @property
    def tau(self) -> float:
        # Thevenin resistance seen by the node capacitance
        r_th = self.r_series * self.r_cell / (self.r_series + self.r_cell)
        return r_th * self.c_node


@dataclass(frozen=True)
class SenseResult:
    bit: int
    margin: float
    reliable: bool
    delta: float


def write_driver(bit_in: int, t: TechnologyProfile) -> DrivePair:
    """Level-shifted P/N line drive for one input bit.

    A 0 (LRS) puts VDDW on P and ground on N; a 1 (HRS) reverses it.
    """
    if bit_in:
        return DrivePair(0.0, t.vddw)
    return DrivePair(t.vddw, 0.0)


def vpn_at(m: SettlingModel, drive: DrivePair, t_elapsed: float) -> float:
    if t_elapsed < 0:
        raise ValueError("t_elapsed must be >= 0")
    v_final = drive.v_pn * m.divider
    return v_final * -math.expm1(-t_elapsed / m.tau)


def address_parasitics(
    g: MemoryGeometry,
    t: TechnologyProfile,
    x: int,
    y: int,
    memristance: float = WORST_CASE_MEMRISTANCE,
    allow_reference: bool = False,
) -> SettlingModel:
    """Lumped path resistance and capacitance from the periphery to word (x, y).

    The line runs ``y + 1`` row pitches up the array and ``x * B`` column
    pitches across from the driver corner. ``x == 2**X`` addresses the
    reference block and is accepted only with ``allow_reference``.
    """
    max_x = g.word_columns if allow_reference else g.word_columns - 1
    if not 0 <= x <= max_x or not 0 <= y < g.M:
        raise IndexError(f"address ({x}, {y}) out of range for {g}")
    segments = (y + 1) + x * g.B * (t.cell_pitch_x / t.cell_pitch_y)
    return SettlingModel(
        r_drive=t.r_driver,
        r_path=t.r_mux_on + t.r_line_per_cell * segments,
        c_node=t.c_line_per_cell * segments,
        r_cell=t.r_on_access + memristance,
    )


def apply_write(
    cell: MemristorState,
    vpn_at_deadline: float,
    t: TechnologyProfile,
    target: int,
    r_lrs: float | None = None,
    r_hrs: float | None = None,
) -> MemristorState:
    threshold = WRITE_THRESHOLD * t.vddw
    ok = vpn_at_deadline >= threshold if target == 0 else vpn_at_deadline <= -threshold
    if not ok:
        return MemristorState(cell.resistance, False)
    if target == 0:
        value = t.r_lrs if r_lrs is None else r_lrs
    else:
        value = t.r_hrs if r_hrs is None else r_hrs
    return MemristorState(value, True)


def write_margin(vpn: float, target: int, t: TechnologyProfile) -> float:
    """Distance past the write threshold in volts; negative means failure."""
    signed = vpn if target == 0 else -vpn
    return signed - WRITE_THRESHOLD * t.vddw


def develop_window(t_settle: float, t_integrate: float, tau: float) -> float:
    """Effective integration time of a bitline current that settles with ``tau``.

    The current ramps as ``1 - exp(-s / tau)`` from the start of the develop
    phase; integration runs from ``t_settle`` to ``t_settle + t_integrate``.
    """
    if tau <= 0:
        return t_integrate
    return t_integrate - tau * (math.exp(-t_settle / tau) - math.exp(-(t_settle + t_integrate) / tau))


def sense(
    r_cell: float,
    r_ref: float,
    develop_time: float,
    corner_offset: float,
    t: TechnologyProfile,
) -> SenseResult:
    """Compare a cell against the reference.

    The differential develops linearly at a rate set by the current
    difference through ``c_sense`` and is capped at VDDL. The bit is the
    sign of the differential; offsets only eat into the margin.
    """
    if r_cell <= 0 or r_ref <= 0:
        raise ValueError("resistances must be > 0")
    if develop_time < 0:
        raise ValueError("develop_time must be >= 0")
    v_bias = t.read_bias * t.vddl
    delta = v_bias * (1.0 / r_ref - 1.0 / r_cell) * develop_time / t.c_sense
    delta = max(-t.vddl, min(t.vddl, delta))
    margin = abs(delta) - abs(corner_offset + t.sense_offset)
    reliable = margin > 0 and develop_time >= t.sense_min_develop
    return SenseResult(bit=int(delta > 0), margin=margin, reliable=reliable, delta=delta)


def sense_output_level(result: SenseResult, t_after_enable: float, t: TechnologyProfile) -> float:
    """VO1 voltage ``t_after_enable`` seconds into the latch phase.

    VO1 starts precharged at VDDL. A resolved 0 discharges through the
    output pull-down into the bus load; an unresolved latch sits mid-rail.
    """
    if not result.reliable:
        return 0.5 * t.vddl
    if result.bit:
        return t.vddl
    return t.vddl * math.exp(-t_after_enable / (t.r_sense_out * t.c_io_bus))


def read_level_margin(level: float, expected: int, t: TechnologyProfile) -> float:
    if expected:
        return level - READ_HIGH_THRESHOLD * t.vddl
    return READ_LOW_THRESHOLD * t.vddl - level
