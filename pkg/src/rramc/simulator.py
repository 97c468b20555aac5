"""Clocked simulation of a compiled memory.

The controller FSM advances one state per clock. Analog behavior is
evaluated only at the two checkpoints a characterization bench observes:
0.4 of a period after WRITE starts, and 0.4 of a period after the latch
phase (READ_PH3) starts.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import vcd

from . import analog
from .analog import CHECKPOINT_FRACTION, MemristorState, SenseResult
from .controller import (
    OUTPUTS, ControlSignals, FsmInputs, FsmState, OverlappingOperation, fsm_step,
)
from .geometry import MemoryGeometry
from .technology import TechnologyProfile, corner_apply

FS_PER_S = 10**15


class SimulationError(RuntimeError):
    pass


# --- waveform trace ----------------------------------------------------------

@dataclass
class WaveTrace:
    """Per-signal change lists with integer femtosecond timestamps."""

    clock_period: float | None = None
    kinds: dict = field(default_factory=dict)  # name -> ("wire", width) | ("real", 64)
    changes: dict = field(default_factory=dict)  # name -> [(t_fs, value)]

    def declare(self, name: str, kind: str = "wire", width: int = 1) -> None:
        if name not in self.kinds:
            self.kinds[name] = (kind, width)
            self.changes[name] = []

    def record(self, name: str, t_seconds: float, value) -> None:
        t_fs = round(t_seconds * FS_PER_S)
        lst = self.changes[name]
        if lst and lst[-1][0] > t_fs:
            raise SimulationError(f"{name}: time went backwards ({t_fs} < {lst[-1][0]} fs)")
        if lst and lst[-1][0] == t_fs:
            lst.pop()
        if lst and lst[-1][1] == value:
            return
        lst.append((t_fs, value))

    def value_at(self, name: str, t_seconds: float):
        t_fs = round(t_seconds * FS_PER_S)
        v = None
        for t, val in self.changes[name]:
            if t > t_fs:
                break
            v = val
        return v

    def edges(self, name: str) -> list[tuple[float, object]]:
        return [(t / FS_PER_S, v) for t, v in self.changes[name]]


_UNITS = [(10**15, "s"), (10**12, "ms"), (10**9, "us"), (10**6, "ns"), (10**3, "ps"), (1, "fs")]


def _timescale(trace: WaveTrace) -> tuple[int, str]:
    times = [t for lst in trace.changes.values() for t, _ in lst]
    if trace.clock_period:
        times.append(round(trace.clock_period * FS_PER_S))
    g = 0
    for t in times:
        g = math.gcd(g, t)
    if g == 0:
        return 10**6, "1 ns"
    for fs, unit in _UNITS:
        for mult in (100, 10, 1):
            step = fs * mult
            if step <= g and g % step == 0:
                return step, f"{mult} {unit}"
    return 1, "1 fs"


def export_vcd(trace: WaveTrace) -> str:
    step, timescale = _timescale(trace)
    buf = io.StringIO()
    writer = vcd.VCDWriter(buf, timescale=timescale, date="", version="rramc")
    handles = {}
    for name in sorted(trace.kinds):
        kind, width = trace.kinds[name]
        if kind == "real":
            handles[name] = writer.register_var("rram", name, "real", init=0.0)
        else:
            handles[name] = writer.register_var("rram", name, "wire", size=width, init="x")
    events = sorted(
        (t, name, v) for name, lst in trace.changes.items() for t, v in lst
    )
    for t, name, v in events:
        writer.change(handles[name], t // step, v)
    writer.close()
    return buf.getvalue()


# --- run log -----------------------------------------------------------------

@dataclass(frozen=True)
class OpRecord:
    cycle: int
    op: str
    x: int | None = None
    y: int | None = None
    data: int | None = None
    margins: tuple[float, ...] = ()
    ok: bool = True
    note: str = ""

    def format(self, width: int) -> str:
        parts = [f"cycle={self.cycle}", f"op={self.op}"]
        if self.x is not None:
            parts += [f"x={self.x}", f"y={self.y}"]
        if self.data is not None:
            parts.append(f"data=0b{self.data:0{width}b}")
        if self.margins:
            parts.append("margins=" + ",".join(f"{m:.6g}" for m in self.margins))
        parts.append(f"ok={int(self.ok)}")
        if self.note:
            parts.append(f"note={self.note}")
        return " ".join(parts)


# --- simulator ---------------------------------------------------------------

@dataclass(frozen=True)
class WriteResult:
    vpn: tuple[float, ...]
    margins: tuple[float, ...]
    ok: bool


@dataclass(frozen=True)
class ReadResult:
    data: int
    sense: tuple[SenseResult, ...]
    levels: tuple[float, ...]


def bits_msb_first(value: int, width: int) -> list[int]:
    """Bit ``width - 1`` first; list index ``i`` is IO bit ``width - 1 - i``."""
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


class Simulator:
    """One memory instance under simulation.

    ``init`` is a uniform resistance, ``("checkerboard", r_even, r_odd)``,
    or an explicit ``M x N`` matrix of resistances.
    """

    def __init__(
        self,
        g: MemoryGeometry,
        t: TechnologyProfile,
        clock_hz: float,
        init=analog.WORST_CASE_MEMRISTANCE,
        corner: str = "TT",
        phase_cycles: int = 1,
    ):
        if not clock_hz > 0:
            raise ValueError("clock_hz must be > 0")
        if phase_cycles < 1:
            raise ValueError("phase_cycles must be >= 1")
        self.g = g
        self.nominal = t
        self.corner = t.corner(corner)
        self.t = corner_apply(t, self.corner)
        self.clock_period = 1.0 / clock_hz
        self.phase_cycles = phase_cycles
        self.cells = _fill(g, init)
        self.write_ok = np.ones((g.M, g.N), dtype=bool)
        self.fsm = FsmState.RESET
        self.cycle = 0
        self.io_bus: int | None = None
        self.log: list[OpRecord] = []
        self.trace = WaveTrace(clock_period=self.clock_period)
        self._declare_signals()
        self._record_inputs(FsmInputs(reset=1), clock=False)
        self._record_outputs(OUTPUTS[self.fsm])

    # -- trace helpers

    def _declare_signals(self) -> None:
        tr = self.trace
        for name in ("clk", "reset", "en", "rw") + ControlSignals.NAMES:
            tr.declare(name)
        tr.declare("x_addr", width=self.g.X)
        tr.declare("y_addr", width=self.g.Y)
        tr.declare("io_in", width=self.g.B)
        tr.declare("io_bus", width=self.g.B)
        for b in range(self.g.B):
            tr.declare(f"z_sa{b}", "real", 64)
            tr.declare(f"vpn{b}", "real", 64)

    @property
    def now(self) -> float:
        return self.cycle * self.clock_period

    def _record_inputs(self, inp: FsmInputs, data: int | None = None, clock: bool = True) -> None:
        tr, t0 = self.trace, self.now
        if clock:
            tr.record("clk", t0, 1)
            tr.record("clk", t0 + 0.5 * self.clock_period, 0)
        tr.record("reset", t0, inp.reset)
        tr.record("en", t0, inp.en)
        tr.record("rw", t0, inp.rw)
        if inp.en:
            tr.record("x_addr", t0, inp.x_addr)
            tr.record("y_addr", t0, inp.y_addr)
        tr.record("io_in", t0, "z" if data is None else data)

    def _record_outputs(self, sig: ControlSignals) -> None:
        for name, v in sig.as_dict().items():
            self.trace.record(name, self.now, v)
        if not sig.io_drive:
            self.io_bus = None
        self.trace.record("io_bus", self.now, "z" if self.io_bus is None else self.io_bus)

    def _clock(self, inp: FsmInputs, data: int | None = None, hold: bool = False) -> None:
        self._record_inputs(inp, data)
        if not hold:
            self.fsm, sig = fsm_step(self.fsm, inp)
        else:
            sig = OUTPUTS[self.fsm]
        sig.check()
        self.cycle += 1
        self._record_outputs(sig)

    # -- operations

    def reset(self) -> "Simulator":
        self._clock(FsmInputs(reset=1))
        self._clock(FsmInputs())
        self.log.append(OpRecord(self.cycle, "reset", ok=self.fsm is FsmState.IDLE))
        return self

    def idle(self, cycles: int = 1) -> "Simulator":
        for _ in range(cycles):
            self._clock(FsmInputs())
        return self

    def _require_idle(self, what: str, x: int, y: int) -> None:
        if self.fsm is not FsmState.IDLE:
            raise OverlappingOperation(f"{what} requested in state {self.fsm.value}")
        self.g.check_address(x, y)

    def write(self, x: int, y: int, data: int) -> WriteResult:
        self._require_idle("write", x, y)
        B = self.g.B
        if not 0 <= data < (1 << B):
            raise ValueError(f"data {data} does not fit in {B} bits")
        issue_cycle = self.cycle
        self._clock(FsmInputs(en=1, rw=0, x_addr=x, y_addr=y), data=data)
        assert self.fsm is FsmState.WRITE

        t_check = CHECKPOINT_FRACTION * self.clock_period
        vpns, margins = [], []
        for b in range(B):
            bit = (data >> b) & 1
            col = self.g.column(x, b)
            cell = MemristorState(self.cells[y, col], bool(self.write_ok[y, col]))
            model = analog.address_parasitics(self.g, self.t, x, y, memristance=cell.resistance)
            vpn = analog.vpn_at(model, analog.write_driver(bit, self.t), t_check)
            new = analog.apply_write(cell, vpn, self.nominal, bit)
            self.cells[y, col] = new.resistance
            self.write_ok[y, col] = new.last_write_ok
            vpns.append(vpn)
            margins.append(analog.write_margin(vpn, bit, self.nominal))
            self.trace.record(f"vpn{b}", self.now + t_check, vpn)
        self._clock(FsmInputs())
        for b in range(B):
            self.trace.record(f"vpn{b}", self.now, 0.0)
        ok = all(m >= 0 for m in margins)
        self.log.append(OpRecord(issue_cycle, "write", x, y, data, tuple(margins), ok))
        return WriteResult(tuple(vpns), tuple(margins), ok)

    def read_path_resistances(self, x: int, y: int) -> tuple[list[float], float, float]:
        """Per-bit cell path resistances, reference path resistance, bitline tau."""
        g, t = self.g, self.t
        cell_path = analog.address_parasitics(g, t, x, y)
        ref_path = analog.address_parasitics(g, t, g.word_columns, y, allow_reference=True)
        r_cells = [
            self.cells[y, g.column(x, b)] + t.r_on_access + cell_path.r_path + t.r_sense_in
            for b in range(g.B)
        ]
        r_ref = t.r_ref + ref_path.r_path + t.r_sense_in
        tau = max(
            (t.r_sense_in + cell_path.r_path) * cell_path.c_node,
            (t.r_sense_in + ref_path.r_path) * ref_path.c_node,
        )
        return r_cells, r_ref, tau

    def corner_sense_offset(self) -> float:
        # output-load imbalance grows with the number of bus taps
        return self.corner.sense_offset_extra * (self.g.B / self.t.imbalance_ref_bits - 1)

    def read(self, x: int, y: int) -> ReadResult:
        self._require_idle("read", x, y)
        g, t, T = self.g, self.t, self.clock_period
        issue_cycle = self.cycle
        phase = self.phase_cycles * T

        r_cells, r_ref, tau = self.read_path_resistances(x, y)
        develop = analog.develop_window(phase, phase, tau)
        offset = self.corner_sense_offset()
        results = tuple(analog.sense(rc, r_ref, develop, offset, t) for rc in r_cells)
        t_latch = max(0.0, CHECKPOINT_FRACTION * T - t.level_down_delay)
        levels = tuple(analog.sense_output_level(r, t_latch, t) for r in results)
        data = sum(r.bit << b for b, r in enumerate(results))

        self._clock(FsmInputs(en=1, rw=1, x_addr=x, y_addr=y))
        for b in range(g.B):
            self.trace.record(f"z_sa{b}", self.now, t.vddl)
        for state in (FsmState.READ_PH1, FsmState.READ_PH2):
            for _ in range(self.phase_cycles - 1):
                self._clock(FsmInputs(), hold=True)
            self._clock(FsmInputs())
        assert self.fsm is FsmState.READ_PH3
        ph3_start = self.now
        self.io_bus = data
        self.trace.record("io_bus", ph3_start, data)
        for b, lvl in enumerate(levels):
            self.trace.record(f"z_sa{b}", ph3_start + CHECKPOINT_FRACTION * T, lvl)
        for _ in range(self.phase_cycles - 1):
            self._clock(FsmInputs(), hold=True)
        self._clock(FsmInputs())

        margins = tuple(r.margin for r in results)
        ok = all(r.reliable for r in results)
        self.log.append(OpRecord(issue_cycle, "read", x, y, data, margins, ok))
        return ReadResult(data, results, levels)

    def set_cell(self, x: int, y: int, ohms) -> None:
        """Force the memristance of word (x, y); ``ohms`` is a scalar or B values MSB first."""
        self.g.check_address(x, y)
        values = [ohms] * self.g.B if np.isscalar(ohms) else list(ohms)
        if len(values) != self.g.B:
            raise ValueError(f"expected {self.g.B} resistances, got {len(values)}")
        for i, r in enumerate(values):
            MemristorState(float(r))
            self.cells[y, self.g.column(x, self.g.B - 1 - i)] = float(r)
        self.log.append(OpRecord(self.cycle, "set_cell", x, y, note=_fmt_ohms(values)))

    def cell(self, row: int, col: int) -> MemristorState:
        return MemristorState(float(self.cells[row, col]), bool(self.write_ok[row, col]))

    @property
    def read_access_time(self) -> float:
        """READ assertion to data driven on the bus."""
        return 2 * self.phase_cycles * self.clock_period

    @property
    def write_time(self) -> float:
        return self.clock_period

    def export_vcd(self) -> str:
        return export_vcd(self.trace)

    def format_log(self) -> str:
        return "".join(rec.format(self.g.B) + "\n" for rec in self.log)


def _fmt_ohms(values) -> str:
    return ",".join(f"{float(v):.6g}" for v in values)


def _fill(g: MemoryGeometry, init) -> np.ndarray:
    if isinstance(init, tuple) and init and init[0] == "checkerboard":
        _, even, odd = init
        rows, cols = np.indices((g.M, g.N))
        cells = np.where((rows + cols) % 2 == 0, float(even), float(odd))
    elif np.isscalar(init):
        cells = np.full((g.M, g.N), float(init))
    else:
        cells = np.array(init, dtype=float)
        if cells.shape != (g.M, g.N):
            raise ValueError(f"fill matrix has shape {cells.shape}, expected {(g.M, g.N)}")
        cells = cells.copy()
    if not np.all(cells > 0):
        raise ValueError("all cell resistances must be > 0")
    return cells


def sim_new(g: MemoryGeometry, t: TechnologyProfile, clock_hz: float, init=analog.WORST_CASE_MEMRISTANCE, **kw) -> Simulator:
    return Simulator(g, t, clock_hz, init, **kw)
