"""Worst-case write/read characterization, corner sweeps and area estimates.

Every run resets the memory and then executes W1, W2, R1, R2 on the
worst-case words: W tests write ``10..10`` and ``01..01`` into cells preset
to 1 MOhm, R tests read back words initialised to alternating LRS/HRS.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import analog
from .geometry import MemoryGeometry, validate_geometry, worst_case_read_address, worst_case_write_address
from .simulator import Simulator, bits_msb_first
from .technology import CORNER_NAMES, TechnologyProfile

TEST_NAMES = ("W1", "W2", "R1", "R2")
DEFAULT_STATE_RATIO = 0.3

# (M, N, B) combinations in the size range the compiler was exercised on
REFERENCE_GEOMETRIES = tuple(
    (M, N, B) for M in (32, 64, 128) for N in (32, 64) for B in (4, 8, 16) if N // B >= 2
)

CALIBRATION_NOTE = (
    "Timing and area figures are calibration-anchored reproductions: line "
    "parasitics, sense offsets and floorplan constants were fitted to the "
    "reference operating points, so they are not independent predictions."
)


def alternating(width: int, first: int) -> int:
    """``first`` in the MSB, alternating down to bit 0 (e.g. 1010 for first=1)."""
    value = 0
    for i in range(width):
        value = (value << 1) | (first if i % 2 == 0 else 1 - first)
    return value


@dataclass(frozen=True)
class BenchResult:
    test: str
    passed: bool
    margin: float
    bit_margins: tuple[float, ...]
    access_time: float
    write_time: float
    note: str = ""


@dataclass(frozen=True)
class AreaEstimate:
    width: float
    height: float
    area: float
    density: float


def estimate_area(g: MemoryGeometry, t: TechnologyProfile) -> AreaEstimate:
    """Linear floorplan: a core of cell pitches plus fixed periphery strips.

    ``density`` is in Mb/mm^2 with 1 Mb = 10**6 bits.
    """
    width = g.N * t.cell_pitch_x + t.periphery_width
    height = g.M * t.cell_pitch_y + t.periphery_height
    area = width * height * (1.0 + t.periphery_area_overhead)
    density = g.capacity_bits / (area * 1e6) / 1e6
    return AreaEstimate(width, height, area, density)


def _reset_clean(sim: Simulator) -> bool:
    sim.reset()
    names = ("read", "write", "dvlp", "pre", "en_sa", "dec_en", "io_drive")
    return all(sim.trace.value_at(n, sim.now) == 0 for n in names)


def _new_sim(g, t, clock_hz, corner, phase_cycles) -> tuple[Simulator, str]:
    sim = Simulator(g, t, clock_hz, corner=corner, phase_cycles=phase_cycles)
    note = "" if _reset_clean(sim) else "control signals asserted after reset"
    return sim, note


def run_w_tests(
    g: MemoryGeometry,
    t: TechnologyProfile,
    clock_hz: float,
    corner: str = "TT",
    sim: Simulator | None = None,
    phase_cycles: int = 1,
) -> tuple[BenchResult, BenchResult]:
    note = ""
    if sim is None:
        sim, note = _new_sim(g, t, clock_hz, corner, phase_cycles)
    x, y = worst_case_write_address(g)
    out = []
    for name, first in (("W1", 1), ("W2", 0)):
        sim.set_cell(x, y, analog.WORST_CASE_MEMRISTANCE)
        res = sim.write(x, y, alternating(g.B, first))
        sim.idle()
        margins = tuple(reversed(res.margins))  # MSB first
        out.append(BenchResult(
            name, res.ok and not note, min(margins), margins,
            sim.read_access_time, sim.write_time, note,
        ))
    return out[0], out[1]


def run_r_tests(
    g: MemoryGeometry,
    t: TechnologyProfile,
    clock_hz: float,
    corner: str = "TT",
    a: float = DEFAULT_STATE_RATIO,
    sim: Simulator | None = None,
    phase_cycles: int = 1,
) -> tuple[BenchResult, BenchResult]:
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    note = ""
    if sim is None:
        sim, note = _new_sim(g, t, clock_hz, corner, phase_cycles)
    x, y = worst_case_read_address(g)
    r_lrs, r_hrs = a * t.r_ref, t.r_ref / a
    out = []
    # R1: LRS, HRS, ... from the MSB, so the expected word is 0101..
    for name, first in (("R1", 0), ("R2", 1)):
        expected = alternating(g.B, first)
        exp_bits = bits_msb_first(expected, g.B)
        sim.set_cell(x, y, [r_hrs if e else r_lrs for e in exp_bits])
        res = sim.read(x, y)
        sim.idle()
        margins = []
        for i, e in enumerate(exp_bits):
            b = g.B - 1 - i
            s, level = res.sense[b], res.levels[b]
            sense_margin = s.margin if s.bit == e else -(2 * abs(s.delta) - s.margin)
            level_margin = analog.read_level_margin(level, e, sim.t)
            margins.append(min(sense_margin, level_margin))
        passed = all(m > 0 for m in margins) and res.data == expected and not note
        out.append(BenchResult(
            name, passed, min(margins), tuple(margins),
            sim.read_access_time, sim.write_time, note,
        ))
    return out[0], out[1]


@dataclass(frozen=True)
class ReportRow:
    M: int
    N: int
    B: int
    clock_hz: float
    corner: str
    test: str
    passed: bool
    margin: float
    access_time: float
    write_time: float
    area: float
    density: float
    error: str = ""

    @property
    def capacity_bits(self) -> int:
        return self.M * self.N


@dataclass
class CharacterizationReport:
    rows: list

    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"schema": 1, "kind": "rramc.characterization", "note": CALIBRATION_NOTE})]
        for r in self.rows:
            lines.append(json.dumps(asdict(r)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "CharacterizationReport":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        if head.get("schema") != 1:
            raise ValueError(f"unsupported report schema {head.get('schema')!r}")
        return cls([ReportRow(**json.loads(ln)) for ln in lines[1:]])

    def format_table(self) -> str:
        header = (
            f"{'M':>4} {'N':>4} {'B':>3} {'kbit':>5} {'f/MHz':>6} {'corner':>6} {'test':>4} "
            f"{'result':>6} {'margin/V':>9} {'access/ns':>9} {'write/ns':>8} "
            f"{'area/mm2':>9} {'Mb/mm2':>7}"
        )
        out = [f"# {CALIBRATION_NOTE}", header, "-" * len(header)]
        for r in self.rows:
            out.append(
                f"{r.M:>4} {r.N:>4} {r.B:>3} {r.capacity_bits / 1024:>5g} {r.clock_hz / 1e6:>6g} "
                f"{r.corner:>6} {r.test:>4} {'PASS' if r.passed else 'FAIL':>6} "
                f"{r.margin:>9.4f} {r.access_time * 1e9:>9.1f} {r.write_time * 1e9:>8.1f} "
                f"{r.area * 1e6:>9.4f} {r.density:>7.4f}"
                + (f"  ! {r.error}" if r.error else "")
            )
        n_fail = len(self.failures())
        out.append(f"# {len(self.rows) - n_fail}/{len(self.rows)} rows passed")
        return "\n".join(out) + "\n"


def run_testbench(
    g: MemoryGeometry,
    t: TechnologyProfile,
    clock_hz: float,
    corner: str = "TT",
    a: float = DEFAULT_STATE_RATIO,
    phase_cycles: int = 1,
) -> tuple[list[BenchResult], Simulator]:
    """Reset then W1, W2, R1, R2 on one simulated instance."""
    sim, note = _new_sim(g, t, clock_hz, corner, phase_cycles)
    w = run_w_tests(g, t, clock_hz, corner, sim=sim)
    r = run_r_tests(g, t, clock_hz, corner, a, sim=sim)
    results = list(w) + list(r)
    if note:
        results = [BenchResult(x.test, False, x.margin, x.bit_margins, x.access_time, x.write_time, note)
                   for x in results]
    return results, sim


def _sweep_cell(args) -> tuple[list[ReportRow], str | None]:
    dims, clock_hz, corner, t, a, phase_cycles, want_vcd = args
    M, N, B = dims
    try:
        g = validate_geometry(M, N, B)
        area = estimate_area(g, t)
        results, sim = run_testbench(g, t, clock_hz, corner, a, phase_cycles)
    except Exception as exc:  # one bad cell must not abort the sweep
        rows = [ReportRow(M, N, B, clock_hz, corner, name, False, float("nan"),
                          float("nan"), float("nan"), float("nan"), float("nan"),
                          f"{type(exc).__name__}: {exc}") for name in TEST_NAMES]
        return rows, None
    rows = [ReportRow(M, N, B, clock_hz, corner, r.test, r.passed, r.margin,
                      r.access_time, r.write_time, area.area, area.density, r.note)
            for r in results]
    return rows, (sim.export_vcd() if want_vcd else None)


def characterize_sweep(
    configs,
    t: TechnologyProfile,
    corners=CORNER_NAMES,
    a: float = DEFAULT_STATE_RATIO,
    phase_cycles: int = 1,
    workers: int = 1,
    vcds: dict | None = None,
) -> CharacterizationReport:
    """Run the testbench over ``configs`` (``((M, N, B), clock_hz)`` pairs) x ``corners``.

    Rows come out in input order: config, then corner, then test. When a
    ``vcds`` dict is passed it is filled with one waveform per run keyed by
    ``(M, N, B, clock_hz, corner)``.
    """
    configs, corners = list(configs), list(corners)
    if not configs or not corners:
        raise ValueError("configs and corners must be non-empty")
    jobs = [
        (tuple(dims), float(clk), c, t, a, phase_cycles, vcds is not None)
        for dims, clk in configs for c in corners
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_sweep_cell, jobs))
    else:
        outs = [_sweep_cell(j) for j in jobs]
    rows = []
    for job, (cell_rows, vcd_text) in zip(jobs, outs):
        rows.extend(cell_rows)
        if vcds is not None and vcd_text is not None:
            vcds[(*job[0], job[1], job[2])] = vcd_text
    return CharacterizationReport(rows)
