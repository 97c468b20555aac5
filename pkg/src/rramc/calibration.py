"""Back-solve the profile constants that reference operating points pin down.

Three groups of constants are fitted; everything else in the profile is a
fixed engineering assumption listed in :func:`base_profile`.

* floorplan: cell pitch and periphery strips, from the 64x64/B=8 layout
  size (524.3 um x 353.5 um) and the best density of 0.024 Mb/mm^2 at the
  largest (128x64) array, assuming square cell pitch;
* bitline capacitance per cell: placed geometrically between the value at
  which 8 kbit / 12.5 MHz stops passing every write corner and the value
  at which the next size (16 kbit) and the next frequency (25 MHz) start
  failing;
* FS/FF sense-offset penalty: placed between the largest value that keeps
  every B=4 read passing (up to 8 kbit at 12.5 MHz, 1 kbit at 25 MHz) and
  the smallest that makes 8 kbit/B=16 reads fail at FS and FF.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomlkit
from scipy.optimize import brentq

from .characterize import estimate_area, run_r_tests, run_w_tests
from .geometry import validate_geometry
from .technology import CornerProfile, TechnologyProfile, profile_to_toml

CALIBRATION_VERSION = 1

# reference anchors
LAYOUT_GEOMETRY = (64, 64, 8)
LAYOUT_WIDTH = 524.3e-6
LAYOUT_HEIGHT = 353.5e-6
BEST_DENSITY = 0.024  # Mb/mm^2
BEST_DENSITY_GEOMETRY = (128, 64, 8)

SLOW_CLOCK = 12.5e6
FAST_CLOCK = 25e6
WRITE_PASS = [((128, 64, B), SLOW_CLOCK) for B in (4, 8, 16)]
WRITE_FAIL = [((256, 64, B), SLOW_CLOCK) for B in (4, 8, 16)] + [
    ((128, 64, B), FAST_CLOCK) for B in (4, 8, 16)
]
READ_PASS = [((M, N, 4), SLOW_CLOCK) for M in (32, 64, 128) for N in (32, 64)] + [
    ((32, 32, 4), FAST_CLOCK)
]
READ_FAIL = [((128, 64, 16), SLOW_CLOCK)]
OFFSET_CORNERS = ("FS", "FF")


def base_profile() -> TechnologyProfile:
    """Uncalibrated starting point; fitted fields hold placeholders."""
    corners = {
        "TT": CornerProfile("TT"),
        "FS": CornerProfile("FS", 0.8, 1.2, 0.0),
        "SF": CornerProfile("SF", 1.2, 0.8, 0.0),
        "FF": CornerProfile("FF", 0.8, 0.8, 0.0),
    }
    return TechnologyProfile(
        vddl=1.8,
        vddh=3.3,
        vddw=3.3,
        r_ref=32.5e3,
        r_on_access=1e3,
        r_driver=1e3,
        r_line_per_cell=20.0,
        c_line_per_cell=10e-15,
        r_mux_on=1e3,
        cell_pitch_x=4e-6,
        cell_pitch_y=4e-6,
        periphery_width=0.0,
        periphery_height=0.0,
        periphery_area_overhead=0.0,
        sense_offset=10e-3,
        sense_min_develop=2e-9,
        read_bias=0.1,
        c_sense=1e-12,
        r_sense_in=1e3,
        r_sense_out=5e3,
        c_io_bus=200e-15,
        imbalance_ref_bits=4,
        state_ratio=0.3,
        level_down_delay=0.0,
        corners=corners,
    )


def solve_floorplan() -> dict[str, float]:
    """Square pitch p; (64 p + Wp) = 524.3 um, (64 p + Hp) = 353.5 um, 128x64 hits 0.024."""
    M0, N0, _ = LAYOUT_GEOMETRY
    M1, N1, _ = BEST_DENSITY_GEOMETRY
    if N1 != N0:
        raise ValueError("density anchor must share the layout's column count")
    area1 = M1 * N1 / (BEST_DENSITY * 1e6) * 1e-6  # m^2
    height1 = area1 / LAYOUT_WIDTH
    # height(M) = M p + Hp: two equations in (p, Hp)
    a = np.array([[M0, 1.0], [M1, 1.0]])
    pitch, h_per = np.linalg.solve(a, [LAYOUT_HEIGHT, height1])
    w_per = LAYOUT_WIDTH - N0 * pitch
    return {
        "cell_pitch_x": float(pitch),
        "cell_pitch_y": float(pitch),
        "periphery_width": float(w_per),
        "periphery_height": float(h_per),
    }


def _write_margin(t, dims, clock_hz, corners) -> float:
    g = validate_geometry(*dims)
    return min(r.margin for c in corners for r in run_w_tests(g, t, clock_hz, c))


def _read_margin(t, dims, clock_hz, corners) -> float:
    g = validate_geometry(*dims)
    return min(r.margin for c in corners for r in run_r_tests(g, t, clock_hz, c))


def _log_root(f, lo, hi) -> float:
    return math.exp(brentq(lambda u: f(math.exp(u)), math.log(lo), math.log(hi), xtol=1e-12, rtol=1e-12))


@dataclass(frozen=True)
class Bracket:
    low: float
    high: float
    chosen: float


def solve_line_capacitance(t: TechnologyProfile) -> Bracket:
    corners = list(t.corners)

    def with_c(c):
        return t.replace(c_line_per_cell=c)

    # largest c with every WRITE_PASS config passing every corner
    c_high = min(
        _log_root(lambda c: _write_margin(with_c(c), d, f, corners), 1e-18, 1e-9)
        for d, f in WRITE_PASS
    )
    # smallest c at which every WRITE_FAIL config fails at least one corner
    c_low = max(
        _log_root(lambda c: _write_margin(with_c(c), d, f, corners), 1e-18, 1e-9)
        for d, f in WRITE_FAIL
    )
    if not c_low < c_high:
        raise RuntimeError(f"write calibration infeasible: need {c_low:.3e} < {c_high:.3e}")
    return Bracket(c_low, c_high, math.sqrt(c_low * c_high))


def _with_extra(t: TechnologyProfile, extra: float) -> TechnologyProfile:
    corners = dict(t.corners)
    for name in OFFSET_CORNERS:
        c = corners[name]
        corners[name] = CornerProfile(name, c.nmos_strength, c.pmos_strength, extra)
    return t.replace(corners=corners)


def solve_sense_offset(t: TechnologyProfile) -> Bracket:
    def margin(extra, dims, clock_hz):
        return _read_margin(_with_extra(t, extra), dims, clock_hz, OFFSET_CORNERS)

    hi_cap = 2 * t.vddl
    e_high = min(_root_linear(lambda e: margin(e, d, f), hi_cap) for d, f in READ_PASS)
    e_low = max(_root_linear(lambda e: margin(e, d, f), hi_cap) for d, f in READ_FAIL)
    if not e_low < e_high:
        raise RuntimeError(f"sense-offset calibration infeasible: need {e_low:.3e} < {e_high:.3e}")
    return Bracket(e_low, e_high, math.sqrt(e_low * e_high))


def _root_linear(f, hi) -> float:
    if f(0.0) <= 0:
        raise RuntimeError("configuration fails even without a corner offset")
    return brentq(f, 0.0, hi, xtol=1e-15)


def calibrate(t: TechnologyProfile | None = None) -> tuple[TechnologyProfile, dict]:
    t = base_profile() if t is None else t
    fp = solve_floorplan()
    t = t.replace(**fp)
    cap = solve_line_capacitance(t)
    t = t.replace(c_line_per_cell=cap.chosen)
    off = solve_sense_offset(t)
    t = _with_extra(t, off.chosen)

    g_layout = validate_geometry(*LAYOUT_GEOMETRY)
    g_best = validate_geometry(*BEST_DENSITY_GEOMETRY)
    layout = estimate_area(g_layout, t)
    best = estimate_area(g_best, t)
    fixture = {
        "version": CALIBRATION_VERSION,
        "floorplan": fp,
        "c_line_per_cell": {"low": cap.low, "high": cap.high, "chosen": cap.chosen},
        "sense_offset_extra": {"low": off.low, "high": off.high, "chosen": off.chosen},
        "check": {
            "layout_width": layout.width,
            "layout_height": layout.height,
            "layout_density": layout.density,
            "best_density": best.density,
        },
    }
    return t, fixture


_PROFILE_HEADER = [
    "rramc technology profile (calibrated default).",
    "Generated by `rramc calibrate`; do not edit by hand, edit calibration.base_profile instead.",
    "Assumptions: vddl = 1.8 V and vddh = 3.3 V are nominal 180 nm core/IO rails;",
    "vddw = 3.3 V and r_ref = 32.5 kOhm are the characterization defaults.",
    "Fitted: cell_pitch_*, periphery_* (floorplan), c_line_per_cell (write boundary),",
    "corners.FS/FF.sense_offset_extra (read corner penalty). See calibration.toml.",
]


def fixture_to_toml(fixture: dict) -> str:
    doc = tomlkit.document()
    doc.add(tomlkit.comment("rramc calibration fixture. Provenance of each anchor:"))
    doc.add(tomlkit.comment(f"  layout {LAYOUT_GEOMETRY}: {LAYOUT_WIDTH * 1e6} um x {LAYOUT_HEIGHT * 1e6} um"))
    doc.add(tomlkit.comment(f"  best density {BEST_DENSITY} Mb/mm^2 at {BEST_DENSITY_GEOMETRY}"))
    doc.add(tomlkit.comment("  writes: pass all corners up to 8 kbit at 12.5 MHz; 16 kbit and 25 MHz fail"))
    doc.add(tomlkit.comment("  reads: B=4 passes all corners up to 8 kbit at 12.5 MHz and 1 kbit at 25 MHz;"))
    doc.add(tomlkit.comment("         read failures are confined to FS/FF corners"))
    doc.add(tomlkit.comment("chosen = geometric mean of the feasible [low, high] bracket"))
    for k, v in fixture.items():
        doc[k] = v
    return tomlkit.dumps(doc)


def write_calibration(out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t, fixture = calibrate()
    prof = out_dir / "default_profile.toml"
    fix = out_dir / "calibration.toml"
    prof.write_text(profile_to_toml(t, _PROFILE_HEADER))
    fix.write_text(fixture_to_toml(fixture))
    return prof, fix


def load_fixture(path=None) -> dict:
    if path is None:
        from importlib import resources
        text = resources.files("rramc.data").joinpath("calibration.toml").read_text()
    else:
        text = Path(path).read_text()
    return tomlkit.parse(text).unwrap()
