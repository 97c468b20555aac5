import random
import time

import numpy as np
import pytest

from oracles import WordArray, random_ops
from rramc.controller import FsmState, OverlappingOperation
from rramc.geometry import validate_geometry
from rramc.simulator import Simulator, WaveTrace, bits_msb_first, export_vcd, sim_new

CLK = 12.5e6


def test_sim_new_fills(profile):
    g = validate_geometry(2, 4, 2)
    s = sim_new(g, profile, CLK)
    assert np.all(s.cells == 1e6) and s.fsm is FsmState.RESET
    s = sim_new(g, profile, CLK, init=("checkerboard", 10.0, 20.0))
    assert list(s.cells[0]) == [10.0, 20.0, 10.0, 20.0]
    assert list(s.cells[1]) == [20.0, 10.0, 20.0, 10.0]
    m = [[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]
    assert sim_new(g, profile, CLK, init=m).cells.tolist() == m
    with pytest.raises(ValueError):
        sim_new(g, profile, CLK, init=[[1.0, 2.0]])
    with pytest.raises(ValueError):
        sim_new(g, profile, 0.0)


def test_reset_is_first_trace_event(profile):
    s = sim_new(validate_geometry(2, 2, 1), profile, CLK)
    assert s.trace.edges("reset")[0] == (0.0, 1)
    s.reset()
    assert s.fsm is FsmState.IDLE
    for name in ("read", "write", "dvlp", "pre", "en_sa", "io_drive"):
        assert s.trace.value_at(name, s.now) == 0


def test_write_then_read(profile):
    g = validate_geometry(32, 32, 4)
    s = sim_new(g, profile, CLK).reset()
    c0 = s.cycle
    res = s.write(0, 0, 0b1010)
    assert s.cycle == c0 + 2 and res.ok
    # positive V_PN for a 0, negative for a 1 (bit 0 is the LSB)
    assert [v > 0 for v in res.vpn] == [True, False, True, False]
    assert s.cells[0, 0] == profile.r_lrs and s.cells[0, 1] == profile.r_hrs
    c1 = s.cycle
    before = s.cells.copy()
    r = s.read(0, 0)
    assert s.cycle == c1 + 4
    assert r.data == 0b1010
    assert np.array_equal(before, s.cells)


def test_read_lrs_hrs(profile):
    g = validate_geometry(8, 8, 4)
    s = sim_new(g, profile, CLK).reset()
    s.set_cell(1, 3, [profile.r_hrs, profile.r_lrs, profile.r_hrs, profile.r_lrs])
    assert s.read(1, 3).data == 0b1010
    assert s.cell(3, 7).resistance == profile.r_hrs  # MSB of word 1 sits in column 7


def test_huge_c_line_fails_far_rows(profile):
    t = profile.replace(c_line_per_cell=profile.c_line_per_cell * 1e4)
    g = validate_geometry(8, 8, 4)
    s = sim_new(g, t, CLK).reset()
    res = s.write(1, 7, 0b0101)
    assert not res.ok
    assert not s.cell(7, 4).last_write_ok
    assert s.cells[7, 4] == 1e6  # unchanged


def test_overlap_and_bounds(profile):
    g = validate_geometry(4, 4, 2)
    s = sim_new(g, profile, CLK)
    with pytest.raises(OverlappingOperation):
        s.write(0, 0, 1)  # still in RESET
    s.reset()
    with pytest.raises(IndexError):
        s.read(2, 0)
    with pytest.raises(ValueError):
        s.write(0, 0, 4)


def test_unselected_column_isolation(profile):
    g = validate_geometry(4, 16, 4)
    rng = random.Random(3)
    s = sim_new(g, profile, CLK, init=("checkerboard", profile.r_lrs, profile.r_hrs)).reset()
    for _ in range(30):
        x, y = rng.randrange(4), rng.randrange(4)
        before = s.cells.copy()
        s.write(x, y, rng.randrange(16))
        other = [c for c in range(g.N) if c // g.B != x]
        assert np.array_equal(before[:, other], s.cells[:, other])
        assert np.array_equal(np.delete(before, y, axis=0), np.delete(s.cells, y, axis=0))


def check_trace_invariants(s):
    for name, lst in s.trace.changes.items():
        times = [t for t, _ in lst]
        assert times == sorted(set(times)), name
    for t, drive in s.trace.edges("io_drive"):
        if drive == 0:
            assert s.trace.value_at("io_bus", t) == "z"


def test_trace_invariants(profile):
    g = validate_geometry(4, 8, 2)
    s = sim_new(g, profile, CLK).reset()
    for i in range(6):
        s.write(i % 4, i % 4, i % 4)
        check_trace_invariants(s)
        s.read(i % 4, i % 4)
        check_trace_invariants(s)
        s.idle(i % 2)


def test_oracle_equivalence(ideal_profile):
    """100 random sequences x 200 ops on small arrays against a dict-of-words model."""
    rng = random.Random(20240611)
    shapes = [(M, N, B) for M in (2, 4, 8) for B in (1, 2, 4) for N in (2 * B, 4 * B, 8 * B) if N <= 8]
    start = time.perf_counter()
    for seq in range(100):
        g = validate_geometry(*rng.choice(shapes))
        s = sim_new(g, ideal_profile, CLK).reset()
        model = WordArray(g.M, g.word_columns, g.B, fill=(1 << g.B) - 1)  # 1 Mohm reads as 1
        for op, x, y, data in random_ops(rng, g, 200):
            if op == "write":
                s.write(x, y, data)
                model.write(x, y, data)
            else:
                assert s.read(x, y).data == model.read(x, y), (seq, g, x, y)
    assert time.perf_counter() - start < 30


def test_phase_cycles_stretch_read(profile):
    g = validate_geometry(4, 8, 2)
    s = sim_new(g, profile, CLK, phase_cycles=3).reset()
    c = s.cycle
    s.read(0, 0)
    assert s.cycle == c + 1 + 3 * 3
    assert s.read_access_time == pytest.approx(6 / CLK)


def test_read_waveform_order(profile):
    g = validate_geometry(32, 32, 4)
    s = sim_new(g, profile, 25e6).reset()
    s.read(7, 31)
    rise = {n: next(t for t, v in s.trace.edges(n) if v == 1) for n in ("read", "dvlp", "pre", "en_sa")}
    T = 40e-9
    t_read = rise["read"]
    assert rise["dvlp"] == t_read
    assert rise["pre"] == pytest.approx(t_read + T)
    assert rise["en_sa"] == pytest.approx(t_read + 2 * T)
    dvlp_fall = [t for t, v in s.trace.edges("dvlp") if v == 0 and t > t_read][0]
    assert dvlp_fall == pytest.approx(rise["en_sa"])
    vcd = s.export_vcd()
    assert vcd == s.export_vcd()
    assert "$var wire 1" in vcd and "dvlp" in vcd and "$timescale" in vcd


def test_empty_trace_vcd_is_header_only():
    text = export_vcd(WaveTrace(clock_period=40e-9))
    assert "$enddefinitions $end" in text
    assert "#" not in text and "$var" not in text


def test_vcd_deterministic(profile):
    def run():
        s = sim_new(validate_geometry(4, 8, 2), profile, CLK).reset()
        s.write(1, 2, 3)
        s.read(1, 2)
        return s.export_vcd(), s.format_log()

    assert run() == run()


def test_log_format(profile):
    s = sim_new(validate_geometry(4, 8, 2), profile, CLK).reset()
    s.write(1, 2, 0b10)
    line = s.format_log().splitlines()[-1]
    assert line.startswith("cycle=2 op=write x=1 y=2 data=0b10 margins=")
    assert line.endswith("ok=1")


def test_bits_msb_first():
    assert bits_msb_first(0b1010, 4) == [1, 0, 1, 0]
    assert bits_msb_first(1, 3) == [0, 0, 1]


def test_corner_offset_scales_with_width(profile):
    g16 = validate_geometry(128, 64, 16)
    g4 = validate_geometry(32, 32, 4)
    fs = profile.corner("FS").sense_offset_extra
    assert Simulator(g4, profile, CLK, corner="FS").corner_sense_offset() == 0.0
    assert Simulator(g16, profile, CLK, corner="FS").corner_sense_offset() == pytest.approx(3 * fs)
    assert Simulator(g16, profile, CLK, corner="TT").corner_sense_offset() == 0.0
