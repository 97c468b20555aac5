import math

import pytest

from oracles import rc_vpn
from rramc.characterize import (
    TEST_NAMES,
    CharacterizationReport,
    alternating,
    characterize_sweep,
    estimate_area,
    run_r_tests,
    run_testbench,
    run_w_tests,
)
from rramc.geometry import validate_geometry
from rramc.technology import CornerProfile

SLOW, FAST = 12.5e6, 25e6


def test_alternating():
    assert alternating(4, 1) == 0b1010
    assert alternating(4, 0) == 0b0101
    assert alternating(1, 1) == 1


def oracle_w_margins(t, dims, clock):
    """Per-bit W1/W2 V_PN at 0.4 T at the worst-case write word, MSB first."""
    M, N, B = dims
    x, y = N // B - 2, M - 1
    out = {}
    for name, first in (("W1", 1), ("W2", 0)):
        bits = [first if i % 2 == 0 else 1 - first for i in range(B)]
        vpns = [
            rc_vpn(t.vddw, bit, t.r_driver, t.r_mux_on, t.r_line_per_cell, t.c_line_per_cell,
                   t.r_on_access, 1e6, y + 1, x * B * t.cell_pitch_x / t.cell_pitch_y, 0.4 / clock)
            for bit in bits
        ]
        out[name] = [(v if b == 0 else -v) - 0.7 * t.vddw for v, b in zip(vpns, bits)]
    return out


@pytest.mark.parametrize("dims", [(32, 32, 4), (128, 64, 8), (256, 64, 16)])
@pytest.mark.parametrize("clock", [SLOW, FAST])
def test_w_tests_match_rc_oracle(profile, dims, clock):
    g = validate_geometry(*dims)
    want = oracle_w_margins(profile, dims, clock)
    for res in run_w_tests(g, profile, clock):
        assert res.bit_margins == pytest.approx(want[res.test], rel=1e-9)
        assert res.passed == all(m >= 0 for m in want[res.test])


def test_w_forced_fail(profile):
    g = validate_geometry(32, 32, 4)
    t = profile.replace(c_line_per_cell=profile.c_line_per_cell * 100)
    want = oracle_w_margins(t, (32, 32, 4), SLOW)
    w1, w2 = run_w_tests(g, t, SLOW)
    assert not w1.passed and not w2.passed
    assert w1.margin < 0
    assert w1.margin == pytest.approx(min(want["W1"]), rel=1e-9)


def test_w_ideal_passes_fast(ideal_profile):
    g = validate_geometry(128, 64, 16)
    assert all(r.passed for r in run_w_tests(g, ideal_profile, 1e9))


@pytest.mark.parametrize("dims", [(32, 32, 4), (64, 64, 8), (128, 64, 16)])
def test_w1_iff_w2(profile, dims):
    g = validate_geometry(*dims)
    for clock in (SLOW, FAST):
        for corner in profile.corners:
            w1, w2 = run_w_tests(g, profile, clock, corner)
            assert w1.passed == w2.passed


def test_margins_monotone_in_frequency(profile):
    g = validate_geometry(64, 64, 8)
    prev_w = prev_r = math.inf
    for clock in (5e6, 12.5e6, 20e6, 25e6, 40e6):
        w = min(r.margin for r in run_w_tests(g, profile, clock))
        r = min(x.margin for x in run_r_tests(g, profile, clock))
        assert w <= prev_w and r <= prev_r
        prev_w, prev_r = w, r


def test_r_tests_default(profile):
    r1, r2 = run_r_tests(validate_geometry(32, 32, 4), profile, 25e6)
    assert r1.passed and r2.passed and r1.margin > 0


def test_r_ratio_near_one_fails(profile):
    r1, r2 = run_r_tests(validate_geometry(32, 32, 4), profile, SLOW, a=0.999)
    assert not r1.passed and not r2.passed
    with pytest.raises(ValueError):
        run_r_tests(validate_geometry(32, 32, 4), profile, SLOW, a=1.0)


def test_r_large_corner_offset_fails(profile):
    corners = dict(profile.corners)
    corners["FF"] = CornerProfile("FF", 0.8, 0.8, 1.0)
    t = profile.replace(corners=corners)
    g = validate_geometry(64, 64, 8)
    assert not any(r.passed for r in run_r_tests(g, t, SLOW, "FF"))
    assert all(r.passed for r in run_r_tests(g, t, SLOW, "TT"))


def test_testbench_order(profile):
    results, sim = run_testbench(validate_geometry(32, 32, 4), profile, SLOW)
    assert [r.test for r in results] == list(TEST_NAMES)
    assert sim.trace.edges("reset")[0][1] == 1


def test_area(profile):
    a = estimate_area(validate_geometry(64, 64, 8), profile)
    assert a.width == pytest.approx(524.3e-6, rel=0.1)
    assert a.height == pytest.approx(353.5e-6, rel=0.1)
    assert a.density == pytest.approx(4096 / (a.area * 1e6) / 1e6)
    b = estimate_area(validate_geometry(128, 64, 8), profile)
    assert b.height - profile.periphery_height == pytest.approx(2 * (a.height - profile.periphery_height))
    assert b.width == a.width


def test_sweep_shape_and_determinism(profile):
    dims = [(32, 32, 4), (32, 64, 8), (64, 64, 8), (128, 64, 16)]
    configs = [(d, f) for d in dims for f in (SLOW, FAST)]
    rep = characterize_sweep(configs, profile, list(profile.corners))
    assert len(rep.rows) == len(dims) * 2 * 4 * 4
    assert [(r.corner, r.test) for r in rep.rows[:5]] == [
        ("TT", "W1"), ("TT", "W2"), ("TT", "R1"), ("TT", "R2"), ("FS", "W1")]
    for r in rep.rows:
        assert r.density == pytest.approx(r.M * r.N / (r.area * 1e6) / 1e6, rel=1e-15)
    again = characterize_sweep(configs, profile, list(profile.corners))
    assert rep.to_jsonl() == again.to_jsonl()
    assert rep.format_table() == again.format_table()
    assert CharacterizationReport.from_jsonl(rep.to_jsonl()).rows == rep.rows


def test_sweep_parallel_matches_serial(profile):
    configs = [((32, 32, 4), SLOW), ((64, 32, 8), FAST)]
    vs, vp = {}, {}
    serial = characterize_sweep(configs, profile, ["TT", "FF"], vcds=vs)
    parallel = characterize_sweep(configs, profile, ["TT", "FF"], workers=2, vcds=vp)
    assert serial.to_jsonl() == parallel.to_jsonl()
    assert vs == vp and len(vs) == 4


def test_sweep_aggregates_errors(profile):
    rep = characterize_sweep([((32, 32, 4), SLOW), ((33, 32, 4), SLOW)], profile, ["TT"])
    assert len(rep.rows) == 8
    bad = rep.rows[4:]
    assert all(not r.passed and "NonPowerOfTwo" in r.error for r in bad)
    assert all(r.passed for r in rep.rows[:4])
    with pytest.raises(ValueError):
        characterize_sweep([], profile, ["TT"])


def test_report_rejects_unknown_schema(profile):
    rep = characterize_sweep([((32, 32, 4), SLOW)], profile, ["TT"])
    with pytest.raises(ValueError):
        CharacterizationReport.from_jsonl(rep.to_jsonl().replace('"schema": 1', '"schema": 7', 1))


def test_report_header_states_calibration(profile):
    rep = characterize_sweep([((32, 32, 4), SLOW)], profile, ["TT"])
    assert "calibration-anchored" in rep.format_table().splitlines()[0]
    assert "not independent predictions" in rep.to_jsonl().splitlines()[0]
