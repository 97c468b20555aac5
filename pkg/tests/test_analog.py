import math

import pytest
from hypothesis import assume, given, strategies as st

from rramc import analog
from rramc.analog import (
    DrivePair,
    MemristorState,
    SettlingModel,
    address_parasitics,
    apply_write,
    develop_window,
    sense,
    sense_output_level,
    vpn_at,
    write_driver,
)
from rramc.geometry import validate_geometry

pos = st.floats(1e-3, 1e7, allow_nan=False)


def test_write_driver_truth_table(profile):
    assert write_driver(0, profile) == DrivePair(3.3, 0.0)
    assert write_driver(1, profile) == DrivePair(0.0, 3.3)
    assert write_driver(0, profile).v_pn == -write_driver(1, profile).v_pn


def test_vpn_limits(profile):
    m = SettlingModel(r_drive=1e3, r_path=2e3, c_node=1e-12, r_cell=1e6)
    d = write_driver(0, profile)
    assert vpn_at(m, d, 0.0) == 0.0
    v_final = 3.3 * 1e6 / (1e6 + 3e3)
    assert vpn_at(m, d, 1.0) == pytest.approx(v_final, rel=1e-12)
    r_th = 3e3 * 1e6 / (3e3 + 1e6)
    assert m.tau == pytest.approx(r_th * 1e-12, rel=1e-12)
    assert vpn_at(m, d, m.tau) == pytest.approx(v_final * (1 - math.exp(-1)), rel=1e-12)
    with pytest.raises(ValueError):
        vpn_at(m, d, -1e-9)


@given(pos, pos, st.floats(1e-18, 1e-9), pos, st.floats(0, 1e-5), st.floats(0, 1e-5))
def test_vpn_monotone_and_bounded(rd, rp, c, rc, t1, t2):
    m = SettlingModel(rd, rp, c, rc)
    d = DrivePair(3.3, 0.0)
    lo, hi = sorted((t1, t2))
    v_lo, v_hi = vpn_at(m, d, lo), vpn_at(m, d, hi)
    v_final = 3.3 * rc / (rc + rd + rp)
    assert v_lo <= v_hi <= v_final * (1 + 1e-12)
    # closed form, written out independently
    expected = -v_final * math.expm1(-hi / ((rd + rp) * rc / (rd + rp + rc) * c))
    assert v_hi == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_parasitics_baseline(profile):
    g = validate_geometry(32, 32, 4)
    m = address_parasitics(g, profile, 0, 0)
    assert m.r_path == pytest.approx(profile.r_mux_on + profile.r_line_per_cell)
    assert m.c_node == pytest.approx(profile.c_line_per_cell)
    assert m.r_cell == profile.r_on_access + 1e6


@given(st.integers(1, 7), st.integers(1, 5), st.integers(0, 3), st.data())
def test_parasitics_monotone(Y, X, b, data):
    from rramc.technology import default_profile

    t = default_profile()
    g = validate_geometry(2**Y, 2**b * 2**X, 2**b)
    x = data.draw(st.integers(0, g.word_columns - 1))
    y = data.draw(st.integers(0, g.M - 1))
    here = address_parasitics(g, t, x, y)
    worst = address_parasitics(g, t, g.word_columns - 1, g.M - 1)
    assert here.r_path <= worst.r_path and here.c_node <= worst.c_node
    if y + 1 < g.M:
        up = address_parasitics(g, t, x, y + 1)
        assert up.r_path > here.r_path and up.c_node > here.c_node
    if x + 1 < g.word_columns:
        right = address_parasitics(g, t, x + 1, y)
        assert right.r_path > here.r_path and right.c_node > here.c_node


def test_parasitics_range(profile):
    g = validate_geometry(4, 8, 2)
    with pytest.raises(IndexError):
        address_parasitics(g, profile, 4, 0)
    with pytest.raises(IndexError):
        address_parasitics(g, profile, 0, 4)
    address_parasitics(g, profile, 4, 0, allow_reference=True)


@pytest.mark.parametrize(
    "vpn,target,ok,value_attr",
    [(0.8 * 3.3, 0, True, "r_lrs"), (0.6 * 3.3, 0, False, None), (-0.75 * 3.3, 1, True, "r_hrs"),
     (0.75 * 3.3, 1, False, None), (-0.8 * 3.3, 0, False, None), (0.7 * 3.3, 0, True, "r_lrs")],
)
def test_apply_write(profile, vpn, target, ok, value_attr):
    cell = MemristorState(1e6)
    new = apply_write(cell, vpn, profile, target)
    assert new.last_write_ok is ok
    assert new.resistance == (getattr(profile, value_attr) if ok else 1e6)


def test_apply_write_idempotent(profile):
    once = apply_write(MemristorState(1e6), -3.0, profile, 1)
    assert apply_write(once, -3.0, profile, 1) == once


def test_memristor_positive():
    with pytest.raises(ValueError):
        MemristorState(0.0)


def test_sense_examples(profile):
    r = profile.r_ref
    hrs = sense(r / 0.3, r, 40e-9, 0.0, profile)
    lrs = sense(0.3 * r, r, 40e-9, 0.0, profile)
    assert (hrs.bit, lrs.bit) == (1, 0)
    assert hrs.margin > 0 and hrs.reliable and lrs.reliable
    same = sense(r, r, 40e-9, 0.0, profile)
    assert same.margin <= 0 and not same.reliable


def test_sense_closed_form(profile):
    r_cell, r_ref, dt = 50e3, 32.5e3, 30e-9
    s = sense(r_cell, r_ref, dt, 0.02, profile)
    delta = profile.read_bias * profile.vddl * (1 / r_ref - 1 / r_cell) * dt / profile.c_sense
    assert s.delta == pytest.approx(delta, rel=1e-12)
    assert s.margin == pytest.approx(abs(delta) - (0.02 + profile.sense_offset), rel=1e-12)


def test_sense_too_short(profile):
    s = sense(1e6, 1e3, profile.sense_min_develop / 2, 0.0, profile)
    assert abs(s.delta) <= profile.vddl
    assert not s.reliable


@given(st.floats(1e2, 1e7), st.floats(1e2, 1e7), st.floats(1e-3, 1e3))
def test_sense_ratiometric(rc, rr, k, ):
    from rramc.technology import default_profile

    t = default_profile().replace(sense_offset=0.0)
    assume(abs(rc - rr) > 1e-6 * rr)
    assert sense(rc, rr, 1e-8, 0.0, t).bit == sense(rc * k, rr * k, 1e-8, 0.0, t).bit


@given(st.floats(0.01, 0.99))
def test_lrs_hrs_opposite(a):
    from rramc.technology import default_profile

    t = default_profile()
    assert sense(a * t.r_ref, t.r_ref, 40e-9, 0.0, t).bit == 0
    assert sense(t.r_ref / a, t.r_ref, 40e-9, 0.0, t).bit == 1


def test_develop_window():
    assert develop_window(1e-9, 5e-9, 0.0) == 5e-9
    tau = 2e-9
    w = develop_window(4e-9, 6e-9, tau)
    exact = 6e-9 - tau * (math.exp(-2) - math.exp(-5))
    assert w == pytest.approx(exact, rel=1e-12)
    assert 0 < w < 6e-9


def test_output_level(profile):
    r = profile.r_ref
    one = sense(r / 0.3, r, 40e-9, 0.0, profile)
    zero = sense(0.3 * r, r, 40e-9, 0.0, profile)
    bad = sense(r, r, 40e-9, 0.0, profile)
    t_chk = 16e-9
    assert sense_output_level(one, t_chk, profile) == profile.vddl
    tau = profile.r_sense_out * profile.c_io_bus
    assert sense_output_level(zero, t_chk, profile) == pytest.approx(profile.vddl * math.exp(-t_chk / tau))
    assert sense_output_level(bad, t_chk, profile) == profile.vddl / 2
    assert analog.read_level_margin(profile.vddl, 1, profile) == pytest.approx(0.17 * profile.vddl)
    assert analog.read_level_margin(profile.vddl / 2, 0, profile) < 0
