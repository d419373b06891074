import math

import numpy as np
import pytest

from skwave.data import stereographic
from skwave.diagnostics import total_energy
from skwave.grid import make_grid
from skwave.model import ModelKind, positivity_term
from skwave.soliton import (
    InvalidBracket, Shot, SolitonProfile, bisection_iterations, find_soliton, ode_residual, series_cubic,
    shoot, soliton_energy,
)

DR = 50.0 / 1024


def test_zero_slope_is_trivial_undershoot():
    res = shoot(0.0, 50.0, DR)
    assert res.classification is Shot.UNDERSHOOT
    assert np.all(res.u == 0.0)


def test_huge_slope_overshoots():
    res = shoot(1e6, 50.0, DR)
    assert res.classification is Shot.OVERSHOOT


def test_bracket_classifications(soliton_1024):
    a = soliton_1024.slope
    assert shoot(a - 1e-3, 50.0, DR).side is Shot.UNDERSHOOT
    assert shoot(a + 1e-3, 50.0, DR).side is Shot.OVERSHOOT
    for lo, hi in ((0.5, 4.0), (1.0, 1.5)):
        assert shoot(lo, 50.0, DR).side is Shot.UNDERSHOOT
        assert shoot(hi, 50.0, DR).side is Shot.OVERSHOOT


def test_invalid_bracket():
    with pytest.raises(InvalidBracket):
        find_soliton(2.0, 4.0, r_max=50.0, dr=DR)
    with pytest.raises(InvalidBracket):
        find_soliton(0.5, 1.0, r_max=50.0, dr=DR)
    with pytest.raises(ValueError):
        shoot(-1.0, 50.0, DR)


def test_series_coefficient():
    # u = a r + b r^3 into u'' + 2u'/r - sin(2u)/r^2 - quartic, at order r
    a = 1.3
    assert series_cubic(a) == pytest.approx(2 / 15 * a**3 * (a * a - 1))
    assert series_cubic(a, ModelKind.WAVE_MAP) == pytest.approx(-2 / 15 * a**3)


def test_bisection(soliton_1024):
    p = soliton_1024
    assert p.iterations == bisection_iterations(0.5, 4.0, 1e-12) == 42
    # the interval halves exactly, so the final width is below the tolerance
    assert 3.5 / 2**p.iterations < 1e-12
    assert p.slope == pytest.approx(1.2563297353702296, abs=1e-11)


def test_profile_invariants(soliton_1024):
    p = soliton_1024
    assert p.u[0] / p.r[0] == pytest.approx(p.slope, rel=1e-2)
    assert np.all(p.u >= 0) and np.all(p.u <= np.pi + 0.1)
    assert np.all(np.diff(p.u) > -1e-8)
    assert p.gap < 1e-2 * np.pi
    assert np.all(positivity_term(p.u) >= 0)


def test_gap_decreases_with_r_max():
    gaps = [find_soliton(r_max=rm, dr=DR).gap for rm in (25.0, 50.0, 100.0)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_slope_self_consistent_under_refinement():
    a = [find_soliton(r_max=50.0, dr=50.0 / n).slope for n in (1024, 2048, 4096)]
    d1, d2 = abs(a[1] - a[0]), abs(a[2] - a[1])
    assert d1 / d2 >= 4.0


def test_ode_residual_second_order():
    res = [ode_residual(find_soliton(r_max=50.0, dr=50.0 / n)) for n in (1024, 2048, 4096)]
    assert res[0] / res[1] >= 3.5
    assert res[1] / res[2] >= 3.5


def test_ode_residual_sensitivity():
    p = find_soliton(r_max=50.0, dr=50.0 / 2048)
    window = np.exp(-((p.r - 5.0) / 2.0) ** 2)
    bumped = SolitonProfile(p.r, p.u + 0.01 * np.sin(p.r) * window, p.du, p.slope, p.r_max, p.dr, p.gap)
    assert ode_residual(bumped) >= 10 * ode_residual(p)


def test_zero_profile():
    r = make_grid(10.0, 64).r
    z = SolitonProfile(r, np.zeros(64), np.zeros(64), 0.0, 10.0, 10.0 / 64, math.pi)
    assert soliton_energy(z) == 0.0
    assert ode_residual(z) == 0.0


def test_energy_two_rules(soliton_1024):
    mid = soliton_energy(soliton_1024)
    simp = soliton_energy(soliton_1024, "simpson")
    assert mid == pytest.approx(simp, rel=1e-4)
    assert mid == pytest.approx(7.2899, abs=1e-3)
    with pytest.raises(ValueError):
        soliton_energy(soliton_1024, "trapezoid")


def test_stereographic_scan_brackets_soliton(soliton_1024):
    # E(lam) = alpha lam + beta / lam for 2 atan(r / lam), alpha = 3 pi / 2, beta = 5 pi / 4
    lams = np.linspace(0.4, 2.0, 33)
    g = make_grid(400.0, 16384)
    energies = np.array([total_energy(stereographic(g, lam, pin=False)) for lam in lams])
    exact = 1.5 * np.pi * lams + 1.25 * np.pi / lams
    # truncation at r_max loses a tail of relative size ~ lam / r_max
    assert np.allclose(energies, exact, rtol=1e-2)
    lam_star = lams[np.argmin(energies)]
    assert lam_star == pytest.approx(math.sqrt(5 / 6), abs=0.05)
    # the soliton beats every member of the family
    assert soliton_energy(soliton_1024) < energies.min()
    # and the minimiser sits near the soliton scale (radius where u = pi/2)
    half = np.interp(np.pi / 2, soliton_1024.u, soliton_1024.r)
    assert 1 / 1.5 < lam_star / half < 1.5
