import numpy as np
import pytest

from skwave.exact import (
    Manufactured, manufactured_forcing, outgoing_linear, pde_residual_fd, shatah_ambient,
    shatah_local_energy, shatah_u, shatah_u_r, shatah_u_tau, shatah_u_tautau,
)
from skwave.model import ModelKind

AN, WM = ModelKind.ADKINS_NAPPI, ModelKind.WAVE_MAP


def test_ambient_map_lies_on_sphere_and_matches_angle():
    rng = np.random.default_rng(1)
    tau = rng.uniform(1e-3, 5.0, 100_000)
    x = rng.uniform(1e-3, 5.0, 100_000)
    a, b = shatah_ambient(tau, x)
    assert np.max(np.abs(a * a + b * b - 1.0)) < 1e-14
    u = shatah_u(tau, x)
    assert np.allclose(a, np.sin(u), atol=1e-14)
    assert np.allclose(b, np.cos(u), atol=1e-14)


def test_shatah_solves_wave_map_only():
    fn = lambda t, r: shatah_u(-t, r)   # tau = -t, vertex at t = 0
    r = np.linspace(0.2, 3.0, 30)
    assert np.max(np.abs(pde_residual_fd(fn, WM, -1.0, r, h=1e-3))) < 1e-4
    assert np.max(np.abs(pde_residual_fd(fn, AN, -1.0, r, h=1e-3))) > 1e-2


def test_shatah_derivatives():
    tau, r, h = 0.7, np.array([0.3, 1.1]), 1e-6
    assert np.allclose(shatah_u_tau(tau, r), (shatah_u(tau + h, r) - shatah_u(tau - h, r)) / (2 * h), rtol=1e-8)
    assert np.allclose(shatah_u_r(tau, r), (shatah_u(tau, r + h) - shatah_u(tau, r - h)) / (2 * h), rtol=1e-8)
    assert np.allclose(shatah_u_tautau(tau, r),
                       (shatah_u_tau(tau + h, r) - shatah_u_tau(tau - h, r)) / (2 * h), rtol=1e-7)
    with pytest.raises(ValueError):
        shatah_u(1.0, 0.0)


def test_shatah_local_energy_values():
    assert shatah_local_energy(0.3, 0.3) == pytest.approx(0.3, rel=1e-14)
    assert shatah_local_energy(0.3, 1.0) == pytest.approx(1.8348623853211009, rel=1e-14)
    # self-similar: E(tau, tau) = tau
    taus = np.geomspace(1e-3, 10, 9)
    assert np.allclose(shatah_local_energy(taus, taus), taus, rtol=1e-13)


def test_manufactured_forcing_values():
    assert manufactured_forcing(model=AN)(np.pi / 2, 1.0) == pytest.approx(1.7831447177582442, rel=1e-13)
    assert manufactured_forcing(model=WM)(np.pi / 2, 1.0) == pytest.approx(1.774788248261991, rel=1e-13)


@pytest.mark.parametrize("model", [AN, WM, ModelKind.LINEAR])
def test_manufactured_forcing_matches_finite_differences(model):
    m = Manufactured(1.0, model)
    r = np.linspace(0.1, 4.0, 40)
    fd = pde_residual_fd(m.u, model, 0.8, r, h=1e-4)
    assert np.allclose(m.forcing(0.8, r), fd, atol=1e-5)


def test_outgoing_linear_solves_linear_equation():
    f = lambda s: np.exp(-(s - 6.0) ** 2 / 0.25)
    fn = lambda t, r: outgoing_linear(t, r, f)
    r = np.linspace(3.0, 10.0, 50)
    assert np.max(np.abs(pde_residual_fd(fn, ModelKind.LINEAR, 1.3, r, h=1e-4))) < 1e-4
