"""
Closed-form reference solutions.

Shatah's self-similar wave map  phi = (2 tau x, |x|^2 - tau^2) / (tau^2 + |x|^2)
reduces to the equivariant angle u = 2 arctan(tau / r), singular at tau = 0.
It solves the wave-map model only; the quartic Adkins-Nappi term breaks it.

That branch has u(0) = pi.  The evolver imposes u(0) = 0, so states handed
to it use the reflected branch pi - 2 arctan(tau / r) = 2 arctan(r / tau),
which is again a wave map (u -> pi - u is a symmetry of the wave-map
equation) and is the degree-one bubble of scale tau collapsing onto the
vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import FieldState
from .grid import GridSpec
from .model import ModelKind, nonlinearity, u_minus_sincos


def _pos(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0.0)):
        raise ValueError("radius must be strictly positive")
    return r


def shatah_u(tau, r):
    return 2.0 * np.arctan(np.asarray(tau, dtype=float) / _pos(r))


def shatah_u_tau(tau, r):
    r = _pos(r)
    tau = np.asarray(tau, dtype=float)
    return 2.0 * r / (tau * tau + r * r)


def shatah_u_r(tau, r):
    r = _pos(r)
    tau = np.asarray(tau, dtype=float)
    return -2.0 * tau / (tau * tau + r * r)


def shatah_u_tautau(tau, r):
    r = _pos(r)
    tau = np.asarray(tau, dtype=float)
    return -4.0 * r * tau / (tau * tau + r * r) ** 2


def shatah_ambient(tau, x):
    """Ambient map in R^4 for a radial point: (radial component, last component)."""
    tau = np.asarray(tau, dtype=float)
    x = np.asarray(x, dtype=float)
    d = tau * tau + x * x
    return 2.0 * tau * x / d, (x * x - tau * tau) / d


def shatah_local_energy(tau, radius):
    """Wave-map energy of the Shatah solution in the ball of given radius at cone time tau.

    Closed form of  int_0^R [2/(r^2+tau^2) + 4 tau^2/(r^2+tau^2)^2] r^2 dr.
    """
    tau = np.asarray(tau, dtype=float)
    R = np.asarray(radius, dtype=float)
    a = np.arctan(R / tau)
    # int 2 r^2/(r^2+t^2) = 2R - 2t atan(R/t)
    # int 4 t^2 r^2/(r^2+t^2)^2 = 2 t (atan(R/t) - R t/(R^2+t^2))
    return 2.0 * R - 2.0 * tau * a + 2.0 * tau * (a - R * tau / (R * R + tau * tau))


def shatah_state(tau: float, grid: GridSpec, vertex_time: float | None = None) -> FieldState:
    """Regular-branch Shatah data at cone time ``tau`` for a forward run toward the vertex.

    u = pi - 2 arctan(tau/r) and v = du/dt = 2r/(tau^2 + r^2) with t = vertex_time - tau.
    The simulation time defaults to 0 (vertex at t = tau).
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    r = grid.r
    vertex_time = tau if vertex_time is None else vertex_time
    u = np.pi - shatah_u(tau, r)
    v = shatah_u_tau(tau, r)
    return FieldState(vertex_time - tau, u, v, grid, ModelKind.WAVE_MAP)


def shatah_regular(tau, r):
    return np.pi - shatah_u(tau, r)


def outgoing_linear(t, r, profile):
    """Outgoing solution of the linear radial wave equation, r u = (r - t) f(r - t).

    ``profile`` is f, the t = 0 data; it must vanish near the origin.
    """
    r = _pos(r)
    s = r - np.asarray(t, dtype=float)
    return s * profile(s) / r


# ---------------------------------------------------------------------------
# manufactured solution  u_m = A sin(t) r exp(-r^2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Manufactured:
    amplitude: float = 1.0
    model: ModelKind = ModelKind.ADKINS_NAPPI

    def u(self, t, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * np.sin(t) * r * np.exp(-r * r)

    def u_t(self, t, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * np.cos(t) * r * np.exp(-r * r)

    def forcing(self, t, r):
        """F = u_tt - u_rr - (2/r) u_r + N(u, r) for the closed-form u.

        The 2/r part of the Laplacian is cancelled analytically against the
        linear part of sin(2u)/r^2, which leaves -2 (u - sin u cos u)/r^2.
        """
        r = _pos(r)
        A = self.amplitude
        g = np.exp(-r * r)
        um = A * np.sin(t) * r * g
        lap_regular = A * np.sin(t) * (-10.0 * r + 4.0 * r**3) * g   # Laplacian minus its 2/r part
        if self.model is ModelKind.LINEAR:
            return -um - lap_regular - 2.0 * A * np.sin(t) * g / r
        out = -um - lap_regular - 2.0 * u_minus_sincos(um) / (r * r)
        if self.model is ModelKind.ADKINS_NAPPI:
            s = np.sin(um)
            out = out + u_minus_sincos(um) * 2.0 * s * s / r**4
        return out

    def state(self, t, grid: GridSpec) -> FieldState:
        return FieldState(t, self.u(t, grid.r), self.u_t(t, grid.r), grid, self.model)


def manufactured_forcing(u_m: Manufactured | None = None, model: ModelKind = ModelKind.ADKINS_NAPPI):
    """Forcing callback F(t, r) that makes ``u_m`` an exact solution."""
    u_m = Manufactured(1.0, model) if u_m is None else u_m
    return u_m.forcing


def pde_residual_fd(u_fn, model: ModelKind, t, r, h=1e-3):
    """u_tt - u_rr - (2/r) u_r + N by centred differences of a callable u(t, r)."""
    r = _pos(r)
    u0 = u_fn(t, r)
    u_tt = (u_fn(t + h, r) - 2 * u0 + u_fn(t - h, r)) / (h * h)
    u_rr = (u_fn(t, r + h) - 2 * u0 + u_fn(t, r - h)) / (h * h)
    u_r = (u_fn(t, r + h) - u_fn(t, r - h)) / (2 * h)
    return u_tt - u_rr - 2.0 * u_r / r + nonlinearity(model, u0, r)
