"""Initial data families on a grid."""

from __future__ import annotations

import math

import numpy as np

from .evolve import FieldState
from .grid import GridSpec
from .model import ModelKind


def outer_taper(grid: GridSpec, width: float | None = None) -> np.ndarray:
    """Smooth step equal to 1 inside and exactly 0 at the last node.

    Cosine ramp over ``width`` (default 10% of r_max) ending at the last node.
    """
    width = 0.1 * grid.r_max if width is None else width
    r = grid.r
    r_b = r[-1]
    r_a = r_b - width
    x = np.clip((r - r_a) / width, 0.0, 1.0)
    s = 0.5 * (1.0 + np.cos(np.pi * x))
    s[-1] = 0.0
    return s


def pin_to_pi(grid: GridSpec, u: np.ndarray, width: float | None = None) -> np.ndarray:
    """Blend a degree-one profile so that the outermost node equals pi exactly."""
    out = np.pi + (u - np.pi) * outer_taper(grid, width)
    out[-1] = np.pi
    return out


def stereographic(grid: GridSpec, lam: float = 1.0, model=ModelKind.ADKINS_NAPPI,
                  pin: bool = True, t: float = 0.0) -> FieldState:
    """Degree-one profile 2 arctan(r / lam) at rest."""
    u = 2.0 * np.arctan(grid.r / lam)
    if pin:
        u = pin_to_pi(grid, u)
    return FieldState(t, u, np.zeros_like(u), grid, model)


def pulse_profile(r, amplitude=1.0, r0=4.0, width=1.0):
    """Odd, smooth shell A (r/r0) exp(-((r^2 - r0^2) / (2 r0 w))^2) peaked near r0."""
    r = np.asarray(r, dtype=float)
    s = (r * r - r0 * r0) / (2.0 * r0 * width)
    return amplitude * (r / r0) * np.exp(-s * s)


def pulse_profile_dr(r, amplitude=1.0, r0=4.0, width=1.0):
    r = np.asarray(r, dtype=float)
    s = (r * r - r0 * r0) / (2.0 * r0 * width)
    ds = r / (r0 * width)
    return amplitude * np.exp(-s * s) * (1.0 / r0 - (r / r0) * 2.0 * s * ds)


def pulse(grid: GridSpec, amplitude=1.0, r0=4.0, width=1.0, model=ModelKind.ADKINS_NAPPI,
          outgoing: bool = False, t: float = 0.0) -> FieldState:
    """Degree-zero shell with u(infinity) = 0.

    At rest by default.  ``outgoing`` sets v = -(u_r + u/r), the purely
    outgoing velocity of the linearised problem (r u is then a function of
    r - t).
    """
    r = grid.r
    u = pulse_profile(r, amplitude, r0, width)
    if outgoing:
        v = -(pulse_profile_dr(r, amplitude, r0, width) + u / r)
    else:
        v = np.zeros_like(u)
    return FieldState(t, u, v, grid, model)


def soliton_data(grid: GridSpec, profile=None, pin: bool = True, t: float = 0.0, **find_kw) -> FieldState:
    """Static Adkins-Nappi soliton sampled on ``grid``."""
    from .soliton import find_soliton

    if profile is None:
        profile = find_soliton(r_max=grid.r_max, dr=grid.dr, **find_kw)
    if profile.r.size != grid.n_cells or not np.allclose(profile.r, grid.r):
        raise ValueError("soliton profile was computed on a different grid")
    u = profile.u.copy()
    if pin:
        u = pin_to_pi(grid, u)
    return FieldState(t, u, np.zeros_like(u), grid, ModelKind.ADKINS_NAPPI)


def soliton_perturbed(grid: GridSpec, amplitude=0.2, r0=4.0, width=1.0, profile=None,
                      pin: bool = True, t: float = 0.0, **find_kw) -> FieldState:
    """Soliton plus a Gaussian bump A exp(-(r - r0)^2 / w^2).

    The bump is multiplied by the odd window r^3 / (r^3 + w^3) and by the
    outer taper, so u(0) = 0 and the pinned outer value are kept.
    """
    base = soliton_data(grid, profile=profile, pin=pin, t=t, **find_kw)
    r = grid.r
    bump = amplitude * np.exp(-((r - r0) / width) ** 2)
    bump *= r**3 / (r**3 + width**3)
    bump *= outer_taper(grid)
    base.u = base.u + bump
    return base


def from_family(name: str, grid: GridSpec, model: ModelKind, **params) -> FieldState:
    """Build initial data by family name (the names accepted by the CLI)."""
    name = name.strip().lower()
    if name == "stereographic":
        return stereographic(grid, params.get("lam", 1.0), model)
    if name == "pulse":
        return pulse(grid, params.get("amplitude", 1.0), params.get("r0", 4.0),
                     params.get("width", 1.0), model, params.get("outgoing", False))
    if name == "zero":
        z = np.zeros(grid.n_cells)
        return FieldState(0.0, z, z.copy(), grid, model)
    if model is not ModelKind.ADKINS_NAPPI and name in ("soliton", "soliton-perturbed"):
        raise ValueError("soliton data exist only for the adkins-nappi model")
    if name == "soliton":
        return soliton_data(grid)
    if name == "soliton-perturbed":
        return soliton_perturbed(grid, params.get("amplitude", 0.2), params.get("r0", 4.0),
                                 params.get("width", 1.0))
    if name == "shatah":
        from .exact import shatah_state
        return shatah_state(params.get("tau", 1.0), grid)
    raise ValueError(f"unknown data family {name!r}")


def stereographic_scale_of_slope(slope: float) -> float:
    """Scale lam of 2 arctan(r/lam) with the given central slope 2/lam."""
    return 2.0 / slope if slope > 0 else math.inf
