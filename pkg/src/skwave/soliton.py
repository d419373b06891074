"""
Static Adkins-Nappi soliton by shooting on the central slope.

The static equation  u'' + (2/r) u' = N(u, r)  has a regular branch
u = a r + b r^3 + O(r^5) at the centre.  Inserting the series gives the
indicial equation alpha^2 + alpha - 2 = 0 (regular root alpha = 1) and

    b = (2/15) a^3 (a^2 - 1)

for the Adkins-Nappi nonlinearity (b = -(2/15) a^3 for the wave map).
Integration starts at r = 10 dr from this two-term series.

Near u = pi the linearisation w = pi - u obeys w'' + 2w'/r - 2w/r^2 = 0,
so w ~ C/r^2 (decaying) + delta r (growing).  A shot that ends without
crossing pi or turning back is assigned to a side by the sign of the
growing-mode coefficient delta = (u' - 2(pi - u)/r) / 3.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .grid import make_grid
from .model import ModelKind, energy_density, nonlinearity, u_minus_sincos_scalar

OVERSHOOT_SLACK = 1e-9
UNDERSHOOT_MARGIN = 1e-3
DEFAULT_TOL = 1e-2 * math.pi


class Shot(enum.Enum):
    OVERSHOOT = "overshoot"
    UNDERSHOOT = "undershoot"
    CONVERGED = "converged"


class InvalidBracket(ValueError):
    pass


@dataclass
class ShotResult:
    slope: float
    classification: Shot
    side: Shot           # OVERSHOOT or UNDERSHOOT, used by bisection
    r: np.ndarray        # node radii reached (NaN-free prefix)
    u: np.ndarray
    du: np.ndarray
    gap: float           # |u(r_last) - pi|
    blew_up: bool = False


@dataclass
class SolitonProfile:
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    slope: float
    r_max: float
    dr: float
    gap: float
    iterations: int = 0
    model: ModelKind = ModelKind.ADKINS_NAPPI


def series_cubic(a: float, model: ModelKind = ModelKind.ADKINS_NAPPI) -> float:
    if model is ModelKind.ADKINS_NAPPI:
        return 2.0 / 15.0 * a**3 * (a * a - 1.0)
    if model is ModelKind.WAVE_MAP:
        return -2.0 / 15.0 * a**3
    return 0.0


def _accel(r, u, p, quartic):
    s = math.sin(u)
    out = -2.0 * p / r + math.sin(2.0 * u) / (r * r)
    if quartic:
        out += u_minus_sincos_scalar(u) * 2.0 * s * s / r**4
    return out


def shoot(a: float, r_max: float, dr: float, model: ModelKind = ModelKind.ADKINS_NAPPI,
          tol: float = DEFAULT_TOL) -> ShotResult:
    """Integrate the static equation outward from the centre with slope ``a``.

    Values are produced on the staggered nodes (j + 1/2) dr; RK4 runs with
    step dr/2 so that every node is hit.  Nodes inside the start radius
    10 dr come from the series.
    """
    if a < 0 or r_max <= 0 or dr <= 0:
        raise ValueError("need a >= 0, r_max > 0, dr > 0")
    n = int(round(r_max / dr))
    grid = make_grid(r_max, n)
    nodes = grid.r
    b = series_cubic(a, model)
    quartic = model is ModelKind.ADKINS_NAPPI

    r_s = 10.0 * dr
    n_series = int(np.searchsorted(nodes, r_s))
    u_out = np.full(n, np.nan)
    p_out = np.full(n, np.nan)
    rr = nodes[:n_series]
    u_out[:n_series] = a * rr + b * rr**3
    p_out[:n_series] = a + 3 * b * rr**2

    h = 0.5 * dr
    r = r_s
    u = a * r + b * r**3
    p = a + 3 * b * r * r
    pi = math.pi
    over = under = blew = False
    j = n_series
    n_half = 2 * (n - n_series) - 1  # half steps from r_s to the last node
    for k in range(1, n_half + 1):
        k1u, k1p = p, _accel(r, u, p, quartic)
        rh = r + 0.5 * h
        k2u, k2p = p + 0.5 * h * k1p, _accel(rh, u + 0.5 * h * k1u, p + 0.5 * h * k1p, quartic)
        k3u, k3p = p + 0.5 * h * k2p, _accel(rh, u + 0.5 * h * k2u, p + 0.5 * h * k2p, quartic)
        k4u, k4p = p + h * k3p, _accel(r + h, u + h * k3u, p + h * k3p, quartic)
        u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        r = r_s + k * h
        if not (math.isfinite(u) and math.isfinite(p)):
            over = blew = True
            break
        if k % 2 == 1:
            u_out[j] = u
            p_out[j] = p
            j += 1
        if u > pi + OVERSHOOT_SLACK:
            over = True
            break
        if p < 0 and u < pi - UNDERSHOOT_MARGIN:
            under = True
            break

    done = np.isfinite(u_out)
    if n_series and u_out[0] > pi + OVERSHOOT_SLACK:
        over = True
    last = int(np.nonzero(done)[0][-1]) if done.any() else 0
    u_last = u_out[last] if done.any() else 0.0
    gap = abs(u_last - pi)

    if over:
        cls = side = Shot.OVERSHOOT
    elif under:
        cls = side = Shot.UNDERSHOOT
    else:
        r_l, p_l = nodes[last], p_out[last]
        delta = (p_l - 2.0 * (pi - u_last) / r_l) / 3.0
        side = Shot.OVERSHOOT if delta > 0 else Shot.UNDERSHOOT
        cls = Shot.CONVERGED if gap < tol else side
    if a == 0.0:
        cls = side = Shot.UNDERSHOOT
    return ShotResult(a, cls, side, nodes[done], u_out[done], p_out[done], gap, blew)


def find_soliton(a_lo: float = 0.5, a_hi: float = 4.0, r_max: float = 50.0, dr: float = 50.0 / 4096,
                 tol_a: float = 1e-12, model: ModelKind = ModelKind.ADKINS_NAPPI,
                 tol: float = DEFAULT_TOL) -> SolitonProfile:
    """Bisect the central slope between an undershoot and an overshoot."""
    if shoot(a_lo, r_max, dr, model, tol).side is not Shot.UNDERSHOOT:
        raise InvalidBracket(f"a_lo={a_lo} does not undershoot")
    if shoot(a_hi, r_max, dr, model, tol).side is not Shot.OVERSHOOT:
        raise InvalidBracket(f"a_hi={a_hi} does not overshoot")
    lo, hi = float(a_lo), float(a_hi)
    iterations = 0
    while hi - lo >= tol_a:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if shoot(mid, r_max, dr, model, tol).side is Shot.OVERSHOOT:
            hi = mid
        else:
            lo = mid
        iterations += 1
    a = 0.5 * (lo + hi)
    res = shoot(a, r_max, dr, model, tol)
    return SolitonProfile(res.r, res.u, res.du, a, r_max, dr, res.gap, iterations, model)


def bisection_iterations(a_lo: float, a_hi: float, tol_a: float) -> int:
    return max(0, math.ceil(math.log2((a_hi - a_lo) / tol_a)))


def soliton_energy(p: SolitonProfile, rule: str = "midpoint") -> float:
    """Static energy of a profile; ``rule`` is "midpoint" or "simpson"."""
    if p.u.size == 0:
        return 0.0
    e = energy_density(p.model, p.u, 0.0, p.du, p.r) * p.r**2
    if rule == "midpoint":
        return float(np.sum(e) * p.dr)
    if rule == "simpson":
        # e r^2 vanishes at r = 0; the outer half cell uses a linear end piece
        r = np.concatenate([[0.0], p.r])
        f = np.concatenate([[0.0], e])
        tail = 0.5 * p.dr * (1.5 * e[-1] - 0.5 * e[-2])
        return float(simpson(f, x=r) + tail)
    raise ValueError(f"unknown rule {rule!r}")


def ode_residual(p: SolitonProfile, r_min: float = 1.0) -> float:
    """max |u'' + (2/r) u' - N(u, r)| by 3-point differences, over r_min <= r < r_last.

    Three-point stencils on the radial operator carry an O(dr^2 / r) error,
    so the residual is measured away from the centre.
    """
    if p.u.size < 3:
        return 0.0
    u, r, h = p.u, p.r, p.dr
    upp = (u[2:] - 2 * u[1:-1] + u[:-2]) / (h * h)
    up = (u[2:] - u[:-2]) / (2 * h)
    rc = r[1:-1]
    res = upp + 2.0 * up / rc - nonlinearity(p.model, u[1:-1], rc)
    mask = rc >= r_min
    return float(np.max(np.abs(res[mask]))) if mask.any() else 0.0
