"""
Pointwise physics of the equivariant Adkins-Nappi / wave-map equation

    u_tt - u_rr - (2/r) u_r + N(u, r) = 0,
    N(u, r) = sin(2u)/r^2 + (u - sin u cos u)(1 - cos 2u)/r^4.

The wave-map model drops the 1/r^4 term.  All functions broadcast over
numpy arrays.  Throughout, 1 - cos 2u is evaluated as 2 sin^2 u and
u - sin u cos u goes through :func:`u_minus_sincos`, which switches to its
Taylor series for small arguments.

Multiplier identities use the cone time tau (see :mod:`skwave.grid`);
``u_t`` arguments in this module are derivatives with respect to tau.  The
wave operator is taken with the sign  box f = f_tt - f_rr - (2/r) f_r, so
that solutions satisfy box u = -N(u, r).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

SERIES_CUTOFF = 0.5
# u - sin u cos u = u^3 * sum_k c_k u^(2k-2),  c_k = (-1)^(k+1) 4^k / (2k+1)!
_SERIES = tuple((-1) ** (k + 1) * 4.0**k / math.factorial(2 * k + 1) for k in range(1, 9))


class ModelKind(enum.Enum):
    WAVE_MAP = "wavemap"
    ADKINS_NAPPI = "adkins-nappi"
    # N == 0; only used to validate the linear part of the evolver
    LINEAR = "linear"

    @classmethod
    def parse(cls, name: str) -> "ModelKind":
        key = name.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown model {name!r}")


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0.0)):
        raise ValueError("radius must be strictly positive")
    return r


def _series(u2):
    acc = 0.0
    for c in reversed(_SERIES):
        acc = acc * u2 + c
    return acc


def u_minus_sincos(u):
    """u - sin(u) cos(u), accurate to ~1e-15 relative for every u.

    Below SERIES_CUTOFF the Taylor series through u^17 replaces the direct
    form, which loses ~eps/u^2 to cancellation.
    """
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    series = a**3 * _series(a * a)
    direct = a - 0.5 * np.sin(2.0 * a)
    # evaluated on |u| so the result is exactly odd
    out = np.copysign(np.where(a < SERIES_CUTOFF, series, direct), u)
    return out if out.ndim else float(out)


def u_minus_sincos_scalar(u: float) -> float:
    """Scalar version of :func:`u_minus_sincos` without numpy overhead."""
    a = abs(u)
    out = a**3 * _series(a * a) if a < SERIES_CUTOFF else a - 0.5 * math.sin(2.0 * a)
    return math.copysign(out, u)


def _sin2(u):
    s = np.sin(u)
    return s * s


def nonlinearity(model: ModelKind, u, r):
    r = _check_r(r)
    u = np.asarray(u, dtype=float)
    if model is ModelKind.LINEAR:
        return np.zeros(np.broadcast(u, r).shape)
    out = np.sin(2.0 * u) / (r * r)
    if model is ModelKind.ADKINS_NAPPI:
        out = out + u_minus_sincos(u) * 2.0 * _sin2(u) / r**4
    return out


def potential(model: ModelKind, u, r):
    """sin^2 u / r^2 + (u - sin u cos u)^2 / (2 r^4) (quartic part model-dependent)."""
    r = _check_r(r)
    u = np.asarray(u, dtype=float)
    if model is ModelKind.LINEAR:
        return np.zeros(np.broadcast(u, r).shape)
    out = _sin2(u) / (r * r)
    if model is ModelKind.ADKINS_NAPPI:
        q = u_minus_sincos(u)
        out = out + q * q / (2.0 * r**4)
    return out


def potential_parts(model: ModelKind, u, r):
    """The two potential terms separately: (sin^2 u / r^2, (u - sin u cos u)^2 / r^4)."""
    r = _check_r(r)
    u = np.asarray(u, dtype=float)
    shape = np.broadcast(u, r).shape
    if model is ModelKind.LINEAR:
        return np.zeros(shape), np.zeros(shape)
    sin_part = _sin2(u) / (r * r)
    if model is ModelKind.ADKINS_NAPPI:
        q = u_minus_sincos(u)
        return sin_part, q * q / r**4
    return sin_part, np.zeros(shape)


def energy_density(model: ModelKind, u, u_t, u_r, r):
    u_t = np.asarray(u_t, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    return 0.5 * (u_t * u_t + u_r * u_r) + potential(model, u, r)


def flux_density(u_plus, u, r, model: ModelKind):
    """Energy flux density through an incoming null cone, 1/2 u_+^2 + potential."""
    u_plus = np.asarray(u_plus, dtype=float)
    return 0.5 * u_plus * u_plus + potential(model, u, r)


def positivity_term(u):
    """u (u - sin u cos u)(1 - cos 2u); nonnegative for every real u."""
    u = np.asarray(u, dtype=float)
    out = u * u_minus_sincos(u) * 2.0 * _sin2(u)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# multipliers a u_t + b u_r + c u
# ---------------------------------------------------------------------------

class Coefficients(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_t: np.ndarray
    a_r: np.ndarray
    b_t: np.ndarray
    b_r: np.ndarray
    c_t: np.ndarray
    c_r: np.ndarray
    c_tt: np.ndarray
    c_rr: np.ndarray


@dataclass(frozen=True)
class MultiplierTriple:
    """Coefficient functions (a, b, c) of (tau, r) with closed-form partials.

    ``tau_singular`` marks triples whose coefficients blow up at tau = 0.
    """

    name: str
    coefficients: Callable[[np.ndarray, np.ndarray], Coefficients]
    tau_singular: bool = False

    def __call__(self, tau, r) -> Coefficients:
        tau = np.asarray(tau, dtype=float)
        r = _check_r(r)
        if self.tau_singular and np.any(~(tau > 0.0)):
            raise ValueError(f"{self.name} multiplier needs tau > 0")
        return self.coefficients(tau, r)

    def box_c(self, tau, r):
        """-c_tt + c_rr + (2/r) c_r, the d'Alembertian for signature (-, +, +, +)."""
        k = self(tau, r)
        r = np.asarray(r, dtype=float)
        return -k.c_tt + k.c_rr + 2.0 * k.c_r / r


def _z(tau, r):
    return np.zeros(np.broadcast(tau, r).shape)


def _energy(tau, r):
    z = _z(tau, r)
    return Coefficients(z + 1.0, z, z, z, z, z, z, z, z, z, z)


def _scaling(tau, r):
    z = _z(tau, r)
    return Coefficients(
        a=z + 1.0, b=r / tau + z, c=1.0 / tau + z,
        a_t=z, a_r=z,
        b_t=-r / tau**2 + z, b_r=1.0 / tau + z,
        c_t=-1.0 / tau**2 + z, c_r=z,
        c_tt=2.0 / tau**3 + z, c_rr=z,
    )


def _null(weight):
    def coefficients(tau, r):
        z = _z(tau, r)
        return Coefficients(
            a=z + 1.0, b=z + weight, c=weight / r + z,
            a_t=z, a_r=z, b_t=z, b_r=z,
            c_t=z, c_r=-weight / r**2 + z,
            c_tt=z, c_rr=2.0 * weight / r**3 + z,
        )
    return coefficients


ENERGY = MultiplierTriple("energy", _energy)
SCALING = MultiplierTriple("scaling", _scaling, tau_singular=True)
NULL_FULL = MultiplierTriple("null-full", _null(1.0))
NULL_HALF = MultiplierTriple("null-half", _null(0.5))

PRESETS = {m.name: m for m in (ENERGY, SCALING, NULL_FULL, NULL_HALF)}


def multiplier_bulk_I(m: MultiplierTriple, model: ModelKind, tau, r, u, u_t, u_r):
    """Bulk term I of the multiplier identity, evaluated on solutions.

    box = -d_t^2 + Laplacian.  On solutions box u = N(u, r), so the
    -c u box(u) term becomes -c u N(u, r).
    """
    k = m(tau, r)
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    u_t = np.asarray(u_t, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    sin_part, quart_part = potential_parts(model, u, r)
    box_c = -k.c_tt + k.c_rr + 2.0 * k.c_r / r
    out = (
        (0.5 * k.a_t - 0.5 * k.b_r - k.b / r + k.c) * u_t * u_t
        + (k.b_t - k.a_r) * u_t * u_r
        + (0.5 * (k.a_t - k.b_r) + k.b / r - k.c) * u_r * u_r
        + (k.a_t + k.b_r) * sin_part
        + (k.a_t + k.b_r - 2.0 * k.b / r) * 0.5 * quart_part
        + 0.5 * box_c * u * u
        - k.c * u * nonlinearity(model, u, r)
    )
    return out


def boundary_G(m: MultiplierTriple, u_plus, u, r, model: ModelKind, tau=None):
    """Density on the incoming cone C: (a+b)/2 u_+^2 + (a-b) * potential.

    ``tau`` defaults to r, i.e. a point on C itself.
    """
    tau = r if tau is None else tau
    k = m(tau, r)
    u_plus = np.asarray(u_plus, dtype=float)
    return 0.5 * (k.a + k.b) * u_plus * u_plus + (k.a - k.b) * potential(model, u, r)


def boundary_H(m: MultiplierTriple, u_minus, u, r, model: ModelKind, tau):
    """Density on an outgoing cone K: (a-b)/2 u_-^2 + (a+b) * potential."""
    k = m(tau, r)
    u_minus = np.asarray(u_minus, dtype=float)
    return 0.5 * (k.a - k.b) * u_minus * u_minus + (k.a + k.b) * potential(model, u, r)


def c_boundary_weights(m: MultiplierTriple, tau, r):
    """(c_r + c_t + c/r, c_r - c_t + c/r): the u^2 weights on C and on K."""
    k = m(tau, r)
    r = np.asarray(r, dtype=float)
    return k.c_r + k.c_t + k.c / r, k.c_r - k.c_t + k.c / r
