"""
Radial grid and light-cone region geometry.

The grid is cell-centred: node j sits at r_j = (j + 1/2) dr, so no node is
ever placed on the coordinate singularity r = 0.

Cone regions are written in "cone time" tau, measured backwards from a
vertex: tau = vertex_time - t for a simulation time t.  The vertex itself is
tau = 0 and regions with larger tau lie further in the simulation past.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: tolerance used when testing membership of the null / slice sets
LINE_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    r_max: float
    n_cells: int

    @property
    def dr(self) -> float:
        return self.r_max / self.n_cells

    @cached_property
    def r(self) -> np.ndarray:
        """Node radii (j + 1/2) dr."""
        return (np.arange(self.n_cells) + 0.5) * self.dr

    @cached_property
    def faces(self) -> np.ndarray:
        """Cell faces j dr, j = 0..n_cells (n_cells + 1 values)."""
        return np.arange(self.n_cells + 1) * self.dr


def make_grid(r_max: float, n_cells: int) -> GridSpec:
    if not np.isfinite(r_max) or r_max <= 0.0:
        raise ValueError(f"r_max must be positive and finite, got {r_max!r}")
    if int(n_cells) != n_cells or n_cells < 8:
        raise ValueError(f"n_cells must be an integer >= 8, got {n_cells!r}")
    return GridSpec(float(r_max), int(n_cells))


class RegionKind(enum.Enum):
    BALL_SLICE = "ball_slice"          # D_{t0}
    BACKWARD_CONE = "backward_cone"    # K_{t0}
    FORWARD_CONE = "forward_cone"      # C(t0, t1)
    SHIFTED_CONE = "shifted_cone"      # C~(t0, t1)
    TRAPEZOID = "trapezoid"            # D(t0, t1)
    DOMAIN = "domain"                  # D(T_bar), t0 plays the role of T_bar


_TWO_PARAM = {RegionKind.FORWARD_CONE, RegionKind.SHIFTED_CONE, RegionKind.TRAPEZOID}


@dataclass(frozen=True)
class ConeRegion:
    """One of the spacetime sets used by the local energy identities.

    ``t0``/``t1`` are cone times; ``vertex_time`` is the simulation time of
    the vertex.  One-parameter kinds ignore ``t1``.
    """

    kind: RegionKind
    t0: float
    t1: float | None = None
    vertex_time: float = 0.0

    def __post_init__(self):
        if self.t0 <= 0.0:
            raise ValueError("t0 must be positive")
        if self.kind in _TWO_PARAM:
            if self.t1 is None or not self.t0 < self.t1:
                raise ValueError(f"{self.kind.value} needs 0 < t0 < t1")

    def tau(self, t):
        """Cone time of simulation time ``t``."""
        return self.vertex_time - np.asarray(t, dtype=float)

    def sim_time(self, tau):
        return self.vertex_time - np.asarray(tau, dtype=float)

    def tau_range(self) -> tuple[float, float]:
        """Closed range of cone times over which the region has points."""
        t0, t1 = self.t0, self.t1
        k = self.kind
        if k is RegionKind.BALL_SLICE:
            return t0, t0
        if k is RegionKind.BACKWARD_CONE:
            return t0, 2 * t0
        if k is RegionKind.FORWARD_CONE:
            return t0, t1
        if k is RegionKind.SHIFTED_CONE:
            return 2 * t0, t0 + t1
        if k is RegionKind.TRAPEZOID:
            return t0, 2 * t1
        return 0.0, 2 * t0


def ball_slice(t0, vertex_time=0.0):
    return ConeRegion(RegionKind.BALL_SLICE, t0, None, vertex_time)


def backward_cone(t0, vertex_time=0.0):
    return ConeRegion(RegionKind.BACKWARD_CONE, t0, None, vertex_time)


def forward_cone(t0, t1, vertex_time=0.0):
    return ConeRegion(RegionKind.FORWARD_CONE, t0, t1, vertex_time)


def shifted_cone(t0, t1, vertex_time=0.0):
    return ConeRegion(RegionKind.SHIFTED_CONE, t0, t1, vertex_time)


def trapezoid(t0, t1, vertex_time=0.0):
    return ConeRegion(RegionKind.TRAPEZOID, t0, t1, vertex_time)


def domain(t_bar, vertex_time=0.0):
    return ConeRegion(RegionKind.DOMAIN, t_bar, None, vertex_time)


def _segment_tau(region: ConeRegion, tau: float):
    t0, t1 = region.t0, region.t1
    k = region.kind
    tol = LINE_TOL * max(1.0, abs(tau))
    if k is RegionKind.BALL_SLICE:
        return (0.0, t0) if abs(tau - t0) <= tol else None
    if k is RegionKind.BACKWARD_CONE:
        if t0 - tol <= tau <= 2 * t0 + tol:
            r = min(max(2 * t0 - tau, 0.0), t0)
            return r, r
        return None
    if k is RegionKind.FORWARD_CONE:
        if t0 - tol <= tau <= t1 + tol:
            return tau, tau
        return None
    if k is RegionKind.SHIFTED_CONE:
        r = tau - 2 * t0
        if -tol <= r <= t1 - t0 + tol:
            r = min(max(r, 0.0), t1 - t0)
            return r, r
        return None
    if k is RegionKind.TRAPEZOID:
        lo = max(2 * t0 - tau, 0.0)
        hi = min(2 * t1 - tau, tau)
        return (lo, max(lo, hi)) if lo <= hi + tol else None
    # DOMAIN
    if tau <= 0.0:
        return None
    hi = min(2 * t0 - tau, tau)
    return (0.0, max(hi, 0.0)) if hi >= -tol else None


def region_segment_at_time(region: ConeRegion, t: float):
    """Radial interval ``(lo, hi)`` of the region at simulation time ``t``.

    Returns None when the slice is empty.  Null sets give ``lo == hi``.
    """
    return _segment_tau(region, float(region.tau(t)))


def region_contains(region: ConeRegion, t, r) -> bool:
    if r < 0:
        raise ValueError("r must be nonnegative")
    seg = region_segment_at_time(region, t)
    if seg is None:
        return False
    tol = LINE_TOL * max(1.0, abs(r))
    return seg[0] - tol <= r <= seg[1] + tol
