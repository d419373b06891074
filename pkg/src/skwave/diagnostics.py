"""
Quadrature of energy-type functionals over time slices and light-cone
regions of a :class:`~skwave.evolve.SpacetimeRecord`.

Conventions
-----------
``vertex`` is the simulation time of the cone vertex at r = 0.  A cone time
tau > 0 corresponds to simulation time ``vertex - tau``.  In cone time the
derivative u_tau equals -v, so the null derivatives along the cone lines are

    u_minus = u_tau - u_r = -(v + u_r)      (outgoing lines  tau = 2T - r)
    u_plus  = u_tau + u_r = -v + u_r        (incoming line   tau = r)

Line integrals along null lines are parameterised by r with weight r^2 dr,
which equals (1/sqrt 2) times the arc-length measure.  With these choices
local energies satisfy  E(t1) - E(t0) = F(t0, t1) >= 0  for 0 < t0 < t1,
where E(T) is the energy of the ball of radius T at cone time T.

Fields between grid points are bilinear interpolants in (t, r); across
r = 0 the odd parity of u and v (even parity of u_r) supplies a ghost node.
Slice integrals use the midpoint rule on full cells and an interpolated
midpoint on partial cells; null lines use a composite midpoint rule with
step at most dr/8.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .evolve import FieldState, SpacetimeRecord, spatial_gradient
from .model import (
    ENERGY, ModelKind, MultiplierTriple, boundary_G, boundary_H, c_boundary_weights,
    energy_density, flux_density, multiplier_bulk_I, potential, potential_parts,
)

TIME_TOL = 1e-9
LINE_STEP = 0.125   # null-line quadrature step in units of dr


@dataclass
class DiagnosticSeries:
    label: str
    params: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.params.shape != self.values.shape:
            raise ValueError("params and values differ in length")
        d = np.diff(self.params)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("series parameters must be strictly monotone")

    def __len__(self):
        return self.params.size

    def write_csv(self, path) -> None:
        write_series_csv(self, path)


def write_series_csv(series: DiagnosticSeries, path) -> None:
    """Two columns with header ``param,value``; '#' lines before it carry the label and metadata."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# {series.label}\n")
        for k, v in series.meta.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param", "value"])
        for p, v in zip(series.params, series.values):
            w.writerow([f"{p:.17g}", f"{v:.17g}"])


def read_series_csv(path) -> DiagnosticSeries:
    label, meta, rows = "", {}, []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            text = line[1:].strip()
            if not label:
                label = text
            elif ": " in text:
                k, v = text.split(": ", 1)
                meta[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header != ["param", "value"]:
        raise ValueError(f"{path}: missing 'param,value' header")
    for row in reader:
        if row:
            rows.append((float(row[0]), float(row[1])))
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return DiagnosticSeries(label, arr[:, 0], arr[:, 1], meta)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

class _Sampler:
    """Bilinear (t, r) interpolation of u, v and u_r from a record."""

    def __init__(self, rec: SpacetimeRecord):
        self.rec = rec
        self.grid = rec.grid
        g = rec.grid
        # padded arrays: column 0 is the ghost node at r = -dr/2
        self.U = np.concatenate([-rec.u[:, :1], rec.u], axis=1)
        self.V = np.concatenate([-rec.v[:, :1], rec.v], axis=1)
        self.UR = np.concatenate([rec.u_r[:, :1], rec.u_r], axis=1)
        self.r_hi = g.r[-1]
        t = rec.times
        self.t_lo, self.t_hi = t[0], t[-1]
        self.tol = TIME_TOL * max(1.0, abs(t[-1]))

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_lo - self.tol) or np.any(t > self.t_hi + self.tol):
            raise ValueError("region exits the recorded time range")

    def _time_index(self, t):
        times = self.rec.times
        t = np.clip(np.asarray(t, dtype=float), self.t_lo, self.t_hi)
        if times.size == 1:
            z = np.zeros(t.shape, dtype=int)
            return z, z, np.zeros(t.shape)
        k = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
        w = (t - times[k]) / (times[k + 1] - times[k])
        return k, np.minimum(k + 1, times.size - 1), w

    def at(self, t, r):
        """u, v, u_r at simulation times ``t`` and radii ``r`` (broadcast)."""
        t, r = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(r, dtype=float))
        self.check_time(t)
        if np.any(r < 0) or np.any(r > self.r_hi + 1e-12):
            raise ValueError("region exits the grid")
        h = self.grid.dr
        n = self.grid.n_cells
        s = r / h + 0.5
        i = np.clip(np.floor(s).astype(int), 0, n - 1)
        wr = s - i
        k0, k1, wt = self._time_index(t)
        out = []
        for A in (self.U, self.V, self.UR):
            a0 = (1 - wr) * A[k0, i] + wr * A[k0, i + 1]
            a1 = (1 - wr) * A[k1, i] + wr * A[k1, i + 1]
            out.append((1 - wt) * a0 + wt * a1)
        return tuple(out)

    def slice_nodes(self, t):
        """u, v, u_r at every node for each time in ``t`` (rows)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        self.check_time(t)
        k0, k1, wt = self._time_index(t)
        wt = wt[:, None]
        rec = self.rec
        out = []
        for A in (rec.u, rec.v, rec.u_r):
            out.append((1 - wt) * A[k0] + wt * A[k1])
        return tuple(out)


def _slice_weights(grid, lo, hi) -> np.ndarray:
    """Quadrature weights W (rows x n_cells) with  int_lo^hi f dr ~ W @ f(nodes).

    Full cells get the midpoint weight dr; a partial cell [a, b] gets
    (b - a) at the linear interpolant of f at (a + b)/2.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    h, n = grid.dr, grid.n_cells
    f = grid.faces
    a = np.maximum(lo[:, None], f[None, :-1])
    b = np.minimum(hi[:, None], f[None, 1:])
    length = np.clip(b - a, 0.0, None)
    rows, cols = np.nonzero(length > 0)
    L = length[rows, cols]
    mid = 0.5 * (a[rows, cols] + b[rows, cols])
    s = mid / h - 0.5
    i = np.clip(np.floor(s).astype(int), 0, n - 2)
    w = s - i
    W = np.zeros((lo.size, n))
    np.add.at(W, (rows, i), L * (1 - w))
    np.add.at(W, (rows, i + 1), L * w)
    return W


def slice_integral(grid, values, lo, hi):
    """Integral over [lo, hi] of a node function (one row per interval)."""
    W = _slice_weights(grid, lo, hi)
    vals = np.atleast_2d(values)
    return np.sum(W * vals, axis=1)


def _line_nodes(r_a: float, r_b: float, h: float):
    """Composite midpoint nodes on [r_a, r_b] with step <= h/8.

    The interpolant is only piecewise smooth along a null line; a step well
    below the cell size keeps the quadrature error from depending on how
    the line meets the grid.
    """
    if r_b <= r_a:
        return np.zeros(0), 0.0
    m = max(1, math.ceil((r_b - r_a) / (LINE_STEP * h) - 1e-9))
    d = (r_b - r_a) / m
    return r_a + (np.arange(m) + 0.5) * d, d


def _check_radius(rec, radius):
    if radius > rec.grid.r[-1] + 1e-12:
        raise ValueError("region exits the grid")


# ---------------------------------------------------------------------------
# energies on slices and cones
# ---------------------------------------------------------------------------

def ball_energy(rec: SpacetimeRecord, t: float, R: float | None = None) -> float:
    """Energy of the ball r <= R at simulation time t (R defaults to the whole grid)."""
    g = rec.grid
    R = g.r_max if R is None else R
    if not R > 0:
        raise ValueError("radius must be positive")
    if R > g.r_max * (1 + 1e-12):
        raise ValueError("radius exceeds r_max")
    sm = _Sampler(rec)
    u, v, ur = (x[0] for x in sm.slice_nodes([t]))
    e = energy_density(rec.model, u, v, ur, g.r) * g.r**2
    return float(slice_integral(g, e, 0.0, min(R, g.r_max))[0])


def total_energy(state: FieldState) -> float:
    """Midpoint-rule energy of a single state over the whole grid."""
    g = state.grid
    ur = spatial_gradient(state.u, g)
    return float(np.sum(energy_density(state.model, state.u, state.v, ur, g.r) * g.r**2) * g.dr)


def discrete_energy(state: FieldState) -> float:
    """Energy functional that the semi-discrete scheme conserves exactly.

    Interior nodes carry r_j^2 dr (v^2/2 + P); each interior face carries
    r_f^2 (du)^2 / (2 dr).  The Dirichlet node is excluded.
    """
    g = state.grid
    r, u, v = g.r[:-1], state.u, state.v[:-1]
    pot = potential(state.model, u[:-1], r)
    f = g.faces[1:-1]
    du = np.diff(u)
    return float(np.sum(r * r * (0.5 * v * v + pot)) * g.dr + np.sum(f * f * du * du) / (2 * g.dr))


def local_energy(rec: SpacetimeRecord, vertex: float, T: float) -> float:
    """Energy of the ball of radius T at cone time T."""
    return ball_energy(rec, vertex - T, T)


def cone_energy(rec: SpacetimeRecord, vertex: float, T: float) -> float:
    """Energy through the outgoing cone K_T (tau = 2T - r, 0 <= r <= T)."""
    if not T > 0:
        raise ValueError("T must be positive")
    _check_radius(rec, T)
    sm = _Sampler(rec)
    r, d = _line_nodes(0.0, T, rec.grid.dr)
    u, v, ur = sm.at(vertex - (2 * T - r), r)
    um = -(v + ur)
    return float(np.sum(flux_density(um, u, r, rec.model) * r * r) * d)


def flux(rec: SpacetimeRecord, vertex: float, t0: float, t1: float) -> float:
    """Energy crossing the incoming cone r = tau between cone times t0 < t1."""
    if not 0 < t0 < t1:
        raise ValueError("need 0 < t0 < t1")
    _check_radius(rec, t1)
    sm = _Sampler(rec)
    r, d = _line_nodes(t0, t1, rec.grid.dr)
    u, v, ur = sm.at(vertex - r, r)
    up = -v + ur
    return float(np.sum(flux_density(up, u, r, rec.model) * r * r) * d)


def flux_identity_residual(rec: SpacetimeRecord, vertex: float, t0: float, t1: float,
                           form: str = "ball") -> float:
    """|E(t1) - E(t0) - F(t0, t1)|.

    ``form="ball"`` takes E from balls of radius T at cone time T;
    ``form="cone"`` takes it from the outgoing cones K_T, which bound the
    trapezoid D(t0, t1) together with the incoming cone.
    """
    if form == "ball":
        e1, e0 = local_energy(rec, vertex, t1), local_energy(rec, vertex, t0)
    elif form == "cone":
        e1, e0 = cone_energy(rec, vertex, t1), cone_energy(rec, vertex, t0)
    else:
        raise ValueError(f"unknown form {form!r}")
    return abs(e1 - e0 - flux(rec, vertex, t0, t1))


def equiv_residual(rec: SpacetimeRecord, vertex: float, T: float) -> float:
    """|cone_energy(T) - ball energy of radius T at cone time T|."""
    return abs(cone_energy(rec, vertex, T) - local_energy(rec, vertex, T))


def weighted_local_energy(rec: SpacetimeRecord, vertex: float, T: float) -> float:
    """int_0^T [(1 - r/T) u_-^2 + u_+^2 + sin^2 u / r^2 + Q^2 / r^4] r^2 dr at cone time T.

    u_+ and u_- here are v +- u_r in simulation time, the original time
    orientation of a solution that runs toward its vertex.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    g = rec.grid
    _check_radius(rec, T)
    sm = _Sampler(rec)
    u, v, ur = (x[0] for x in sm.slice_nodes([vertex - T]))
    um, up = v - ur, v + ur
    sp, qp = potential_parts(rec.model, u, g.r)
    dens = (1.0 - g.r / T) * um * um + up * up + sp + qp
    return float(slice_integral(g, dens * g.r**2, 0.0, T)[0])


def cone_weighted_energy(rec: SpacetimeRecord, vertex: float, T: float) -> float:
    """int over K_T of (1 - r/tau) u_-^2 + sin^2 u / r^2 + Q^2 / r^4 (weight r^2 dr)."""
    if not T > 0:
        raise ValueError("T must be positive")
    _check_radius(rec, T)
    sm = _Sampler(rec)
    r, d = _line_nodes(0.0, T, rec.grid.dr)
    tau = 2 * T - r
    u, v, ur = sm.at(vertex - tau, r)
    um = -(v + ur)
    sp, qp = potential_parts(rec.model, u, r)
    dens = (1.0 - r / tau) * um * um + sp + qp
    return float(np.sum(dens * r * r) * d)


# ---------------------------------------------------------------------------
# multiplier identity
# ---------------------------------------------------------------------------

def _check_trapezoid(rec, vertex, t0, t1, m):
    if not 0 < t0 < t1:
        raise ValueError("need 0 < t0 < t1")
    _check_radius(rec, t1)
    _Sampler(rec).check_time([vertex - 2 * t1, vertex - t0])


def bulk_I_integral(rec: SpacetimeRecord, vertex: float, t0: float, t1: float,
                    m: MultiplierTriple) -> float:
    """int over D(t0, t1) of I r^2 dr dtau.

    Slices at every recorded time inside the region plus the kink times
    t0, t1, 2 t0, 2 t1; trapezoid rule in tau.
    """
    _check_trapezoid(rec, vertex, t0, t1, m)
    g = rec.grid
    tau_snap = vertex - rec.times
    keep = (tau_snap > t0) & (tau_snap < 2 * t1)
    taus = np.concatenate([tau_snap[keep], [t0, t1, 2 * t0, 2 * t1]])
    taus = np.unique(taus[(taus >= t0) & (taus <= 2 * t1)])
    lo = np.maximum(2 * t0 - taus, 0.0)
    hi = np.minimum(2 * t1 - taus, taus)
    hi = np.maximum(lo, hi)
    sm = _Sampler(rec)
    u, v, ur = sm.slice_nodes(vertex - taus)
    r = g.r[None, :]
    I = multiplier_bulk_I(m, rec.model, taus[:, None], r, u, -v, ur)
    W = _slice_weights(g, lo, hi)
    rows = np.sum(W * (I * r * r), axis=1)
    return float(np.trapezoid(rows, taus)) if hasattr(np, "trapezoid") else float(np.trapz(rows, taus))


def _c_line(rec, vertex, t0, t1, m):
    sm = _Sampler(rec)
    r, d = _line_nodes(t0, t1, rec.grid.dr)
    u, v, ur = sm.at(vertex - r, r)
    up = -v + ur
    wC, _ = c_boundary_weights(m, r, r)
    dens = boundary_G(m, up, u, r, rec.model, tau=r) - wC * u * u
    return float(np.sum(dens * r * r) * d)


def _k_line(rec, vertex, T, m):
    sm = _Sampler(rec)
    r, d = _line_nodes(0.0, T, rec.grid.dr)
    tau = 2 * T - r
    u, v, ur = sm.at(vertex - tau, r)
    um = -(v + ur)
    _, wK = c_boundary_weights(m, tau, r)
    dens = boundary_H(m, um, u, r, rec.model, tau) + wK * u * u
    return float(np.sum(dens * r * r) * d)


def _corner(rec, vertex, T, m):
    u, _, _ = _Sampler(rec).at(vertex - T, T)
    c = m(T, T).c
    return float(T * T * c * u * u)


@dataclass(frozen=True)
class MultiplierTerms:
    bulk: float
    incoming: float
    outgoing_t0: float
    outgoing_t1: float
    corner_t0: float
    corner_t1: float

    @property
    def residual(self) -> float:
        lhs = self.bulk + self.incoming
        rhs = self.outgoing_t1 - self.outgoing_t0 - (self.corner_t1 - self.corner_t0)
        return abs(lhs - rhs)


def multiplier_identity_terms(rec: SpacetimeRecord, vertex: float, t0: float, t1: float,
                              m: MultiplierTriple) -> MultiplierTerms:
    """All pieces of the integrated multiplier identity on D(t0, t1).

        int_D I + int_C [G - w_C u^2] = K(t1) - K(t0) - [T^2 c u^2 at (T, T)]_{t0}^{t1}

    with K(T) = int_{K_T} [H + w_K u^2].  The corner terms come from
    integrating (c u^2)_r by parts along the null boundaries; they vanish
    when c = 0.
    """
    _check_trapezoid(rec, vertex, t0, t1, m)
    return MultiplierTerms(
        bulk=bulk_I_integral(rec, vertex, t0, t1, m),
        incoming=_c_line(rec, vertex, t0, t1, m),
        outgoing_t0=_k_line(rec, vertex, t0, m),
        outgoing_t1=_k_line(rec, vertex, t1, m),
        corner_t0=_corner(rec, vertex, t0, m),
        corner_t1=_corner(rec, vertex, t1, m),
    )


def multiplier_identity_residual(rec: SpacetimeRecord, vertex: float, t0: float, t1: float,
                                 m: MultiplierTriple = ENERGY) -> float:
    return multiplier_identity_terms(rec, vertex, t0, t1, m).residual


# ---------------------------------------------------------------------------
# series and reports
# ---------------------------------------------------------------------------

def topological_charge(state: FieldState) -> float:
    """(u - sin u cos u)/pi at the outermost node."""
    u = float(state.u[-1])
    return (u - math.sin(u) * math.cos(u)) / math.pi


def charge_series(rec: SpacetimeRecord) -> DiagnosticSeries:
    u = rec.u[:, -1]
    q = (u - np.sin(u) * np.cos(u)) / np.pi
    return DiagnosticSeries("topological charge vs t", rec.times, q)


def sup_norm_series(rec: SpacetimeRecord) -> DiagnosticSeries:
    return DiagnosticSeries("sup |u| vs t", rec.times, np.max(np.abs(rec.u), axis=1))


def energy_series(rec: SpacetimeRecord) -> DiagnosticSeries:
    g = rec.grid
    e = energy_density(rec.model, rec.u, rec.v, rec.u_r, g.r[None, :]) * g.r**2
    return DiagnosticSeries("total energy vs t", rec.times, np.sum(e, axis=1) * g.dr)


def _default_T_range(rec, vertex, T_max, T_min):
    g = rec.grid
    avail = vertex - rec.times[0]
    if T_max is None:
        T_max = min(avail, g.r[-1])
    if T_min is None:
        T_min = max(vertex - rec.times[-1], 4 * g.dr)
    if not 0 < T_min < T_max:
        raise ValueError("no room for a concentration series toward this vertex")
    return T_max, T_min


def concentration_series(rec: SpacetimeRecord, vertex: float, n_points: int = 12,
                         T_max: float | None = None, T_min: float | None = None,
                         normalized: bool = False) -> DiagnosticSeries:
    """T -> energy in the ball of radius T at cone time T, T geometric and decreasing.

    ``normalized`` divides each value by T (scale-invariant contrast).
    """
    T_max, T_min = _default_T_range(rec, vertex, T_max, T_min)
    Ts = np.geomspace(T_max, T_min, n_points)
    vals = np.array([local_energy(rec, vertex, T) for T in Ts])
    if normalized:
        vals = vals / Ts
    label = "local energy / T vs T" if normalized else "local energy vs T"
    return DiagnosticSeries(label, Ts, vals,
                            {"vertex": f"{vertex:.17g}", "orientation": "T is vertex_time - t"})


def cone_weighted_series(rec: SpacetimeRecord, vertex: float, n_points: int = 12,
                         T_max: float | None = None, T_min: float | None = None) -> DiagnosticSeries:
    T_max, T_min = _default_T_range(rec, vertex, T_max, T_min)
    T_max = min(T_max, 0.5 * (vertex - rec.times[0]))
    Ts = np.geomspace(T_max, T_min, n_points)
    vals = np.array([cone_weighted_energy(rec, vertex, T) for T in Ts])
    return DiagnosticSeries("cone weighted energy vs T", Ts, vals,
                            {"vertex": f"{vertex:.17g}", "orientation": "T is vertex_time - t"})


def bulk_series(rec: SpacetimeRecord, vertex: float, t1: float, m: MultiplierTriple,
                n_points: int = 6) -> DiagnosticSeries:
    """int_{D(t0, t1)} I for t0 = t1/2, t1/4, ..."""
    t0s = t1 / 2.0 ** np.arange(1, n_points + 1)
    vals = [bulk_I_integral(rec, vertex, t0, t1, m) for t0 in t0s]
    return DiagnosticSeries(f"bulk integral ({m.name}) vs t0", t0s, vals)


def gh_violations(m: MultiplierTriple, model: ModelKind, tau, r, u, u_t, u_r,
                  slack: float = 1e-12) -> np.ndarray:
    """Pointwise boundary inequalities inside r <= tau; returns a violation mask.

    With u_+- = u_t +- u_r and P the potential:
        0 <= G <= 2 (u_+^2 / 2 + P),   0 <= H <= 2 (u_-^2 / 2 + P),
        |w_C| <= 2 / r^2,   0 <= w_K <= 2 / r^2 .
    """
    up, um = u_t + u_r, u_t - u_r
    pot = potential(model, u, r)
    G = boundary_G(m, up, u, r, model, tau=tau)
    H = boundary_H(m, um, u, r, model, tau)
    wC, wK = c_boundary_weights(m, tau, r)
    fp = 0.5 * up * up + pot
    fm = 0.5 * um * um + pot
    bound = 2.0 / (r * r)

    def tol(x):
        return slack * np.maximum(1.0, np.abs(x))

    bad = (G < -tol(fp)) | (G > 2 * fp + tol(fp))
    bad |= (H < -tol(fm)) | (H > 2 * fm + tol(fm))
    bad |= np.abs(wC) > bound + tol(bound)
    bad |= (wK < -tol(bound)) | (wK > bound + tol(bound))
    return bad


def gh_bounds_report(rec: SpacetimeRecord, vertex: float, m: MultiplierTriple,
                     n_samples: int = 100_000, seed: int = 0, tau_min: float | None = None) -> int:
    """Number of sampled points of the record, inside r <= tau, that violate the bounds."""
    rng = np.random.default_rng(seed)
    g = rec.grid
    tau_lo = max(vertex - rec.times[-1], g.dr if tau_min is None else tau_min)
    tau_hi = vertex - rec.times[0]
    if not tau_hi > tau_lo:
        raise ValueError("record has no cone times toward this vertex")
    tau = rng.uniform(tau_lo, tau_hi, n_samples)
    # r in (0, min(tau, last node)]
    r = (1.0 - rng.uniform(0.0, 1.0, n_samples)) * np.minimum(tau, g.r[-1])
    u, v, ur = _Sampler(rec).at(vertex - tau, r)
    return int(np.count_nonzero(gh_violations(m, rec.model, tau, r, u, -v, ur)))
