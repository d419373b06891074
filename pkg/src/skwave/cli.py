"""
Command-line runner.

    skwave evolve       run an evolution, write snapshots and summary.json
    skwave static       shoot for the static soliton, write its profile
    skwave verify       identity / inequality checks with a pass-fail table
    skwave concentrate  local-energy series toward a vertex
    skwave converge     grid-refinement study

Settings come from defaults, then $SKWV_OUT (output directory only), then
``--config FILE``, then command-line flags.

Exit codes: 0 ok, 1 usage or I/O error, 2 singularity detected,
3 verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import DATA_FAMILIES, MODELS, ConfigError, RunConfig, load_config
from .data import from_family
from .evolve import Thresholds, evolve
from .grid import make_grid
from .io import SnapshotError, git_blob_hash, load_record, save_record, write_profile_csv
from .model import PRESETS, SCALING, ModelKind, positivity_term
from .soliton import InvalidBracket, find_soliton, ode_residual, soliton_energy

log = logging.getLogger("skwave")

EXIT_OK, EXIT_USAGE, EXIT_SINGULAR, EXIT_FAILED = 0, 1, 2, 3

IDENTITY_TOL = 1e-3       # residual / total energy
MIN_RATIO = 3.5           # error ratio per halving of dr
POSITIVITY_FLOOR = -1e-18
CHARGE_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def initial_state(cfg: RunConfig):
    grid = make_grid(cfg.r_max, cfg.n_cells)
    model = ModelKind.parse(cfg.model)
    if cfg.data == "shatah":
        if model is not ModelKind.WAVE_MAP:
            log.warning("shatah data solve the wavemap model only")
        from .evolve import FieldState
        from .exact import shatah_state
        s = shatah_state(cfg.tau, grid)
        return FieldState(s.t, s.u, s.v, grid, model)
    amplitude = cfg.bump if cfg.data == "soliton-perturbed" else cfg.amplitude
    return from_family(cfg.data, grid, model, lam=cfg.lam, amplitude=amplitude,
                       r0=cfg.r0, width=cfg.width)


def run(cfg: RunConfig):
    start = initial_state(cfg)
    th = Thresholds(cfg.threshold_energy, cfg.threshold_gradient)
    report, rec = evolve(start, cfg.t_end, cfg.cfl, cfg.record_every, th)
    return start, report, rec


def _record_or_run(cfg, record_dir):
    if record_dir:
        rec = load_record(record_dir)
        return rec.state(0), None, rec
    return run(cfg)


def _singularity_dict(s):
    return None if s is None else {"time": s.time, "radius": s.radius, "trigger": s.trigger}


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, default=float) + "\n")


def _summary_base(command: str, cfg: RunConfig) -> dict:
    return {
        "command": command,
        "config": cfg.as_dict(),
        "config_hash": git_blob_hash(cfg.to_text().encode()),
    }


def default_region(cfg: RunConfig, rec):
    """(vertex, t0, t1) with the trapezoid D(t0, t1) inside the record."""
    V = cfg.vertex_time
    t_lo, t_hi = rec.times[0], rec.times[-1]
    t1 = cfg.t1 if cfg.t1 is not None else min(0.5 * (V - t_lo), rec.grid.r[-1])
    t0 = cfg.t0 if cfg.t0 is not None else max(0.2 * t1, V - t_hi)
    if not 0 < t0 < t1:
        raise UsageError(f"no valid region toward vertex {V}: t0={t0}, t1={t1}")
    return V, t0, t1


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_evolve(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    start, report, rec = run(cfg)
    save_record(out / "snapshots", rec, cfg.snapshot_stride)
    es, qs, ss = diag.energy_series(rec), diag.charge_series(rec), diag.sup_norm_series(rec)
    es.write_csv(out / "energy.csv")
    qs.write_csv(out / "charge.csv")
    summary = _summary_base("evolve", cfg)
    summary.update(
        steps=report.steps, dt=report.dt, final_time=report.final.t,
        singularity=_singularity_dict(report.detected_singularity),
        energy_series=np.column_stack([es.params, es.values]).tolist(),
        charge_series=np.column_stack([qs.params, qs.values]).tolist(),
        sup_norm_series=np.column_stack([ss.params, ss.values]).tolist(),
    )
    _write_json(out / "summary.json", summary)
    if report.detected_singularity is not None:
        s = report.detected_singularity
        print(f"singularity ({s.trigger}) at t={s.time:.6g}, r={s.radius:.4g}")
        return EXIT_SINGULAR
    print(f"evolved to t={report.final.t:.6g} in {report.steps} steps; E={es.values[-1]:.10g}")
    return EXIT_OK


def _solve_static(cfg, dr):
    return find_soliton(cfg.a_lo, cfg.a_hi, cfg.r_max, dr, cfg.tol_a)


def cmd_static(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    dr = cfg.r_max / cfg.n_cells
    try:
        p = _solve_static(cfg, dr)
    except InvalidBracket as exc:
        print(f"invalid bracket: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.mkdir(parents=True, exist_ok=True)
    write_profile_csv(out / "soliton_profile.csv", p)
    summary = _summary_base("static", cfg)
    summary.update(slope=p.slope, iterations=p.iterations, gap=p.gap,
                   energy=soliton_energy(p), energy_simpson=soliton_energy(p, "simpson"),
                   ode_residual=ode_residual(p))
    if args.richardson:
        slopes = [p.slope] + [_solve_static(cfg, dr / 2**k).slope for k in (1, 2)]
        d1, d2 = slopes[0] - slopes[1], slopes[1] - slopes[2]
        order = math.log2(abs(d1 / d2)) if d1 and d2 else float("nan")
        extrap = slopes[2] + (slopes[2] - slopes[1]) / (2**order - 1) if order == order else slopes[2]
        summary["richardson"] = {"dr": [dr, dr / 2, dr / 4], "slopes": slopes,
                                 "observed_order": order, "extrapolated_slope": extrap}
        print(f"slopes {slopes}, observed order {order:.3f}, extrapolated {extrap:.12g}")
    _write_json(out / "static.json", summary)
    print(f"soliton slope {p.slope:.15g} after {p.iterations} bisections; energy {summary['energy']:.10g}")
    return EXIT_OK


def identity_checks(rec, V, t0, t1, seed=0, samples=100_000):
    """Run the identity / inequality suite on a record; list of (name, value, limit, ok)."""
    E = diag.total_energy(rec.state(0))
    tol = IDENTITY_TOL * E
    rows = []

    def add(name, value, limit, ok=None):
        rows.append((name, float(value), float(limit), bool(value <= limit) if ok is None else ok))

    add("flux identity (cone energies)", diag.flux_identity_residual(rec, V, t0, t1, "cone"), tol)
    add("flux identity (ball energies)", diag.flux_identity_residual(rec, V, t0, t1), tol)
    add("ball/cone energy equality", max(diag.equiv_residual(rec, V, t0), diag.equiv_residual(rec, V, t1)), tol)
    for name, m in PRESETS.items():
        add(f"multiplier identity [{name}]", diag.multiplier_identity_residual(rec, V, t0, t1, m), tol)
    add("boundary bounds [scaling] violations", diag.gh_bounds_report(rec, V, SCALING, samples, seed), 0)
    u = np.random.default_rng(seed).uniform(-20.0, 20.0, samples)
    add("positivity (negated minimum)", -float(np.min(positivity_term(u))), -POSITIVITY_FLOOR)
    q = diag.charge_series(rec).values
    add("charge drift", float(np.max(np.abs(q - q[0]))), CHARGE_TOL)
    es = diag.energy_series(rec).values
    add("energy drift", abs(es[-1] - es[0]) / max(abs(es[0]), 1.0), IDENTITY_TOL)
    return rows


def _print_table(rows):
    width = max(len(r[0]) for r in rows)
    for name, value, limit, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {value:.3e}  (limit {limit:.3e})")


def cmd_verify(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    start, report, rec = _record_or_run(cfg, args.record)
    V, t0, t1 = default_region(cfg, rec)
    rows = identity_checks(rec, V, t0, t1, cfg.seed, cfg.samples)
    summary = _summary_base("verify", cfg)
    summary["region"] = {"vertex": V, "t0": t0, "t1": t1}
    if args.refine and args.record is None:
        fine = cfg.replace(n_cells=2 * cfg.n_cells)
        _, _, rec2 = run(fine)
        rows2 = identity_checks(rec2, V, t0, t1, cfg.seed, cfg.samples)
        for (name, a, _, _), (_, b, _, _) in zip(rows, rows2):
            if name.startswith(("flux", "ball", "multiplier")):
                ratio = a / b if b > 0 else math.inf
                ok = a == 0.0 or ratio >= MIN_RATIO
                rows.append((f"ratio {name}", ratio, MIN_RATIO, ok))
    _print_table(rows)
    summary["checks"] = [dict(name=n, value=v, limit=lim, ok=ok) for n, v, lim, ok in rows]
    summary["singularity"] = _singularity_dict(report.detected_singularity) if report else None
    _write_json(out / "verify.json", summary)
    if report is not None and report.detected_singularity is not None:
        return EXIT_SINGULAR
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAILED


def cmd_concentrate(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    start, report, rec = _record_or_run(cfg, args.record)
    V = cfg.vertex_time
    raw = diag.concentration_series(rec, V, cfg.n_points)
    norm = diag.concentration_series(rec, V, cfg.n_points, normalized=True)
    cone = diag.cone_weighted_series(rec, V, cfg.n_points)
    out.mkdir(parents=True, exist_ok=True)
    raw.write_csv(out / "concentration.csv")
    norm.write_csv(out / "concentration_normalized.csv")
    cone.write_csv(out / "cone_weighted.csv")
    summary = _summary_base("concentrate", cfg)
    summary.update(vertex=V, total_energy=diag.total_energy(rec.state(0)),
                   concentration=np.column_stack([raw.params, raw.values]).tolist(),
                   singularity=_singularity_dict(report.detected_singularity) if report else None)
    _write_json(out / "concentrate.json", summary)
    for T, e in zip(raw.params, raw.values):
        print(f"T={T:.6g}  E_local={e:.10g}")
    if report is not None and report.detected_singularity is not None:
        return EXIT_SINGULAR
    return EXIT_OK


def restrict(u_fine: np.ndarray, factor: int) -> np.ndarray:
    """Values at coarse nodes: mean of the two fine nodes straddling each coarse node."""
    if factor == 1:
        return u_fine
    n = u_fine.size // factor
    j = np.arange(n) * factor + factor // 2
    return 0.5 * (u_fine[j - 1] + u_fine[j])


def _level_metrics(rec, V, t0, t1):
    es = diag.energy_series(rec).values
    out = {"energy drift": abs(es[-1] - es[0]) / max(abs(es[0]), 1.0),
           "flux identity": diag.flux_identity_residual(rec, V, t0, t1),
           "ball/cone equality": diag.equiv_residual(rec, V, t1)}
    for name, m in PRESETS.items():
        out[f"multiplier [{name}]"] = diag.multiplier_identity_residual(rec, V, t0, t1, m)
    return out


def cmd_converge(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    ns = [cfg.n_cells * 2**k for k in range(cfg.levels)]
    finals, metrics = [], []
    V = t0 = t1 = None
    for n in ns:
        tic = time.perf_counter()
        _, report, rec = run(cfg.replace(n_cells=n))
        if report.detected_singularity is not None:
            print(f"singularity at n={n}; refinement study aborted", file=sys.stderr)
            return EXIT_SINGULAR
        if V is None:
            V, t0, t1 = default_region(cfg, rec)
        finals.append(report.final.u)
        metrics.append(_level_metrics(rec, V, t0, t1))
        log.info("n=%d done in %.1fs", n, time.perf_counter() - tic)

    table = {"n_cells": ns, "metrics": metrics, "ratios": {}}
    if args.reference:
        _, rep_ref, _ = run(cfg.replace(n_cells=4 * ns[-1], record_every=10**9))
        ref = rep_ref.final.u
        errs = [float(np.max(np.abs(u - restrict(ref, ref.size // n)))) for u, n in zip(finals, ns)]
        table["solution_error_vs_reference"] = errs
        series = [("solution error", errs)]
    else:
        diffs = [float(np.max(np.abs(finals[k] - restrict(finals[k + 1], 2)))) for k in range(len(ns) - 1)]
        table["successive_differences"] = diffs
        series = [("successive difference", diffs)]
    ok = True
    keys = list(metrics[0])
    series += [(k, [m[k] for m in metrics]) for k in keys]
    for name, vals in series:
        ratios = [a / b if b > 0 else math.inf for a, b in zip(vals, vals[1:])]
        good = all(r >= MIN_RATIO or a == 0.0 for r, a in zip(ratios, vals))
        ok &= good
        table["ratios"][name] = ratios
        print(f"{'PASS' if good else 'FAIL'}  {name:<26} " + "  ".join(f"{v:.3e}" for v in vals)
              + "   ratios " + " ".join(f"{r:.2f}" for r in ratios))
    summary = _summary_base("converge", cfg)
    summary.update(region={"vertex": V, "t0": t0, "t1": t1}, table=table)
    _write_json(out / "converge.json", summary)
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {"evolve": cmd_evolve, "static": cmd_static, "verify": cmd_verify,
            "concentrate": cmd_concentrate, "converge": cmd_converge}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--n-cells", type=int)
    common.add_argument("--r-max", type=float)
    common.add_argument("--cfl", type=float)
    common.add_argument("--t-end", type=float)
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--data", choices=DATA_FAMILIES)
    common.add_argument("--vertex", type=float, help="simulation time of the cone vertex")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="skwave", description="Radial Adkins-Nappi / wave-map laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("evolve", parents=[common], help="run an evolution")
    st = sub.add_parser("static", parents=[common], help="static soliton by shooting")
    st.add_argument("--a-lo", type=float)
    st.add_argument("--a-hi", type=float)
    st.add_argument("--richardson", action="store_true", help="also solve at dr/2 and dr/4")
    for name in ("verify", "concentrate"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--record", metavar="DIR", help="use snapshots from DIR instead of running")
        if name == "verify":
            sp.add_argument("--refine", action="store_true", help="repeat at 2 n_cells and report ratios")
    cv = sub.add_parser("converge", parents=[common], help="grid refinement study")
    cv.add_argument("--levels", type=int)
    cv.add_argument("--reference", action="store_true", help="compare with a run at 4x the finest n")
    return p


def config_from_args(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in
                 ("out", "n_cells", "r_max", "cfl", "t_end", "model", "data", "vertex", "seed",
                  "a_lo", "a_hi", "levels")}
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError, SnapshotError) as exc:
        print(f"skwave: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"skwave: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"skwave: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
