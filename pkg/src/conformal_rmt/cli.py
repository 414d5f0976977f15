"""Command line: python -m conformal_rmt {moments,invert,deform,sample,verify}.

Exit codes: 0 success, 2 validation failure, 3 precision failure, 4 breakdown.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from . import io
from .balayage import (
    TestFunction,
    area_mean,
    balayage_integral,
    deformation_convergence,
    equilibrium_certificate,
    sample_uniform,
    sigma_radius,
)
from .coulomb import PotentialSpec, empirical_moments, metropolis_run
from .curve import ContourGrid, PolynomialCurve, simplicity_margin
from .errors import BreakdownError, ConformalRMTError, PrecisionError, ValidationError
from .inversion import REGIME_SWITCH, DeformationSchedule, deform, invert_near_slit, invert_regular
from .moments import HarmonicMoments, forward_moments, forward_moments_quadrature
from .schwarz import branch_point_check

EXIT_OK, EXIT_VALIDATION, EXIT_PRECISION, EXIT_BREAKDOWN = 0, 2, 3, 4

log = logging.getLogger("conformal_rmt")


def _curve_from(data: dict) -> PolynomialCurve:
    rec = data.get("curve", data)
    try:
        return PolynomialCurve(float(rec["r"]), io.from_pairs(rec["a"]))
    except KeyError as e:
        raise ValidationError(f"curve record is missing field {e}") from e


def _moments_from(data: dict) -> HarmonicMoments:
    rec = data.get("moments", data)
    try:
        return HarmonicMoments(rec.get("t0"), io.from_pairs(rec["t"]))
    except KeyError as e:
        raise ValidationError(f"moments record is missing field {e}") from e


def _schedule_from(rec: dict) -> DeformationSchedule:
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            sch = DeformationSchedule(
                float(rec["r"]),
                float(rec.get("phi", 0.0)),
                io.from_pairs(rec["tau"]),
                rec["delta"],
                bool(rec.get("freeze_t2", False)),
            )
        for w in caught:
            log.warning("%s", w.message)
        return sch
    except KeyError as e:
        raise ValidationError(f"schedule record is missing field {e}") from e


def _config(args, **extra) -> dict:
    cfg = {
        "command": args.command,
        "input": args.input,
        "output": args.output,
        "seed": args.seed,
        "tol": args.tol,
        "grid_size": args.grid_size,
    }
    cfg.update(extra)
    return cfg


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_moments(args) -> int:
    curve = _curve_from(io.read_json(args.input))
    xi = simplicity_margin(curve)
    if not xi > 0:
        raise ValidationError(f"curve is not certified simple: xi = {xi:.6g} <= 0")
    m = forward_moments(curve)
    grid = ContourGrid(args.grid_size) if args.grid_size else None
    q = forward_moments_quadrature(curve, grid)
    disc = float(np.max(np.abs(np.concatenate([[m.t0 - q.t0], m.t - q.t]))))
    tol = args.tol if args.tol is not None else 1e-10
    io.write_json(
        args.output,
        {
            "config": _config(args, tol=tol, grid_size=grid.m if grid else "adaptive"),
            "curve": curve.to_dict(),
            "xi": xi,
            "moments": m.to_dict(),
            "quadrature": q.to_dict(),
            "discrepancy": disc,
            "discrepancy_ok": disc <= tol,
        },
    )
    return EXIT_OK


def cmd_invert(args) -> int:
    data = io.read_json(args.input)
    m = _moments_from(data)
    if m.t0 is None:
        raise ValidationError("t0 is required for inversion")
    t2 = abs(m.tj(2))
    sched = data.get("schedule")
    if sched is not None and t2 >= REGIME_SWITCH:
        schedule = _schedule_from(sched)
        curve = invert_near_slit(m, schedule)
        regime = "near_slit"
    elif t2 < 0.5 - 1e-3:
        curve = invert_regular(m)
        regime = "regular"
    else:
        raise ValidationError(
            f"|t2| = {t2:.6g} is outside the regular regime and no near-slit schedule was given"
            if t2 < 0.5
            else f"|t2| = {t2:.6g} >= 1/2: outside both inversion regimes"
        )
    fm = forward_moments(curve)
    resid = float(np.max(np.abs(np.concatenate([[fm.t0 - m.t0], fm.t - m.t]))))
    tol = args.tol if args.tol is not None else 1e-10
    if resid > tol * (1 + m.t0):
        raise PrecisionError(f"roundtrip residual {resid:.3e} exceeds tol {tol:g}")
    io.write_json(
        args.output,
        {
            "config": _config(args, tol=tol, regime=regime),
            "curve": curve.to_dict(),
            "xi": simplicity_margin(curve),
            "roundtrip_residual": resid,
        },
    )
    return EXIT_OK


def _trajectory_rows(traj, n):
    header = ["s", "r"] + io.complex_columns("a", n + 1) + ["t0"] + io.complex_columns("t", n + 1, 1) + ["xi", "regime"]
    rows = []
    for p in traj:
        row = [p.s, p.curve.r]
        for c in p.curve.a:
            row += [c.real, c.imag]
        row.append(p.moments.t0)
        for c in p.moments.t:
            row += [c.real, c.imag]
        row += [p.xi, p.regime]
        rows.append(row)
    return header, rows


def cmd_deform(args) -> int:
    data = io.read_json(args.input)
    schedule = _schedule_from(data.get("schedule", data))
    s_values = args.s if args.s else data.get("s_values")
    if not s_values:
        raise ValidationError("no s values given (use --s or an s_values field)")
    cfg = _config(args, s_values=list(map(float, s_values)), convergence=args.convergence)
    meta = {"config": cfg, "schedule": schedule.to_dict()}
    code = EXIT_OK
    try:
        traj = deform(schedule, s_values)
    except BreakdownError as e:
        traj = getattr(e, "trajectory", [])
        meta["breakdown"] = {"s": e.s, "xi": e.xi, "message": str(e)}
        code = EXIT_BREAKDOWN
        print(f"breakdown at s = {e.s}: {e}", file=sys.stderr)
    header, rows = _trajectory_rows(traj, schedule.n)
    io.write_csv(args.output, header, rows, meta)
    if args.convergence and traj and not schedule.freeze_t2:
        crow = []
        for k in (2, 4):
            f = TestFunction.monomial(k)
            for row in deformation_convergence(schedule, f, None, check=False, trajectory=traj):
                crow.append([row.s, f"x^{k}", row.value.real, row.value.imag, row.semicircle.real, row.abs_error])
        io.write_csv(
            args.convergence,
            ["s", "f", "value_re", "value_im", "semicircle_value", "abs_error"],
            crow,
            {"config": cfg, "schedule": schedule.to_dict()},
        )
    return code


def cmd_sample(args) -> int:
    data = io.read_json(args.input)
    try:
        N = int(data["N"])
        sweeps = int(data["sweeps"])
        step = float(data.get("step", 0.1))
        t = io.from_pairs(data["t"])
        t0 = float(data["t0"])
    except KeyError as e:
        raise ValidationError(f"run config is missing field {e}") from e
    if N < 2:
        raise ValidationError(f"N must be at least 2, got {N}")
    if t.size < 2 or t[0] != 0:
        raise ValidationError("t must list t_1..t_{n+1} with t_1 = 0")
    seeds = [args.seed] if args.seed is not None else [int(s) for s in data.get("seeds", [0])]
    m = HarmonicMoments(t0, t)
    curve = invert_regular(m)
    R = float(data.get("sigma_radius") or sigma_radius(curve))
    pot = PotentialSpec(t0, t[1:], R)
    k_max = int(data.get("k_max", 4))
    chains = [metropolis_run(pot, N, sweeps, step, s) for s in seeds]
    rows = []
    for cid, ch in enumerate(chains):
        for i, z in enumerate(ch.points):
            rows.append([cid, i, z.real, z.imag])
    cfg = _config(args, N=N, sweeps=sweeps, step=step, seeds=seeds, t0=t0, t=io.pairs(t), sigma_radius=R, k_max=k_max)
    io.write_csv(args.output, ["chain_id", "index", "z_re", "z_im"], rows, {"config": cfg})
    if args.report:
        rep = empirical_moments(chains, curve, k_max)
        io.write_json(
            args.report,
            {
                "config": cfg,
                "curve": curve.to_dict(),
                "chains": [
                    {
                        "seed": c.seed,
                        "final_step": c.step,
                        "acceptance_rate": c.acceptance_rate,
                        "energy": c.energy,
                        "max_drift": c.max_drift,
                    }
                    for c in chains
                ],
                "empirical": rep.to_dict(),
            },
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    data = io.read_json(args.input)
    curve = _curve_from(data)
    curve.require_certified()
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    n_samples = int(data.get("n_samples", 200_000))
    grid = ContourGrid(args.grid_size) if args.grid_size else None
    cert = equilibrium_certificate(curve, grid)
    bp = branch_point_check(curve)
    z = sample_uniform(curve, n_samples, seed)
    checks = []
    for k in range(0, 5):
        f = TestFunction.monomial(k)
        c = balayage_integral(curve, f)
        a = area_mean(f, z, seed)
        ok = abs(c - a.value) <= 3 * a.stderr + 1e-12
        checks.append({"k": k, "contour": c, "area": a.value, "stderr": a.stderr, "within_3se": bool(ok)})
    io.write_json(
        args.output,
        {
            "config": _config(args, seed=seed, n_samples=n_samples),
            "curve": curve.to_dict(),
            "xi": simplicity_margin(curve),
            "certificate": cert.to_dict(),
            "branch_points": bp.to_dict(),
            "balayage_vs_area": checks,
            "all_passed": bool(cert.passed and all(c["within_3se"] for c in checks) and not bp.touches_curve),
        },
    )
    return EXIT_OK


COMMANDS = {
    "moments": cmd_moments,
    "invert": cmd_invert,
    "deform": cmd_deform,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conformal_rmt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", required=True)
        sp.add_argument("--output", default="-")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--grid-size", type=int, default=None, dest="grid_size")
        if name == "deform":
            sp.add_argument("--s", type=float, nargs="+", default=None, help="decreasing s values")
            sp.add_argument("--convergence", default=None, help="convergence table for x^2 and x^4")
        if name == "sample":
            sp.add_argument("--report", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BreakdownError as e:
        print(f"breakdown: {e}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except PrecisionError as e:
        print(f"precision failure: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except (ValidationError, ValueError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConformalRMTError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
