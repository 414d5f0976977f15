"""Degree-three deformations: the frozen-t2 family collapses, Delta = 2 schedules reach the slit.

    python3 scripts/breakdown.py --r 0.05 --out results/breakdown
"""
import argparse
from pathlib import Path

import numpy as np

from conformal_rmt import io
from conformal_rmt.errors import BreakdownError
from conformal_rmt.inversion import DeformationSchedule, admissible_radius, asymptotic_residuals, deform


def run(name, sch, s_values, out):
    try:
        traj = deform(sch, s_values)
        status = "completed"
    except BreakdownError as e:
        traj = e.trajectory
        status = f"breakdown at s = {e.s:.4g} (xi = {e.xi:.3g})"
    rows = []
    for p in traj:
        res = asymptotic_residuals(p)
        rows.append([p.s, p.s_eff, p.xi, *np.abs(p.curve.alpha), res["alpha1_dev"], res["alpha0_over_s"]])
    header = ["s", "s_eff", "xi"] + [f"|alpha{j}|" for j in range(sch.n + 1)] + ["alpha1_dev", "alpha0_over_s"]
    io.write_csv(out / f"{name}.csv", header, rows, {"schedule": sch.to_dict(), "status": status})
    last = traj[-1] if traj else None
    print(f"{name:>10}: {status}; last s = {last.s if last else float('nan'):.3g}, xi = {last.xi if last else float('nan'):.4g}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=0.05)
    ap.add_argument("--out", default="results/breakdown")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tau = [0, 1, 1]
    print("admissibility radii (r_hat, r_bar):", admissible_radius(tau))
    s_values = np.geomspace(1, 1e-3, 31)
    run("frozen", DeformationSchedule(args.r, 0.0, tau, [1.0, 1.0], freeze_t2=True), s_values, out)
    run("delta1", DeformationSchedule(args.r, 0.0, tau, [1.0, 1.0]), s_values, out)
    run("delta2", DeformationSchedule(args.r, 0.0, tau, [2.0, 2.0]), s_values, out)
    # closed form of the frozen family: a_2 = r sqrt((1 - s) / 2), xi = r - 2 a_2 vanishes at s = 1/2
    print("frozen family closed form: xi = 0 at s = 0.5")


if __name__ == "__main__":
    main()
