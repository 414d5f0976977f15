"""Metropolis sampler for the eigenvalue density exp(-H) of the normal ensemble.

H = 2 sum_{i<j} log|z_i - z_j|^-1 + N sum_i V(z_i),   V = (|z|^2 - 2 Re p(z)) / t0,
p(z) = sum_{k>=2} t_k z^k, all points confined to the disk |z| <= sigma_radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .balayage import TestFunction, balayage_integral
from .curve import PolynomialCurve, contains_points
from .errors import PrecisionError, ValidationError

DRIFT_EVERY = 100
DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class PotentialSpec:
    t0: float
    p_coeffs: np.ndarray  # t_2 .. t_{n+1}
    sigma_radius: float

    def __post_init__(self):
        c = np.array(self.p_coeffs, dtype=complex, copy=True).ravel()
        if not self.t0 > 0:
            raise ValidationError("t0 must be positive")
        if c.size and abs(c[0]) > 0.5:
            raise ValidationError(f"|t2| must not exceed 1/2, got {abs(c[0])}")
        if not self.sigma_radius > 0:
            raise ValidationError("sigma_radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "p_coeffs", c)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "sigma_radius", float(self.sigma_radius))

    @property
    def poly(self) -> np.ndarray:
        """Ascending coefficients of p (index k <-> z^k)."""
        return np.concatenate([[0, 0], self.p_coeffs]).astype(complex)

    def V(self, z):
        z = np.asarray(z, dtype=complex)
        p = np.polynomial.polynomial.polyval(z, self.poly)
        return (np.abs(z) ** 2 - 2 * p.real) / self.t0

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "t": [[0.0, 0.0]] + [[float(c.real), float(c.imag)] for c in self.p_coeffs],
            "sigma_radius": self.sigma_radius,
        }


@dataclass
class EnsembleSample:
    points: np.ndarray
    N: int
    energy: float
    seed: int
    sweeps: int
    step: float = 0.0
    acceptance_rate: float = 0.0
    burn_in: int = 0
    energy_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    snapshots: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    max_drift: float = 0.0


# --------------------------------------------------------------------------
# energy
# --------------------------------------------------------------------------


def total_energy(sample, pot: PotentialSpec) -> float:
    """The exponent H; +inf if two points coincide."""
    z = np.asarray(sample.points if isinstance(sample, EnsembleSample) else sample, dtype=complex)
    N = z.size
    iu = np.triu_indices(N, 1)
    d = np.abs(z[:, None] - z[None, :])[iu]
    if np.any(d == 0):
        return float("inf")
    return float(-2 * np.sum(np.log(d)) + N * np.sum(pot.V(z)))


@numba.njit(cache=True)
def _V(x, y, poly_re, poly_im, t0):
    # Horner for Re p(z)
    pr = 0.0
    pi = 0.0
    for k in range(poly_re.size - 1, -1, -1):
        nr = pr * x - pi * y + poly_re[k]
        ni = pr * y + pi * x + poly_im[k]
        pr, pi = nr, ni
    return (x * x + y * y - 2.0 * pr) / t0


@numba.njit(cache=True)
def _sweeps(xs, ys, H, step, R2, poly_re, poly_im, t0, gauss, unif, trace):
    """Run gauss.shape[0] sweeps of sequential single-site moves in place.

    Returns (accepted, energy); trace[s] gets the energy after sweep s.
    """
    n_sweeps = gauss.shape[0]
    N = xs.size
    acc = 0
    for s in range(n_sweeps):
        for i in range(N):
            nx = xs[i] + step * gauss[s, i, 0]
            ny = ys[i] + step * gauss[s, i, 1]
            if nx * nx + ny * ny > R2:
                continue
            dlog = 0.0
            bad = False
            for j in range(N):
                if j == i:
                    continue
                dxo = xs[i] - xs[j]
                dyo = ys[i] - ys[j]
                dxn = nx - xs[j]
                dyn = ny - ys[j]
                dn = dxn * dxn + dyn * dyn
                if dn == 0.0:
                    bad = True
                    break
                dlog += np.log(dxo * dxo + dyo * dyo) - np.log(dn)
            if bad:
                continue
            # 2 sum log|z_i - z_j|^-1 changes by sum (log d_old^2 - log d_new^2)
            dH = dlog + N * (_V(nx, ny, poly_re, poly_im, t0) - _V(xs[i], ys[i], poly_re, poly_im, t0))
            if dH <= 0.0 or unif[s, i] < np.exp(-dH):
                xs[i] = nx
                ys[i] = ny
                H += dH
                acc += 1
        trace[s] = H
    return acc, H


def _initial(pot: PotentialSpec, N: int, rng, init: str) -> np.ndarray:
    if init == "disk":
        R = min(np.sqrt(pot.t0), pot.sigma_radius)
    elif init == "sigma":
        R = pot.sigma_radius
    else:
        raise ValidationError(f"unknown initial condition {init!r}")
    rad = R * np.sqrt(rng.random(N))
    ang = 2 * np.pi * rng.random(N)
    return rad * np.exp(1j * ang)


def metropolis_run(
    pot: PotentialSpec,
    N: int,
    sweeps: int,
    step: float,
    seed: int,
    burn_in: int | None = None,
    thin: int = 20,
    init: str = "disk",
    tune: bool = True,
) -> EnsembleSample:
    """Single-site Metropolis chain; deterministic for a fixed seed.

    The step is retuned after each block of 100 burn-in sweeps (default burn-in:
    first half) towards 30-50% acceptance. Snapshots are taken every `thin`
    sweeps after burn-in; the incremental energy is checked against a full
    recomputation every 100 sweeps.
    """
    if N < 2:
        raise ValidationError("N must be at least 2")
    if not step > 0:
        raise ValidationError("step must be positive")
    if sweeps < 1:
        raise ValidationError("sweeps must be positive")
    burn_in = sweeps // 2 if burn_in is None else int(burn_in)
    rng = np.random.default_rng(seed)
    z = _initial(pot, N, rng, init)
    xs, ys = z.real.copy(), z.imag.copy()
    poly = pot.poly
    pre, pim = poly.real.copy(), poly.imag.copy()
    R2 = pot.sigma_radius**2
    H = total_energy(z, pot)
    trace = np.empty(sweeps)
    snaps = []
    acc_total = 0
    moves_total = 0
    max_drift = 0.0
    done = 0
    while done < sweeps:
        block = min(DRIFT_EVERY, sweeps - done)
        gauss = rng.standard_normal((block, N, 2))
        unif = rng.random((block, N))
        # split the block at snapshot positions so every `thin`-th post-burn-in sweep is recorded
        cuts = [s + 1 for s in range(done, done + block) if s >= burn_in and (s + 1 - burn_in) % thin == 0]
        acc = 0
        lo = 0
        for c in sorted(set(cuts) | {done + block}):
            hi = c - done
            if hi > lo:
                a, H = _sweeps(xs, ys, H, step, R2, pre, pim, pot.t0, gauss[lo:hi], unif[lo:hi], trace[done + lo : done + hi])
                acc += a
                lo = hi
            if c in cuts:
                snaps.append(xs + 1j * ys)
        H_full = total_energy(xs + 1j * ys, pot)
        drift = abs(H - H_full) / max(1.0, abs(H_full))
        max_drift = max(max_drift, drift)
        if drift > DRIFT_TOL:
            raise PrecisionError(f"incremental energy drifted by {drift:.3e} (relative) after {done + block} sweeps")
        H = H_full
        rate = acc / (block * N)
        if done < burn_in and tune:
            if rate < 0.3:
                step *= 0.8
            elif rate > 0.5:
                step *= 1.25
        else:
            acc_total += acc
            moves_total += block * N
        done += block
    pts = xs + 1j * ys
    return EnsembleSample(
        points=pts,
        N=N,
        energy=H,
        seed=seed,
        sweeps=sweeps,
        step=step,
        acceptance_rate=acc_total / moves_total if moves_total else 0.0,
        burn_in=burn_in,
        energy_trace=trace,
        snapshots=np.array(snaps) if snaps else pts[None, :].copy(),
        max_drift=max_drift,
    )


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------


def jackknife(blocks: np.ndarray) -> tuple[complex, float]:
    """Mean and jackknife standard error of per-block estimates (complex allowed)."""
    x = np.asarray(blocks)
    B = x.size
    if B < 2:
        return complex(x.mean()), float("nan")
    loo = (x.sum() - x) / (B - 1)
    m = loo.mean()
    var = (B - 1) / B * np.sum(np.abs(loo - m) ** 2)
    return complex(x.mean()), float(np.sqrt(var))


@dataclass
class MomentReport:
    k: np.ndarray
    moments: np.ndarray
    errors: np.ndarray
    predictions: np.ndarray
    inside_fraction: float
    inside_error: float
    n_snapshots: int

    @property
    def z_scores(self) -> np.ndarray:
        return np.abs(self.moments - self.predictions) / np.where(self.errors > 0, self.errors, np.inf)

    def to_dict(self) -> dict:
        return {
            "k": [int(v) for v in self.k],
            "moments": [[float(c.real), float(c.imag)] for c in self.moments],
            "jackknife_errors": [float(e) for e in self.errors],
            "predictions": [[float(c.real), float(c.imag)] for c in self.predictions],
            "z_scores": [float(v) for v in self.z_scores],
            "inside_fraction": self.inside_fraction,
            "inside_error": self.inside_error,
            "n_snapshots": self.n_snapshots,
        }


def empirical_moments(samples, curve: PolynomialCurve, k_max: int, n_blocks: int = 20) -> MomentReport:
    """(1/N) sum z_i^k and the inside-curve fraction over pooled snapshots.

    Error bars: jackknife over contiguous snapshot blocks (per chain), which
    absorbs the autocorrelation within each block. Predictions are the
    balayage integrals of z^k, equal to the uniform-area averages.
    """
    if isinstance(samples, EnsembleSample):
        samples = [samples]
    per_chain = []
    for smp in samples:
        snaps = np.atleast_2d(smp.snapshots)
        per_chain.append(snaps)
    ks = np.arange(1, k_max + 1)
    block_vals = []
    block_inside = []
    for snaps in per_chain:
        nb = max(1, min(n_blocks, snaps.shape[0]))
        for chunk in np.array_split(np.arange(snaps.shape[0]), nb):
            Z = snaps[chunk]
            block_vals.append([np.mean(Z**k) for k in ks])
            block_inside.append(np.mean(contains_points(curve, Z.ravel())))
    block_vals = np.array(block_vals)
    moments, errors = zip(*[jackknife(block_vals[:, i]) for i in range(ks.size)]) if ks.size else ((), ())
    inside, inside_err = jackknife(np.array(block_inside))
    preds = np.array([balayage_integral(curve, TestFunction.monomial(int(k))) for k in ks])
    return MomentReport(
        ks,
        np.array(moments, dtype=complex),
        np.array(errors, dtype=float),
        preds,
        float(inside.real),
        inside_err,
        int(sum(s.shape[0] for s in per_chain)),
    )
