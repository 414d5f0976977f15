"""Balayage contour integrals, uniform-area Monte Carlo, semicircle integrals
and the equilibrium-energy certificate.

On |w| = 1 the Schwarz function is S(h(w)) = hbar(1/w), so

    (1 / 2 pi i t0) oint_gamma f(z) S(z) dz = mean over nodes of f(h) hbar(1/w) h'(w) w / t0

and for a polynomial f the integrand is a Laurent polynomial, integrated
exactly by the trapezoid rule once the grid outnumbers its widest power.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import (
    ContourGrid,
    PolynomialCurve,
    area_t0,
    boundary,
    contains_points,
    derivative,
    evaluate,
)
from .errors import ConvergenceError, DomainError, ValidationError
from .inversion import DeformationSchedule, deform
from .schwarz import critical_points, hbar_inv

MAX_DEGREE = 12
CERT_TOL = 1e-8


@dataclass(frozen=True)
class TestFunction:
    """Polynomial test function f(z) = sum_k coeffs[k] z^k (degree <= 12)."""

    __test__ = False  # not a pytest class

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c = np.trim_zeros(c, "b") if np.any(c) else c[:1]
        if c.size - 1 > MAX_DEGREE:
            raise ValidationError(f"test functions are limited to degree {MAX_DEGREE}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, k: int) -> "TestFunction":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = 1
        return cls(c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def __str__(self):
        if np.count_nonzero(self.coeffs) == 1 and self.coeffs[-1] == 1:
            return f"z^{self.degree}"
        return f"poly{list(self.coeffs)}"


def balayage_grid(curve: PolynomialCurve, degree: int) -> ContourGrid:
    """Smallest grid integrating f(h) hbar(1/w) h'(w) w exactly for deg f <= degree."""
    n = curve.n
    widest = max(degree + n + 1, degree * n + n + 1)
    return ContourGrid.exact_for(widest, minimum=16)


def balayage_integral(
    curve: PolynomialCurve,
    f: TestFunction,
    grid: ContourGrid | None = None,
    extra: TestFunction | None = None,
) -> complex:
    """(1 / 2 pi i t0) oint f(z) S(z) dz; `extra` adds a polynomial to S (it must not contribute)."""
    curve.require_certified()
    deg = f.degree + (extra.degree if extra is not None else 0)
    need = balayage_grid(curve, deg)
    if grid is None:
        grid = need
    elif grid.m < need.m:
        raise ValidationError(f"grid with {grid.m} nodes cannot integrate degree {deg} exactly (need {need.m})")
    w = grid.nodes
    z = evaluate(curve, w)
    S = hbar_inv(curve, w)
    if extra is not None:
        S = S + extra(z)
    return complex(np.mean(f(z) * S * derivative(curve, w) * w) / area_t0(curve))


@dataclass(frozen=True)
class AreaEstimate:
    value: complex
    stderr: float
    n_samples: int
    seed: int


def sample_uniform(curve: PolynomialCurve, n_samples: int, seed: int, grid: ContourGrid | None = None) -> np.ndarray:
    """n_samples points uniform in the interior, by rejection from the bounding box."""
    curve.require_certified()
    if n_samples < 2:
        raise ValidationError("n_samples must be at least 2")
    rng = np.random.default_rng(seed)
    p = boundary(curve, grid)
    lo = complex(p.real.min(), p.imag.min())
    hi = complex(p.real.max(), p.imag.max())
    frac = np.pi * area_t0(curve) / ((hi.real - lo.real) * (hi.imag - lo.imag))
    out = []
    have = 0
    while have < n_samples:
        batch = int(1.1 * (n_samples - have) / frac) + 64
        x = rng.uniform(lo.real, hi.real, batch)
        y = rng.uniform(lo.imag, hi.imag, batch)
        z = x + 1j * y
        z = z[contains_points(curve, z, grid)]
        out.append(z)
        have += z.size
    return np.concatenate(out)[:n_samples]


def area_mean(f: TestFunction, z: np.ndarray, seed: int = 0) -> AreaEstimate:
    v = f(z)
    n = v.size
    se = float(np.sqrt((np.var(v.real, ddof=1) + np.var(v.imag, ddof=1)) / n))
    return AreaEstimate(complex(np.mean(v)), se, n, seed)


def area_integral(curve: PolynomialCurve, f: TestFunction, n_samples: int, seed: int) -> AreaEstimate:
    """Monte Carlo (1 / pi t0) int_D f d^2z with its (complex) standard error."""
    return area_mean(f, sample_uniform(curve, n_samples, seed), seed)


def semicircle_integral(f: TestFunction, sigma: float, nodes: int | None = None) -> complex:
    """int f d(mu_W) on [-2 sigma, 2 sigma] by Gauss-Chebyshev quadrature of the second kind.

    With x = 2 sigma u the measure is (2/pi) sqrt(1 - u^2) du; N nodes are exact up to degree 2N - 1.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    N = nodes or max(f.degree // 2 + 1, 8)
    i = np.arange(1, N + 1)
    u = np.cos(i * np.pi / (N + 1))
    wts = np.pi / (N + 1) * np.sin(i * np.pi / (N + 1)) ** 2
    val = 2 / np.pi * np.sum(wts * f(2 * sigma * u))
    return complex(val)


@dataclass(frozen=True)
class ConvergenceRow:
    s: float
    value: complex
    semicircle: complex
    abs_error: float
    s_eff: float


def deformation_convergence(
    schedule: DeformationSchedule,
    f: TestFunction,
    s_values,
    check: bool = True,
    trajectory=None,
) -> list[ConvergenceRow]:
    """Balayage integral along the deformation against the semicircle of radius 2r.

    With check set, the error must not grow along decreasing s beyond a
    relative noise of 1e-6 (plus 1e-12 absolute).
    """
    traj = trajectory if trajectory is not None else deform(schedule, s_values)
    sc = semicircle_integral(f, schedule.r)
    rows = []
    for p in traj:
        v = balayage_integral(p.curve, f)
        rows.append(ConvergenceRow(p.s, v, sc, abs(v - sc), p.s_eff))
    if check:
        for a, b in zip(rows, rows[1:]):
            if b.abs_error > a.abs_error * (1 + 1e-6) + 1e-12:
                raise ConvergenceError(
                    f"error grew from {a.abs_error:.3e} at s = {a.s:.3g} to {b.abs_error:.3e} at s = {b.s:.3g}"
                )
    return rows


# --------------------------------------------------------------------------
# equilibrium energy
# --------------------------------------------------------------------------


def critical_radius(curve: PolynomialCurve) -> float:
    wc = critical_points(curve)
    return float(np.max(np.abs(wc), initial=0.0))


def equilibrium_energy(curve: PolynomialCurve, w):
    """E(w) = (|h(w)|^2 - |h(1)|^2 - 2 Re int_1^w hbar(1/z) h'(z) dz) / t0.

    The integrand is a Laurent polynomial with residue t0, so the integral is
    its log-free antiderivative plus t0 log w.
    """
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise DomainError("w = 0 is the pole of h")
    R = critical_radius(curve)
    if np.any(np.abs(w) < R):
        raise DomainError(f"|w| must be at least the critical radius {R:.6g}")
    t0 = area_t0(curve)
    P = curve.hbar_inv_laurent() * curve.hprime_laurent()
    Q = P.antiderivative_without_log()
    h = evaluate(curve, w)
    h1 = evaluate(curve, 1.0 + 0j)
    integral = (Q(w) - Q(1.0 + 0j)).real + P.residue().real * np.log(np.abs(w))
    out = (np.abs(h) ** 2 - abs(h1) ** 2 - 2 * integral) / t0
    return float(out) if out.ndim == 0 else out


def sigma_radius(curve: PolynomialCurve) -> float:
    """Radius of the confining disk: three times max(2r, max |h| on the curve)."""
    return 3 * max(2 * curve.r, float(np.max(np.abs(boundary(curve)))))


@dataclass
class CertificateReport:
    passed: bool
    min_value: float
    min_location: complex
    min_location_z: complex
    boundary_max_abs: float
    w_max: float
    sigma_radius: float
    n_radii: int
    n_angles: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_value": self.min_value,
            "min_location": [self.min_location.real, self.min_location.imag],
            "min_location_z": [self.min_location_z.real, self.min_location_z.imag],
            "boundary_max_abs": self.boundary_max_abs,
            "w_max": self.w_max,
            "sigma_radius": self.sigma_radius,
            "n_radii": self.n_radii,
            "n_angles": self.n_angles,
        }


def equilibrium_certificate(
    curve: PolynomialCurve,
    grid: ContourGrid | None = None,
    sigma: float | None = None,
    n_radii: int = 64,
) -> CertificateReport:
    """Check E >= -1e-8 on a log-radial grid covering the preimage of the confining disk."""
    curve.require_certified()
    n_angles = grid.m if grid is not None else 256
    R_sigma = sigma if sigma is not None else sigma_radius(curve)
    w_max = (R_sigma + float(np.sum(np.abs(curve.a)))) / curve.r + 0.5
    radii = np.geomspace(1.0, w_max, n_radii)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    W = radii[:, None] * np.exp(1j * theta)[None, :]
    E = equilibrium_energy(curve, W)
    # only points whose image lies in the confining disk count
    inside = np.abs(evaluate(curve, W)) <= R_sigma
    inside[0] = True
    Em = np.where(inside, E, np.inf)
    k = np.unravel_index(np.argmin(Em), Em.shape)
    bmax = float(np.max(np.abs(E[0])))
    mn = float(Em[k])
    zk = complex(evaluate(curve, W[k]))
    return CertificateReport(mn >= -CERT_TOL, mn, complex(W[k]), zk, bmax, float(w_max), float(R_sigma), n_radii, n_angles)
