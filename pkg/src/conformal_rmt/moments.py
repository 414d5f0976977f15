"""Exterior harmonic moments (t_0, t_1, ..., t_{n+1}) of a polynomial curve.

j t_j = (1 / 2 pi i) * integral over |w| = 1 of hbar(1/w) h'(w) h(w)^-j dw.

Expanding h(w)^-j at infinity turns the integral into a finite sum: only
the first n - j + 2 coefficients of the expansion meet the Laurent
polynomial hbar(1/w) h'(w), so `forward_moments` is exact up to rounding.
The expansion represents h^-j on the unit circle only when every zero of
h lies inside the unit disk, i.e. when the origin is inside the curve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import ContourGrid, PolynomialCurve, area_t0, derivative, evaluate
from .errors import DomainError, PrecisionError
from .laurent import Laurent, power_series_pow

# zeros of h must stay this far inside the unit circle
ZERO_MARGIN = 1e-12
QUAD_MAX_NODES = 1 << 16


@dataclass(frozen=True)
class HarmonicMoments:
    """t0 = area / pi (None when not yet known) and t = (t_1, ..., t_{n+1})."""

    t0: float | None
    t: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=complex, copy=True).ravel()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        if self.t0 is not None:
            t0 = float(self.t0)
            if not t0 > 0:
                raise DomainError(f"t0 must be positive, got {self.t0}")
            object.__setattr__(self, "t0", t0)

    @property
    def n(self) -> int:
        return self.t.size - 1

    def tj(self, j: int) -> complex:
        """t_j with the 1-based index used everywhere in the formulas (0 beyond n+1)."""
        if j == 0:
            return complex(self.t0)
        return complex(self.t[j - 1]) if 1 <= j <= self.t.size else 0j

    @property
    def lam(self) -> float:
        """|t_2|^2, the modulus driving the near-slit parametrisation."""
        return abs(self.tj(2)) ** 2

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.t0], self.t])

    def to_dict(self) -> dict:
        return {"t0": self.t0, "t": [[float(c.real), float(c.imag)] for c in self.t]}

    @classmethod
    def from_dict(cls, d: dict) -> "HarmonicMoments":
        return cls(d.get("t0"), [complex(re, im) for re, im in d["t"]])


def zeros_of_h(curve: PolynomialCurve) -> np.ndarray:
    """Roots of w^n h(w) = r w^{n+1} + a_0 w^n + ... + a_n."""
    return np.roots(np.concatenate([[curve.r], curve.a]))


def _inverse_power_series(curve: PolynomialCurve, j: int, order: int) -> np.ndarray:
    """c_k with h(w)^-j = r^-j w^-j sum_k c_k w^-k."""
    g = np.concatenate([[1.0], curve.a / curve.r])
    return power_series_pow(g, -j, order)


def _residue_against(L: Laurent, series: np.ndarray, r: float, j: int) -> complex:
    """Coefficient of w^-1 in L(w) h(w)^-j given the series of h^-j."""
    if j == 0:
        return L.residue()
    k = np.arange(L.lo, L.hi + 1) - j + 1
    ok = (k >= 0) & (k < series.size)
    return complex(np.sum(L.c[ok] * series[k[ok]]) * r ** (-j))


def _check_expansion(curve: PolynomialCurve):
    z = zeros_of_h(curve)
    if z.size and np.max(np.abs(z)) >= 1 - ZERO_MARGIN:
        raise PrecisionError(
            "expansion of h^-j at infinity does not converge on |w| = 1 "
            f"(a zero of h has modulus {np.max(np.abs(z)):.6g}; origin not inside the curve)"
        )


def raw_moments(curve: PolynomialCurve) -> np.ndarray:
    """(t_1..t_{n+1}) by residue algebra, without any precondition checks."""
    n = curve.n
    P = curve.hbar_inv_laurent() * curve.hprime_laurent()
    t = np.empty(n + 1, dtype=complex)
    for j in range(1, n + 2):
        series = _inverse_power_series(curve, j, max(P.hi - j + 1, 0))
        t[j - 1] = _residue_against(P, series, curve.r, j) / j
    return t


def forward_moments(curve: PolynomialCurve) -> HarmonicMoments:
    curve.require_certified()
    _check_expansion(curve)
    return HarmonicMoments(area_t0(curve), raw_moments(curve))


def _quadrature_once(curve: PolynomialCurve, grid: ContourGrid):
    w = grid.nodes
    h = evaluate(curve, w)
    base = np.conj(h) * derivative(curve, w) * w
    t0 = float(np.mean(base).real)
    j = np.arange(1, curve.n + 2)
    t = np.mean(base[None, :] * h[None, :] ** (-j[:, None]), axis=1) / j
    return t0, t


def forward_moments_quadrature(curve: PolynomialCurve, grid: ContourGrid | None = None) -> HarmonicMoments:
    """Same moments by the trapezoid rule on |w| = 1 (independent of the residue algebra).

    With an explicit grid the rule is applied once. Otherwise the grid starts
    at 16 (n+2) nodes and is doubled until two successive estimates agree to
    rounding: the error decays like max|zero of h|^m, which can be slow.
    """
    curve.require_certified()
    _check_expansion(curve)
    if grid is not None:
        return HarmonicMoments(*_quadrature_once(curve, grid))
    grid = ContourGrid.for_moments(curve.n)
    t0, t = _quadrature_once(curve, grid)
    while grid.m < QUAD_MAX_NODES:
        grid = ContourGrid(2 * grid.m)
        t0n, tn = _quadrature_once(curve, grid)
        scale = max(t0n, float(np.max(np.abs(tn), initial=0.0)))
        done = np.max(np.abs(tn - t), initial=0.0) <= 1e-15 * scale
        t0, t = t0n, tn
        if done:
            break
    return HarmonicMoments(t0, t)


def leading_order_moments(curve: PolynomialCurve) -> HarmonicMoments:
    """O(rho) truncation in the scaled variables rho = r^2, alpha_j = a_j / r^j.

    t_0 = rho - sum_j j |alpha_j|^2 rho^j
    t_j = conj(alpha_{j-1}) / j - conj(alpha_j) alpha_0 - (1 + 1/j) alpha_1 conj(alpha_{j+1}) rho
    """
    rho, al = curve.rho, curve.alpha
    n = curve.n

    def A(k):
        return al[k] if 0 <= k <= n else 0j

    jj = np.arange(1, n + 1)
    t0 = rho - np.sum(jj * np.abs(al[1:]) ** 2 * rho**jj)
    t = np.array(
        [
            np.conj(A(j - 1)) / j - np.conj(A(j)) * A(0) - (1 + 1 / j) * A(1) * np.conj(A(j + 1)) * rho
            for j in range(1, n + 2)
        ]
    )
    # t0 can be <= 0 far outside the perturbative regime; report it unvalidated
    out = HarmonicMoments(None, t)
    object.__setattr__(out, "t0", float(t0))
    return out


def moment_jacobian(curve: PolynomialCurve):
    """Exact derivatives of (t_0, t_1, ..., t_{n+1}) with respect to the curve.

    Returns (dr, da, dabar) with shapes (n+2,), (n+2, n+1), (n+2, n+1):
    dr[j] = d t_j / d r, da[j, k] = d t_j / d a_k, dabar[j, k] = d t_j / d conj(a_k)
    (Wirtinger derivatives; row 0 is t_0).

    With G = h'(w) h(w)^-j = d/dw F(h), differentiating in a_k gives
    d/dw(w^-k h^-j); integrating by parts moves d/dw onto hbar(1/w).
    """
    n = curve.n
    r = curve.r
    hb = curve.hbar_inv_laurent()
    hp = curve.hprime_laurent()
    D = hb.deriv()
    dr = np.empty(n + 2, dtype=complex)
    da = np.empty((n + 2, n + 1), dtype=complex)
    dab = np.empty((n + 2, n + 1), dtype=complex)
    order = n + 3
    for j in range(0, n + 2):
        series = _inverse_power_series(curve, j, order) if j else None
        scale = 1.0 / j if j else 1.0

        def res(L):
            return _residue_against(L, series, r, j)

        dr[j] = scale * (-res(D.shift(1)) + res(hp.shift(-1)))
        for k in range(n + 1):
            dab[j, k] = scale * res(hp.shift(k))
            da[j, k] = -scale * res(D.shift(-k))
    return dr, da, dab
