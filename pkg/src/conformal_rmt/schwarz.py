"""Inverse Riemann map H, Schwarz function S(z) = hbar(1/H(z)) and branch points."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import ContourGrid, PolynomialCurve, boundary, contains_points, evaluate
from .errors import (
    BranchAmbiguityError,
    DecompositionUndefinedError,
    OutsideAnalyticityError,
    PrecisionError,
)

COLLAR_TOL = 1e-6
ROOT_TOL = 1e-12


def _h_and_dh(curve: PolynomialCurve, w):
    k = np.arange(curve.n + 1)
    wk = w[..., None] ** -k
    h = curve.r * w + np.sum(curve.a * wk, axis=-1)
    dh = curve.r - np.sum(k * curve.a * wk, axis=-1) / w
    return h, dh


def _preimages(curve: PolynomialCurve, z: np.ndarray):
    """All n+1 roots of r w^{n+1} + (a_0 - z) w^n + a_1 w^{n-1} + ... + a_n, one row per z.

    Batched companion-matrix eigenvalues followed by a few guarded Newton steps.
    Returns the roots and their residuals |h(w) - z|.
    """
    nz = np.flatnonzero(curve.a[1:])
    a = curve.a[: nz[-1] + 2] if nz.size else curve.a[:1]  # trailing zeros only add roots at w = 0
    d = a.size
    c = np.broadcast_to(a / curve.r, z.shape + (d,)).copy()
    c[..., 0] -= z / curve.r
    comp = np.zeros(z.shape + (d, d), dtype=complex)
    comp[..., 0, :] = -c
    if d > 1:
        idx = np.arange(d - 1)
        comp[..., idx + 1, idx] = 1.0
    W = np.linalg.eigvals(comp)
    W = np.where(W == 0, 1e-300, W)  # a_n = 0 gives a root at the pole w = 0
    # roots near the pole w = 0 overflow; they are never selected
    with np.errstate(all="ignore"):
        zz = z[..., None]
        h, dh = _h_and_dh(curve, W)
        res = np.abs(h - zz)
        for _ in range(3):
            ok = dh != 0
            cand = np.where(ok, W - (h - zz) / np.where(ok, dh, 1), W)
            hc, dhc = _h_and_dh(curve, cand)
            rc = np.abs(hc - zz)
            # polishing only refines; a long jump would duplicate another root
            better = (rc < res) & (np.abs(cand - W) <= 1e-6 * (1 + np.abs(W)))
            W = np.where(better, cand, W)
            h = np.where(better, hc, h)
            dh = np.where(better, dhc, dh)
            res = np.where(better, rc, res)
    return W, res


def riemann_inverse(curve: PolynomialCurve, z, collar_tol: float = COLLAR_TOL):
    """H(z): the preimage of z under h with |w| >= 1 - collar_tol (scalar or array)."""
    curve.require_certified()
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    W, res = _preimages(curve, z)
    mods = np.abs(W)
    order = np.argsort(-mods, axis=-1)
    top = np.take_along_axis(W, order[..., :1], -1)[..., 0]
    top_res = np.take_along_axis(res, order[..., :1], -1)[..., 0]
    m1 = np.abs(top)
    if W.shape[-1] > 1:
        m2 = np.take_along_axis(mods, order[..., 1:2], -1)[..., 0]
    else:
        m2 = np.zeros_like(m1)
    bad = m1 < 1 - collar_tol
    if np.any(bad):
        raise OutsideAnalyticityError(
            f"z = {z[bad][0]} has no preimage with |w| >= 1 - {collar_tol:g} (largest |w| = {m1[bad][0]:.6g})"
        )
    amb = m2 >= 1 - collar_tol
    if np.any(amb):
        raise BranchAmbiguityError(f"z = {z[amb][0]}: two preimages near the unit circle")
    loose = top_res > ROOT_TOL * (1 + np.abs(z))
    if np.any(loose):
        raise PrecisionError(f"root residual {top_res[loose][0]:.3e} above tolerance at z = {z[loose][0]}")
    return complex(top[0]) if scalar else top.reshape(z.shape)


def hbar_inv(curve: PolynomialCurve, w):
    """hbar(1/w) = r/w + sum_j conj(a_j) w^j."""
    w = np.asarray(w, dtype=complex)
    return curve.r / w + np.polynomial.polynomial.polyval(w, np.conj(curve.a))


def schwarz_function(curve: PolynomialCurve, z, collar_tol: float = COLLAR_TOL):
    H = riemann_inverse(curve, z, collar_tol)
    out = hbar_inv(curve, H)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SchwarzDecomposition:
    """S(z) = E z + Lambda sqrt(z^2 - 4 r a_1) + g(z)."""

    E: complex
    Lambda: complex
    branch_cut: tuple[complex, complex]
    remainder_bound: float

    def sqrt_part(self, z):
        return _slit_sqrt(np.asarray(z, dtype=complex), self.branch_cut[0] ** 2)


def _slit_sqrt(z, c2):
    """sqrt(z^2 - c2) ~ z at infinity, cut on the segment between +-sqrt(c2)."""
    return z * np.sqrt(1 - c2 / z**2)


def near_slit_decomposition(curve: PolynomialCurve, grid: ContourGrid | None = None) -> SchwarzDecomposition:
    curve.require_certified()
    a1 = complex(curve.a[1]) if curve.n >= 1 else 0j
    if a1 == 0:
        raise DecompositionUndefinedError("a_1 = 0: the square-root decomposition does not exist")
    r = curve.r
    E = (r**2 + abs(a1) ** 2) / (2 * r * a1)
    Lam = (abs(a1) ** 2 - r**2) / (2 * r * a1)
    b = 2 * np.sqrt(r * a1)
    grid = grid or ContourGrid.for_geometry(curve.n)
    w = grid.nodes
    z = evaluate(curve, w)
    S = hbar_inv(curve, w)  # S(h(w)) on the contour
    g = S - E * z - Lam * _slit_sqrt(z, 4 * r * a1)
    return SchwarzDecomposition(complex(E), complex(Lam), (complex(b), complex(-b)), float(np.max(np.abs(g))))


@dataclass
class BranchPointReport:
    critical_points: np.ndarray
    branch_points: np.ndarray
    inside_flags: np.ndarray
    critical_radius: float
    min_distance_to_curve: float
    note: str = ""

    @property
    def count_inside(self) -> int:
        return int(np.sum(self.inside_flags))

    @property
    def even_count(self) -> bool:
        return self.count_inside % 2 == 0

    @property
    def touches_curve(self) -> bool:
        return self.min_distance_to_curve <= 1e-9

    def to_dict(self) -> dict:
        pair = lambda v: [[float(c.real), float(c.imag)] for c in v]
        return {
            "critical_points": pair(self.critical_points),
            "branch_points": pair(self.branch_points),
            "inside_flags": [bool(f) for f in self.inside_flags],
            "critical_radius": self.critical_radius,
            "count_inside": self.count_inside,
            "even_count": self.even_count,
            "min_distance_to_curve": self.min_distance_to_curve,
            "note": self.note,
        }


def critical_points(curve: PolynomialCurve) -> np.ndarray:
    """Zeros of h'(w): roots of r w^{n+1} - sum_j j a_j w^{n-j} (the pole at 0 excluded)."""
    n = curve.n
    c = np.zeros(n + 2, dtype=complex)
    c[0] = curve.r
    c[2:] = -np.arange(1, n + 1) * curve.a[1:]
    c = np.trim_zeros(c, "b")  # trailing zeros are factors of w, not critical points
    return np.roots(c) if c.size > 1 else np.zeros(0, dtype=complex)


def branch_point_check(curve: PolynomialCurve, grid: ContourGrid | None = None) -> BranchPointReport:
    """Critical values h(w_c), |w_c| < 1, are the branch points of S inside the curve."""
    curve.require_certified()
    wc = critical_points(curve)
    R = float(np.max(np.abs(wc), initial=0.0))
    inner = wc[np.abs(wc) < 1]
    bp = np.full(inner.shape, np.inf, dtype=complex)
    # a critical point at (or numerically at) the pole has its value at infinity
    finite = np.abs(inner) > 1e-150
    with np.errstate(over="ignore", invalid="ignore"):
        bp[finite] = evaluate(curve, inner[finite])
    finite &= np.isfinite(bp)
    if bp.size:
        inside = np.zeros(bp.shape, dtype=bool)
        inside[finite] = contains_points(curve, bp[finite], grid)
        p = boundary(curve, grid)
        q = np.roll(p, -1)
        d = q - p
        dist = []
        for z in bp[finite]:
            t = np.clip(((z - p) * np.conj(d)).real / np.abs(d) ** 2, 0, 1)
            dist.append(np.min(np.abs(p + t * d - z)))
        dmin = float(min(dist, default=np.inf))
    else:
        inside = np.zeros(0, dtype=bool)
        dmin = float("inf")
    note = ""
    if inner.size == 0:
        note = "no branch points: S is rational (circle), only a pole at the centre"
    elif inside.sum() % 2:
        note = f"odd number of branch points inside ({int(inside.sum())}); h has n+1 = {curve.n + 1} critical values"
    return BranchPointReport(inner, np.atleast_1d(bp), np.atleast_1d(inside), R, dmin, note)
