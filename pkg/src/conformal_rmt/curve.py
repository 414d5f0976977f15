"""Polynomial curves h(w) = r w + a_0 + a_1/w + ... + a_n/w^n on |w| = 1.

The curve is the image of the unit circle; h is the exterior Riemann map
whenever the simplicity margin xi = r - sum_j j |a_j| is positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

from .errors import BoundaryAmbiguityError, DomainError, UncertifiedCurveError
from .laurent import Laurent

# the TBB layer shipped with some numba builds is too old; workqueue is always available
numba.config.THREADING_LAYER = "workqueue"

GEOMETRY_MIN_NODES = 512
BOUNDARY_TOL = 1e-12


def _next_pow2(m: int) -> int:
    return 1 << max(int(m) - 1, 1).bit_length()


@dataclass(frozen=True)
class ContourGrid:
    """m equispaced nodes on the unit circle (m a power of two)."""

    m: int

    def __post_init__(self):
        m = int(self.m)
        if m < 4 or m & (m - 1):
            raise DomainError(f"grid size must be a power of two >= 4, got {self.m}")
        object.__setattr__(self, "m", m)

    @cached_property
    def nodes(self) -> np.ndarray:
        w = np.exp(2j * np.pi * np.arange(self.m) / self.m)
        # exact quarter points keep symmetric curves symmetric on the grid
        q = self.m // 4
        w[0], w[q], w[2 * q], w[3 * q] = 1, 1j, -1, -1j
        w.setflags(write=False)
        return w

    def resolves(self, n: int) -> bool:
        return self.m >= 4 * (n + 2)

    @classmethod
    def for_geometry(cls, n: int) -> "ContourGrid":
        return cls(_next_pow2(max(4 * (n + 2), GEOMETRY_MIN_NODES)))

    @classmethod
    def for_moments(cls, n: int) -> "ContourGrid":
        return cls(_next_pow2(16 * (n + 2)))

    @classmethod
    def exact_for(cls, max_abs_power: int, minimum: int = 4) -> "ContourGrid":
        """Smallest grid on which the trapezoid rule integrates w**p exactly for |p| <= max_abs_power."""
        return cls(_next_pow2(max(max_abs_power + 2, minimum)))


@dataclass(frozen=True, eq=False)
class PolynomialCurve:
    r: float
    a: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, PolynomialCurve):
            return NotImplemented
        return self.r == other.r and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.r, self.a.tobytes()))

    def __post_init__(self):
        r = float(self.r)
        if not np.isfinite(r) or r <= 0:
            raise DomainError(f"leading radius r must be positive, got {self.r}")
        a = np.array(self.a, dtype=complex, copy=True).ravel()
        if a.size == 0:
            a = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(a)):
            raise DomainError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_coeffs(cls, r: float, **coeffs: complex) -> "PolynomialCurve":
        """Build from keyword coefficients, e.g. ``from_coeffs(1, a2=0.3)``."""
        idx = {int(k[1:]): complex(v) for k, v in coeffs.items()}
        n = max(idx, default=0)
        a = np.zeros(n + 1, dtype=complex)
        for j, v in idx.items():
            a[j] = v
        return cls(r, a)

    @classmethod
    def from_scaled(cls, rho: float, alpha) -> "PolynomialCurve":
        """Inverse of the (rho, alpha_j = a_j / r**j) scaling."""
        r = np.sqrt(rho)
        alpha = np.asarray(alpha, dtype=complex)
        return cls(r, alpha * r ** np.arange(alpha.size))

    @property
    def n(self) -> int:
        return self.a.size - 1

    @property
    def rho(self) -> float:
        return self.r**2

    @property
    def alpha(self) -> np.ndarray:
        return self.a / self.r ** np.arange(self.a.size)

    @property
    def xi(self) -> float:
        return simplicity_margin(self)

    @property
    def certified(self) -> bool:
        return self.xi > 0

    def require_certified(self):
        if not self.certified:
            raise UncertifiedCurveError(f"curve is not certified simple (xi = {self.xi:.3g} <= 0)")

    def __call__(self, w):
        return evaluate(self, w)

    # Laurent representations used by the residue calculus.
    def h_laurent(self) -> Laurent:
        return Laurent(np.concatenate([self.a[:0:-1], [self.a[0], self.r]]), -self.n)

    def hprime_laurent(self) -> Laurent:
        return self.h_laurent().deriv()

    def hbar_inv_laurent(self) -> Laurent:
        """hbar(1/w) = r/w + sum_j conj(a_j) w^j, equal to conj(h(w)) on |w| = 1."""
        return Laurent(np.concatenate([[self.r], self.a.conj()]), -1)

    def to_dict(self) -> dict:
        return {"r": self.r, "a": [[float(c.real), float(c.imag)] for c in self.a]}

    @classmethod
    def from_dict(cls, d: dict) -> "PolynomialCurve":
        a = [complex(re, im) for re, im in d.get("a", [])]
        return cls(d["r"], a)


def evaluate(curve: PolynomialCurve, w):
    """h(w) = r w + sum_j a_j w^-j."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise DomainError("h is singular at w = 0")
    out = curve.r * w
    inv = 1.0 / w
    # Horner in 1/w
    acc = np.zeros_like(w)
    for aj in curve.a[::-1]:
        acc = acc * inv + aj
    out = out + acc
    return out[()] if out.ndim == 0 else out


def derivative(curve: PolynomialCurve, w):
    """h'(w) = r - sum_j j a_j w^-(j+1)."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise DomainError("h' is singular at w = 0")
    inv = 1.0 / w
    acc = np.zeros_like(w)
    for j in range(curve.n, 0, -1):
        acc = acc * inv + j * curve.a[j]
    out = curve.r - acc * inv * inv
    return out[()] if out.ndim == 0 else out


def simplicity_margin(curve: PolynomialCurve) -> float:
    j = np.arange(1, curve.n + 1)
    return float(curve.r - np.sum(j * np.abs(curve.a[1:])))


def area_t0(curve: PolynomialCurve) -> float:
    """t_0 = r^2 - sum_j j |a_j|^2, the area of the interior divided by pi."""
    j = np.arange(1, curve.n + 1)
    return float(curve.r**2 - np.sum(j * np.abs(curve.a[1:]) ** 2))


def boundary(curve: PolynomialCurve, grid: ContourGrid | None = None) -> np.ndarray:
    grid = grid or ContourGrid.for_geometry(curve.n)
    return evaluate(curve, grid.nodes)


def _segments_intersect(p: np.ndarray) -> bool:
    """True if any two non-adjacent edges of the closed polyline p cross."""
    q = np.roll(p, -1)
    m = p.size
    ax, ay, bx, by = p.real, p.imag, q.real, q.imag

    def orient(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    for i in range(m):
        j = np.arange(i + 2, m)
        if i == 0:
            j = j[j != m - 1]
        if j.size == 0:
            continue
        d1 = orient(ax[i], ay[i], bx[i], by[i], ax[j], ay[j])
        d2 = orient(ax[i], ay[i], bx[i], by[i], bx[j], by[j])
        d3 = orient(ax[j], ay[j], bx[j], by[j], ax[i], ay[i])
        d4 = orient(ax[j], ay[j], bx[j], by[j], bx[i], by[i])
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return True
    return False


def injectivity_check(curve: PolynomialCurve, grid: ContourGrid | None = None, tol: float = 1e-12) -> bool:
    """Sampled check that h restricted to the circle is injective.

    Two tests must pass: the Lipschitz-type lower bound
    |h(w_i) - h(w_j)| >= xi |w_i - w_j| over all node pairs, and the absence
    of crossings between non-adjacent edges of the sampled polyline. The
    first is vacuous when xi <= 0, which is where the second matters.
    """
    grid = grid or ContourGrid.for_geometry(curve.n)
    w = grid.nodes
    z = evaluate(curve, w)
    xi = curve.xi
    if xi > 0:
        dz = np.abs(z[:, None] - z[None, :])
        dw = np.abs(w[:, None] - w[None, :])
        if np.any(dz < xi * dw - tol * (1 + curve.r)):
            return False
    return not _segments_intersect(z)


@numba.njit(cache=True, parallel=True)
def _winding(xs, ys, px, py):
    # one independent count per query point, so results do not depend on threading
    m = px.size
    out = np.zeros(xs.size, dtype=np.int64)
    for k in numba.prange(xs.size):
        x = xs[k]
        y = ys[k]
        wn = 0
        for i in range(m):
            j = i + 1 if i + 1 < m else 0
            x0, y0, x1, y1 = px[i], py[i], px[j], py[j]
            side = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
            if y0 <= y:
                if y1 > y and side > 0:
                    wn += 1
            elif y1 <= y and side < 0:
                wn -= 1
        out[k] = wn
    return out


def winding_numbers(curve: PolynomialCurve, z, grid: ContourGrid | None = None) -> np.ndarray:
    """Winding number of the sampled boundary polyline around each point of z."""
    p = boundary(curve, grid)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return _winding(z.real.copy(), z.imag.copy(), p.real.copy(), p.imag.copy())


def _distance_to_polyline(p: np.ndarray, z: complex) -> float:
    q = np.roll(p, -1)
    d = q - p
    t = np.clip(((z - p) * d.conj()).real / np.maximum(np.abs(d) ** 2, 1e-300), 0.0, 1.0)
    return float(np.min(np.abs(p + t * d - z)))


def contains_point(curve: PolynomialCurve, z: complex, grid: ContourGrid | None = None) -> bool:
    curve.require_certified()
    grid = grid or ContourGrid.for_geometry(curve.n)
    p = boundary(curve, grid)
    if _distance_to_polyline(p, complex(z)) <= BOUNDARY_TOL * curve.r:
        raise BoundaryAmbiguityError(f"point {z} lies on the boundary polyline")
    return bool(winding_numbers(curve, [z], grid)[0] == 1)


def contains_points(curve: PolynomialCurve, z, grid: ContourGrid | None = None) -> np.ndarray:
    """Vectorised contains_point without the boundary-ambiguity check."""
    curve.require_certified()
    return winding_numbers(curve, z, grid) == 1


def slit_limit_distance(curve: PolynomialCurve, grid: ContourGrid | None = None) -> float:
    """Max distance from the sampled curve to the segment [-2r, 2r]."""
    z = boundary(curve, grid)
    x = np.clip(z.real, -2 * curve.r, 2 * curve.r)
    return float(np.max(np.abs(z - x)))
