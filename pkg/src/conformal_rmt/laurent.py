"""Finite Laurent polynomials in one complex variable.

Almost every contour integral in this package has an integrand that is a
Laurent polynomial in w on the unit circle, so residues can be read off
exactly instead of integrated numerically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Laurent:
    """sum_k c[k] * w**(lo + k)."""

    c: np.ndarray
    lo: int

    def __post_init__(self):
        c = np.array(self.c, dtype=complex, copy=True).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lo", int(self.lo))

    @classmethod
    def monomial(cls, power: int, coeff: complex = 1.0) -> "Laurent":
        return cls(np.array([coeff]), power)

    @property
    def hi(self) -> int:
        return self.lo + len(self.c) - 1

    def coef(self, power: int) -> complex:
        k = power - self.lo
        if 0 <= k < len(self.c):
            return complex(self.c[k])
        return 0j

    def residue(self) -> complex:
        """Coefficient of w**-1, i.e. (1/2 pi i) times the integral over |w| = 1."""
        return self.coef(-1)

    def __add__(self, other):
        if not isinstance(other, Laurent):
            other = Laurent.monomial(0, other)
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.lo - lo : self.lo - lo + len(self.c)] += self.c
        out[other.lo - lo : other.lo - lo + len(other.c)] += other.c
        return Laurent(out, lo)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(-self.c, self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Laurent):
            return Laurent(np.convolve(self.c, other.c), self.lo + other.lo)
        return Laurent(self.c * other, self.lo)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Laurent":
        """Multiply by w**k."""
        return Laurent(self.c, self.lo + k)

    def deriv(self) -> "Laurent":
        powers = np.arange(self.lo, self.hi + 1)
        return Laurent(self.c * powers, self.lo - 1)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        powers = np.arange(self.lo, self.hi + 1)
        return np.sum(self.c * w[..., None] ** powers, axis=-1)

    def antiderivative_without_log(self) -> "Laurent":
        """Antiderivative of everything except the w**-1 term."""
        powers = np.arange(self.lo, self.hi + 1)
        c = np.where(powers == -1, 0.0, self.c / np.where(powers == -1, 1, powers + 1))
        return Laurent(c, self.lo + 1)


def power_series_pow(g: np.ndarray, p: int, order: int) -> np.ndarray:
    """Coefficients 0..order of g(x)**p for a power series with g[0] == 1.

    Uses the J.C.P. Miller recurrence, exact up to rounding.
    """
    g = np.asarray(g, dtype=complex)
    f = np.zeros(order + 1, dtype=complex)
    f[0] = 1.0
    deg = len(g) - 1
    for k in range(1, order + 1):
        i = np.arange(1, min(k, deg) + 1)
        f[k] = np.sum(((p + 1) * i - k) * g[i] * f[k - i]) / k
    return f
