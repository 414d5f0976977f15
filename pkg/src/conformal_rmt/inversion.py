"""Inverse moment map: recover (r, a_0..a_n) from (t_0, t_1..t_{n+1}).

Two regimes share one exact Newton core (residual = forward map minus target,
Jacobian from `moment_jacobian`):

* regular, |t_2| < 1/2: unknowns (r, a); seeded by the O(rho) inverse.
* near slit, t_2 -> 1/2 along a deformation schedule: r is held fixed and the
  schedule parameter s (equivalently lambda = (1 - s) / 4) is found by a
  scalar root-find on t_0, each evaluation being a fixed-r Newton solve.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curve import PolynomialCurve, area_t0, simplicity_margin
from .errors import (
    BreakdownError,
    DomainError,
    NearSingularError,
    NoSolutionError,
    OutOfRegimeError,
    PrecisionError,
    ValidationError,
)
from .moments import HarmonicMoments, forward_moments, moment_jacobian, raw_moments

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
REGIME_SWITCH = 0.45
NEAR_SINGULAR = 1e-10


# --------------------------------------------------------------------------
# linear block system
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSystem:
    """-conj(K) phi + J^-1 conj(phi) = conj(v),  J^-1 phi - K conj(phi) = v.

    K is nonzero only in its first column; J = diag(1..n+1).
    """

    K: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        K = np.array(self.K, dtype=complex)
        v = np.array(self.v, dtype=complex).ravel()
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != v.size:
            raise ValidationError("K must be square and match the length of v")
        if np.any(K[:, 1:] != 0):
            raise ValidationError("K may only have nonzero entries in its first column")
        for arr in (K, v):
            arr.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_column(cls, col, v) -> "BlockSystem":
        col = np.asarray(col, dtype=complex).ravel()
        K = np.zeros((col.size, col.size), dtype=complex)
        K[:, 0] = col
        return cls(K, v)

    @classmethod
    def from_moments(cls, m: HarmonicMoments) -> "BlockSystem":
        """O(rho) correction system around alpha*_j = (j+1) conj(t_{j+1}) (assumes t_1 = 0)."""
        n1 = m.n + 1
        col = np.array([np.conj((i + 1) * m.tj(i + 1)) if i <= m.n else 0j for i in range(1, n1 + 1)])
        vbar = np.zeros(n1, dtype=complex)
        for j in range(1, m.n):  # zero for j = n, n+1
            vbar[j - 1] = 2 * (1 + 1 / j) * (j + 2) * np.conj(m.tj(2)) * m.tj(j + 2)
        return cls.from_column(col, np.conj(vbar))

    @property
    def k(self) -> complex:
        return complex(self.K[0, 0])

    @property
    def J(self) -> np.ndarray:
        return np.diag(np.arange(1, self.v.size + 1, dtype=float))

    def residuals(self, phi) -> tuple[np.ndarray, np.ndarray]:
        Jinv = np.diag(1.0 / np.arange(1, self.v.size + 1))
        r1 = -np.conj(self.K) @ phi + Jinv @ np.conj(phi) - np.conj(self.v)
        r2 = Jinv @ phi - self.K @ np.conj(phi) - self.v
        return r1, r2


def solve_block_system(sys: BlockSystem) -> np.ndarray:
    """phi = T v + B conj(v), B = J K / (1 - |k|^2), T = J + conj(k) B."""
    k = sys.k
    if abs(abs(k) - 1) < NEAR_SINGULAR:
        raise NearSingularError(f"|k| = {abs(k):.15g} is within {NEAR_SINGULAR} of 1")
    J = sys.J
    B = J @ sys.K / (1 - abs(k) ** 2)
    T = J + np.conj(k) * B
    return T @ sys.v + B @ np.conj(sys.v)


# --------------------------------------------------------------------------
# Newton core
# --------------------------------------------------------------------------


def _split(z):
    return np.concatenate([np.real(z), np.imag(z)])


def _real_jac(da, dab):
    """Rows (Re, Im) of complex outputs, columns (Re a, Im a)."""
    dx = da + dab
    dy = 1j * (da - dab)
    top = np.hstack([dx.real, dy.real])
    bot = np.hstack([dx.imag, dy.imag])
    return np.vstack([top, bot])


def _newton(fun, x0, tol, max_iter=NEWTON_MAX_ITER, what="Newton"):
    """Damped Newton with column scaling and step halving.

    fun(x) -> (F, J) or None when x is outside the admissible set.
    """
    x = np.array(x0, dtype=float)
    out = fun(x)
    if out is None:
        raise NoSolutionError(f"{what}: initial iterate is not admissible")
    F, Jm = out
    nF = np.max(np.abs(F))
    for it in range(max_iter):
        if not np.isfinite(nF):
            break
        if nF <= tol:
            return x, it
        scale = np.linalg.norm(Jm, axis=0)
        scale[scale == 0] = 1.0
        try:
            dx = np.linalg.solve(Jm / scale, -F) / scale
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(Jm / scale, -F, rcond=None)[0] / scale
        lam = 1.0
        while lam >= 2.0**-30:
            trial = fun(x + lam * dx)
            if trial is not None:
                nT = np.max(np.abs(trial[0]))
                if nT < (1 - 1e-4 * lam) * nF:
                    x = x + lam * dx
                    F, Jm = trial
                    nF = nT
                    break
            lam *= 0.5
        else:
            # stagnation at the rounding floor counts as convergence
            if nF <= 1e3 * tol:
                return x, it
            break
    if nF <= tol:
        return x, max_iter
    raise NoSolutionError(f"{what} did not converge (residual {nF:.3e} after {max_iter} iterations)")


def _full_system(target: HarmonicMoments, n: int):
    """Unknowns x = (r, Re a, Im a); equations t_0 and Re/Im t_1..t_{n+1}."""
    tt = np.asarray(target.t, dtype=complex)

    def fun(x):
        r = x[0]
        if not r > 0:
            return None
        a = x[1 : n + 2] + 1j * x[n + 2 :]
        c = PolynomialCurve(r, a)
        F = np.concatenate([[area_t0(c) - target.t0], _split(raw_moments(c) - tt)])
        dr, da, dab = moment_jacobian(c)
        Jm = np.empty((F.size, x.size))
        Jm[0, 0] = dr[0].real
        Jm[0, 1:] = _real_jac(da[:1], dab[:1])[0]
        Jm[1:, 0] = _split(dr[1:])
        Jm[1:, 1:] = _real_jac(da[1:], dab[1:])
        return F, Jm

    return fun


def _fixed_r_system(r: float, tt: np.ndarray):
    """Unknowns x = (Re a, Im a) at fixed r; equations Re/Im t_1..t_{n+1}."""
    n = tt.size - 1

    def fun(x):
        a = x[: n + 1] + 1j * x[n + 1 :]
        c = PolynomialCurve(r, a)
        F = _split(raw_moments(c) - tt)
        _, da, dab = moment_jacobian(c)
        return F, _real_jac(da[1:], dab[1:])

    return fun


def _frozen_system(r: float, t0: float, tau: np.ndarray):
    """Unknowns (Re a, Im a, mu): t_0 = target, t_1 = t_2 = 0, t_j = mu tau_j (j >= 3)."""
    n = tau.size - 1
    direction = np.array(tau, dtype=complex)
    direction[:2] = 0

    def fun(x):
        a = x[: n + 1] + 1j * x[n + 1 : 2 * n + 2]
        mu = x[-1]
        c = PolynomialCurve(r, a)
        F = np.concatenate([[area_t0(c) - t0], _split(raw_moments(c) - mu * direction)])
        _, da, dab = moment_jacobian(c)
        Jm = np.zeros((F.size, x.size))
        Jm[:, :-1] = _real_jac(da, dab)[[0] + list(range(1, n + 2)) + list(range(n + 3, 2 * n + 4))]
        Jm[1:, -1] = -_split(direction)
        return F, Jm

    return fun


def _curve_from_x(r, x, n) -> PolynomialCurve:
    return PolynomialCurve(r, x[: n + 1] + 1j * x[n + 1 : 2 * n + 2])


def _certify(curve: PolynomialCurve, s=None) -> PolynomialCurve:
    xi = simplicity_margin(curve)
    if not xi > 0:
        where = "" if s is None else f" at s = {s:.6g}"
        raise BreakdownError(f"simplicity margin xi = {xi:.6g} <= 0{where}: curve is no longer regular", s=s, xi=xi)
    return curve


# --------------------------------------------------------------------------
# seeds
# --------------------------------------------------------------------------


def _leading_alpha(m: HarmonicMoments) -> np.ndarray:
    """alpha*_j = (j+1) conj(t_{j+1}) and alpha_0 from the t_1 equation."""
    n = m.n
    al = np.zeros(n + 1, dtype=complex)
    for j in range(1, n + 1):
        al[j] = (j + 1) * np.conj(m.tj(j + 1))
    t1 = m.tj(1)
    if t1 != 0 and abs(al[1]) < 1:
        al[0] = (np.conj(t1) + al[1] * t1) / (1 - abs(al[1]) ** 2)
    return al


def _leading_rho(t0: float, al: np.ndarray) -> float:
    """Smallest positive root of rho - sum_j j |alpha_j|^2 rho^j = t0.

    The map rho -> t0 + sum_j j |alpha_j|^2 rho^j is increasing and convex on
    rho >= 0, so iterating it from t0 climbs monotonically to that root.
    """
    w = np.arange(al.size) * np.abs(al) ** 2
    rho = float(t0)
    for _ in range(500):
        nxt = t0 + float(np.polynomial.polynomial.polyval(rho, w))
        if not np.isfinite(nxt) or nxt > 1e6 * max(t0, 1.0):
            break
        if abs(nxt - rho) <= 1e-15 * nxt:
            return nxt
        rho = nxt
    else:
        return rho
    # no root: tau_0(rho) = 1 - 4|t_2|^2 + O(rho) with |alpha_1| = 2|t_2|
    a1 = abs(al[1]) if al.size > 1 else 0.0
    return float(t0 / max(1 - a1**2, 1e-3))


def _correction(m: HarmonicMoments, rho: float, al: np.ndarray) -> np.ndarray:
    """alpha* + rho phi with phi from the O(rho) block system (zero if singular or t_1 != 0)."""
    if m.tj(1) != 0:
        return al
    try:
        phi = solve_block_system(BlockSystem.from_moments(m))
    except NearSingularError:
        return al
    return al + rho * phi


def _near_slit_alpha(m: HarmonicMoments, rho: float) -> np.ndarray:
    """Seed near t_2 = 1/2 via the null-vector split psi = alpha_00 + zeta.

    The correction system is nearly singular there; alpha_00 spans its
    limiting kernel and zeta solves the system with an O(eta) right side,
    so zeta stays bounded as eta -> 0.
    """
    al = _leading_alpha(m)
    sys = BlockSystem.from_moments(m)
    t2 = m.tj(2)
    tau2 = t2 / abs(t2) if t2 != 0 else 1.0
    null = np.zeros(m.n + 1, dtype=complex)
    null[0] = np.conj(np.sqrt(tau2))  # conj(x) = tau2 x, principal root
    r1, r2 = sys.residuals(null)  # residual of the null vector = M null - rhs
    zsys = BlockSystem(sys.K, -r2)  # rhs for zeta: rhs - M null
    try:
        zeta = solve_block_system(zsys)
    except NearSingularError:
        zeta = np.zeros_like(null)
    return al + rho * (null + zeta)


def _scaled_to_a(alpha: np.ndarray, r: float) -> np.ndarray:
    return alpha * r ** np.arange(alpha.size)


# --------------------------------------------------------------------------
# regular inversion
# --------------------------------------------------------------------------


def _check_regular(m: HarmonicMoments):
    if m.t0 is None:
        raise ValidationError("t0 is required for inversion")
    if not abs(m.tj(2)) < 0.5 - 1e-3:
        raise OutOfRegimeError(f"|t2| = {abs(m.tj(2)):.6g} is outside the regular regime |t2| < 1/2 - 1e-3")


def _solve_full(m: HarmonicMoments, al: np.ndarray, rho: float) -> PolynomialCurve:
    n = m.n
    r = np.sqrt(rho)
    a = _scaled_to_a(al, r)
    x0 = np.concatenate([[r], a.real, a.imag])
    tol = NEWTON_TOL * (1 + abs(m.t0))
    x, _ = _newton(_full_system(m, n), x0, tol, what="regular inversion")
    return PolynomialCurve(x[0], x[1 : n + 2] + 1j * x[n + 2 :])


def invert_regular(m: HarmonicMoments) -> PolynomialCurve:
    _check_regular(m)
    al = _leading_alpha(m)
    rho = _leading_rho(m.t0, al)
    curve = None
    for seed in (_correction(m, rho, al), al):
        try:
            curve = _solve_full(m, seed, rho)
            break
        except NoSolutionError:
            continue
    if curve is None:
        curve = _continuation_in_t0(m)
    _certify(curve)
    _verify_roundtrip(curve, m)
    return curve


def _continuation_in_t0(m: HarmonicMoments) -> PolynomialCurve:
    """Follow t0 -> theta t0 from a tiny, well-seeded area up to the target."""
    thetas = np.geomspace(1e-4, 1.0, 25)
    prev = None
    for th in thetas:
        mt = HarmonicMoments(m.t0 * th, m.t)
        if prev is None:
            al = _leading_alpha(mt)
            rho = _leading_rho(mt.t0, al)
            prev = _solve_full(mt, _correction(mt, rho, al), rho)
        else:
            al = prev.alpha
            prev = _solve_full(mt, al, prev.rho)
    return prev


def _verify_roundtrip(curve: PolynomialCurve, m: HarmonicMoments, tol=1e-10):
    try:
        fm = forward_moments(curve)
    except PrecisionError as e:
        raise NoSolutionError(f"recovered curve is not admissible: {e}") from e
    err = np.max(np.abs(fm.t - m.t), initial=0.0)
    if m.t0 is not None:
        err = max(err, abs(fm.t0 - m.t0))
    if err > tol * (1 + abs(m.t0 or 0)) * 10:
        raise NoSolutionError(f"roundtrip residual {err:.3e} too large")


# --------------------------------------------------------------------------
# deformation schedules
# --------------------------------------------------------------------------


def admissible_radius(tau) -> tuple[float, float]:
    """(r_hat, r_bar) for tau = (tau_1, ..., tau_{n+1}).

    r_hat: positive root of 2 sum_{j=1..n} j (j+1)^2 |tau_{j+1}|^2 r^{2j} = 1.
    r_bar: positive root of r/2 = sum_{j=2..n} j (j+1) r^j |tau_{j+1}|  (inf if absent).
    """
    tau = np.asarray(tau, dtype=complex).ravel()
    n = tau.size - 1
    if n < 1:
        raise ValidationError("tau must contain at least tau_1 and tau_2")
    if abs(abs(tau[1]) - 1) > 1e-14:
        raise ValidationError(f"|tau_2| must be 1, got {abs(tau[1])}")
    # r_hat in x = r^2: sum_j c_j x^j = 1/2, increasing in x
    c = np.array([0.0] + [2 * j * (j + 1) ** 2 * abs(tau[j]) ** 2 for j in range(1, n + 1)])
    poly = c.copy()
    poly[0] = -1.0
    roots = np.roots(poly[::-1])
    xs = [z.real for z in roots if abs(z.imag) < 1e-10 and z.real > 0]
    r_hat = float(np.sqrt(min(xs)))
    # r_bar: 1/2 = sum_{j>=2} j (j+1) |tau_{j+1}| r^{j-1}
    d = np.array([0.0] + [j * (j + 1) * abs(tau[j]) if j >= 2 else 0.0 for j in range(1, n + 1)])
    if not np.any(d[2:] > 0):
        return r_hat, float("inf")
    poly = np.zeros(n)  # ascending powers of r, index p <-> r^p
    for j in range(2, n + 1):
        poly[j - 1] = d[j]
    poly[0] = -0.5
    roots = np.roots(np.trim_zeros(poly[::-1], "f"))
    rs = [z.real for z in roots if abs(z.imag) < 1e-10 and z.real > 0]
    return r_hat, float(min(rs))


@dataclass(frozen=True)
class DeformationSchedule:
    """s -> t(s): t_1 = 0, t_2 = sqrt(1-s)/2 exp(i s^D2 phi), t_j = s^Dj tau_j.

    freeze_t2 selects the degenerate family t_1 = t_2 = 0 where only the
    direction of (t_3..t_{n+1}) is prescribed and the area is driven to zero
    as t_0 = r^2 s.
    """

    r: float
    phi: float
    tau: np.ndarray
    delta: np.ndarray
    freeze_t2: bool = False

    def __post_init__(self):
        tau = np.array(self.tau, dtype=complex, copy=True).ravel()
        delta = np.array(self.delta, dtype=float, copy=True).ravel()
        if tau.size < 2:
            raise ValidationError("tau must have length n+1 >= 2")
        if delta.size != tau.size - 1:
            raise ValidationError(f"delta must hold Delta_2..Delta_{tau.size}, got {delta.size} values")
        if tau[0] != 0:
            raise ValidationError("tau_1 must be exactly 0")
        if abs(abs(tau[1]) - 1) >= 1e-14:
            raise ValidationError(f"|tau_2| must be 1, got {abs(tau[1])!r}")
        if np.any(delta < 1):
            raise ValidationError("every Delta_j must be >= 1")
        if not self.r > 0:
            raise ValidationError("r must be positive")
        if self.freeze_t2 and not np.any(tau[2:] != 0):
            raise ValidationError("freeze_t2 needs a nonzero tau_j for some j >= 3")
        tau.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "phi", float(self.phi))
        r0 = self.r0
        if self.r >= r0:
            # the radius bound is sufficient, not necessary: every curve is re-certified
            warnings.warn(f"r = {self.r} is not below the admissibility radius r0 = {r0:.6g}", stacklevel=2)

    @property
    def n(self) -> int:
        return self.tau.size - 1

    @property
    def r0(self) -> float:
        return min(admissible_radius(self.tau))

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "phi": self.phi,
            "tau": [[float(c.real), float(c.imag)] for c in self.tau],
            "delta": [float(d) for d in self.delta],
            "freeze_t2": self.freeze_t2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationSchedule":
        return cls(
            d["r"],
            d.get("phi", 0.0),
            [complex(re, im) for re, im in d["tau"]],
            d["delta"],
            bool(d.get("freeze_t2", False)),
        )


def schedule_moments(schedule: DeformationSchedule, s: float) -> HarmonicMoments:
    """Target moments at parameter s; t0 is left unset (None).

    In freeze_t2 mode t_1 = t_2 = 0, the t_j carry only the prescribed
    direction tau_j, and t0 = r^2 s is returned as the area target.
    """
    if not (0 < s <= 1):
        raise DomainError(f"s must lie in (0, 1], got {s}")
    tau, delta = schedule.tau, schedule.delta
    t = np.zeros(schedule.n + 1, dtype=complex)
    if schedule.freeze_t2:
        t[2:] = tau[2:]
        return HarmonicMoments(schedule.r**2 * s, t)
    t[1] = np.sqrt(1 - s) / 2 * np.exp(1j * s ** delta[0] * schedule.phi)
    t[2:] = s ** delta[1:] * tau[2:]
    return HarmonicMoments(None, t)


@dataclass(frozen=True)
class TrajectoryPoint:
    s: float
    curve: PolynomialCurve
    moments: HarmonicMoments
    regime: str = "regular"

    @property
    def xi(self) -> float:
        return simplicity_margin(self.curve)

    @property
    def s_eff(self) -> float:
        """t0 / r^2, the matched internal parameter of the slit limit."""
        return self.moments.t0 / self.curve.r**2


def _seed_alpha(schedule: DeformationSchedule, target: HarmonicMoments) -> tuple[np.ndarray, str]:
    rho = schedule.r**2
    if abs(target.tj(2)) < REGIME_SWITCH:
        al = _leading_alpha(target)
        return _correction(target, rho, al), "regular"
    return _near_slit_alpha(target, rho), "near_slit"


def _solve_fixed_r(schedule: DeformationSchedule, s: float, seed_a: np.ndarray | None):
    """Fixed-r Newton at parameter s. Returns (curve, regime)."""
    r = schedule.r
    n = schedule.n
    target = schedule_moments(schedule, s)
    tol = NEWTON_TOL * (1 + r**2)
    if seed_a is None:
        al, regime = _seed_alpha(schedule, target)
        seed_a = _scaled_to_a(al, r)
    else:
        regime = "regular" if abs(target.tj(2)) < REGIME_SWITCH else "near_slit"
    if schedule.freeze_t2:
        tau = np.asarray(schedule.tau)
        j = int(np.argmax(np.abs(tau[2:]))) + 2
        c0 = PolynomialCurve(r, seed_a)
        mu0 = (raw_moments(c0)[j] / tau[j]).real
        x0 = np.concatenate([seed_a.real, seed_a.imag, [mu0]])
        fun = _frozen_system(r, target.t0, tau)
    else:
        x0 = np.concatenate([seed_a.real, seed_a.imag])
        fun = _fixed_r_system(r, np.asarray(target.t))
    x, _ = _newton(fun, x0, tol, what=f"fixed-r solve at s = {s:.6g}")
    return _curve_from_x(r, x, n), regime


def _freeze_seed(schedule: DeformationSchedule, s: float) -> np.ndarray:
    """a_j along conj(tau_{j+1}) with sum_j j |a_j|^2 = r^2 (1 - s), i.e. the target area."""
    r = schedule.r
    a = np.zeros(schedule.n + 1, dtype=complex)
    a[2:] = np.conj(schedule.tau[2:])
    w = np.sum(np.arange(schedule.n + 1) * np.abs(a) ** 2)
    return a * r * np.sqrt((1 - s) / w)


def _step(schedule, s, prev: TrajectoryPoint | None, depth=0):
    """Solve at s from the previous point, bisecting the step in log s on failure."""
    seed = None if prev is None else np.asarray(prev.curve.a)
    if schedule.freeze_t2:
        # previous coefficients rescaled to the new area; t0 is flat in a at the circle
        w = 0.0 if seed is None else np.sum(np.arange(seed.size) * np.abs(seed) ** 2)
        if w > 1e-12 * schedule.r**2:
            seed = seed * schedule.r * np.sqrt((1 - s) / w)
        else:
            seed = _freeze_seed(schedule, s)
    try:
        curve, regime = _solve_fixed_r(schedule, s, seed)
        return curve, regime
    except NoSolutionError:
        if prev is None or depth >= 8:
            raise
    mid = float(np.sqrt(prev.s * s))
    curve_mid, regime = _step(schedule, mid, prev, depth + 1)
    mid_pt = TrajectoryPoint(mid, curve_mid, _point_moments(curve_mid, mid), regime)
    return _step(schedule, s, mid_pt, depth + 1)


def _point_moments(curve: PolynomialCurve, s) -> HarmonicMoments:
    _certify(curve, s)
    try:
        return forward_moments(curve)
    except PrecisionError as e:
        raise NoSolutionError(f"solution at s = {s:.6g} is not admissible: {e}", s=s) from e


def deform(schedule: DeformationSchedule, s_values) -> list[TrajectoryPoint]:
    """Follow the schedule along strictly decreasing s, warm-starting each step.

    Raises BreakdownError (carrying .s and the partial .trajectory) as soon as
    a step loses simplicity or has no solution.
    """
    s_values = np.asarray(s_values, dtype=float).ravel()
    if s_values.size == 0:
        return []
    if np.any(s_values <= 0) or np.any(s_values > 1):
        raise DomainError("s values must lie in (0, 1]")
    if np.any(np.diff(s_values) >= 0):
        raise ValidationError("s values must be strictly decreasing")
    traj: list[TrajectoryPoint] = []
    prev = None
    for s in s_values:
        try:
            curve, regime = _step(schedule, float(s), prev)
            moments = _point_moments(curve, float(s))
        except BreakdownError as e:
            if e.s is None:
                e.s = float(s)
            e.trajectory = traj
            raise
        prev = TrajectoryPoint(float(s), curve, moments, regime)
        traj.append(prev)
    return traj


def asymptotic_residuals(point: TrajectoryPoint) -> dict:
    """Deviations from the slit-limit asymptotics in the scaled variables.

    alpha_1 should approach 1 - s_eff/2 while alpha_0 and alpha_j (j >= 2)
    vanish faster than s.
    """
    al = point.curve.alpha
    s = point.s_eff
    return {
        "s_eff": s,
        "alpha1_dev": abs(al[1] - (1 - s / 2)) if al.size > 1 else float("nan"),
        "alpha0_over_s": abs(al[0]) / point.s,
        "alphaj_over_s": float(np.max(np.abs(al[2:]), initial=0.0)) / point.s,
    }


# --------------------------------------------------------------------------
# near-slit inversion at fixed r
# --------------------------------------------------------------------------


def invert_near_slit(m: HarmonicMoments, schedule: DeformationSchedule, match_t: bool = True) -> PolynomialCurve:
    """Recover the curve with radius schedule.r and area m.t0 on the schedule.

    t0 decreases monotonically in lambda = (1 - s)/4, so s is bracketed by a
    coarse sweep from s = 1 and then located with brentq. When match_t is
    set, m.t must agree with the schedule's moments at the solution.
    """
    if m.t0 is None:
        raise ValidationError("t0 is required for inversion")
    if schedule.freeze_t2:
        raise ValidationError("near-slit inversion needs a schedule with t_2 -> 1/2")
    if m.n != schedule.n:
        raise ValidationError(f"moment degree {m.n} does not match schedule degree {schedule.n}")
    target = m.t0
    cache: dict[float, TrajectoryPoint] = {}

    def solve(s, near: TrajectoryPoint | None):
        if s in cache:
            return cache[s]
        curve, regime = _step(schedule, s, near)
        pt = TrajectoryPoint(s, curve, _point_moments(curve, s), regime)
        cache[s] = pt
        return pt

    top = solve(1.0, None)
    if target > top.moments.t0 * (1 + 1e-12):
        raise OutOfRegimeError(
            f"t0 = {target:.6g} exceeds the schedule's maximal area {top.moments.t0:.6g} (lambda < 0)"
        )
    hi, lo = top, None
    s = 1.0
    while lo is None:
        s *= 0.7
        if s < 1e-12:
            raise OutOfRegimeError("t0 is too small to bracket (lambda -> 1/4)")
        pt = solve(s, hi)
        if pt.moments.t0 <= target:
            lo = pt
        else:
            hi = pt

    def g(s):
        near = min((lo, hi), key=lambda p: abs(np.log(p.s / s)))
        return solve(s, near).moments.t0 - target

    s_star = brentq(g, lo.s, hi.s, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    near = min((lo, hi), key=lambda p: abs(p.s - s_star))
    pt = solve(s_star, near)
    curve = pt.curve
    # polish t0 exactly: joint Newton in (a, s) is unnecessary once brentq has converged
    if match_t:
        want = schedule_moments(schedule, s_star).t
        err = np.max(np.abs(np.asarray(m.t) - want))
        if err > 1e-8 * (1 + np.max(np.abs(want))):
            raise OutOfRegimeError(
                f"moments are not of the schedule's scaled form (mismatch {err:.3e} at s = {s_star:.6g})"
            )
    return _certify(curve, s_star)


def lambda_of(s: float) -> float:
    return (1 - s) / 4
