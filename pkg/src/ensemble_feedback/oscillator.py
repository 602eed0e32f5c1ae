"""Gain-scheduled oscillator family: gain threshold, open-loop synthesis by
Bernstein approximation, and the explicit sup-norm error bound.

The family is x' = A_k(theta) x + b_g(theta) u on [-theta_star, theta_star]
with A_k = [[0, 1], [k g(theta) - theta^2, 0]] and b_g = [0, g(theta)], for a
zero-free strictly monotone gain profile g.  Past a computable feedback gain
threshold, h_k(theta) = k g(theta) - theta^2 is strictly monotone, and a
polynomial p(z) = q(z^2) + r(z^2) z steers the whole family near a Lipschitz
target profile; the accuracy is controlled by an explicit sqrt(log n / n)
bound built from Lipschitz constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .systems import PairSamples, ParamArc, ParamGrid, PolyScalar

H_INV_TOL = 1e-12


@dataclass(frozen=True)
class OscillatorEnsemble:
    """Oscillator family data: arc half-width, gain profile, feedback gain."""

    theta_star: float
    g: PolyScalar
    k: float | None = None

    def __post_init__(self):
        if self.theta_star <= 0:
            raise DomainError("theta_star must be positive")
        if not self.g.is_real():
            raise DomainError("gain profile must have real coefficients")

    @property
    def arc(self) -> ParamArc:
        return ParamArc(-self.theta_star, self.theta_star)

    def grid(self, count: int = 201) -> ParamGrid:
        return ParamGrid.uniform(self.arc, count)

    def with_k(self, k: float) -> "OscillatorEnsemble":
        return OscillatorEnsemble(self.theta_star, self.g, float(k))

    def validate_profile(self, grid: ParamGrid):
        """Zero-free and strictly monotone on the grid, else precondition error."""
        gv = np.real(self.g(grid.points))
        if np.min(np.abs(gv)) == 0.0:
            idx = int(np.argmin(np.abs(gv)))
            raise PreconditionError("gain profile vanishes on the arc",
                                    theta=float(grid.points[idx]))
        if np.any(gv > 0) and np.any(gv < 0):
            raise PreconditionError("gain profile changes sign on the arc")
        gp = np.real(self.g.derivative()(grid.points))
        if np.min(np.abs(gp)) == 0.0 or (np.any(gp > 0) and np.any(gp < 0)):
            raise PreconditionError("gain profile is not strictly monotone on the arc")

    def normalized(self, grid: ParamGrid):
        """(positive gain profile, matching k, flipped?) leaving A_k unchanged.

        Negating both g and k preserves k*g, so the state matrix is
        untouched while the input column flips sign.
        """
        self.validate_profile(grid)
        gv = np.real(self.g(grid.points))
        if gv[0] < 0:
            g_pos = PolyScalar(tuple(-c for c in self.g.coeffs))
            k_pos = None if self.k is None else -self.k
            return g_pos, k_pos, True
        return self.g, self.k, False

    def A_at(self, theta) -> np.ndarray:
        if self.k is None:
            raise DomainError("feedback gain k is not set")
        hval = self.k * np.real(self.g(theta)) - theta ** 2
        return np.array([[0.0, 1.0], [hval, 0.0]])

    def b_at(self, theta) -> np.ndarray:
        return np.array([0.0, np.real(self.g(theta))])

    def sample(self, grid: ParamGrid) -> PairSamples:
        A = np.stack([self.A_at(th) for th in grid.points]).astype(complex)
        B = np.stack([self.b_at(th) for th in grid.points]).astype(complex)[:, :, None]
        return PairSamples(grid, A, B)


@dataclass(frozen=True)
class GainThreshold:
    """Threshold value with both candidate formulas it maximises over."""

    value: float
    slope_candidate: float
    positivity_candidate: float
    sign_flipped: bool

    def __float__(self):
        return self.value


def k_star(ens: OscillatorEnsemble, grid: ParamGrid) -> GainThreshold:
    """max{ theta_star / min|g|, max 2 theta / g'(theta) } over the grid.

    Computed for the sign-normalized (positive) gain profile; gains beyond
    the threshold make h_k strictly monotone regardless of whether the
    profile increases or decreases.
    """
    g_pos, _, flipped = ens.normalized(grid)
    pts = grid.points
    gv = np.real(g_pos(pts))
    gp = np.real(g_pos.derivative()(pts))
    slope = float(np.max(2.0 * pts / gp))
    positivity = float(ens.theta_star / np.min(np.abs(gv)))
    return GainThreshold(max(slope, positivity), slope, positivity, flipped)


def h_k_map(ens: OscillatorEnsemble, theta):
    """h_k(theta) = k g(theta) - theta^2."""
    if ens.k is None:
        raise DomainError("feedback gain k is not set")
    theta = np.asarray(theta, dtype=float)
    out = ens.k * np.real(ens.g(theta)) - theta ** 2
    return out if out.shape else float(out)


def h_k_inverse(ens: OscillatorEnsemble, z: float, grid: ParamGrid | None = None) -> float:
    """Solve h_k(theta) = z on the arc by bisection.

    Requires a gain beyond the threshold so h_k is strictly monotone; values
    outside [h(-theta_star), h(theta_star)] (or the reversed pair) are
    rejected.
    """
    if grid is None:
        grid = ens.grid()
    threshold = k_star(ens, grid)
    _, k_pos, flipped = ens.normalized(grid)
    if k_pos is None or k_pos <= threshold.value:
        raise PreconditionError(
            f"gain {ens.k} is not beyond the threshold {threshold.value:.6g}")
    lo, hi = -ens.theta_star, ens.theta_star
    h_lo, h_hi = h_k_map(ens, lo), h_k_map(ens, hi)
    increasing = h_hi > h_lo
    z_min, z_max = (h_lo, h_hi) if increasing else (h_hi, h_lo)
    if not z_min <= z <= z_max:
        raise DomainError(f"z={z} outside [{z_min}, {z_max}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= H_INV_TOL:
            break
        if (h_k_map(ens, mid) < z) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BernsteinPoly:
    """Degree-n Bernstein approximant on [0, 1], sampled at i/n.

    Evaluation runs the de Casteljau recurrence (numerically stable at any
    degree); the power-basis coefficients are available for small degrees
    via finite differences.
    """

    values: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return self.values.size - 1

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        b = np.repeat(self.values[:, None], x.size, axis=1).astype(float)
        for _ in range(self.degree):
            b = b[:-1] * (1.0 - x) + b[1:] * x
        out = b[0]
        return float(out[0]) if out.size == 1 else out

    def power_coeffs(self) -> np.ndarray:
        """Ascending power-basis coefficients: C(n, j) * (j-th forward difference)."""
        n = self.degree
        diffs = self.values.astype(float).copy()
        out = np.empty(n + 1)
        for j in range(n + 1):
            out[j] = math.comb(n, j) * diffs[0]
            diffs = np.diff(diffs)
        return out


def bernstein(f, n: int) -> BernsteinPoly:
    """Bernstein approximant of a callable on [0, 1]: samples f at i/n."""
    if n < 1:
        raise DomainError("degree must be at least 1")
    values = np.array([float(f(i / n)) for i in range(n + 1)])
    return BernsteinPoly(values)


@dataclass(frozen=True)
class BoundConstants:
    """Constants entering the explicit error bound (for the normalized profile)."""

    M_f: float
    L_f: float
    M_g: float
    m_g: float
    L_g: float
    c_gP: float
    L_hk_inv: float


def lipschitz_constants(ens: OscillatorEnsemble, f1, f2, L_f: float,
                        grid: ParamGrid) -> BoundConstants:
    """Grid extrema feeding the bound; the target's Lipschitz constant is a
    caller input (the targets are callables, so it cannot be derived)."""
    if ens.k is None:
        raise DomainError("feedback gain k is not set")
    g_pos, k_pos, _ = ens.normalized(grid)
    pts = grid.points
    gv = np.real(g_pos(pts))
    gp = np.real(g_pos.derivative()(pts))
    f_norms = np.hypot(np.array([f1(t) for t in pts]), np.array([f2(t) for t in pts]))
    c_gP = abs(float(g_pos(ens.theta_star).real - g_pos(-ens.theta_star).real))
    h_slope = np.abs(k_pos * gp - 2.0 * pts)
    return BoundConstants(
        M_f=float(np.max(f_norms)),
        L_f=float(L_f),
        M_g=float(np.max(np.abs(gv))),
        m_g=float(np.min(np.abs(gv))),
        L_g=float(np.max(np.abs(gp))),
        c_gP=c_gP,
        L_hk_inv=float(1.0 / np.min(h_slope)),
    )


def error_bound(ens: OscillatorEnsemble, constants: BoundConstants, n: int,
                grid: ParamGrid | None = None) -> float:
    """Explicit sup-norm bound, valid for degrees n >= 3:

    (1 / g(-theta_star)) * (4 M_f / m_g
        + (k c_gP L_hk_inv / 2) * (M_f L_g / m_g^2 + L_f / m_g))
        * sqrt(log n / n)
    """
    if n < 3:
        raise DomainError("the bound requires n >= 3")
    if ens.k is None:
        raise DomainError("feedback gain k is not set")
    if grid is None:
        grid = ens.grid()
    g_pos, k_pos, _ = ens.normalized(grid)
    g_neg = float(np.real(g_pos(-ens.theta_star)))
    if g_neg <= 0:
        raise DomainError("normalized gain profile must be positive at -theta_star")
    c = constants
    amplitude = (4.0 * c.M_f / c.m_g
                 + (abs(k_pos) * c.c_gP * c.L_hk_inv / 2.0)
                 * (c.M_f * c.L_g / c.m_g ** 2 + c.L_f / c.m_g))
    return (amplitude / g_neg) * math.sqrt(math.log(n) / n)


@dataclass(frozen=True)
class SynthesisResult:
    """Open-loop synthesis output for one degree.

    ``power_coeffs`` are the ascending coefficients of the degree 2n+1
    polynomial p(z) = q(z^2) + r(z^2) z; the measured error is evaluated
    through the stable split form (q, r as de Casteljau evaluations composed
    with h_k), not through the power coefficients.
    """

    degree: int
    grid: ParamGrid
    q: BernsteinPoly
    r: BernsteinPoly
    h_interval: tuple
    measured_sup_error: float
    pointwise_errors: np.ndarray = field(repr=False)
    sign_flipped: bool
    threshold: GainThreshold

    @property
    def poly_degree(self) -> int:
        return 2 * self.degree + 1

    def _affine(self):
        z_lo, z_hi = self.h_interval
        span = z_hi - z_lo
        return z_lo, span

    def q_at(self, z):
        z_lo, span = self._affine()
        return self.q((np.asarray(z, dtype=float) - z_lo) / span)

    def r_at(self, z):
        z_lo, span = self._affine()
        return self.r((np.asarray(z, dtype=float) - z_lo) / span)

    def power_coeffs(self) -> np.ndarray:
        """Ascending power-basis coefficients of p; ill-conditioned for large
        degrees, intended for moderate n."""
        from numpy.polynomial import Polynomial as P

        z_lo, span = self._affine()
        chart = P([-z_lo / span, 1.0 / span])
        qz = P(self.q.power_coeffs())(chart).coef
        rz = P(self.r.power_coeffs())(chart).coef
        out = np.zeros(2 * self.degree + 2)
        out[0::2] = np.pad(qz, (0, self.degree + 1 - qz.size))
        out[1::2] = np.pad(rz, (0, self.degree + 1 - rz.size))
        return out


def synthesize(ens: OscillatorEnsemble, f1, f2, n: int, grid: ParamGrid,
               ) -> SynthesisResult:
    """Build the steering polynomial of degree 2n+1 for target (f1, f2).

    Pipeline: normalize the gain sign; map the h_k image interval affinely
    onto [0, 1]; Bernstein-approximate the pulled-back scaled targets
    (f2/g and f1/g through the inverse of h_k); and assemble
    p(z) = q(z^2) + r(z^2) z.  The first state component of p(A_k) b_g equals
    g * r(h_k) and the second g * q(h_k), which is how the sup error over the
    grid is measured.
    """
    if n < 1:
        raise DomainError("degree must be at least 1")
    if ens.k is None:
        raise DomainError("feedback gain k is not set")
    g_pos, k_pos, flipped = ens.normalized(grid)
    threshold = k_star(ens, grid)
    if k_pos <= threshold.value:
        raise PreconditionError(
            f"gain {ens.k} is not beyond the threshold {threshold.value:.6g}")
    ens_pos = OscillatorEnsemble(ens.theta_star, g_pos, k_pos)
    s1 = (lambda t: -f1(t)) if flipped else f1
    s2 = (lambda t: -f2(t)) if flipped else f2

    h_lo_end = h_k_map(ens_pos, -ens.theta_star)
    h_hi_end = h_k_map(ens_pos, ens.theta_star)
    z_lo, z_hi = min(h_lo_end, h_hi_end), max(h_lo_end, h_hi_end)
    span = z_hi - z_lo

    def pulled_back(target):
        def on_unit(x):
            theta = h_k_inverse(ens_pos, z_lo + x * span, grid)
            return target(theta) / float(np.real(g_pos(theta)))

        return on_unit

    q = bernstein(pulled_back(s2), n)
    r = bernstein(pulled_back(s1), n)

    pts = grid.points
    gv = np.real(g_pos(pts))
    x = (h_k_map(ens_pos, pts) - z_lo) / span
    phi1 = gv * r(x)
    phi2 = gv * q(x)
    t1 = np.array([s1(t) for t in pts])
    t2 = np.array([s2(t) for t in pts])
    errors = np.hypot(phi1 - t1, phi2 - t2)
    return SynthesisResult(n, grid, q, r, (z_lo, z_hi), float(np.max(errors)),
                           errors, flipped, threshold)


@dataclass(frozen=True)
class SweepRow:
    degree: int
    measured_error: float
    bound: float


def degree_sweep(ens: OscillatorEnsemble, f1, f2, L_f: float, degrees,
                 grid: ParamGrid) -> list:
    """Synthesis plus bound evaluation over a set of degrees."""
    constants = lipschitz_constants(ens, f1, f2, L_f, grid)
    rows = []
    for n in degrees:
        result = synthesize(ens, f1, f2, n, grid)
        bound = error_bound(ens, constants, n, grid) if n >= 3 else float("nan")
        rows.append(SweepRow(int(n), result.measured_sup_error, bound))
    return rows
