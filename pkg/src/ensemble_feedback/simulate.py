"""Ensemble propagation under parameter-independent inputs.

Discrete time is the primary verification channel: driving the family with
the reversed coefficient sequence of a polynomial p reproduces p(A(theta))
b(theta) exactly, so open-loop synthesis results can be checked by plain
forward simulation.  Continuous-time propagation with piecewise-constant
inputs is provided for demonstrations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DomainError, GridMismatchError
from .systems import PairSamples


class InputMode(Enum):
    DISCRETE = "discrete"
    PIECEWISE_CONSTANT = "piecewise_constant"


@dataclass(frozen=True)
class InputSequence:
    """Input samples u_0..u_{T-1} (each of dimension m)."""

    samples: np.ndarray = field(repr=False)
    mode: InputMode = InputMode.DISCRETE
    dt: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim == 1:
            samples = samples[:, None]
        object.__setattr__(self, "samples", samples)
        if samples.shape[0] < 1:
            raise DomainError("need at least one input sample")
        if self.mode is InputMode.PIECEWISE_CONSTANT:
            if self.dt is None or self.dt <= 0:
                raise DomainError("piecewise-constant inputs need dt > 0")

    @property
    def horizon(self) -> int:
        return self.samples.shape[0]

    @property
    def m(self) -> int:
        return self.samples.shape[1]


def propagate_discrete(pair: PairSamples, u: InputSequence, theta_index: int) -> np.ndarray:
    """State after T steps of x <- A x + B u_t from x = 0."""
    if u.mode is not InputMode.DISCRETE:
        raise DomainError("discrete propagation needs a discrete input")
    A, B = pair.at(theta_index)
    x = np.zeros(pair.n, dtype=complex)
    for t in range(u.horizon):
        x = A @ x + B @ u.samples[t]
    return x


def propagate_discrete_sum(pair: PairSamples, u: InputSequence, theta_index: int) -> np.ndarray:
    """Same state via the explicit sum of A^k B u_{T-1-k} (cross-check form)."""
    A, B = pair.at(theta_index)
    x = np.zeros(pair.n, dtype=complex)
    power = np.eye(pair.n, dtype=complex)
    T = u.horizon
    for k in range(T):
        x = x + power @ (B @ u.samples[T - 1 - k])
        power = power @ A
    return x


def poly_to_input(coeffs) -> InputSequence:
    """Reversed coefficient sequence: driving a single-input pair with it
    makes the final state equal p(A) b for p with those ascending coefficients."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise DomainError("need a non-empty 1-d coefficient sequence")
    return InputSequence(coeffs[::-1].copy()[:, None])


def _step_matrix(A: np.ndarray, dt: float):
    """(e^{A dt}, integral of e^{A s} ds over [0, dt])."""
    n = A.shape[0]
    E = scipy.linalg.expm(A * dt)
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] > 0 and s[-1] > 1e-9 * s[0]:
        G = np.linalg.solve(A, E - np.eye(n, dtype=complex))
    else:
        # series sum A^j dt^(j+1) / (j+1)!, truncated at relative 1e-14
        term = dt * np.eye(n, dtype=complex)
        G = term.copy()
        j = 0
        while True:
            j += 1
            term = term @ A * (dt / (j + 1))
            G = G + term
            if np.linalg.norm(term) <= 1e-14 * max(np.linalg.norm(G), 1e-300):
                break
            if j > 200:
                break
    return E, G


def propagate_continuous(pair: PairSamples, u: InputSequence, theta_index: int) -> np.ndarray:
    """Exact zero-order-hold propagation of x' = A x + B u from x(0) = 0."""
    if u.mode is not InputMode.PIECEWISE_CONSTANT:
        raise DomainError("continuous propagation needs a piecewise-constant input")
    A, B = pair.at(theta_index)
    E, G = _step_matrix(A, u.dt)
    x = np.zeros(pair.n, dtype=complex)
    for t in range(u.horizon):
        x = E @ x + G @ (B @ u.samples[t])
    return x


def propagate_grid(pair: PairSamples, u: InputSequence) -> np.ndarray:
    """Final states at every grid point, shape (N, n)."""
    prop = (propagate_discrete if u.mode is InputMode.DISCRETE else propagate_continuous)
    return np.stack([prop(pair, u, i) for i in range(len(pair.grid))])


def sup_error(pair: PairSamples, u: InputSequence, target: np.ndarray):
    """Largest Euclidean deviation of the final states from the target profile.

    Returns (max deviation, per-point deviations).
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (len(pair.grid), pair.n):
        raise GridMismatchError("target profile shape must be (N, n)")
    states = propagate_grid(pair, u)
    devs = np.linalg.norm(states - target, axis=1)
    return float(np.max(devs)), devs


@dataclass(frozen=True)
class LeastSquaresInput:
    """Polynomial open-loop fit minimising the summed squared deviation."""

    coeffs: np.ndarray
    sup_error: float
    pointwise_errors: np.ndarray = field(repr=False)
    objective: float
    condition_estimate: float
    regularization: float


def least_squares_input(pair: PairSamples, target: np.ndarray, degree: int,
                        regularization: float = 1e-10) -> LeastSquaresInput:
    """Fit complex coefficients c_0..c_d so sum over the grid of
    ||sum_k c_k A^k b - f||^2 is minimal (ridge-regularized normal equations).

    Rank deficiency is absorbed by the regularizer and surfaced through the
    condition estimate rather than raised.
    """
    if pair.m != 1:
        raise DomainError("least-squares input fitting needs m = 1")
    if degree < 0:
        raise DomainError("degree must be non-negative")
    target = np.asarray(target, dtype=complex)
    if target.shape != (len(pair.grid), pair.n):
        raise GridMismatchError("target profile shape must be (N, n)")
    N = len(pair.grid)
    d = degree
    G = np.zeros((d + 1, d + 1), dtype=complex)
    rhs = np.zeros(d + 1, dtype=complex)
    columns = np.empty((N, pair.n, d + 1), dtype=complex)
    for s in range(N):
        A, B = pair.at(s)
        v = B[:, 0].astype(complex)
        for k in range(d + 1):
            columns[s, :, k] = v
            v = A @ v
        V = columns[s]
        G += V.conj().T @ V
        rhs += V.conj().T @ target[s]
    G_reg = G + regularization * np.eye(d + 1)
    coeffs = np.linalg.solve(G_reg, rhs)
    cond = float(np.linalg.cond(G_reg))
    residuals = columns @ coeffs - target
    per_point = np.linalg.norm(residuals, axis=1)
    objective = float(np.sum(per_point ** 2) + regularization * np.linalg.norm(coeffs) ** 2)
    return LeastSquaresInput(coeffs, float(np.max(per_point)), per_point,
                             objective, cond, regularization)
