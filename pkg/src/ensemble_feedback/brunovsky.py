"""Reduction of constant-index reachable pairs to the block shift form.

For a pair with parameter-independent round-robin selection counts
kappa = (kappa_1, ..., kappa_m) summing to n, every parameter value admits a
restricted transform taking the pair to the canonical block pair
(shift-down blocks of sizes kappa_i, unit first-row input columns).  The
construction is pointwise linear algebra in four steps:

1. expand A^{kappa_i} b_i over the selected power basis augmented with the
   vectors A^{kappa_i} b_j (j < i); the cross-column coefficients define a
   unit upper triangular input mixing U, and the basis coefficients are
   rewritten against the mixed columns of B U;
2. build a new state basis v_{l,i} whose columns make A act as a shift plus
   first-row corrections;
3. in that basis B U becomes the canonical input matrix;
4. a feedback built from the rewritten coefficients removes the first-row
   corrections.

The emitted element (T, F, S) satisfies ``T A - A_can T = B_can F`` and
``T B = B_can S`` at every grid point, with S unit upper triangular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError, PreconditionError
from .feedback import SampledTransform, TransformKind, equivalence_residual
from .indices import IndexKind, indices_constant, kronecker_indices
from .systems import DEFAULT_RANK_TOL, PairSamples, ParamGrid, as_samples
from .util import parallel_map

KALMAN_BASIS_COND_LIMIT = 1e12
STEP1_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class BrunovskyPair:
    """Canonical block pair for a given index vector."""

    kappa: tuple
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def samples(self, grid: ParamGrid) -> PairSamples:
        N = len(grid)
        return PairSamples(grid,
                           np.broadcast_to(self.A.astype(complex), (N,) + self.A.shape).copy(),
                           np.broadcast_to(self.B.astype(complex), (N,) + self.B.shape).copy())


def brunovsky_pair(kappa) -> BrunovskyPair:
    """Assemble the block pair: shift-down blocks sized by kappa, one unit
    column per nonzero block; a zero index contributes no block and a zero
    input column."""
    kappa = tuple(int(k) for k in kappa)
    if any(k < 0 for k in kappa):
        raise PreconditionError("indices must be non-negative")
    n = sum(kappa)
    m = len(kappa)
    A = np.zeros((n, n))
    B = np.zeros((n, m))
    offset = 0
    for i, k in enumerate(kappa):
        if k == 0:
            continue
        for l in range(1, k):
            A[offset + l, offset + l - 1] = 1.0
        B[offset, i] = 1.0
        offset += k
    return BrunovskyPair(kappa, A, B)


@dataclass(frozen=True)
class StepCoefficients:
    """Expansion data at one parameter value.

    ``alpha[j, i]`` (j < i) are the cross-column coefficients, ``beta[i][l]``
    and ``beta_mixed[i][l]`` the basis coefficients before/after the input
    mixing (each a length-m vector, l = 1..kappa_i).
    """

    alpha: np.ndarray
    beta: dict
    beta_mixed: dict
    U: np.ndarray
    U_inv: np.ndarray
    step1_residuals: tuple
    kalman_basis_cond: float


def _power_chains(A, B, up_to):
    """chains[j][l] = A^l b_j for l = 0..up_to."""
    m = B.shape[1]
    chains = []
    for j in range(m):
        chain = [B[:, j].astype(complex)]
        for _ in range(up_to):
            chain.append(A @ chain[-1])
        chains.append(chain)
    return chains


def _ordered_basis(chains, kappa):
    cols = []
    for i, k in enumerate(kappa):
        cols.extend(chains[i][:k])
    return np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)


def step1_coefficients(A, B, kappa, tol: float = DEFAULT_RANK_TOL,
                       theta: float = float("nan")) -> StepCoefficients:
    """Solve the expansion of A^{kappa_i} b_i for every i and derive the
    input mixing U and the mixed coefficients.

    The linear system is generally underdetermined (the augmenting vectors
    are redundant over the full basis); the minimum-norm least-squares
    solution is taken and its residual must vanish to within
    ``STEP1_RESIDUAL_TOL`` or the constant-index hypothesis has failed at
    this parameter value.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n, m = B.shape
    kappa = tuple(int(k) for k in kappa)
    max_k = max(kappa) if kappa else 0
    chains = _power_chains(A, B, max_k)

    basis = _ordered_basis(chains, kappa)
    if basis.shape[1] != n:
        raise PreconditionError(f"index vector {kappa} does not sum to n={n}", theta=theta)
    cond = float(np.linalg.cond(basis))
    if cond > KALMAN_BASIS_COND_LIMIT:
        raise NumericalError(
            f"selected power basis has condition number {cond:.3e} at theta={theta}",
            theta=theta)

    alpha = np.zeros((m, m), dtype=complex)
    beta = {}
    residuals = []
    for i in range(m):
        k_i = kappa[i]
        cols = [chains[j][k_i] for j in range(i)]
        for l in range(1, k_i + 1):
            for j in range(m):
                cols.append(chains[j][l - 1])
        rhs = chains[i][k_i]
        if cols:
            M = np.column_stack(cols)
            x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            res = float(np.linalg.norm(M @ x - rhs))
        else:
            x = np.zeros(0, dtype=complex)
            res = float(np.linalg.norm(rhs))
        scale = max(1.0, float(np.linalg.norm(rhs)))
        if res > STEP1_RESIDUAL_TOL * scale:
            raise PreconditionError(
                f"expansion residual {res:.3e} at theta={theta}; index vector "
                f"{kappa} is not valid here", theta=theta)
        residuals.append(res)
        alpha[:i, i] = x[:i]
        beta[i] = {l: x[i + (l - 1) * m: i + l * m] for l in range(1, k_i + 1)}

    U = np.eye(m, dtype=complex)
    for i in range(m):
        U[:i, i] = -alpha[:i, i]
    U_inv = scipy.linalg.solve_triangular(U, np.eye(m, dtype=complex), unit_diagonal=True)
    beta_mixed = {i: {l: U_inv @ vec for l, vec in per.items()} for i, per in beta.items()}
    return StepCoefficients(alpha, beta, beta_mixed, U, U_inv, tuple(residuals), cond)


def step2_basis(A, B_mixed, kappa, coeffs: StepCoefficients,
                theta: float = float("nan")) -> np.ndarray:
    """Column-stack the corrected power vectors of the mixed input columns.

    v_{1,i} = (B U) e_i and v_{l+1,i} = A v_{l,i} - (B U) beta_mixed[i][k_i+1-l],
    which reproduces the explicit corrected-power formula and must be
    invertible under the constant-index hypothesis.
    """
    A = np.asarray(A, dtype=complex)
    cols = []
    for i, k_i in enumerate(kappa):
        if k_i == 0:
            continue
        v = B_mixed[:, i].copy()
        cols.append(v)
        for l in range(1, k_i):
            v = A @ v - B_mixed @ coeffs.beta_mixed[i][k_i + 1 - l]
            cols.append(v)
    T = np.column_stack(cols)
    s = np.linalg.svd(T, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise NumericalError(
            f"state basis singular at theta={theta}; constant-index hypothesis "
            "violated", theta=theta)
    return T


def step4_feedback(kappa, coeffs: StepCoefficients) -> np.ndarray:
    """Feedback cancelling the first-row corrections of each block.

    Block i holds the mixed coefficient vectors in reversed inner order:
    column l of block i is beta_mixed[i][kappa_i + 1 - l], so that
    T^-1 A T - B_can F = A_can holds exactly.
    """
    m = len(kappa)
    n = sum(kappa)
    F = np.zeros((m, n), dtype=complex)
    offset = 0
    for i, k_i in enumerate(kappa):
        for l in range(1, k_i + 1):
            F[:, offset + l - 1] = coeffs.beta_mixed[i][k_i + 1 - l]
        offset += k_i
    return F


@dataclass(frozen=True)
class PointConstruction:
    """Everything the four steps produce at one parameter value."""

    theta: float
    coeffs: StepCoefficients
    state_basis: np.ndarray
    state_basis_inv: np.ndarray
    feedback_raw: np.ndarray

    @property
    def transform_triple(self):
        """(T, F, S) satisfying the defining relations against the canonical pair."""
        return (self.state_basis_inv,
                self.feedback_raw @ self.state_basis_inv,
                self.coeffs.U_inv)


def construct_at(A, B, kappa, tol: float = DEFAULT_RANK_TOL,
                 theta: float = float("nan")) -> PointConstruction:
    """Run steps 1-4 at a single parameter value."""
    coeffs = step1_coefficients(A, B, kappa, tol, theta)
    B_mixed = np.asarray(B, dtype=complex) @ coeffs.U
    T = step2_basis(A, B_mixed, kappa, coeffs, theta)
    T_inv = np.linalg.solve(T, np.eye(T.shape[0], dtype=complex))
    F = step4_feedback(kappa, coeffs)
    return PointConstruction(float(theta), coeffs, T, T_inv, F)


@dataclass(frozen=True)
class BrunovskyResult:
    """Constructed transform plus its per-point verification report."""

    transform: SampledTransform
    canonical: BrunovskyPair
    kappa: tuple
    residual_a: np.ndarray
    residual_b: np.ndarray
    discontinuity: np.ndarray
    basis_conditions: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(np.max(self.residual_a), np.max(self.residual_b)))

    @property
    def max_discontinuity(self) -> float:
        return float(np.max(self.discontinuity)) if self.discontinuity.size else 0.0


def to_brunovsky(pair, grid: ParamGrid | None = None,
                 tol: float = DEFAULT_RANK_TOL) -> BrunovskyResult:
    """Construct, per grid point, the restricted transform onto the canonical
    block pair, and verify the defining relations pointwise.

    Preconditions: the round-robin indices are identical at every grid point
    and sum to n.  The report carries the two relation residuals per point
    and the max adjacent-point jump of T as a continuity diagnostic.
    """
    samples = as_samples(pair, grid)
    grid = samples.grid
    A0, B0 = samples.at(0)
    kappa = kronecker_indices(A0, B0, tol).values
    if sum(kappa) != samples.n:
        raise PreconditionError(
            f"pair is not reachable at theta={grid.points[0]} (indices {kappa})",
            theta=float(grid.points[0]))
    report = indices_constant(samples, None, IndexKind.KRONECKER, tol)
    if not report.constant:
        raise PreconditionError(
            f"indices change from {report.reference} to {report.mismatch_values} "
            f"at theta={report.mismatch_theta}", theta=report.mismatch_theta,
            detail=report)

    def build(idx):
        A, B = samples.at(idx)
        return construct_at(A, B, kappa, tol, theta=float(grid.points[idx]))

    points = parallel_map(build, range(len(grid)))
    T = np.stack([p.transform_triple[0] for p in points])
    F = np.stack([p.transform_triple[1] for p in points])
    S = np.stack([p.transform_triple[2] for p in points])
    transform = SampledTransform(grid, T, F, S, TransformKind.RESTRICTED)

    canonical = brunovsky_pair(kappa)
    res_a, res_b = equivalence_residual(transform, samples, canonical.samples(grid))
    jumps = (np.linalg.norm(T[1:] - T[:-1], axis=(1, 2))
             if len(grid) > 1 else np.zeros(0))
    conds = np.array([p.coeffs.kalman_basis_cond for p in points])
    return BrunovskyResult(transform, canonical, kappa, res_a, res_b, jumps, conds)
