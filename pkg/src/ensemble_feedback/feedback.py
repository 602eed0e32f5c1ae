"""Structured feedback transformations, their group law and the induced
action on matrix pairs.

A transform is a triple (T, F, S): a state change of basis T (pointwise
invertible), a feedback F and an input change of basis S.  In the restricted
flavour S is unit upper triangular at every parameter value.  The group law:

    (T1, F1, S1) o (T2, F2, S2) = (T1 T2, F1 T2 + S1 F2, S1 S2)
    identity = (I, 0, I)
    inverse(T, F, S) = (T^-1, -S^-1 F T^-1, S^-1)

and the action on a pair (A, B):

    (T, F, S) . (A, B) = (T (A - B S^-1 F) T^-1, T B S^-1).

The same triple that maps (A1, B1) to (A2, B2) under the action also solves
the linear relations ``T A1 - A2 T = B2 F`` and ``T B1 = B2 S``; the two
formulations are interchangeable and `equivalence_residual` measures the
relations directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DomainError, GridMismatchError, NumericalError
from .systems import PairSamples, ParamArc, ParamGrid, PolyMatrix

INVERTIBILITY_TOL = 1e-10
TRIANGULAR_TOL = 1e-12


class TransformKind(Enum):
    RESTRICTED = "restricted"
    GENERAL = "general"


def _check_unit_upper_poly(S: PolyMatrix):
    m = S.shape[0]
    for i in range(m):
        diag = S.coeffs[i, i]
        if diag[0] != 1 or np.any(diag[1:] != 0):
            raise DomainError("restricted transform needs exact unit diagonal in S")
        for j in range(i):
            if np.any(S.coeffs[i, j] != 0):
                raise DomainError("restricted transform needs zero below-diagonal S entries")


@dataclass(frozen=True)
class PolyTransform:
    """Transform with exact polynomial entries (for hand-built elements)."""

    T: PolyMatrix
    F: PolyMatrix
    S: PolyMatrix
    arc: ParamArc
    kind: TransformKind = TransformKind.RESTRICTED

    def __post_init__(self):
        n = self.T.shape[0]
        m = self.S.shape[0]
        if self.T.shape != (n, n) or self.S.shape != (m, m) or self.F.shape != (m, n):
            raise DomainError("transform shapes must be (n,n), (m,n), (m,m)")
        if self.kind is TransformKind.RESTRICTED:
            _check_unit_upper_poly(self.S)

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def m(self):
        return self.S.shape[0]

    def sample(self, grid: ParamGrid) -> "SampledTransform":
        return SampledTransform(grid, self.T(grid.points), self.F(grid.points),
                                self.S(grid.points), self.kind)

    @classmethod
    def identity(cls, n: int, m: int, arc: ParamArc) -> "PolyTransform":
        return cls(PolyMatrix.constant(np.eye(n)), PolyMatrix.constant(np.zeros((m, n))),
                   PolyMatrix.constant(np.eye(m)), arc)

    @classmethod
    def constant(cls, T, F, S, arc: ParamArc,
                 kind: TransformKind = TransformKind.RESTRICTED) -> "PolyTransform":
        return cls(PolyMatrix.constant(np.atleast_2d(T)), PolyMatrix.constant(np.atleast_2d(F)),
                   PolyMatrix.constant(np.atleast_2d(S)), arc, kind)


@dataclass(frozen=True)
class SampledTransform:
    """Transform given by per-grid-point matrices (for constructed elements)."""

    grid: ParamGrid
    T: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    kind: TransformKind = TransformKind.RESTRICTED

    def __post_init__(self):
        N = len(self.grid)
        if self.T.shape[0] != N or self.F.shape[0] != N or self.S.shape[0] != N:
            raise GridMismatchError("sample counts differ from grid length")
        n = self.T.shape[1]
        m = self.S.shape[1]
        if self.T.shape != (N, n, n) or self.S.shape != (N, m, m) or self.F.shape != (N, m, n):
            raise DomainError("transform sample shapes must be (N,n,n), (N,m,n), (N,m,m)")

    @property
    def n(self):
        return self.T.shape[1]

    @property
    def m(self):
        return self.S.shape[1]

    @classmethod
    def identity(cls, grid: ParamGrid, n: int, m: int) -> "SampledTransform":
        N = len(grid)
        return cls(grid,
                   np.broadcast_to(np.eye(n, dtype=complex), (N, n, n)).copy(),
                   np.zeros((N, m, n), dtype=complex),
                   np.broadcast_to(np.eye(m, dtype=complex), (N, m, m)).copy())

    def max_unit_triangular_defect(self) -> float:
        """How far the S part is from unit upper triangular, over all points."""
        m = self.m
        diag = self.S[:, np.arange(m), np.arange(m)]
        defect = float(np.max(np.abs(diag - 1.0))) if diag.size else 0.0
        if m > 1:
            lower = np.tril(self.S, -1)
            defect = max(defect, float(np.max(np.abs(lower))))
        return defect


def _coerce_same_grid(t1, t2):
    """Return both transforms in a common representation."""
    if isinstance(t1, PolyTransform) and isinstance(t2, PolyTransform):
        return t1, t2
    if isinstance(t1, PolyTransform):
        t1 = t1.sample(t2.grid)
    if isinstance(t2, PolyTransform):
        t2 = t2.sample(t1.grid)
    if not t1.grid.same_as(t2.grid):
        raise GridMismatchError("transforms live on different grids")
    return t1, t2


def compose(t1, t2):
    """Group composition; exact on polynomial operands, pointwise on samples."""
    t1, t2 = _coerce_same_grid(t1, t2)
    kind = (TransformKind.RESTRICTED
            if t1.kind is TransformKind.RESTRICTED and t2.kind is TransformKind.RESTRICTED
            else TransformKind.GENERAL)
    if isinstance(t1, PolyTransform):
        T = t1.T.matmul(t2.T)
        F = t1.F.matmul(t2.T).add(t1.S.matmul(t2.F))
        S = t1.S.matmul(t2.S)
        return PolyTransform(T, F, S, t1.arc, kind)
    return SampledTransform(t1.grid,
                            t1.T @ t2.T,
                            t1.F @ t2.T + t1.S @ t2.F,
                            t1.S @ t2.S,
                            kind)


def _invert_T(T: np.ndarray, grid: ParamGrid) -> np.ndarray:
    n = T.shape[1]
    s = np.linalg.svd(T, compute_uv=False)
    bad = np.nonzero(s[:, -1] <= INVERTIBILITY_TOL * s[:, 0])[0]
    if bad.size:
        theta = float(grid.points[bad[0]])
        raise NumericalError(f"T(theta) numerically singular at theta={theta}", theta=theta)
    return np.linalg.solve(T, np.broadcast_to(np.eye(n, dtype=complex), T.shape))


def _invert_S(S: np.ndarray, kind: TransformKind, grid: ParamGrid) -> np.ndarray:
    m = S.shape[1]
    eye = np.eye(m, dtype=complex)
    if kind is TransformKind.RESTRICTED:
        # unit-triangular back substitution keeps the inverse's diagonal
        # exactly one and its lower part exactly zero
        out = np.empty_like(S)
        for idx in range(S.shape[0]):
            out[idx] = scipy.linalg.solve_triangular(S[idx], eye, unit_diagonal=True)
        return out
    s = np.linalg.svd(S, compute_uv=False)
    bad = np.nonzero(s[:, -1] <= INVERTIBILITY_TOL * np.maximum(s[:, 0], 1e-300))[0]
    if bad.size:
        theta = float(grid.points[bad[0]])
        raise NumericalError(f"S(theta) numerically singular at theta={theta}", theta=theta)
    return np.linalg.solve(S, np.broadcast_to(eye, S.shape))


def inverse(t, grid: ParamGrid | None = None):
    """Group inverse (T^-1, -S^-1 F T^-1, S^-1).

    Polynomial transforms stay polynomial only in the constant case;
    otherwise supply a grid (or sample first).
    """
    if isinstance(t, PolyTransform):
        if t.T.is_constant() and t.F.is_constant() and t.S.is_constant():
            T0 = t.T.coeffs[:, :, 0]
            F0 = t.F.coeffs[:, :, 0]
            S0 = t.S.coeffs[:, :, 0]
            Tinv = np.linalg.inv(T0)
            if t.kind is TransformKind.RESTRICTED:
                Sinv = scipy.linalg.solve_triangular(S0, np.eye(t.m, dtype=complex),
                                                     unit_diagonal=True)
            else:
                Sinv = np.linalg.inv(S0)
            return PolyTransform.constant(Tinv, -Sinv @ F0 @ Tinv, Sinv, t.arc, t.kind)
        if grid is None:
            raise DomainError("inverting a non-constant polynomial transform needs a grid")
        t = t.sample(grid)
    Tinv = _invert_T(t.T, t.grid)
    Sinv = _invert_S(t.S, t.kind, t.grid)
    return SampledTransform(t.grid, Tinv, -(Sinv @ t.F @ Tinv), Sinv, t.kind)


def act(t, pair: PairSamples) -> PairSamples:
    """Apply the group action (T (A - B S^-1 F) T^-1, T B S^-1) pointwise."""
    if isinstance(t, PolyTransform):
        t = t.sample(pair.grid)
    if not t.grid.same_as(pair.grid):
        raise GridMismatchError("transform and pair live on different grids")
    Tinv = _invert_T(t.T, t.grid)
    Sinv = _invert_S(t.S, t.kind, t.grid)
    BS = pair.B @ Sinv
    A_new = t.T @ (pair.A - BS @ t.F) @ Tinv
    B_new = t.T @ BS
    return PairSamples(pair.grid, A_new, B_new)


def equivalence_residual(t, pair1: PairSamples, pair2: PairSamples):
    """Pointwise operator-norm residuals of the defining relations.

    Returns (res_a, res_b) arrays with
    res_a = ||T A1 - A2 T - B2 F|| and res_b = ||T B1 - B2 S||.
    """
    if isinstance(t, PolyTransform):
        t = t.sample(pair1.grid)
    if not (t.grid.same_as(pair1.grid) and t.grid.same_as(pair2.grid)):
        raise GridMismatchError("residuals need a common grid")
    R1 = t.T @ pair1.A - pair2.A @ t.T - pair2.B @ t.F
    R2 = t.T @ pair1.B - pair2.B @ t.S
    res_a = np.linalg.svd(R1, compute_uv=False)[:, 0]
    res_b = np.linalg.svd(R2, compute_uv=False)[:, 0]
    return res_a, res_b


def transform_to_dict(t: SampledTransform) -> dict:
    """JSON-ready encoding: grid points plus per-point [re, im] matrices."""

    def encode(M):
        return [[[[z.real, z.imag] for z in row] for row in mat] for mat in M]

    return {
        "kind": t.kind.value,
        "grid": [float(x) for x in t.grid.points],
        "theta_lo": float(t.grid.arc.lo),
        "theta_hi": float(t.grid.arc.hi),
        "T": encode(t.T),
        "F": encode(t.F),
        "S": encode(t.S),
    }


def transform_from_dict(data: dict) -> SampledTransform:
    def decode(raw):
        return np.array([[[complex(re, im) for re, im in row] for row in mat] for mat in raw])

    arc = ParamArc(float(data["theta_lo"]), float(data["theta_hi"]))
    grid = ParamGrid(arc, np.asarray(data["grid"], dtype=float))
    return SampledTransform(grid, decode(data["T"]), decode(data["F"]), decode(data["S"]),
                            TransformKind(data["kind"]))
