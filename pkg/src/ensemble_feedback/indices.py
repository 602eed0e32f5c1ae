"""Per-input independence counts of the reachability vector list.

Both index families scan the vectors ``A^j b_i`` in a prescribed order and
greedily keep the vectors that are numerically independent of everything kept
so far.  ``kronecker_indices`` scans round-robin over the input columns
(b_1..b_m, A b_1..A b_m, ...); ``hermite_indices`` exhausts one column's
powers before moving to the next.  The per-column counts of kept vectors are
the indices.  The scan order is mandatory, so the independence test is an
incremental orthogonal projection rather than any pivoted factorisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .systems import DEFAULT_RANK_TOL, ParamGrid, as_samples


class IndexKind(Enum):
    KRONECKER = "kronecker"
    HERMITE = "hermite"


@dataclass(frozen=True)
class IndexVector:
    """Selection counts per input column at one parameter value."""

    values: tuple
    theta: float
    kind: IndexKind

    @property
    def total(self) -> int:
        return int(sum(self.values))


@dataclass(frozen=True)
class SelectionRecord:
    """One scan step: which vector was tested and how independent it was."""

    column: int
    power: int
    residual_ratio: float
    selected: bool


def _try_select(basis, v, tol):
    """Project ``v`` on the kept orthonormal basis; accept if the residual
    ratio exceeds ``tol``.  Returns (accepted, ratio, updated basis)."""
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return False, 0.0, basis
    r = v - basis @ (basis.conj().T @ v)
    r = r - basis @ (basis.conj().T @ r)
    ratio = np.linalg.norm(r) / nv
    if ratio > tol:
        basis = np.hstack([basis, (r / np.linalg.norm(r))[:, None]])
        return True, float(ratio), basis
    return False, float(ratio), basis


def _scan(A, B, kind: IndexKind, tol: float):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n, m = B.shape
    basis = np.zeros((n, 0), dtype=complex)
    counts = [0] * m
    records = []
    if kind is IndexKind.KRONECKER:
        power_vec = [B[:, i].copy() for i in range(m)]
        active = [True] * m
        for j in range(n):
            for i in range(m):
                if not active[i]:
                    continue
                ok, ratio, basis = _try_select(basis, power_vec[i], tol)
                records.append(SelectionRecord(i, j, ratio, ok))
                if ok:
                    counts[i] += 1
                else:
                    # once A^j b_i is dependent, so is every later power of
                    # this column inside the growing span
                    active[i] = False
            if not any(active):
                break
            for i in range(m):
                if active[i]:
                    v = A @ power_vec[i]
                    nv = np.linalg.norm(v)
                    power_vec[i] = v / nv if nv > 0 else v
    else:
        for i in range(m):
            v = B[:, i].copy()
            for j in range(n):
                ok, ratio, basis = _try_select(basis, v, tol)
                records.append(SelectionRecord(i, j, ratio, ok))
                if not ok:
                    break
                counts[i] += 1
                v = A @ v
                nv = np.linalg.norm(v)
                if nv > 0:
                    v = v / nv
    return tuple(counts), records


def kronecker_indices(A, B, tol: float = DEFAULT_RANK_TOL, theta: float = float("nan"),
                      with_records: bool = False):
    """Counts from the round-robin scan b_1..b_m, A b_1..A b_m, ...

    Works for unreachable pairs too; the counts then sum to the numerical
    rank of the reachability matrix rather than to n.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    values, records = _scan(A, B, IndexKind.KRONECKER, tol)
    vec = IndexVector(values, float(theta), IndexKind.KRONECKER)
    return (vec, records) if with_records else vec


def hermite_indices(A, B, tol: float = DEFAULT_RANK_TOL, theta: float = float("nan"),
                    with_records: bool = False):
    """Counts from the column-major scan b_1, A b_1, ..., b_2, A b_2, ..."""
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    values, records = _scan(A, B, IndexKind.HERMITE, tol)
    vec = IndexVector(values, float(theta), IndexKind.HERMITE)
    return (vec, records) if with_records else vec


def controllability_indices(A, B, tol: float = DEFAULT_RANK_TOL) -> tuple:
    """Kronecker counts reordered decreasingly (meaningful when all nonzero)."""
    vec = kronecker_indices(A, B, tol)
    return tuple(sorted(vec.values, reverse=True))


@dataclass(frozen=True)
class ConstancyReport:
    """Outcome of comparing index vectors across a grid."""

    constant: bool
    kind: IndexKind
    reference: tuple
    mismatch_theta: float | None = None
    mismatch_values: tuple | None = None


def indices_constant(pair, grid: ParamGrid | None, kind: IndexKind,
                     tol: float = DEFAULT_RANK_TOL) -> ConstancyReport:
    """True iff the index vector is identical at every grid point.

    Reports the first grid point whose vector differs from the one at the
    left endpoint.
    """
    samples = as_samples(pair, grid)
    compute = kronecker_indices if kind is IndexKind.KRONECKER else hermite_indices
    A0, B0 = samples.at(0)
    reference = compute(A0, B0, tol).values
    for idx in range(1, len(samples.grid)):
        A, B = samples.at(idx)
        values = compute(A, B, tol).values
        if values != reference:
            return ConstancyReport(False, kind, reference,
                                   float(samples.grid.points[idx]), values)
    return ConstancyReport(True, kind, reference)


def index_table(pair, grid: ParamGrid | None = None, tol: float = DEFAULT_RANK_TOL):
    """Per-point (theta, kronecker, hermite, reachable) rows for reports."""
    samples = as_samples(pair, grid)
    rows = []
    for idx, theta in enumerate(samples.grid.points):
        A, B = samples.at(idx)
        kv = kronecker_indices(A, B, tol, theta=theta)
        hv = hermite_indices(A, B, tol, theta=theta)
        rows.append((float(theta), kv.values, hv.values, kv.total == samples.n))
    return rows
