"""Parameter arcs, polynomial-entry matrices, grids and reachability tests.

All matrix families here are functions of a real parameter ``theta`` ranging
over a compact interval; entries are polynomials in ``theta`` with complex
coefficients, evaluated by Horner's rule in a fixed order so repeated
evaluation is bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError

DEFAULT_RANK_TOL = 1e-9
DEFAULT_GRID_SIZE = 201


@dataclass(frozen=True)
class ParamArc:
    """Compact real parameter interval [lo, hi] with its affine chart.

    ``gamma`` maps [0, 1] onto [lo, hi] and ``gamma_inverse`` is its inverse;
    both are exact at the endpoints.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def gamma(self, t):
        return self.lo + np.asarray(t) * (self.hi - self.lo)

    def gamma_inverse(self, theta):
        return (np.asarray(theta) - self.lo) / (self.hi - self.lo)

    def contains(self, theta) -> bool:
        return bool(np.all(self.lo <= np.asarray(theta)) and np.all(np.asarray(theta) <= self.hi))


@dataclass(frozen=True)
class PolyScalar:
    """One polynomial entry: complex coefficients, ascending degree."""

    coeffs: tuple

    @classmethod
    def of(cls, *coeffs) -> "PolyScalar":
        return cls(tuple(complex(c) for c in coeffs))

    @classmethod
    def zero(cls) -> "PolyScalar":
        return cls((0j,))

    def __call__(self, theta):
        theta = np.asarray(theta)
        acc = np.full(theta.shape, self.coeffs[-1], dtype=complex)
        for c in self.coeffs[-2::-1]:
            acc = acc * theta + c
        return acc if acc.shape else complex(acc)

    def derivative(self) -> "PolyScalar":
        if len(self.coeffs) == 1:
            return PolyScalar.zero()
        return PolyScalar(tuple((k + 1) * c for k, c in enumerate(self.coeffs[1:])))

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def is_real(self, tol=0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self.coeffs)


class PolyMatrix:
    """Matrix whose entries are polynomials in theta.

    Stored as a coefficient tensor of shape (rows, cols, depth); evaluation
    runs Horner's rule along the last axis, highest coefficient first.
    """

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 3:
            raise DomainError("coefficient tensor must be (rows, cols, depth)")
        self.coeffs = coeffs

    @classmethod
    def from_entries(cls, entries) -> "PolyMatrix":
        """Build from nested lists: entries[i][j] is a coefficient sequence."""
        rows = len(entries)
        cols = len(entries[0])
        depth = max(max(len(e) for e in row) for row in entries)
        depth = max(depth, 1)
        tensor = np.zeros((rows, cols, depth), dtype=complex)
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise DomainError("ragged entry rows")
            for j, entry in enumerate(row):
                for k, c in enumerate(entry):
                    tensor[i, j, k] = complex(c)
        return cls(tensor)

    @classmethod
    def constant(cls, mat) -> "PolyMatrix":
        mat = np.asarray(mat, dtype=complex)
        return cls(mat[:, :, None])

    @property
    def shape(self):
        return self.coeffs.shape[:2]

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0:
            acc = self.coeffs[:, :, -1].copy()
            for k in range(self.coeffs.shape[2] - 2, -1, -1):
                acc = acc * theta + self.coeffs[:, :, k]
            return acc
        th = theta[:, None, None]
        acc = np.broadcast_to(self.coeffs[:, :, -1], (theta.size,) + self.shape).copy()
        for k in range(self.coeffs.shape[2] - 2, -1, -1):
            acc = acc * th + self.coeffs[:, :, k]
        return acc

    def entry(self, i, j) -> PolyScalar:
        return PolyScalar(tuple(self.coeffs[i, j]))

    def entries(self):
        rows, cols = self.shape
        return [[list(self.coeffs[i, j]) for j in range(cols)] for i in range(rows)]

    def matmul(self, other: "PolyMatrix") -> "PolyMatrix":
        """Exact polynomial matrix product (entrywise coefficient convolution)."""
        r, k = self.shape
        k2, c = other.shape
        if k != k2:
            raise DomainError("shape mismatch in polynomial matrix product")
        depth = self.coeffs.shape[2] + other.coeffs.shape[2] - 1
        out = np.zeros((r, c, depth), dtype=complex)
        for i in range(r):
            for j in range(c):
                acc = np.zeros(depth, dtype=complex)
                for s in range(k):
                    acc[: self.coeffs.shape[2] + other.coeffs.shape[2] - 1] += np.convolve(
                        self.coeffs[i, s], other.coeffs[s, j]
                    )
                out[i, j] = acc
        return PolyMatrix(out)

    def add(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.shape != other.shape:
            raise DomainError("shape mismatch in polynomial matrix sum")
        depth = max(self.coeffs.shape[2], other.coeffs.shape[2])
        out = np.zeros(self.shape + (depth,), dtype=complex)
        out[:, :, : self.coeffs.shape[2]] = self.coeffs
        out[:, :, : other.coeffs.shape[2]] += other.coeffs
        return PolyMatrix(out)

    def scale(self, factor: complex) -> "PolyMatrix":
        return PolyMatrix(self.coeffs * factor)

    @property
    def max_degree(self) -> int:
        return self.coeffs.shape[2] - 1

    def is_constant(self, tol=0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs[:, :, 1:]) <= tol))


@dataclass(frozen=True)
class ParamGrid:
    """Strictly increasing finite sampling of an arc, endpoints included."""

    arc: ParamArc
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.size < 2:
            raise DomainError("grid needs at least 2 points")
        if pts[0] != self.arc.lo or pts[-1] != self.arc.hi:
            raise DomainError("grid must include both endpoints")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly increasing")

    @classmethod
    def uniform(cls, arc: ParamArc, count: int = DEFAULT_GRID_SIZE, insert=()) -> "ParamGrid":
        """Equispaced grid with optional extra points merged in."""
        if count < 2:
            raise DomainError("grid needs at least 2 points")
        pts = np.linspace(arc.lo, arc.hi, count)
        extra = np.asarray(list(insert), dtype=float)
        if extra.size:
            if np.any(extra < arc.lo) or np.any(extra > arc.hi):
                raise DomainError("inserted points outside the arc")
            pts = np.unique(np.concatenate([pts, extra]))
        return cls(arc, pts)

    def __len__(self):
        return self.points.size

    def index_of(self, theta, atol=1e-12) -> int:
        i = int(np.argmin(np.abs(self.points - theta)))
        if abs(self.points[i] - theta) > atol:
            raise DomainError(f"theta={theta} is not a grid point")
        return i

    def same_as(self, other: "ParamGrid") -> bool:
        return self.points.shape == other.points.shape and bool(
            np.all(self.points == other.points)
        )


@dataclass(frozen=True)
class PairSamples:
    """A matrix pair evaluated on a grid: A has shape (N, n, n), B (N, n, m)."""

    grid: ParamGrid
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.A.shape[0] != len(self.grid) or self.B.shape[0] != len(self.grid):
            raise GridMismatchError("sample count differs from grid length")
        if self.A.shape[1] != self.A.shape[2] or self.B.shape[1] != self.A.shape[1]:
            raise DomainError("inconsistent sample shapes")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.B.shape[2]

    def at(self, idx: int):
        return self.A[idx], self.B[idx]


@dataclass(frozen=True)
class SystemPair:
    """Parameter-dependent pair (A(theta), B(theta)) with polynomial entries."""

    n: int
    m: int
    A: PolyMatrix
    B: PolyMatrix
    arc: ParamArc

    def __post_init__(self):
        if self.A.shape != (self.n, self.n):
            raise DomainError(f"A must be {self.n}x{self.n}")
        if self.B.shape != (self.n, self.m):
            raise DomainError(f"B must be {self.n}x{self.m}")

    def eval(self, theta):
        if not self.arc.contains(theta):
            raise DomainError(f"theta={theta} outside [{self.arc.lo}, {self.arc.hi}]")
        return self.A(theta), self.B(theta)

    def sample(self, grid: ParamGrid) -> PairSamples:
        return PairSamples(grid, self.A(grid.points), self.B(grid.points))

    def default_grid(self, count: int = DEFAULT_GRID_SIZE, insert=()) -> ParamGrid:
        return ParamGrid.uniform(self.arc, count, insert)


def eval_pair(sys: SystemPair, theta):
    """(A(theta), B(theta)) by entrywise Horner evaluation."""
    return sys.eval(theta)


def kalman_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """The block matrix (B, AB, ..., A^{n-1}B), blocks in that order."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise DomainError("dimension mismatch in reachability matrix")
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def numerical_rank(M: np.ndarray, tol: float = DEFAULT_RANK_TOL):
    """Rank by singular values above ``tol`` times the largest one.

    Returns (rank, smallest retained ratio or 0.0).
    """
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, 0.0
    keep = s > tol * s[0]
    rank = int(np.count_nonzero(keep))
    ratio = float(s[rank - 1] / s[0]) if rank else 0.0
    return rank, ratio


@dataclass(frozen=True)
class ReachabilityReport:
    """Per-point numerical ranks of the reachability matrix over a grid."""

    grid: ParamGrid
    ranks: np.ndarray
    sigma_ratios: np.ndarray
    n: int

    @property
    def all_reachable(self) -> bool:
        return bool(np.all(self.ranks == self.n))

    @property
    def witness_theta(self):
        bad = np.nonzero(self.ranks != self.n)[0]
        return float(self.grid.points[bad[0]]) if bad.size else None

    def __bool__(self):
        return self.all_reachable


def pointwise_reachable(pair, grid: ParamGrid | None = None,
                        tol: float = DEFAULT_RANK_TOL) -> ReachabilityReport:
    """Numerical rank of the reachability matrix at every grid point.

    ``pair`` may be a SystemPair (then ``grid`` is required) or PairSamples.
    """
    samples = as_samples(pair, grid)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    ranks = np.empty(len(samples.grid), dtype=int)
    ratios = np.empty(len(samples.grid))
    for idx in range(len(samples.grid)):
        A, B = samples.at(idx)
        ranks[idx], ratios[idx] = numerical_rank(kalman_matrix(A, B), tol)
    return ReachabilityReport(samples.grid, ranks, ratios, samples.n)


def as_samples(pair, grid: ParamGrid | None = None) -> PairSamples:
    """Coerce a SystemPair (with grid) or PairSamples to PairSamples."""
    if isinstance(pair, PairSamples):
        if grid is not None and not pair.grid.same_as(grid):
            raise GridMismatchError("samples live on a different grid")
        return pair
    if isinstance(pair, SystemPair):
        if grid is None:
            grid = pair.default_grid()
        return pair.sample(grid)
    if hasattr(pair, "sample"):
        if grid is None:
            raise DomainError("a grid is required to sample this pair")
        return pair.sample(grid)
    raise DomainError(f"cannot interpret {type(pair).__name__} as a matrix pair")
