"""Exact-arithmetic reference implementations used only as test oracles.

Everything here works over Python integers (or Fractions) so independence
decisions are free of floating-point tolerances.
"""

from fractions import Fraction
from itertools import combinations


def exact_det(rows):
    """Determinant of a square matrix of exact numbers, by Laplace expansion."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        sign = -1 if j % 2 else 1
        total += sign * rows[0][j] * exact_det(minor)
    return total


def exact_rank(columns, n):
    """Rank of a list of length-n exact vectors: the largest r with a nonzero
    r-by-r minor."""
    cols = [list(c) for c in columns]
    for r in range(min(n, len(cols)), 0, -1):
        for col_idx in combinations(range(len(cols)), r):
            for row_idx in combinations(range(n), r):
                sub = [[cols[c][i] for c in col_idx] for i in row_idx]
                if exact_det(sub) != 0:
                    return r
    return 0


def _scan_vectors(A, B, order):
    n = len(A)
    m = len(B[0])
    cols = [[Fraction(B[i][j]) for i in range(n)] for j in range(m)]

    def apply(v):
        return [sum(Fraction(A[i][k]) * v[k] for k in range(n)) for i in range(n)]

    if order == "kron":
        out = []
        vecs = [list(c) for c in cols]
        for _ in range(n):
            for j in range(m):
                out.append((j, list(vecs[j])))
            vecs = [apply(v) for v in vecs]
        return out
    out = []
    for j in range(m):
        v = list(cols[j])
        for _ in range(n):
            out.append((j, list(v)))
            v = apply(v)
    return out


def exact_indices(A, B, order):
    """Greedy selection counts decided by exact rank growth."""
    n = len(A)
    m = len(B[0])
    selected = []
    counts = [0] * m
    for column, vec in _scan_vectors(A, B, order):
        if len(selected) == n:
            break
        if exact_rank(selected + [vec], n) > len(selected):
            selected.append(vec)
            counts[column] += 1
    return tuple(counts)
