"""Seeded generators of random systems and transforms for experiments and
property tests."""

from __future__ import annotations

import numpy as np

from .brunovsky import brunovsky_pair
from .feedback import PolyTransform, TransformKind, act
from .systems import PairSamples, ParamArc, ParamGrid, PolyMatrix, SystemPair


def _random_poly_matrix(rng, rows, cols, degree, scale, base=None):
    coeffs = scale * (rng.standard_normal((rows, cols, degree + 1))
                      + 1j * rng.standard_normal((rows, cols, degree + 1)))
    if base is not None:
        coeffs[:, :, 0] += base
    return PolyMatrix(coeffs)


def random_restricted_transform(rng, n: int, m: int, arc: ParamArc,
                                degree: int = 1, scale: float = 0.25) -> PolyTransform:
    """Well-conditioned polynomial transform: T near the identity, S unit
    upper triangular."""
    T = _random_poly_matrix(rng, n, n, degree, scale, base=np.eye(n))
    F = _random_poly_matrix(rng, m, n, degree, scale)
    S_coeffs = scale * (rng.standard_normal((m, m, degree + 1))
                        + 1j * rng.standard_normal((m, m, degree + 1)))
    for i in range(m):
        S_coeffs[i, i, :] = 0.0
        S_coeffs[i, i, 0] = 1.0
        for j in range(i):
            S_coeffs[i, j, :] = 0.0
    return PolyTransform(T, F, PolyMatrix(S_coeffs), arc, TransformKind.RESTRICTED)


def random_constant_kappa_pair(rng, kappa, grid: ParamGrid,
                               degree: int = 1, scale: float = 0.25,
                               max_condition: float = 1e6) -> PairSamples:
    """Pair samples with exactly the given selection counts at every point.

    Built by acting with a random restricted transform on the canonical
    block pair (the counts are invariant under the action); regenerates
    until the selected power basis stays better conditioned than
    ``max_condition`` on the whole grid.
    """
    from .brunovsky import step1_coefficients

    canon = brunovsky_pair(kappa)
    base = canon.samples(grid)
    for _ in range(100):
        t = random_restricted_transform(rng, canon.n, canon.m, grid.arc,
                                        degree, scale)
        try:
            pair = act(t, base)
        except Exception:
            continue
        worst = 0.0
        ok = True
        for idx in range(len(grid)):
            A, B = pair.at(idx)
            try:
                coeffs = step1_coefficients(A, B, kappa,
                                            theta=float(grid.points[idx]))
            except Exception:
                ok = False
                break
            worst = max(worst, coeffs.kalman_basis_cond)
        if ok and worst < max_condition:
            return pair
    raise RuntimeError("could not draw a well-conditioned pair")


def random_reachable_system(rng, n: int, m: int, arc: ParamArc,
                            degree: int = 1, scale: float = 0.5,
                            grid: ParamGrid | None = None,
                            min_margin: float = 1e-3) -> SystemPair:
    """Random polynomial pair, redrawn until comfortably reachable pointwise."""
    from .systems import kalman_matrix

    if grid is None:
        grid = ParamGrid.uniform(arc, 51)
    for _ in range(200):
        A = _random_poly_matrix(rng, n, n, degree, scale)
        B = _random_poly_matrix(rng, n, m, degree, scale)
        sys_pair = SystemPair(n, m, A, B, arc)
        samples = sys_pair.sample(grid)
        margins = []
        for idx in range(len(grid)):
            s = np.linalg.svd(kalman_matrix(*samples.at(idx)), compute_uv=False)
            margins.append(s[-1] / s[0] if s[0] > 0 else 0.0)
        if min(margins) > min_margin:
            return sys_pair
    raise RuntimeError("could not draw a reachable system")
