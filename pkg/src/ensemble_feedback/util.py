"""Small shared helpers: thread-capped maps and polynomial utilities."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "ENSEMBLE_FEEDBACK_THREADS"


def thread_count() -> int:
    """Thread cap from the environment; 1 (serial) when unset or invalid."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order.

    Runs on a thread pool when the environment requests more than one
    thread; results are collected in input order either way, so reductions
    over the output are deterministic.
    """
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def poly_from_roots(roots) -> np.ndarray:
    """Monic polynomial coefficients (ascending) from its roots.

    Expands the product of linear factors by convolution, left to right.
    """
    coeffs = np.array([1.0 + 0.0j])
    for r in roots:
        coeffs = np.convolve(coeffs, np.array([-r, 1.0 + 0.0j]))
    return coeffs


def horner_matrix(coeffs, mat) -> np.ndarray:
    """Evaluate a scalar polynomial (ascending coefficients) at a square matrix."""
    n = mat.shape[0]
    eye = np.eye(n, dtype=complex)
    acc = complex(coeffs[-1]) * eye
    for c in coeffs[-2::-1]:
        acc = acc @ mat + complex(c) * eye
    return acc


def horner_matrix_vector(coeffs, mat, vec) -> np.ndarray:
    """Evaluate ``p(mat) @ vec`` by the vector form of Horner's rule."""
    acc = complex(coeffs[-1]) * vec.astype(complex)
    for c in coeffs[-2::-1]:
        acc = mat @ acc + complex(c) * vec
    return acc
