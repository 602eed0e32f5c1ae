"""Built-in example systems and the JSON description format.

The JSON format: keys ``n``, ``m``, ``theta_lo``, ``theta_hi``, ``A``, ``B``.
``A`` is an n-by-n array and ``B`` an n-by-m array whose entries are lists of
``[re, im]`` coefficient pairs in ascending degree.
"""

from __future__ import annotations

import json

from .errors import DomainError
from .systems import ParamArc, PolyMatrix, SystemPair


def example41a() -> SystemPair:
    """4-state, 2-input pair on [-1, 1] whose row-major selection counts are
    constant (2, 2) while the column-major counts drop to (2, 2) only at 0."""
    A = PolyMatrix.from_entries([
        [[0], [1], [0], [0]],
        [[0, 0, 2], [0], [0], [0, 2]],
        [[0], [0], [0], [1]],
        [[0], [0, -2], [0], [0]],
    ])
    B = PolyMatrix.from_entries([
        [[0], [0]],
        [[1], [0]],
        [[0], [0]],
        [[0], [1]],
    ])
    return SystemPair(4, 2, A, B, ParamArc(-1.0, 1.0))


def example41b() -> SystemPair:
    """4-state, 2-input pair on [-1, 1] with constant column-major counts
    (3, 1); the row-major counts change exactly at theta^2 = 1/2."""
    A = PolyMatrix.from_entries([
        [[0], [0], [2], [-0.5, 0, 1]],
        [[1], [0], [0], [1]],
        [[0], [1], [0], [0]],
        [[0], [0], [0], [0]],
    ])
    B = PolyMatrix.from_entries([
        [[0], [0]],
        [[1], [0]],
        [[0], [0]],
        [[0], [1]],
    ])
    return SystemPair(4, 2, A, B, ParamArc(-1.0, 1.0))


def oscillator_pair(g_coeffs=(2.0, 1.0), k: float = 4.0, theta_star: float = 1.0) -> SystemPair:
    """First-order form of the gain-scheduled oscillator family.

    State matrix [[0, 1], [k*g(theta) - theta^2, 0]] and input column
    [0, g(theta)] on the symmetric arc [-theta_star, theta_star].
    """
    if theta_star <= 0:
        raise DomainError("theta_star must be positive")
    g = [float(c) for c in g_coeffs]
    lower_left = [k * c for c in g]
    while len(lower_left) < 3:
        lower_left.append(0.0)
    lower_left[2] -= 1.0
    A = PolyMatrix.from_entries([
        [[0], [1]],
        [lower_left, [0]],
    ])
    B = PolyMatrix.from_entries([
        [[0]],
        [g],
    ])
    return SystemPair(2, 1, A, B, ParamArc(-theta_star, theta_star))


# Grid points each example needs to expose its index transitions.
BUILTIN_INSERTS = {
    "example41a": (0.0,),
    "example41b": (-(0.5 ** 0.5), 0.5 ** 0.5),
    "oscillator": (),
}


def builtin_system(name: str, **params) -> SystemPair:
    if name == "example41a":
        return example41a()
    if name == "example41b":
        return example41b()
    if name == "oscillator":
        return oscillator_pair(**params)
    raise DomainError(f"unknown builtin system '{name}'")


def system_to_dict(sys: SystemPair) -> dict:
    def encode(pm: PolyMatrix):
        return [
            [[[c.real, c.imag] for c in entry] for entry in row]
            for row in pm.entries()
        ]

    return {
        "n": sys.n,
        "m": sys.m,
        "theta_lo": sys.arc.lo,
        "theta_hi": sys.arc.hi,
        "A": encode(sys.A),
        "B": encode(sys.B),
    }


def system_from_dict(data: dict) -> SystemPair:
    def decode(raw):
        return PolyMatrix.from_entries(
            [[[complex(re, im) for re, im in entry] for entry in row] for row in raw]
        )

    arc = ParamArc(float(data["theta_lo"]), float(data["theta_hi"]))
    return SystemPair(int(data["n"]), int(data["m"]), decode(data["A"]), decode(data["B"]), arc)


def load_system(path: str) -> SystemPair:
    with open(path, "r", encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))


def save_system(sys: SystemPair, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_dict(sys), fh, sort_keys=True, indent=1)
        fh.write("\n")
