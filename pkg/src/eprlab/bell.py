"""CHSH correlations: deterministic local strategies against the singlet.

Mixed local strategies are convex combinations of the 16 deterministic ones,
so they cannot exceed the deterministic maximum; only the latter are enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# ordered so that the E22 slot is the anticorrelated-sign pair (a=0, b=3pi/4)
STANDARD_ANGLES = {"a": (np.pi / 2, 0.0), "b": (np.pi / 4, 3 * np.pi / 4)}


@dataclass(frozen=True)
class LhvStrategy:
    a_outputs: tuple[int, int]
    b_outputs: tuple[int, int]

    def __post_init__(self):
        for v in self.a_outputs + self.b_outputs:
            if v not in (-1, 1):
                raise ValueError(f"outputs must be +1 or -1, got {v}")

    def correlations(self) -> tuple[int, int, int, int]:
        a, b = self.a_outputs, self.b_outputs
        return a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]


def all_strategies() -> list[LhvStrategy]:
    signs = (-1, 1)
    return [
        LhvStrategy((a0, a1), (b0, b1))
        for a0, a1, b0, b1 in itertools.product(signs, repeat=4)
    ]


def qm_singlet_correlation(angle_a: float, angle_b: float) -> float:
    return -float(np.cos(angle_a - angle_b))


def chsh_value(e11, e12, e21, e22):
    for e in (e11, e12, e21, e22):
        if not -1 <= e <= 1:
            raise ValueError(f"correlation {e} outside [-1, 1]")
    return e11 + e12 + e21 - e22


def lhv_chsh_values() -> list[int]:
    return [chsh_value(*s.correlations()) for s in all_strategies()]


def lhv_max_chsh() -> int:
    return max(abs(s) for s in lhv_chsh_values())


def quantum_chsh(angles_a=STANDARD_ANGLES["a"], angles_b=STANDARD_ANGLES["b"]) -> float:
    e = [qm_singlet_correlation(a, b) for a in angles_a for b in angles_b]
    return chsh_value(*e)


def quantum_chsh_max(angles_a=STANDARD_ANGLES["a"], angles_b=STANDARD_ANGLES["b"]) -> float:
    """Largest ``|S|`` over the four ways of labelling the two settings on each side."""
    return max(
        abs(quantum_chsh(pa, pb))
        for pa in (angles_a, angles_a[::-1])
        for pb in (angles_b, angles_b[::-1])
    )


def chsh_table() -> list[dict]:
    """Per-strategy CHSH values followed by the singlet at the standard angles."""
    rows = [
        {"source": "lhv", "a_outputs": list(s.a_outputs), "b_outputs": list(s.b_outputs), "S": v}
        for s, v in zip(all_strategies(), lhv_chsh_values())
    ]
    rows.append({"source": "quantum", "S": quantum_chsh()})
    return rows
