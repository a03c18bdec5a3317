"""Path labels, measurement contexts, and the noncontextual witness.

The device is a three-rail interferometer whose five beam splitters walk the
measurement basis through five contexts, each an orthonormal triple of path
states, with consecutive contexts sharing exactly one path:

    (1, 2, 3) -> (1, D1, S1) -> (f, P1, S1) -> (f, P2, S2) -> (2, D2, S2)
    -> back to (1, 2, 3)

Input rails 1, 2, 3 double as the output rails. The seven interior labels
name the paths between splitters: f is the flagged middle path, D1/D2 are
the ports that stay dark for a balanced input, S1/S2 their bright partners,
and P1/P2 complete the two middle contexts.

A noncontextual path assignment forces P(f) <= P(D1) + P(D2), so the witness
P(f) - P(D1) - P(D2) is positive only for genuinely contextual statistics.

All canonical path vectors are real; signs follow the convention that the
first nonzero component is positive. Observable quantities do not depend on
these signs.
"""
from __future__ import annotations

import math
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .core import as_state, inner

INPUT_LABELS = ("1", "2", "3")
INTERIOR_LABELS = ("f", "D1", "D2", "S1", "S2", "P1", "P2")
PATH_LABELS = INPUT_LABELS + INTERIOR_LABELS

#: The five contexts, in propagation order. Index with context_at() to get
#: the closing repetition of the input/output triple at position 5.
CONTEXTS: tuple[tuple[str, str, str], ...] = (
    ("1", "2", "3"),
    ("1", "D1", "S1"),
    ("f", "P1", "S1"),
    ("f", "P2", "S2"),
    ("2", "D2", "S2"),
)


class UnknownLabelError(ValueError):
    """A path label outside the ten defined for this interferometer."""


def context_at(position: int) -> tuple[str, str, str]:
    """Context basis at position 0..5; position 5 wraps back to (1, 2, 3)."""
    if not 0 <= position <= 5:
        raise ValueError(f"context position must be in 0..5, got {position}")
    return CONTEXTS[position % 5]


_R2 = math.sqrt(2.0)
_R3 = math.sqrt(3.0)
_R6 = math.sqrt(6.0)

_COMPONENTS: dict[str, tuple[float, float, float]] = {
    "1": (1.0, 0.0, 0.0),
    "2": (0.0, 1.0, 0.0),
    "3": (0.0, 0.0, 1.0),
    "D1": (0.0, 1.0 / _R2, -1.0 / _R2),
    "S1": (0.0, 1.0 / _R2, 1.0 / _R2),
    "f": (1.0 / _R3, 1.0 / _R3, -1.0 / _R3),
    "P1": (2.0 / _R6, -1.0 / _R6, 1.0 / _R6),
    "S2": (1.0 / _R2, 0.0, 1.0 / _R2),
    "D2": (1.0 / _R2, 0.0, -1.0 / _R2),
    "P2": (1.0 / _R6, -2.0 / _R6, -1.0 / _R6),
}


def _freeze(components: dict[str, tuple[float, float, float]]) -> Mapping[str, np.ndarray]:
    out = {}
    for label, parts in components.items():
        vec = np.asarray(parts, dtype=complex)
        vec.setflags(write=False)
        out[label] = vec
    return MappingProxyType(out)


_CANONICAL = _freeze(_COMPONENTS)


def canonical_paths() -> Mapping[str, np.ndarray]:
    """Read-only map from path label to its state vector in input coordinates."""
    return _CANONICAL


def path_vector(label: str) -> np.ndarray:
    try:
        return _CANONICAL[label]
    except KeyError:
        raise UnknownLabelError(f"unknown path label {label!r}") from None


def path_probability(psi: Sequence[complex] | np.ndarray, label: str) -> float:
    """Probability of finding the photon in the given path."""
    return abs(inner(path_vector(label), psi)) ** 2


def witness_matrix() -> np.ndarray:
    """Matrix of the witness observable: projector on f minus those on D1, D2."""
    f = _CANONICAL["f"]
    d1 = _CANONICAL["D1"]
    d2 = _CANONICAL["D2"]
    w = np.outer(f, f.conj()) - np.outer(d1, d1.conj()) - np.outer(d2, d2.conj())
    return w.real.astype(float)


def witness_direct(psi: Sequence[complex] | np.ndarray) -> float:
    """P(f) - P(D1) - P(D2); positive values certify contextuality."""
    psi = as_state(psi)
    return path_probability(psi, "f") - path_probability(psi, "D1") - path_probability(psi, "D2")


class MaxWitness(NamedTuple):
    value: float
    state: np.ndarray


def max_witness() -> MaxWitness:
    """Largest achievable witness value and the state that attains it.

    The witness observable commutes with the swap of input rails 1 and 2, so
    its top eigenvector has the form (1, 1, t). Substituting into the
    eigenvalue problem reduces it to 6 w^2 + 3 w - 1 = 0, whose larger root
    is (sqrt(33) - 3) / 12, attained at t = (sqrt(33) - 5) / 2.
    """
    value = (math.sqrt(33.0) - 3.0) / 12.0
    t = (math.sqrt(33.0) - 5.0) / 2.0
    state = np.array([1.0, 1.0, t], dtype=complex)
    state = state / np.linalg.norm(state)
    state.setflags(write=False)
    return MaxWitness(value, state)
