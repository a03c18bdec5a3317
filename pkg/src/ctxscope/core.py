"""Complex linear algebra for three-mode states and transfer operators.

Everything is dimension 3 and double precision. Operators carry a kind flag
so loss-free (unitary) and lossy (attenuating) transfers are validated once
at construction instead of at every use.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

DIM = 3

# Construction tolerance for operators; inputs to basis_change may be a bit
# sloppier (hand-entered vectors) and get snapped to the nearest unitary.
UNITARY_ATOL = 1e-12
BASIS_INPUT_ATOL = 1e-10

Kind = Literal["unitary", "attenuating"]


class NonOrthonormalBasisError(ValueError):
    """Rows handed to basis_change are not an orthonormal set."""


def as_state(values: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Coerce to a finite complex amplitude vector of length 3."""
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if arr.shape != (DIM,):
        raise ValueError(f"state needs exactly {DIM} amplitudes, got shape {np.shape(values)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state amplitudes must be finite")
    return arr


def norm_sq(state: Sequence[complex] | np.ndarray) -> float:
    arr = as_state(state)
    return float(np.real(np.vdot(arr, arr)))


def normalize(state: Sequence[complex] | np.ndarray) -> np.ndarray:
    arr = as_state(state)
    n = np.linalg.norm(arr)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return arr / n


def inner(a: Sequence[complex] | np.ndarray, b: Sequence[complex] | np.ndarray) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    return complex(np.vdot(as_state(a), as_state(b)))


@dataclass(frozen=True)
class TransferOperator:
    """A validated 3x3 transfer matrix.

    kind "unitary" requires U^dag U = I to within 1e-12; kind "attenuating"
    only requires that no singular value exceeds 1, i.e. the map never
    increases the norm.
    """

    matrix: np.ndarray
    kind: Kind = "unitary"

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (DIM, DIM):
            raise ValueError(f"transfer matrix must be {DIM}x{DIM}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("transfer matrix entries must be finite")
        if self.kind == "unitary":
            dev = float(np.max(np.abs(m.conj().T @ m - np.eye(DIM))))
            if dev > UNITARY_ATOL:
                raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
        elif self.kind == "attenuating":
            top = float(np.linalg.svd(m, compute_uv=False)[0])
            if top > 1.0 + UNITARY_ATOL:
                raise ValueError(f"attenuating matrix has singular value {top:.15f} > 1")
        else:
            raise ValueError(f"unknown operator kind: {self.kind!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def adjoint(self) -> "TransferOperator":
        return TransferOperator(self.matrix.conj().T, self.kind)


def apply(op: TransferOperator, state: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Apply a transfer operator to a state, returning the new amplitudes."""
    return op.matrix @ as_state(state)


def basis_change(rows: Sequence[Sequence[complex] | np.ndarray]) -> TransferOperator:
    """Unitary that re-expresses a state in the orthonormal basis `rows`.

    Row i of the result is the conjugate of basis vector i, so component i of
    the output is the overlap of basis vector i with the input state. Rows
    may deviate from orthonormality by up to 1e-10; anything worse raises,
    anything beyond ~1e-13 is snapped to the nearest unitary.
    """
    if len(rows) != DIM:
        raise NonOrthonormalBasisError(f"need {DIM} rows, got {len(rows)}")
    vs = np.array([as_state(r) for r in rows])
    gram = vs.conj() @ vs.T
    dev = float(np.max(np.abs(gram - np.eye(DIM))))
    if dev > BASIS_INPUT_ATOL:
        raise NonOrthonormalBasisError(f"rows deviate from orthonormality by {dev:.3e}")
    m = vs.conj()
    if dev > 1e-13:
        u, _, vh = np.linalg.svd(m)
        m = u @ vh
    return TransferOperator(m, "unitary")


def haar_random_states(count: int, seed: int) -> np.ndarray:
    """(count, 3) array of uniformly random unit vectors, reproducible by seed."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, DIM)) + 1j * rng.standard_normal((count, DIM))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
