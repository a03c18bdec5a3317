"""The five-splitter network, interior-path modifiers, and counterfactual gain.

Each beam splitter is represented as the basis change between consecutive
contexts, so the composition of all five stages is exactly the identity on
the input rails: a photon entering rail 1, 2, or 3 leaves from the same
rail. Physical rail routing between splitters is not modeled; all
observables depend only on the context bases.

Modifiers act on a single interior path at the earliest stage where that
path is part of the basis (f sits between stages 2 and 3, S1 between 1 and
2, S2 between 3 and 4). Output probabilities with an absorber present are
reported without renormalization, so the three ports sum to the survival
probability rather than to one.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .core import TransferOperator, as_state, basis_change, norm_sq
from .contexts import INTERIOR_LABELS, canonical_paths, context_at
from .stats import FringeDataset

NORMALIZATION_ATOL = 1e-9


class InvalidModifierTargetError(ValueError):
    """Modifier aimed at an input/output rail or an unknown label."""


class DuplicateModifierError(ValueError):
    """Two modifiers landed on the same path at the same stage."""


@dataclass(frozen=True)
class Modifier:
    target: str
    action: str  # "block" | "phase" | "attenuate"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.target not in INTERIOR_LABELS:
            raise InvalidModifierTargetError(
                f"modifier target must be an interior path, got {self.target!r}"
            )
        if self.action not in ("block", "phase", "attenuate"):
            raise ValueError(f"unknown modifier action: {self.action!r}")
        if self.action == "attenuate" and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"amplitude transmission must lie in [0, 1], got {self.value}")


def block(target: str) -> Modifier:
    """Absorber: removes all amplitude in the target path."""
    return Modifier(target, "block")


def phase_shift(target: str, phi: float) -> Modifier:
    """Phase shifter: multiplies the target path amplitude by exp(i phi)."""
    return Modifier(target, "phase", float(phi))


def attenuate(target: str, tau: float) -> Modifier:
    """Partial absorber with amplitude transmission tau in [0, 1]."""
    return Modifier(target, "attenuate", float(tau))


class OutputDistribution(NamedTuple):
    p1: float
    p2: float
    p3: float

    @property
    def survival(self) -> float:
        return self.p1 + self.p2 + self.p3

    def port(self, index: int) -> float:
        if index not in (1, 2, 3):
            raise ValueError(f"port must be 1, 2, or 3, got {index}")
        return self[index - 1]


@dataclass(frozen=True)
class Stage:
    index: int                      # 1..5, the beam splitter number
    basis: tuple[str, str, str]     # context after this splitter
    transfer: TransferOperator      # previous stage coordinates -> these coordinates
    reflectivity: float             # coupling of the changed pair, the value <= 1/2


@dataclass(frozen=True)
class Network:
    stages: tuple[Stage, ...]

    @property
    def reflectivities(self) -> tuple[float, ...]:
        return tuple(s.reflectivity for s in self.stages)


def _stage_reflectivity(
    prev_basis: tuple[str, str, str],
    basis: tuple[str, str, str],
    transfer: TransferOperator,
) -> float:
    """Coupling strength of the 2x2 block acting on the changed label pair.

    The block is unitary, so its |entry|^2 values come as {r, 1-r}; which of
    the pair is called reflectivity is a port-labeling convention, fixed here
    as the branch <= 1/2.
    """
    shared = set(prev_basis) & set(basis)
    if len(shared) != 1:
        raise ValueError(f"contexts {prev_basis} and {basis} must share exactly one label")
    label = shared.pop()
    old_idx = [j for j, l in enumerate(prev_basis) if l != label]
    new_idx = [i for i, l in enumerate(basis) if l != label]
    sub = transfer.matrix[np.ix_(new_idx, old_idx)]
    return float(np.min(np.abs(sub) ** 2))


def build_network(basis: Mapping[str, np.ndarray] | None = None) -> Network:
    """Assemble the five-stage network from the path basis (canonical by default)."""
    paths = canonical_paths() if basis is None else basis
    changes = [
        basis_change([paths[label] for label in context_at(k)]) for k in range(6)
    ]
    stages = []
    for k in range(1, 6):
        transfer = TransferOperator(changes[k].matrix @ changes[k - 1].adjoint().matrix, "unitary")
        stages.append(
            Stage(
                index=k,
                basis=context_at(k),
                transfer=transfer,
                reflectivity=_stage_reflectivity(context_at(k - 1), context_at(k), transfer),
            )
        )
    return Network(tuple(stages))


def _modifiers_by_stage(modifiers: Iterable[Modifier]) -> dict[int, list[Modifier]]:
    earliest = {}
    for k in range(1, 5):
        for label in context_at(k):
            if label in INTERIOR_LABELS and label not in earliest:
                earliest[label] = k
    by_stage: dict[int, list[Modifier]] = {}
    seen: set[tuple[int, str]] = set()
    for mod in modifiers:
        stage = earliest[mod.target]
        key = (stage, mod.target)
        if key in seen:
            raise DuplicateModifierError(f"multiple modifiers on path {mod.target!r} at stage {stage}")
        seen.add(key)
        by_stage.setdefault(stage, []).append(mod)
    return by_stage


def run_many(
    network: Network,
    states: np.ndarray,
    modifiers: Sequence[Modifier] = (),
) -> np.ndarray:
    """Propagate a batch of normalized states; returns (n, 3) port probabilities."""
    amps = np.asarray(states, dtype=complex)
    if amps.ndim != 2 or amps.shape[1] != 3:
        raise ValueError(f"states must have shape (n, 3), got {amps.shape}")
    norms = np.abs(amps) ** 2
    if np.max(np.abs(norms.sum(axis=1) - 1.0)) > NORMALIZATION_ATOL:
        raise ValueError("input states must be normalized")
    by_stage = _modifiers_by_stage(modifiers)
    amps = amps.copy()
    for stage in network.stages:
        amps = amps @ stage.transfer.matrix.T
        for mod in by_stage.get(stage.index, ()):
            slot = stage.basis.index(mod.target)
            if mod.action == "block":
                amps[:, slot] = 0.0
            elif mod.action == "phase":
                amps[:, slot] *= cmath.exp(1j * mod.value)
            else:
                amps[:, slot] *= mod.value
    return np.abs(amps) ** 2


def run(
    network: Network,
    psi: Sequence[complex] | np.ndarray,
    modifiers: Sequence[Modifier] = (),
) -> OutputDistribution:
    """Propagate one state through the network with the given modifiers."""
    state = as_state(psi)
    if abs(norm_sq(state) - 1.0) > NORMALIZATION_ATOL:
        raise ValueError("input state must be normalized")
    probs = run_many(network, state[None, :], modifiers)[0]
    return OutputDistribution(float(probs[0]), float(probs[1]), float(probs[2]))


def counterfactual_gain(
    network: Network,
    psi: Sequence[complex] | np.ndarray,
    blocked: str,
    port: int,
) -> float:
    """Increase of one output port's probability caused by blocking a path.

    Positive gain means more photons arrive at that port with the absorber in
    place than without it, beyond anything explainable by mere loss.
    """
    free = run(network, psi)
    with_block = run(network, psi, [block(blocked)])
    return with_block.port(port) - free.port(port)


def witness_from_outputs(free: OutputDistribution, blocked: OutputDistribution) -> float:
    """Contextuality witness evaluated purely from output statistics.

    Equals the gain at port 3 under blocking of f, minus half the total
    probability surviving to ports 1 and 2. Algebraically identical to the
    interior-path witness P(f) - P(D1) - P(D2).
    """
    return (blocked.p3 - free.p3) - 0.5 * (blocked.p1 + blocked.p2)


def phase_scan(
    network: Network,
    psi: Sequence[complex] | np.ndarray,
    target: str,
    grid: Sequence[float],
) -> FringeDataset:
    """Output probabilities as the phase applied to one interior path is swept."""
    settings = np.asarray(list(grid), dtype=float)
    if settings.size == 0:
        raise ValueError("phase grid must be nonempty")
    values = np.vstack([
        run_many(network, as_state(psi)[None, :], [phase_shift(target, phi)])[0]
        for phi in settings
    ])
    return FringeDataset(settings, values, "ideal")


def transmittance_scan(
    network: Network,
    psi: Sequence[complex] | np.ndarray,
    target: str,
    theta_grid: Sequence[float],
) -> FringeDataset:
    """Sweep a tunable absorber in one interior path.

    theta is the phase of the interferometric attenuator: power transmittance
    T = sin^2(theta / 2), so theta = 0 blocks the path and theta = pi leaves
    it untouched. Valid for theta in [0, 2 pi].
    """
    settings = np.asarray(list(theta_grid), dtype=float)
    if settings.size == 0:
        raise ValueError("transmittance grid must be nonempty")
    if np.any(settings < 0.0) or np.any(settings > 2.0 * math.pi + 1e-12):
        raise ValueError("transmittance settings must lie in [0, 2*pi]")
    values = np.vstack([
        run_many(network, as_state(psi)[None, :], [attenuate(target, math.sin(theta / 2.0))])[0]
        for theta in settings
    ])
    return FringeDataset(settings, values, "ideal")


def fringe_coefficients(
    network: Network,
    psi: Sequence[complex] | np.ndarray,
    target: str = "f",
) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-port (offset, cosine) coefficients of the phase fringe on target."""
    p0 = np.asarray(run(network, psi, [phase_shift(target, 0.0)]), dtype=float)
    ppi = np.asarray(run(network, psi, [phase_shift(target, math.pi)]), dtype=float)
    return (p0 + ppi) / 2.0, (p0 - ppi) / 2.0


__all__ = [
    "DuplicateModifierError",
    "InvalidModifierTargetError",
    "Modifier",
    "Network",
    "OutputDistribution",
    "Stage",
    "attenuate",
    "block",
    "build_network",
    "counterfactual_gain",
    "fringe_coefficients",
    "phase_scan",
    "phase_shift",
    "run",
    "run_many",
    "transmittance_scan",
    "witness_from_outputs",
]
