"""Samplers for epsilon-fuzzy two-qubit gates and fuzzy circuit application.

Two sampler variants are provided.  The default draws a random traceless
two-qubit Hamiltonian H with coefficient budget sum|alpha| <= epsilon and
perturbs the target as e^{iH} U; since ||U - e^{iH}U||_inf = ||1 - e^{iH}||_inf
<= ||H||_inf <= sum|alpha|, the operator-norm cap holds without rejection.
The second variant draws Haar gates and rejects those outside the
epsilon-ball; it is practical only for large epsilon.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .qcore import (
    Gate2Q,
    PureState,
    PAULI_2Q_TRACELESS,
    apply_gate,
    haar_su4,
    opnorm_dist,
)

__all__ = [
    "FuzzVariant",
    "FuzzModel",
    "FuzzyCircuitRecord",
    "FuzzSamplingError",
    "sample_fuzzy_gate",
    "apply_fuzzy_circuit",
]


class FuzzVariant(str, enum.Enum):
    PAULI_HAMILTONIAN = "pauli-hamiltonian"
    HAAR_BALL = "haar-ball"


class FuzzSamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class FuzzModel:
    """Error radius plus sampler variant.

    epsilon = 0 is accepted as the degenerate noise-free limit of the
    Pauli-Hamiltonian sampler (useful for exact baseline runs).
    """

    epsilon: float
    variant: FuzzVariant = FuzzVariant.PAULI_HAMILTONIAN

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.epsilon == 0 and self.variant is FuzzVariant.HAAR_BALL:
            raise ValueError("haar-ball sampling needs epsilon > 0")


@dataclass(frozen=True)
class FuzzyCircuitRecord:
    """Intended gates, realized gates, and the error radius used."""

    targets: tuple
    realized: tuple
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "realized", tuple(self.realized))
        if len(self.targets) != len(self.realized):
            raise ValueError("target and realized gate lists differ in length")

    def max_deviation(self) -> float:
        if not self.targets:
            return 0.0
        return max(
            opnorm_dist(t.u, r.u) for t, r in zip(self.targets, self.realized)
        )


_MAX_REJECTIONS = 10_000


def sample_fuzzy_gate(
    target: Gate2Q, model: FuzzModel, rng: np.random.Generator
) -> Gate2Q:
    """Draw one realized gate within operator-norm `model.epsilon` of `target`."""
    eps = model.epsilon
    if model.variant is FuzzVariant.PAULI_HAMILTONIAN:
        if eps == 0:
            return target
        alphas = rng.uniform(-eps / 15, eps / 15, size=15)
        h = np.tensordot(alphas, PAULI_2Q_TRACELESS, axes=1)
        u = expm(1j * h) @ target.u  # H traceless, so det stays 1
        return Gate2Q(u, target.targets)
    # haar-ball rejection
    for _ in range(_MAX_REJECTIONS):
        u = haar_su4(rng)
        if opnorm_dist(u, target.u) <= eps:
            return Gate2Q(u, target.targets)
    raise FuzzSamplingError(
        f"haar-ball acceptance rate below {1 / _MAX_REJECTIONS:g} at "
        f"epsilon={eps}; use the pauli-hamiltonian variant for small epsilon"
    )


def apply_fuzzy_circuit(
    state: PureState,
    targets: Sequence[Gate2Q],
    model: FuzzModel,
    rng: np.random.Generator,
) -> tuple:
    """Apply freshly sampled fuzzy realizations of `targets` in order.

    Returns the output state together with a record of both circuits.
    """
    realized = []
    out = state
    for gate in targets:
        got = sample_fuzzy_gate(gate, model, rng)
        realized.append(got)
        out = apply_gate(out, got)
    record = FuzzyCircuitRecord(tuple(targets), tuple(realized), model.epsilon)
    return out, record
