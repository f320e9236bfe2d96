"""Gate layouts (architectures), brickwork construction, contraction.

An architecture is an ordered list of qubit pairs; slotting concrete 4x4
unitaries into the pairs gives a circuit.  Light-cone detection and small
exhaustive architecture enumeration live here too.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import Gate2Q, PureState, apply_two_qubit, embed_two_qubit

__all__ = [
    "Architecture",
    "Circuit",
    "SearchBudgetError",
    "brickwork",
    "random_architecture",
    "contract",
    "circuit_unitary",
    "apply_circuit_to_density",
    "has_light_cone",
    "enumerate_architectures",
    "collapse_repeats",
]


class SearchBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class Architecture:
    """Ordered gate slots over an n-qubit register; slot order is execution order."""

    n: int
    slots: tuple

    def __post_init__(self):
        slots = tuple((int(j), int(k)) for j, k in self.slots)
        object.__setattr__(self, "slots", slots)
        for j, k in slots:
            if j == k or not (0 <= j < self.n and 0 <= k < self.n):
                raise ValueError(f"invalid slot ({j}, {k}) for n={self.n}")

    @property
    def num_gates(self) -> int:
        return len(self.slots)

    def arch_id(self) -> str:
        body = "".join(f"({j},{k})" for j, k in self.slots)
        return f"n{self.n}:{body}" if body else f"n{self.n}:empty"

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "slots": [list(s) for s in self.slots]})

    @staticmethod
    def from_json(text: str) -> "Architecture":
        d = json.loads(text)
        return Architecture(d["n"], tuple(tuple(s) for s in d["slots"]))


@dataclass(frozen=True)
class Circuit:
    """An architecture with one 4x4 unitary per slot."""

    arch: Architecture
    gates: tuple

    def __post_init__(self):
        gates = tuple(np.asarray(g, dtype=complex) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        if len(gates) != len(self.arch.slots):
            raise ValueError("gate count does not match slot count")
        for g in gates:
            if g.shape != (4, 4):
                raise ValueError("each gate must be 4x4")
            if np.max(np.abs(g.conj().T @ g - np.eye(4))) > 1e-8:
                raise ValueError("each gate must be unitary")

    def as_gate2q(self) -> list:
        return [Gate2Q(g, s) for g, s in zip(self.gates, self.arch.slots)]

    def inverse(self) -> "Circuit":
        arch = Architecture(self.arch.n, tuple(reversed(self.arch.slots)))
        return Circuit(arch, tuple(g.conj().T for g in reversed(self.gates)))


def brickwork(n: int, layers: int, periodic: bool = False) -> Architecture:
    """Alternating even/odd nearest-neighbor layers.

    Odd layers (1st, 3rd, ...) pair (0,1), (2,3), ...; even layers pair
    (1,2), (3,4), ... plus (n-1, 0) when periodic.
    """
    if n < 2:
        raise ValueError("brickwork needs n >= 2")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    slots = []
    for layer in range(1, layers + 1):
        if layer % 2 == 1:
            slots.extend((j, j + 1) for j in range(0, n - 1, 2))
        else:
            slots.extend((j, j + 1) for j in range(1, n - 1, 2))
            if periodic:
                slots.append((n - 1, 0))
    return Architecture(n, tuple(slots))


def all_pairs(n: int) -> list:
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def random_architecture(n: int, R: int, rng: np.random.Generator) -> Architecture:
    """R slots, each an independent uniform unordered distinct pair."""
    if n < 2:
        raise ValueError("need n >= 2")
    if R < 0:
        raise ValueError("gate count must be nonnegative")
    pairs = all_pairs(n)
    idx = rng.integers(0, len(pairs), size=R)
    return Architecture(n, tuple(pairs[i] for i in idx))


def contract(circ: Circuit, input: PureState) -> PureState:
    """Apply all gates in slot order to `input`."""
    if input.n != circ.arch.n:
        raise ValueError(f"state has n={input.n}, architecture has n={circ.arch.n}")
    amps = input.amps
    for u, (j, k) in zip(circ.gates, circ.arch.slots):
        amps = apply_two_qubit(amps, input.n, u, j, k)
    return PureState(input.n, amps)


def circuit_unitary(circ: Circuit) -> np.ndarray:
    """Dense 2^n x 2^n product of all embedded gates (slot order rightmost-first)."""
    n = circ.arch.n
    u = np.eye(2**n, dtype=complex)
    for g, (j, k) in zip(circ.gates, circ.arch.slots):
        u = embed_two_qubit(g, n, j, k) @ u
    return u


def apply_circuit_to_density(mat: np.ndarray, circ: Circuit) -> np.ndarray:
    u = circuit_unitary(circ)
    return u @ mat @ u.conj().T


def has_light_cone(arch: Architecture) -> tuple:
    """Whether some qubit links to every other via gate paths in the slot order.

    Processes the slots backward from each candidate final qubit, growing the
    causal cone; returns (flag, apex qubit or None).
    """
    n = arch.n
    for apex in range(n):
        cone = {apex}
        for j, k in reversed(arch.slots):
            if j in cone or k in cone:
                cone.add(j)
                cone.add(k)
        if len(cone) == n:
            return True, apex
    return False, None


def _canonical_slots(slots: tuple) -> tuple:
    """Stable-sort commuting adjacent slots (disjoint support) into a canonical order."""
    s = list(slots)
    changed = True
    while changed:
        changed = False
        for i in range(len(s) - 1):
            a, b = s[i], s[i + 1]
            if not (set(a) & set(b)) and b < a:
                s[i], s[i + 1] = b, a
                changed = True
    return tuple(s)


def enumerate_architectures(n: int, r: int, guard: int = 4) -> list:
    """All slot sequences of length <= r, deduplicated under exchange of
    adjacent disjoint-support slots."""
    if r > guard:
        raise SearchBudgetError(
            f"r={r} exceeds the exhaustive-enumeration guard ({guard}); "
            "use the optimizer search mode instead"
        )
    pairs = all_pairs(n)
    seen = {}
    for length in range(r + 1):
        for combo in itertools.product(pairs, repeat=length):
            key = _canonical_slots(combo)
            if key not in seen:
                seen[key] = Architecture(n, key)
    return list(seen.values())


def collapse_repeats(arch: Architecture) -> Architecture:
    """Merge consecutive slots on the same pair (one SU(4) suffices there)."""
    slots = []
    for s in arch.slots:
        if slots and slots[-1] == s:
            continue
        slots.append(s)
    return Architecture(arch.n, tuple(slots))
