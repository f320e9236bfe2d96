"""Dense linear-algebra substrate: states, gates, Pauli strings, distances.

Conventions: qubit 0 is the leftmost tensor factor, so bit i of an
amplitude index (counting from the most significant of n bits) addresses
qubit i.  All values are immutable after construction and every operation
is a pure function, so everything here is safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Tolerances",
    "TOL",
    "PureState",
    "DensityOp",
    "Gate2Q",
    "PauliString",
    "PAULI_1Q",
    "two_qubit_pauli_basis",
    "zero_state",
    "basis_state",
    "random_state",
    "apply_gate",
    "apply_two_qubit",
    "embed_two_qubit",
    "partial_trace",
    "trace_distance",
    "pure_overlap",
    "haar_su4",
    "haar_unitary",
    "to_su4",
    "opnorm_dist",
    "random_density",
    "compose_on_qubits",
    "PAULI_2Q_TRACELESS",
]


@dataclass(frozen=True)
class Tolerances:
    """Single knob for all numerical tolerances used by the validators."""

    construct: float = 1e-10
    unitary_drift: float = 1e-8


TOL = Tolerances()

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_1Q = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}

_PAULI_LETTERS = "IXYZ"


def two_qubit_pauli_basis() -> np.ndarray:
    """The 15 traceless two-qubit Pauli products, shape (15, 4, 4).

    Ordering is lexicographic over letter pairs with 'II' removed:
    IX, IY, IZ, XI, XX, ..., ZZ.
    """
    mats = []
    for a in _PAULI_LETTERS:
        for b in _PAULI_LETTERS:
            if a == b == "I":
                continue
            mats.append(np.kron(PAULI_1Q[a], PAULI_1Q[b]))
    return np.array(mats)


PAULI_2Q_TRACELESS = two_qubit_pauli_basis()


def _is_power_of_two(m: int) -> bool:
    return m > 0 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector over n qubits."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        object.__setattr__(self, "amps", amps)
        if amps.ndim != 1 or not _is_power_of_two(amps.size):
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
        if amps.size != 2**self.n:
            raise ValueError(f"length {amps.size} does not match n={self.n}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL.construct * 100:
            raise ValueError(f"state norm {norm} deviates from 1")

    def density(self) -> "DensityOp":
        return DensityOp(self.n, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityOp:
    """Hermitian, PSD, trace-1 matrix on n qubits."""

    n: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        d = 2**self.n
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match n={self.n}")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-9:
            raise ValueError("matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace {tr} deviates from 1")
        if np.min(np.linalg.eigvalsh(mat)) < -1e-9:
            raise ValueError("matrix has a significantly negative eigenvalue")

    @staticmethod
    def from_pure(psi: PureState) -> "DensityOp":
        return psi.density()

    @staticmethod
    def maximally_mixed(n: int) -> "DensityOp":
        d = 2**n
        return DensityOp(n, np.eye(d) / d)


@dataclass(frozen=True)
class Gate2Q:
    """A 4x4 special unitary acting on an ordered qubit pair."""

    u: np.ndarray
    targets: tuple

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "targets", tuple(self.targets))
        j, k = self.targets
        if j == k:
            raise ValueError("gate targets must be distinct qubits")
        if u.shape != (4, 4):
            raise ValueError(f"gate matrix shape {u.shape}, expected (4, 4)")
        if np.max(np.abs(u.conj().T @ u - np.eye(4))) > TOL.construct * 100:
            raise ValueError("gate is not unitary")
        if abs(np.linalg.det(u) - 1.0) > TOL.unitary_drift * 10:
            raise ValueError("gate determinant is not 1 (use to_su4 to renormalize)")

    def dagger(self) -> "Gate2Q":
        return Gate2Q(self.u.conj().T, self.targets)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of one-qubit Pauli/identity letters."""

    n: int
    letters: str

    def __post_init__(self):
        if len(self.letters) != self.n:
            raise ValueError("letter count does not match n")
        if any(c not in _PAULI_LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")

    def matrix(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for c in self.letters:
            m = np.kron(m, PAULI_1Q[c])
        return m


def zero_state(n: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return PureState(n, amps)


def basis_state(n: int, index: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return PureState(n, amps)


def random_state(n: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return PureState(n, v / np.linalg.norm(v))


def apply_two_qubit(amps: np.ndarray, n: int, u: np.ndarray, j: int, k: int) -> np.ndarray:
    """Apply a 4x4 unitary to qubits (j, k) of an n-qubit amplitude vector.

    Low-level routine: no SU(4) normalization required of u.
    """
    if not (0 <= j < n and 0 <= k < n):
        raise ValueError(f"targets ({j}, {k}) out of range for n={n}")
    if j == k:
        raise ValueError("targets must be distinct")
    t = amps.reshape([2] * n)
    u4 = np.asarray(u).reshape(2, 2, 2, 2)
    t = np.tensordot(u4, t, axes=[(2, 3), (j, k)])
    t = np.moveaxis(t, (0, 1), (j, k))
    return np.ascontiguousarray(t).reshape(-1)


def apply_gate(state: PureState, gate: Gate2Q) -> PureState:
    """Apply `gate` (embedded at its targets) to `state`; preserves norm."""
    j, k = gate.targets
    return PureState(state.n, apply_two_qubit(state.amps, state.n, gate.u, j, k))


def embed_two_qubit(u: np.ndarray, n: int, j: int, k: int) -> np.ndarray:
    """Dense 2^n x 2^n embedding of a 4x4 operator at qubits (j, k)."""
    d = 2**n
    out = np.empty((d, d), dtype=complex)
    for col in range(d):
        e = np.zeros(d, dtype=complex)
        e[col] = 1.0
        out[:, col] = apply_two_qubit(e, n, u, j, k)
    return out


def partial_trace(rho: DensityOp, keep: Iterable[int]) -> DensityOp:
    """Trace out all qubits not in `keep`; kept qubits stay in ascending order."""
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if any(q < 0 or q >= rho.n for q in keep):
        raise ValueError(f"keep set {keep} out of range for n={rho.n}")
    n = rho.n
    t = rho.mat.reshape([2] * (2 * n))
    # np.trace removes one row axis and one col axis, keeping the remaining
    # axes in order, so tracing highest-index qubits first keeps bookkeeping flat
    cur_n = n
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=q, axis2=cur_n + q)
        cur_n -= 1
    d = 2 ** len(keep)
    return DensityOp(len(keep), t.reshape(d, d))


def trace_distance(a: DensityOp, b: DensityOp) -> float:
    """Half the trace norm of a - b."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")
    eigs = np.linalg.eigvalsh(a.mat - b.mat)
    return float(0.5 * np.sum(np.abs(eigs)))


def pure_overlap(rho: DensityOp, psi: PureState) -> float:
    """<psi| rho |psi>, the fidelity of rho with the pure state psi."""
    if rho.n != psi.n:
        raise ValueError(f"dimension mismatch: n={rho.n} vs n={psi.n}")
    val = np.vdot(psi.amps, rho.mat @ psi.amps).real
    return float(np.clip(val, 0.0, 1.0))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random U(dim) via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def to_su4(u: np.ndarray) -> np.ndarray:
    """Rescale a 4x4 unitary by a global phase so its determinant is 1."""
    det = complex(np.linalg.det(u))
    return np.asarray(u, dtype=complex) * det ** (-0.25)


def haar_su4(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(4) matrix (QR construction, determinant renormalized)."""
    return to_su4(haar_unitary(4, rng))


def opnorm_dist(u: np.ndarray, v: np.ndarray) -> float:
    """Largest singular value of u - v."""
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v), 2))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityOp:
    """Random full- or fixed-rank density operator (Ginibre construction)."""
    d = 2**n
    r = rank if rank is not None else d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityOp(n, m / np.trace(m).real)


def _permutation_axes(n: int, order: Sequence[int]) -> list:
    pos = {q: i for i, q in enumerate(order)}
    row = [pos[q] for q in range(n)]
    return row + [n + x for x in row]


def compose_on_qubits(n: int, parts: Sequence[tuple]) -> np.ndarray:
    """Build an n-qubit density matrix from disjoint blocks.

    `parts` is a sequence of (qubits, mat) with `qubits` an ascending tuple and
    `mat` the density matrix of that block; the blocks must partition [0, n).
    """
    order: list = []
    tensor = np.array([[1.0 + 0j]])
    for qubits, mat in parts:
        order.extend(qubits)
        tensor = np.kron(tensor, mat)
    if sorted(order) != list(range(n)):
        raise ValueError("blocks must partition the qubit register")
    t = tensor.reshape([2] * (2 * n))
    t = np.transpose(t, _permutation_axes(n, order))
    d = 2**n
    return np.ascontiguousarray(t).reshape(d, d)
