"""Accessible dimension via Jacobian rank of circuit contraction maps.

The contraction map sends gate parameters (and optionally an input-sphere
point) to a unit vector in state space.  Its Jacobian image at a point is
spanned by the columns built here; the numerical rank over sampled points
estimates the accessible dimension.  Brickwork-monotone and dimension-growth
trials provide the randomized evidence for the monotonicity statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuits import Architecture, Circuit, brickwork, contract, random_architecture
from .fuzz import FuzzModel, sample_fuzzy_gate
from .qcore import (
    Gate2Q,
    PAULI_2Q_TRACELESS,
    PureState,
    apply_two_qubit,
    embed_two_qubit,
    haar_su4,
    zero_state,
)

__all__ = [
    "TangentFrame",
    "DimReport",
    "MonotoneTrial",
    "DimGrowthTrial",
    "tangent_frame",
    "accessible_dimension",
    "brickwork_monotone_trial",
    "negentropy_dimension_trial",
    "numerical_rank",
    "embed_substate",
    "sphere_tangent_basis",
]

DEFAULT_RANK_TOL = 1e-8


def _real_embed(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


@dataclass(frozen=True)
class TangentFrame:
    """Real-embedded Jacobian columns of the contraction map at one point."""

    point: Circuit
    columns: np.ndarray
    meta: str


@dataclass(frozen=True)
class DimReport:
    arch_id: str
    n: int
    R: int
    sampled_points: int
    ranks: tuple
    dimension: int
    tol: float
    saturated: bool
    gap_ratios: tuple

    def to_json_dict(self) -> dict:
        return {
            "arch_id": self.arch_id,
            "n": self.n,
            "R": self.R,
            "sampled_points": self.sampled_points,
            "ranks": list(self.ranks),
            "dimension": self.dimension,
            "tol": self.tol,
            "saturated": self.saturated,
            "gap_ratios": list(self.gap_ratios),
        }


def tangent_frame(circ: Circuit, input: PureState) -> TangentFrame:
    """Columns (U_R..U_{j+1}) (iP) (U_j..U_1)|in> for each slot j and each of
    the 15 two-local Pauli directions P at slot j's qubits."""
    n = circ.arch.n
    slots = circ.arch.slots
    if not slots:
        raise ValueError("tangent frame needs at least one gate slot")
    # forward states f_j after the first j gates
    f = [input.amps]
    for u, (j, k) in zip(circ.gates, slots):
        f.append(apply_two_qubit(f[-1], n, u, j, k))
    # suffix unitaries S_j = U_R ... U_{j+1}; S_R = identity
    d = 2**n
    suffix = [None] * (len(slots) + 1)
    suffix[len(slots)] = np.eye(d, dtype=complex)
    for j in range(len(slots), 0, -1):
        g, (a, b) = circ.gates[j - 1], slots[j - 1]
        suffix[j - 1] = suffix[j] @ embed_two_qubit(g, n, a, b)
    cols = []
    for jslot, (a, b) in enumerate(slots, start=1):
        fj = f[jslot]
        for p in PAULI_2Q_TRACELESS:
            v = apply_two_qubit(fj, n, 1j * p, a, b)
            cols.append(_real_embed(suffix[jslot] @ v))
    return TangentFrame(circ, np.array(cols).T, circ.arch.arch_id())


def numerical_rank(columns: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> tuple:
    """(rank, gap_ratio) with rank = count of singular values > tol * sigma_max."""
    if columns.size == 0:
        return 0, float("inf")
    s = np.linalg.svd(columns, compute_uv=False)
    if s[0] == 0:
        return 0, float("inf")
    rank = int(np.sum(s > tol * s[0]))
    if 0 < rank < len(s) and s[rank] > 0:
        gap = float(s[rank - 1] / s[rank])
    else:
        gap = float("inf")
    return rank, gap


def accessible_dimension(
    arch: Architecture,
    input: PureState,
    points: int,
    tol: float = DEFAULT_RANK_TOL,
    rng: Optional[np.random.Generator] = None,
    gate_sampler=None,
) -> DimReport:
    """Max numerical Jacobian rank over `points` sampled circuits.

    Gates default to Haar samples per slot; `gate_sampler(slot_index, rng)`
    overrides that (e.g. for fuzzy sampling around fixed targets).  A global
    phase column i*(output state) is always included, matching the sphere
    convention for the state space.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    ranks, gaps = [], []
    for _ in range(points):
        if gate_sampler is None:
            gates = tuple(haar_su4(rng) for _ in arch.slots)
        else:
            gates = tuple(gate_sampler(i, rng) for i in range(len(arch.slots)))
        circ = Circuit(arch, gates)
        out = contract(circ, input)
        phase_col = _real_embed(1j * out.amps)[:, None]
        if arch.slots:
            frame = tangent_frame(circ, input)
            cols = np.hstack([frame.columns, phase_col])
        else:
            cols = phase_col
        rank, gap = numerical_rank(cols, tol)
        ranks.append(rank)
        gaps.append(gap)
    dim = max(ranks)
    return DimReport(
        arch_id=arch.arch_id(),
        n=arch.n,
        R=len(arch.slots),
        sampled_points=points,
        ranks=tuple(ranks),
        dimension=dim,
        tol=tol,
        saturated=(dim == 2 * 2**arch.n - 1),
        gap_ratios=tuple(gaps),
    )


@dataclass(frozen=True)
class MonotoneTrial:
    n: int
    layers_short: int
    layers_long: int
    R_short: int
    R_long: int
    rank_short: int
    rank_long: int
    saturated: bool
    strict_increase: bool

    @property
    def in_regime(self) -> bool:
        return not self.saturated

    @property
    def passed(self) -> bool:
        return self.saturated or self.strict_increase


def brickwork_monotone_trial(
    n: int,
    T: int,
    model: FuzzModel,
    rng: np.random.Generator,
    tol: float = DEFAULT_RANK_TOL,
) -> MonotoneTrial:
    """Compare accessible dimensions of T-layer vs (T+n)-layer brickwork at a
    fuzzy-sampled point; the long architecture extends the short one."""
    arch_long = brickwork(n, T + n, periodic=True)
    arch_short = brickwork(n, T, periodic=True)
    assert arch_long.slots[: len(arch_short.slots)] == arch_short.slots
    gates = []
    for slot in arch_long.slots:
        target = Gate2Q(haar_su4(rng), slot)
        gates.append(sample_fuzzy_gate(target, model, rng).u)
    inp = zero_state(n)
    short_circ = Circuit(arch_short, tuple(gates[: len(arch_short.slots)]))
    long_circ = Circuit(arch_long, tuple(gates))
    cols_s = np.hstack(
        [
            tangent_frame(short_circ, inp).columns,
            _real_embed(1j * contract(short_circ, inp).amps)[:, None],
        ]
    )
    cols_l = np.hstack(
        [
            tangent_frame(long_circ, inp).columns,
            _real_embed(1j * contract(long_circ, inp).amps)[:, None],
        ]
    )
    rank_s, _ = numerical_rank(cols_s, tol)
    rank_l, _ = numerical_rank(cols_l, tol)
    saturated = rank_s == 2 * 2**n - 1
    return MonotoneTrial(
        n=n,
        layers_short=T,
        layers_long=T + n,
        R_short=len(arch_short.slots),
        R_long=len(arch_long.slots),
        rank_short=rank_s,
        rank_long=rank_l,
        saturated=saturated,
        strict_increase=rank_l > rank_s,
    )


def sphere_tangent_basis(phi: np.ndarray) -> np.ndarray:
    """Orthonormal real tangent directions of the unit sphere at phi.

    phi is a complex unit vector of dimension d; returns a (2d-1, d) complex
    array whose real embeddings are orthonormal and orthogonal to embed(phi).
    """
    d = phi.size
    u = _real_embed(phi)
    m = np.eye(2 * d) - np.outer(u, u)
    q, s, _ = np.linalg.svd(m)
    basis = q[:, : 2 * d - 1]
    return (basis[:d, :] + 1j * basis[d:, :]).T


def embed_substate(vec_k: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Place a k-qubit vector at `qubits` and |0> on every other qubit."""
    qubits = list(qubits)
    k = len(qubits)
    others = [q for q in range(n) if q not in qubits]
    rest = np.zeros(2 ** (n - k), dtype=complex)
    if rest.size:
        rest[0] = 1.0
    outer = np.outer(vec_k, rest).reshape([2] * n) if n > k else vec_k.reshape([2] * n)
    src = {q: i for i, q in enumerate(qubits)}
    src.update({q: k + i for i, q in enumerate(others)})
    axes = [src[q] for q in range(n)]
    return np.transpose(outer, axes).reshape(-1)


@dataclass(frozen=True)
class DimGrowthTrial:
    n: int
    k: int
    r: int
    rank_km1: int
    rank_k: int
    in_regime: bool
    strict_increase: bool

    @property
    def passed(self) -> bool:
        return (not self.in_regime) or self.strict_increase


def _input_augmented_rank(
    n: int,
    k: int,
    r: int,
    rng: np.random.Generator,
    tol: float,
    archs_per_point: int,
) -> int:
    """Max rank of the (input k-sphere x gates) -> state-space map over samples."""
    best = 0
    for _ in range(archs_per_point):
        arch = random_architecture(n, r, rng) if r > 0 else Architecture(n, ())
        qubits = sorted(rng.choice(n, size=k, replace=False).tolist())
        v = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
        phi = v / np.linalg.norm(v)
        inp = PureState(n, embed_substate(phi, qubits, n))
        gates = tuple(haar_su4(rng) for _ in arch.slots)
        circ = Circuit(arch, gates)
        cols = []
        if arch.slots:
            cols.append(tangent_frame(circ, inp).columns)
        u_total = np.eye(2**n, dtype=complex)
        for g, (a, b) in zip(circ.gates, arch.slots):
            u_total = embed_two_qubit(g, n, a, b) @ u_total
        tangents = sphere_tangent_basis(phi)
        in_cols = [
            _real_embed(u_total @ embed_substate(t, qubits, n)) for t in tangents
        ]
        cols.append(np.array(in_cols).T)
        rank, _ = numerical_rank(np.hstack(cols), tol)
        best = max(best, rank)
    return best


def negentropy_dimension_trial(
    n: int,
    k: int,
    r: int,
    rng: np.random.Generator,
    tol: float = DEFAULT_RANK_TOL,
    archs_per_point: int = 2,
) -> DimGrowthTrial:
    """Compare sampled dimensions of the (k-1)- and k-qubit input-sphere image
    sets under <= r random gates; the regime condition is k > log2(15 r)."""
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n")
    if r < 0:
        raise ValueError("r must be nonnegative")
    in_regime = r == 0 or k > np.log2(15 * r)
    rank_km1 = (
        _input_augmented_rank(n, k - 1, r, rng, tol, archs_per_point) if k > 1 else 0
    )
    rank_k = _input_augmented_rank(n, k, r, rng, tol, archs_per_point)
    return DimGrowthTrial(
        n=n,
        k=k,
        r=r,
        rank_km1=rank_km1,
        rank_k=rank_k,
        in_regime=bool(in_regime),
        strict_increase=rank_k > rank_km1,
    )
