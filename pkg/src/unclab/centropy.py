"""Hypothesis-testing entropy and complexity entropy by restricted search.

The hypothesis-testing entropy is solved exactly by eigen-greedy filling.
The complexity entropy is a minimization of log2 Tr(Q) over measurement
operators Q = U_r^dag Q_0 U_r, with Q_0 a mask of |0><0| projectors and
identities and U_r a circuit of at most r two-qubit gates.  The search
parametrizes each gate by 15 real coordinates through the exponential of
the traceless two-qubit Pauli basis and runs gradient ascent on the
success probability Tr(Q rho), with deterministic seeded restarts per
(architecture, mask) pair so that results are reproducible and nested
searches stay monotone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .circuits import (
    Architecture,
    Circuit,
    SearchBudgetError,
    brickwork,
    collapse_repeats,
    enumerate_architectures,
    random_architecture,
)
from .qcore import DensityOp, PAULI_2Q_TRACELESS, apply_two_qubit

__all__ = [
    "MeasOp",
    "EntropyResult",
    "SearchConfig",
    "hypothesis_entropy",
    "eval_measop",
    "complexity_entropy",
    "complexity_negentropy",
    "complexity_profile",
    "MeasProfile",
]

ETA_SLACK = 1e-9


@dataclass(frozen=True)
class MeasOp:
    """Restricted measurement Q = U_r^dag Q_0 U_r.

    `mask[j]` True means qubit j is projected onto |0>; `prep` is the circuit
    implementing U_r (applied to the state before the mask is read out).
    """

    mask: tuple
    prep: Circuit

    def __post_init__(self):
        mask = tuple(bool(b) for b in self.mask)
        object.__setattr__(self, "mask", mask)
        if len(mask) != self.prep.arch.n:
            raise ValueError("mask length does not match prep register size")

    @property
    def n(self) -> int:
        return len(self.mask)

    @property
    def w(self) -> int:
        return sum(self.mask)

    @property
    def size(self) -> int:
        return 2 ** (self.n - self.w)

    def mask_bits(self) -> int:
        bits = 0
        for j, flag in enumerate(self.mask):
            if flag:
                bits |= 1 << (self.n - 1 - j)
        return bits

    def to_json_dict(self) -> dict:
        return {
            "mask": [int(b) for b in self.mask],
            "architecture": [list(s) for s in self.prep.arch.slots],
            "gates": [
                {"re": g.real.tolist(), "im": g.imag.tolist()} for g in self.prep.gates
            ],
        }


@dataclass(frozen=True)
class EntropyResult:
    value: float
    witness: object
    achieved_prob: float
    mode: str


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the complexity-entropy search."""

    mode: str = "exhaustive"  # or "optimized"
    restarts: int = 32
    maxiter: int = 300
    guard_r: int = 4
    seed: int = 0
    n_random_archs: int = 8
    ftol: float = 1e-15
    gtol: float = 1e-11


def hypothesis_entropy(rho: DensityOp, eta: float) -> EntropyResult:
    """Exact optimum of min Tr(Q) s.t. Tr(Q rho) >= eta, 0 <= Q <= 1.

    Eigen-greedy: fill eigenvectors of rho by decreasing eigenvalue, putting
    fractional weight on the marginal one.  Returns log2 of the optimum.
    """
    if not (0 < eta <= 1):
        raise ValueError("eta must lie in (0, 1]")
    lams = np.sort(np.linalg.eigvalsh(rho.mat))[::-1]
    lams = np.clip(lams, 0.0, None)
    csum = np.cumsum(lams)
    m = int(np.searchsorted(csum, eta - 1e-14) + 1)
    m = min(m, len(lams))
    prev = csum[m - 2] if m >= 2 else 0.0
    lam_m = lams[m - 1]
    frac = 0.0 if lam_m <= 0 else min(max((eta - prev) / lam_m, 0.0), 1.0)
    tr_q = (m - 1) + frac
    witness = {"full_eigenvectors": m - 1, "fractional_weight": frac}
    return EntropyResult(float(np.log2(tr_q)), witness, float(eta), "eigen-greedy")


def _selection(n: int, mask_bits: int) -> np.ndarray:
    return (np.arange(2**n) & mask_bits) == 0


def eval_measop(q: MeasOp, rho: DensityOp) -> tuple:
    """(Tr(Q rho), Tr(Q)) with prob computed by applying prep to rho."""
    if q.n != rho.n:
        raise ValueError(f"dimension mismatch: n={q.n} vs n={rho.n}")
    mat = rho.mat
    n = rho.n
    # conjugate rho by the prep circuit, gate by gate, on rows then columns
    for g, (j, k) in zip(q.prep.gates, q.prep.arch.slots):
        cols = np.stack([apply_two_qubit(mat[:, c], n, g, j, k) for c in range(2**n)], axis=1)
        mat = np.stack(
            [apply_two_qubit(cols[r, :].conj(), n, g, j, k).conj() for r in range(2**n)],
            axis=0,
        )
    sel = _selection(n, q.mask_bits())
    prob = float(np.sum(np.diag(mat).real[sel]))
    return prob, q.size


# ---------------------------------------------------------------------------
# parametrized gate machinery

_PB = PAULI_2Q_TRACELESS  # (15, 4, 4)


def _gate_and_frechet(theta15: np.ndarray) -> tuple:
    """e^{iH} for H = sum theta_a P_a, with the pieces needed for derivatives.

    Returns (G, V, E) where H = V diag(w) V^dag and, for a direction P,
    dG[P] = V (E o (V^dag (iP) V)) V^dag  (Daleckii-Krein).
    """
    h = np.tensordot(theta15, _PB, axes=1)
    w, v = np.linalg.eigh(h)
    ew = np.exp(1j * w)
    diff = np.subtract.outer(1j * w, 1j * w)
    num = np.subtract.outer(ew, ew)
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.where(np.abs(diff) > 1e-12, num / diff, 0.0)
    same = np.abs(np.subtract.outer(w, w)) <= 1e-12
    e = np.where(same, np.add.outer(ew, ew) / 2.0, e)
    g = (v * ew) @ v.conj().T
    return g, v, e


def _split_axes(amps: np.ndarray, n: int, j: int, k: int) -> np.ndarray:
    """View of an n-qubit vector with qubits (j, k) merged as a leading 4-axis."""
    t = amps.reshape([2] * n)
    t = np.moveaxis(t, (j, k), (0, 1))
    return np.ascontiguousarray(t).reshape(4, -1)


def _prob_and_grad(
    theta: np.ndarray,
    lams: np.ndarray,
    vecs: np.ndarray,
    slots: tuple,
    sel: np.ndarray,
    n: int,
) -> tuple:
    R = len(slots)
    thetas = theta.reshape(R, 15)
    gates = []
    for t15 in thetas:
        gates.append(_gate_and_frechet(t15))
    # forward pass per spectral component of rho
    fwd = []  # fwd[i][j] = state of component i after j gates
    for i in range(vecs.shape[1]):
        states = [vecs[:, i]]
        for (g, _, _), (j, k) in zip(gates, slots):
            states.append(apply_two_qubit(states[-1], n, g, j, k))
        fwd.append(states)
    prob = 0.0
    proj = []
    for i, lam in enumerate(lams):
        p = fwd[i][-1] * sel
        proj.append(p)
        prob += lam * float(np.vdot(p, p).real)
    grad = np.zeros((R, 15))
    # backward pass: b_j = (G_{j+1}..G_R)^dag Q0 phi
    backs = [proj[i] for i in range(len(lams))]
    for jslot in range(R - 1, -1, -1):
        g, v, e = gates[jslot]
        j, k = slots[jslot]
        kmat = np.zeros((4, 4), dtype=complex)
        for i, lam in enumerate(lams):
            fmat = _split_axes(fwd[i][jslot], n, j, k)
            bmat = _split_axes(backs[i], n, j, k)
            kmat += lam * (fmat @ bmat.conj().T)
        ktil = v.conj().T @ kmat @ v
        cdirs = np.einsum("ij,ajk,kl->ail", v.conj().T, 1j * _PB, v)
        terms = np.einsum("kl,akl,lk->a", e, cdirs, ktil)
        grad[jslot] = 2.0 * terms.real
        if jslot > 0:
            gd = g.conj().T
            for i in range(len(lams)):
                backs[i] = apply_two_qubit(backs[i], n, gd, j, k)
    return prob, grad.reshape(-1)


def _optimize_mask(
    lams: np.ndarray,
    vecs: np.ndarray,
    arch: Architecture,
    mask_bits: int,
    config: SearchConfig,
    target: Optional[float] = None,
) -> tuple:
    """Maximize Tr(Q0 U rho U^dag) over the arch's gates; returns (prob, theta)."""
    n = arch.n
    sel = _selection(n, mask_bits)
    slots = arch.slots
    if not slots:
        prob = float(sum(l * np.vdot(v * sel, v * sel).real for l, v in zip(lams, vecs.T)))
        return prob, np.zeros(0)

    def negf(theta):
        p, g = _prob_and_grad(theta, lams, vecs, slots, sel, n)
        return -p, -g

    dim = 15 * len(slots)
    best = (-1.0, np.zeros(dim))
    key = [config.seed] + [x for s in slots for x in s] + [mask_bits]
    for restart in range(config.restarts):
        if restart == 0:
            theta0 = np.zeros(dim)
        else:
            rng = np.random.default_rng(np.random.SeedSequence(key + [restart]))
            theta0 = rng.uniform(-2.0, 2.0, size=dim)
        res = minimize(
            negf,
            theta0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": config.maxiter, "ftol": config.ftol, "gtol": config.gtol},
        )
        if -res.fun > best[0]:
            best = (-res.fun, res.x)
        if target is not None and best[0] >= target:
            break
    return best


def _factor_rho(rho: DensityOp) -> tuple:
    lams, vecs = np.linalg.eigh(rho.mat)
    keep = lams > 1e-14
    return lams[keep], vecs[:, keep]


def _search_archs(n: int, r: int, config: SearchConfig) -> list:
    """Architecture pool: canonical, repeat-collapsed, at most r gates."""
    if config.mode == "exhaustive":
        archs = enumerate_architectures(n, r, guard=config.guard_r)
    elif config.mode == "optimized":
        archs = [Architecture(n, ())]
        if r >= 1 and n >= 2:
            bw = brickwork(n, max(1, (2 * r) // max(1, n // 2)), periodic=n > 2)
            archs.append(Architecture(n, bw.slots[:r]))
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xA7C]))
            for _ in range(config.n_random_archs):
                archs.append(random_architecture(n, r, rng))
    else:
        raise ValueError(f"unknown search mode {config.mode!r}")
    seen = {}
    for a in archs:
        c = collapse_repeats(a)
        if len(c.slots) <= r and c.slots not in seen:
            seen[c.slots] = c
    return list(seen.values())


def _masks_by_weight(n: int, w: int) -> list:
    """Masks with w projected qubits, lowest lexicographic mask first."""
    out = []
    for combo in itertools.combinations(range(n), w):
        mask = tuple(j in combo for j in range(n))
        out.append(mask)
    return out


@dataclass(frozen=True)
class MeasProfile:
    """Best achievable Tr(Q rho) per (mask, gate count), reusable across (r, eta).

    entries: mask tuple -> {gate_count: (best_prob, MeasOp)}, where best_prob
    is the maximum over all searched architectures with exactly that many
    (repeat-collapsed) gates.
    """

    n: int
    r_max: int
    entries: dict
    mode: str

    def best_prob(self, mask: tuple, r: int) -> float:
        by_gates = self.entries[mask]
        probs = [p for g, (p, _) in by_gates.items() if g <= r]
        return max(probs) if probs else 0.0

    def best_for(self, r: int, eta: float) -> tuple:
        """(w, witness, prob) with the largest feasible projected count at budget r."""
        eta_eff = min(eta, 1.0 - 1e-9)
        for mask in sorted(self.entries, key=lambda m: (-sum(m), m)):
            feasible = [
                (p, g, op)
                for g, (p, op) in self.entries[mask].items()
                if g <= r and p >= eta_eff - ETA_SLACK
            ]
            if feasible:
                p, _, op = max(feasible, key=lambda t: (t[0], -t[1]))
                return sum(mask), op, p
        return 0, None, 1.0

    def entropy(self, r: int, eta: float) -> int:
        w, _, _ = self.best_for(r, eta)
        return self.n - w


def complexity_profile(
    rho: DensityOp, r_max: int, config: SearchConfig = SearchConfig()
) -> MeasProfile:
    """Optimize every (architecture, mask) pair once; query later per (r, eta)."""
    n = rho.n
    lams, vecs = _factor_rho(rho)
    archs = _search_archs(n, r_max, config)
    entries: dict = {}
    for w in range(n, 0, -1):
        for mask in _masks_by_weight(n, w):
            bits = sum(1 << (n - 1 - j) for j in range(n) if mask[j])
            by_gates: dict = {}
            for arch in archs:
                prob, theta = _optimize_mask(lams, vecs, arch, bits, config)
                g = len(arch.slots)
                if g not in by_gates or prob > by_gates[g][0]:
                    gates = tuple(
                        _gate_and_frechet(t)[0] for t in theta.reshape(-1, 15)
                    )
                    op = MeasOp(mask, Circuit(arch, gates))
                    by_gates[g] = (prob, op)
            entries[mask] = by_gates
    return MeasProfile(n, r_max, entries, config.mode)


def _entropy_from_witness(rho, w, op, eta_eff, mode):
    if op is None:
        n = rho.n
        op = MeasOp((False,) * n, Circuit(Architecture(n, ()), ()))
        prob = 1.0
    else:
        prob, _ = eval_measop(op, rho)
        if prob < eta_eff - 10 * ETA_SLACK:
            raise AssertionError("witness failed exact feasibility re-check")
    return EntropyResult(float(rho.n - w), op, prob, mode)


def complexity_entropy(
    rho: DensityOp, r: int, eta: float, search: SearchConfig = SearchConfig()
) -> EntropyResult:
    """min over Q in M_r of log2 Tr(Q) subject to Tr(Q rho) >= eta.

    Exhaustive mode searches every architecture of <= r gates (guarded small r);
    optimized mode searches a sampled pool and returns a certified upper bound.
    Witness feasibility is always re-verified exactly.
    """
    if r < 0:
        raise ValueError("gate budget r must be nonnegative")
    if not (0 < eta <= 1):
        raise ValueError("eta must lie in (0, 1]")
    n = rho.n
    eta_eff = min(eta, 1.0 - 1e-9)
    mode = "exhaustive" if search.mode == "exhaustive" else "optimized-upper-bound"
    lams, vecs = _factor_rho(rho)
    archs = _search_archs(n, r, search)
    # spectral cap: for any rank-s projector Q, Tr(Q rho) <= sum of the top s
    # eigenvalues; masks whose cap misses eta are infeasible for every circuit
    spect = np.sort(np.concatenate([lams, np.zeros(2**n - len(lams))]))[::-1]
    caps = np.cumsum(spect)
    for w in range(n, 0, -1):
        if caps[2 ** (n - w) - 1] < eta_eff - ETA_SLACK:
            continue
        for mask in _masks_by_weight(n, w):
            bits = sum(1 << (n - 1 - j) for j in range(n) if mask[j])
            for arch in archs:
                prob, theta = _optimize_mask(
                    lams, vecs, arch, bits, search, target=eta_eff - ETA_SLACK
                )
                if prob >= eta_eff - ETA_SLACK:
                    gates = tuple(
                        _gate_and_frechet(t)[0] for t in theta.reshape(-1, 15)
                    )
                    op = MeasOp(mask, Circuit(arch, gates))
                    return _entropy_from_witness(rho, w, op, eta_eff, mode)
    return _entropy_from_witness(rho, 0, None, eta_eff, mode)


def complexity_negentropy(
    rho: DensityOp, r: int, eta: float, search: SearchConfig = SearchConfig()
) -> int:
    """n minus the complexity entropy."""
    res = complexity_entropy(rho, r, eta, search)
    return int(round(rho.n - res.value))
