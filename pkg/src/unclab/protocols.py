"""Operational tasks: clean-qubit extraction and expenditure.

Extraction: search a restricted-measurement witness for the state, run its
preparing circuit with fuzzy gates, discard the non-projected qubits, and
compare the kept register to |0...0> against the proved error budget
sqrt(1 - eta) + r*epsilon.

Expenditure: a computationally bounded referee measures a witness operator;
the agent, knowing the witness (but not the referee's realized fuzzy gates),
borrows clean qubits, tacks on an arbitrary bank state, and inverts the
witness circuit with its own independent fuzzy realization.  The guessing
probability is bounded below by 1 - 2*r*epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .centropy import EntropyResult, MeasOp, SearchConfig, complexity_entropy, eval_measop
from .circuits import Circuit
from .fuzz import FuzzModel, FuzzyCircuitRecord, sample_fuzzy_gate
from .qcore import (
    DensityOp,
    Gate2Q,
    compose_on_qubits,
    embed_two_qubit,
    partial_trace,
    trace_distance,
    zero_state,
)

__all__ = [
    "ExtractionPlan",
    "ExtractionResult",
    "ExpenditureResult",
    "plan_extraction",
    "run_extraction_trial",
    "extract",
    "extraction_converse",
    "expend",
]


@dataclass(frozen=True)
class ExtractionPlan:
    """Witness and bookkeeping computed once, reusable across fuzzy trials."""

    rho: DensityOp
    r: int
    eta: float
    witness: MeasOp
    w: int


@dataclass(frozen=True)
class ExtractionResult:
    w: int
    keep_set: tuple
    record: FuzzyCircuitRecord
    distance: float
    bound: float
    converse_cap: Optional[int]
    delta: float

    @property
    def passed(self) -> bool:
        return self.distance <= self.delta + 1e-12


@dataclass(frozen=True)
class ExpenditureResult:
    w: int
    sigma_desc: str
    guess_prob: float
    bound: float
    delta: float

    @property
    def passed(self) -> bool:
        return self.guess_prob >= 1.0 - self.delta - 1e-12


def _realize_circuit(
    circ: Circuit, model: FuzzModel, rng: np.random.Generator
) -> tuple:
    """Sample a fuzzy realization of every gate; returns (record, dense unitary)."""
    n = circ.arch.n
    targets, realized = [], []
    u = np.eye(2**n, dtype=complex)
    for g, (j, k) in zip(circ.gates, circ.arch.slots):
        tgt = Gate2Q(g, (j, k))
        got = sample_fuzzy_gate(tgt, model, rng)
        targets.append(tgt)
        realized.append(got)
        u = embed_two_qubit(got.u, n, j, k) @ u
    return FuzzyCircuitRecord(tuple(targets), tuple(realized), model.epsilon), u


def plan_extraction(
    rho: DensityOp,
    r: int,
    eta: float,
    search: SearchConfig = SearchConfig(),
    witness: Optional[MeasOp] = None,
) -> ExtractionPlan:
    """Find (or accept) a complexity-entropy witness and fix the extracted count."""
    if witness is None:
        result = complexity_entropy(rho, r, eta, search)
        witness = result.witness
    else:
        prob, _ = eval_measop(witness, rho)
        if prob < min(eta, 1 - 1e-9) - 1e-8:
            raise ValueError("supplied witness is not feasible for this (rho, eta)")
    return ExtractionPlan(rho, r, eta, witness, witness.w)


def run_extraction_trial(
    plan: ExtractionPlan,
    model: FuzzModel,
    rng: np.random.Generator,
    delta: Optional[float] = None,
    converse_cap: Optional[int] = None,
) -> ExtractionResult:
    """One fuzzy run of the extraction protocol against its proved budget."""
    r_eps = plan.r * model.epsilon
    bound = float(np.sqrt(max(0.0, 1.0 - plan.eta)) + r_eps)
    if delta is None:
        delta = bound
    if delta < r_eps - 1e-12:
        raise ValueError(
            "extraction theorem requires delta >= r*epsilon; got "
            f"delta={delta}, r*epsilon={r_eps}"
        )
    record, u = _realize_circuit(plan.witness.prep, model, rng)
    keep = tuple(j for j, flag in enumerate(plan.witness.mask) if flag)
    if plan.w == 0:
        distance = 0.0  # nothing extracted; trivially achieved
    else:
        evolved = u @ plan.rho.mat @ u.conj().T
        kept = partial_trace(DensityOp(plan.rho.n, evolved), keep)
        target = zero_state(plan.w).density()
        distance = trace_distance(kept, target)
    return ExtractionResult(plan.w, keep, record, distance, bound, converse_cap, delta)


def extract(
    rho: DensityOp,
    r: int,
    eta: float,
    model: FuzzModel,
    rng: np.random.Generator,
    delta: Optional[float] = None,
    search: SearchConfig = SearchConfig(),
    compute_converse: bool = False,
) -> ExtractionResult:
    """Plan a witness for (rho, r, eta) and run one fuzzy extraction trial."""
    plan = plan_extraction(rho, r, eta, search)
    cap = None
    if compute_converse and delta is not None:
        cap = extraction_converse(rho, r, delta, search)
    return run_extraction_trial(plan, model, rng, delta=delta, converse_cap=cap)


def extraction_converse(
    rho: DensityOp, r: int, delta: float, search: SearchConfig = SearchConfig()
) -> int:
    """Converse cap: no protocol extracts more than n - H_c^{r, 1-delta}(rho)."""
    if not (0 <= delta < 1):
        raise ValueError("delta must lie in [0, 1)")
    result = complexity_entropy(rho, r, 1.0 - delta, search)
    return int(round(rho.n - result.value))


BankState = Union[DensityOp, Callable[[int], DensityOp], None]


def _bank_state(sigma: BankState, m: int, rng: np.random.Generator) -> tuple:
    if m == 0:
        return None, "empty"
    if sigma is None:
        return DensityOp.maximally_mixed(m), "maximally-mixed"
    if callable(sigma):
        out = sigma(m)
        return out, "supplier"
    if sigma.n != m:
        raise ValueError(f"bank state has {sigma.n} qubits, need {m}")
    return sigma, "fixed"


def expend(
    rho: DensityOp,
    r: int,
    eta: float,
    delta: float,
    sigma: BankState,
    model: FuzzModel,
    rng: np.random.Generator,
    search: SearchConfig = SearchConfig(),
    witness: Optional[MeasOp] = None,
) -> ExpenditureResult:
    """One fuzzy run of the expenditure protocol against its proved budget.

    The referee and agent share the witness object but realize the witness
    circuit with independent fuzzy draws.
    """
    two_r_eps = 2.0 * r * model.epsilon
    if delta < two_r_eps - 1e-12:
        raise ValueError(
            "expenditure theorem requires delta >= 2*r*epsilon; got "
            f"delta={delta}, 2*r*epsilon={two_r_eps}"
        )
    if witness is None:
        result = complexity_entropy(rho, r, eta, search)
        witness = result.witness
    n = rho.n
    w = witness.w
    clean = tuple(j for j, flag in enumerate(witness.mask) if flag)
    rest = tuple(j for j in range(n) if j not in clean)
    bank, sigma_desc = _bank_state(sigma, n - w, rng)

    parts = [(clean, zero_state(w).density().mat)] if w else []
    if bank is not None:
        parts.append((rest, bank.mat))
    full = compose_on_qubits(n, parts)

    # agent: simulacrum = U_agt^dag (|0^w><0^w| (x) sigma) U_agt
    _, u_agt = _realize_circuit(witness.prep, model, rng)
    simulacrum = u_agt.conj().T @ full @ u_agt
    # referee: guessing probability Tr(Q0 U_ref simulacrum U_ref^dag)
    _, u_ref = _realize_circuit(witness.prep, model, rng)
    evolved = u_ref @ simulacrum @ u_ref.conj().T
    sel = (np.arange(2**n) & witness.mask_bits()) == 0
    guess_prob = float(np.sum(np.diag(evolved).real[sel]))
    bound = max(0.0, 1.0 - two_r_eps)
    return ExpenditureResult(w, sigma_desc, guess_prob, bound, delta)
