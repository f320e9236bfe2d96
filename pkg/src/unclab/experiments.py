"""Reproducible experiment runners: configuration, seeding, CSV/JSON emission.

Every experiment maps a config to a list of CSV rows plus a summary; the
master seed and the trial index fully determine each trial's RNG stream, and
each row carries its derived trial seed for single-trial forensic replay.
Trial-parallel experiments honor the UNCLAB_THREADS worker cap; results are
always folded in trial-index order, so the output is thread-count invariant.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import functools
import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .centropy import SearchConfig, complexity_entropy, hypothesis_entropy
from .circuits import Architecture, Circuit, brickwork, random_architecture
from .fuzz import FuzzModel, FuzzVariant, apply_fuzzy_circuit
from .geometry import (
    accessible_dimension,
    brickwork_monotone_trial,
    negentropy_dimension_trial,
)
from .protocols import expend, extraction_converse, plan_extraction, run_extraction_trial
from .qcore import (
    DensityOp,
    Gate2Q,
    PureState,
    apply_gate,
    haar_su4,
    random_density,
    random_state,
    to_su4,
    trace_distance,
    zero_state,
)

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "EXPERIMENTS",
    "run",
    "trial_seed",
    "ghz_state",
    "plus_state",
    "ghz_preparation_circuit",
]

EXPERIMENT_NAMES = (
    "fuzz-bound",
    "entropy",
    "extract",
    "expend",
    "accessible-dim",
    "bw-monotone",
    "negentropy-dim",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 3
    r: int = 2
    layers: int = 4
    k: int = 2
    eta: float = 0.9
    delta: Optional[float] = None
    epsilon: float = 0.0
    tol: float = 1e-8
    trials: int = 100
    restarts: int = 32
    points: int = 3
    seed: int = 0
    fuzz_variant: str = "pauli-hamiltonian"
    state: str = "ghz"
    bank: str = "both"
    out: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; pick one of {EXPERIMENT_NAMES}"
            )
        if self.n < 1 or self.trials < 0 or self.r < 0:
            raise ConfigError("n must be >= 1, trials and r nonnegative")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")
        if not (0 < self.eta <= 1):
            raise ConfigError("eta must lie in (0, 1]")
        if self.experiment == "extract" and self.delta is not None:
            if self.delta < self.r * self.epsilon:
                raise ConfigError(
                    "extraction theorem (achievability) requires delta >= "
                    f"r*epsilon = {self.r * self.epsilon}"
                )
        if self.experiment == "expend":
            delta = self.delta if self.delta is not None else 2 * self.r * self.epsilon
            if delta < 2 * self.r * self.epsilon:
                raise ConfigError(
                    "expenditure theorem requires delta >= 2*r*epsilon = "
                    f"{2 * self.r * self.epsilon}"
                )

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(ExperimentConfig)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return ExperimentConfig(**d)

    def fuzz_model(self) -> FuzzModel:
        return FuzzModel(self.epsilon, FuzzVariant(self.fuzz_variant))

    def search_config(self) -> SearchConfig:
        return SearchConfig(restarts=self.restarts, seed=self.seed)


def trial_seed(master: int, index: int) -> int:
    """64-bit seed derived deterministically from (master seed, trial index)."""
    ss = np.random.SeedSequence([master, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("UNCLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, config: ExperimentConfig) -> list:
    """Run fn(config, t) for every trial index, optionally process-parallel."""
    workers = _worker_count()
    bound = functools.partial(fn, config)
    indices = range(config.trials)
    if workers > 1 and config.trials > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(bound, indices))
    return [bound(t) for t in indices]


def ghz_state(n: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def plus_state(n: int) -> PureState:
    amps = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    return PureState(n, amps)


def ghz_preparation_circuit(n: int = 3) -> Circuit:
    """GHZ_n from |0^n> with n-1 two-qubit gates (entangler then CNOT chain)."""
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float
    )
    first = to_su4(cnot @ np.kron(h, np.eye(2)))
    gates = [first] + [to_su4(cnot)] * (n - 2)
    slots = tuple((j, j + 1) for j in range(n - 1))
    return Circuit(Architecture(n, slots), tuple(gates))


def _state_for(config: ExperimentConfig, rng: np.random.Generator) -> DensityOp:
    kind = config.state
    n = config.n
    if kind == "ghz":
        return ghz_state(n).density()
    if kind == "zeros":
        return zero_state(n).density()
    if kind == "plus":
        return plus_state(n).density()
    if kind == "random-pure":
        return random_state(n, rng).density()
    if kind == "random-mixed":
        return random_density(n, rng)
    raise ConfigError(f"unknown state kind {config.state!r}")


# ---------------------------------------------------------------------------
# experiment bodies: each returns (fieldnames, rows, summary, violations)


def _fuzz_bound_trial(config: ExperimentConfig, t: int) -> dict:
    seed = trial_seed(config.seed, t)
    rng = np.random.default_rng(seed)
    model = config.fuzz_model()
    arch = random_architecture(config.n, config.r, rng)
    targets = [Gate2Q(haar_su4(rng), s) for s in arch.slots]
    omega = random_state(config.n, rng)
    exact = omega
    for g in targets:
        exact = apply_gate(exact, g)
    fuzzy, _ = apply_fuzzy_circuit(omega, targets, model, rng)
    dist = trace_distance(exact.density(), fuzzy.density())
    bound = config.r * config.epsilon
    return {
        "seed": seed,
        "trial": t,
        "n": config.n,
        "r": config.r,
        "epsilon": config.epsilon,
        "distance": dist,
        "bound": bound,
        "pass": int(dist <= bound + 1e-9),
    }


def _run_fuzz_bound(config: ExperimentConfig):
    rows = _map_trials(_fuzz_bound_trial, config)
    violations = sum(1 - r["pass"] for r in rows)
    summary = {
        "trials": config.trials,
        "worst_distance": max((r["distance"] for r in rows), default=0.0),
        "bound": config.r * config.epsilon,
        "violations": violations,
    }
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _run_entropy(config: ExperimentConfig):
    rows = []
    violations = 0
    search = config.search_config()
    for t in range(config.trials):
        seed = trial_seed(config.seed, t)
        rng = np.random.default_rng(seed)
        rho = _state_for(config, rng)
        hh = hypothesis_entropy(rho, config.eta)
        hc = complexity_entropy(rho, config.r, config.eta, search)
        ok = hc.value >= hh.value - 1e-9
        violations += not ok
        rows.append(
            {
                "seed": seed,
                "trial": t,
                "n": config.n,
                "r": config.r,
                "eta": config.eta,
                "h_hyp": hh.value,
                "h_c": hc.value,
                "negentropy": config.n - hc.value,
                "achieved_prob": hc.achieved_prob,
                "mode": hc.mode,
                "pass": int(ok),
            }
        )
    summary = {"trials": config.trials, "violations": violations}
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _extract_default_delta(config: ExperimentConfig) -> float:
    if config.delta is not None:
        return config.delta
    return float(np.sqrt(1 - config.eta) + config.r * config.epsilon)


def _run_extract(config: ExperimentConfig):
    model = config.fuzz_model()
    search = config.search_config()
    per_trial_state = config.state.startswith("random")
    delta = _extract_default_delta(config)
    rows = []
    violations = 0
    plan = cap = None
    if not per_trial_state:
        rng0 = np.random.default_rng(trial_seed(config.seed, 0))
        rho = _state_for(config, rng0)
        plan = plan_extraction(rho, config.r, config.eta, search)
        cap = extraction_converse(rho, config.r, min(delta, 1 - 1e-9), search)
    for t in range(config.trials):
        seed = trial_seed(config.seed, t + 1)
        rng = np.random.default_rng(seed)
        if per_trial_state:
            rho = _state_for(config, rng)
            plan = plan_extraction(rho, config.r, config.eta, search)
            cap = extraction_converse(rho, config.r, min(delta, 1 - 1e-9), search)
        res = run_extraction_trial(plan, model, rng, delta=delta, converse_cap=cap)
        ok = res.distance <= res.bound + 1e-9 and res.w <= cap
        violations += not ok
        rows.append(
            {
                "seed": seed,
                "n": config.n,
                "r": config.r,
                "eta": config.eta,
                "epsilon": config.epsilon,
                "w": res.w,
                "distance": res.distance,
                "bound": res.bound,
                "converse_cap": cap,
                "pass": int(ok),
            }
        )
    summary = {
        "trials": config.trials,
        "worst_distance": max((r["distance"] for r in rows), default=0.0),
        "bound": rows[0]["bound"] if rows else None,
        "violations": violations,
    }
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _run_expend(config: ExperimentConfig):
    model = config.fuzz_model()
    search = config.search_config()
    delta = config.delta if config.delta is not None else 2 * config.r * config.epsilon
    rng0 = np.random.default_rng(trial_seed(config.seed, 0))
    rho = _state_for(config, rng0)
    witness = complexity_entropy(rho, config.r, config.eta, search).witness
    banks = {"mixed": ["mixed"], "pure": ["pure"], "both": ["mixed", "pure"]}[config.bank]
    rows = []
    violations = 0
    for t in range(config.trials):
        seed = trial_seed(config.seed, t + 1)
        rng = np.random.default_rng(seed)
        for bank_kind in banks:
            m = rho.n - witness.w
            if bank_kind == "pure" and m > 0:
                sigma = random_state(m, rng).density()
                desc = "pure-random"
            else:
                sigma = None
                desc = "maximally-mixed" if m > 0 else "empty"
            res = expend(
                rho, config.r, config.eta, delta, sigma, model, rng,
                search=search, witness=witness,
            )
            ok = res.guess_prob >= res.bound - 1e-9
            violations += not ok
            rows.append(
                {
                    "seed": seed,
                    "n": config.n,
                    "r": config.r,
                    "eta": config.eta,
                    "delta": delta,
                    "epsilon": config.epsilon,
                    "w": res.w,
                    "guess_prob": res.guess_prob,
                    "bound": res.bound,
                    "sigma_kind": desc,
                    "pass": int(ok),
                }
            )
    summary = {
        "trials": config.trials,
        "worst_guess_prob": min((r["guess_prob"] for r in rows), default=1.0),
        "bound": max(0.0, 1 - 2 * config.r * config.epsilon),
        "violations": violations,
    }
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _run_accessible_dim(config: ExperimentConfig):
    rows = []
    violations = 0
    prev_dim = 0
    inp = zero_state(config.n)
    for layer in range(1, config.layers + 1):
        seed = trial_seed(config.seed, layer)
        rng = np.random.default_rng(seed)
        arch = brickwork(config.n, layer, periodic=config.n > 2)
        report = accessible_dimension(arch, inp, config.points, config.tol, rng)
        ok = report.dimension >= prev_dim
        violations += not ok
        for point, rank in enumerate(report.ranks):
            rows.append(
                {
                    "seed": seed,
                    "arch_id": report.arch_id,
                    "n": config.n,
                    "R": report.R,
                    "layers": layer,
                    "point": point,
                    "rank": rank,
                    "tol": config.tol,
                    "saturated": int(report.saturated),
                    "pass": int(ok),
                }
            )
        prev_dim = report.dimension
    summary = {
        "layers": config.layers,
        "final_dimension": prev_dim,
        "saturation": 2 * 2**config.n - 1,
        "violations": violations,
    }
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _bw_monotone_row(config: ExperimentConfig, t: int) -> dict:
    seed = trial_seed(config.seed, t)
    rng = np.random.default_rng(seed)
    trial = brickwork_monotone_trial(
        config.n, config.layers, config.fuzz_model(), rng, config.tol
    )
    return {
        "seed": seed,
        "n": config.n,
        "T": config.layers,
        "R_short": trial.R_short,
        "R_long": trial.R_long,
        "rank_short": trial.rank_short,
        "rank_long": trial.rank_long,
        "saturated": int(trial.saturated),
        "strict": int(trial.strict_increase),
        "pass": int(trial.passed),
    }


def _run_bw_monotone(config: ExperimentConfig):
    rows = _map_trials(_bw_monotone_row, config)
    violations = sum(1 - r["pass"] for r in rows)
    summary = {"trials": config.trials, "violations": violations}
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


def _negentropy_dim_row(config: ExperimentConfig, t: int) -> dict:
    seed = trial_seed(config.seed, t)
    rng = np.random.default_rng(seed)
    trial = negentropy_dimension_trial(
        config.n, config.k, config.r, rng, config.tol, config.points
    )
    return {
        "seed": seed,
        "n": config.n,
        "k": config.k,
        "r": config.r,
        "rank_km1": trial.rank_km1,
        "rank_k": trial.rank_k,
        "in_regime": int(trial.in_regime),
        "strict": int(trial.strict_increase),
        "pass": int(trial.passed),
    }


def _run_negentropy_dim(config: ExperimentConfig):
    rows = _map_trials(_negentropy_dim_row, config)
    violations = sum(1 - r["pass"] for r in rows)
    summary = {"trials": config.trials, "violations": violations}
    return list(rows[0]) if rows else ["seed"], rows, summary, violations


EXPERIMENTS = {
    "fuzz-bound": _run_fuzz_bound,
    "entropy": _run_entropy,
    "extract": _run_extract,
    "expend": _run_expend,
    "accessible-dim": _run_accessible_dim,
    "bw-monotone": _run_bw_monotone,
    "negentropy-dim": _run_negentropy_dim,
}


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(config: ExperimentConfig) -> int:
    """Execute one experiment; writes results CSV, summary JSON, and manifest.

    Returns 0 on zero bound violations, 2 on violations; configuration errors
    raise ConfigError before anything is written.
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.time()
    fieldnames, rows, summary, violations = EXPERIMENTS[config.experiment](config)
    end = time.time()
    results = out / "results.csv"
    _write_csv(results, fieldnames, rows)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    manifest = {
        "config": dataclasses.asdict(config),
        "tool_version": __version__,
        "start": start,
        "end": end,
        "trial_seeds": [trial_seed(config.seed, t) for t in range(config.trials)],
        "csv_schema": fieldnames,
        "digests": {
            "results.csv": _digest(results),
            "summary.json": _digest(summary_path),
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return 2 if violations else 0
