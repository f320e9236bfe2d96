import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from unclab.centropy import (
    ETA_SLACK,
    MeasOp,
    SearchConfig,
    complexity_entropy,
    complexity_negentropy,
    complexity_profile,
    eval_measop,
    hypothesis_entropy,
)
from unclab.circuits import Architecture, Circuit
from unclab.qcore import (
    DensityOp,
    PureState,
    haar_su4,
    random_density,
    random_state,
    zero_state,
)

RNG = np.random.default_rng(23)
FAST = SearchConfig(mode="exhaustive", restarts=6, seed=5)


def lp_hypothesis_entropy(rho: DensityOp, eta: float) -> float:
    """Brute-force LP oracle: diagonalize rho, solve min sum q_i with
    sum q_i lam_i >= eta and 0 <= q_i <= 1 (optimal Q commutes with rho)."""
    lams = np.linalg.eigvalsh(rho.mat)
    d = len(lams)
    res = linprog(
        c=np.ones(d),
        A_ub=-lams[None, :],
        b_ub=[-eta],
        bounds=[(0, 1)] * d,
        method="highs",
    )
    assert res.success
    return float(np.log2(res.fun))


def test_hypothesis_entropy_known_example():
    rho = DensityOp(2, np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex))
    got = hypothesis_entropy(rho, 0.65).value
    # greedy: 0.4 full, then 0.25/0.3 of the next eigenvector
    assert abs(got - np.log2(1 + 0.25 / 0.3)) < 1e-12


def test_hypothesis_entropy_eta_one_gives_log_rank():
    rho = DensityOp(2, np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex))
    assert abs(hypothesis_entropy(rho, 1.0).value - 1.0) < 1e-9
    rho4 = random_density(2, RNG)
    assert abs(hypothesis_entropy(rho4, 1.0).value - 2.0) < 1e-9


def test_hypothesis_entropy_pure_state():
    psi = random_state(2, RNG)
    # min Tr(Q) = eta, met by fractional weight on the state itself
    assert abs(hypothesis_entropy(psi.density(), 0.7).value - np.log2(0.7)) < 1e-9


def test_hypothesis_entropy_matches_lp_oracle():
    for _ in range(25):
        rho = random_density(2, RNG)
        for eta in (0.3, 0.65, 0.9, 1.0):
            assert abs(hypothesis_entropy(rho, eta).value - lp_hypothesis_entropy(rho, eta)) < 1e-9


def test_hypothesis_entropy_eta_validation():
    rho = random_density(1, RNG)
    with pytest.raises(ValueError):
        hypothesis_entropy(rho, 0.0)
    with pytest.raises(ValueError):
        hypothesis_entropy(rho, 1.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 0.04), st.integers(0, 2**31))
def test_hypothesis_entropy_monotone_in_eta(eta, bump, seed):
    rho = random_density(2, np.random.default_rng(seed))
    lo = hypothesis_entropy(rho, eta).value
    hi = hypothesis_entropy(rho, eta + bump).value
    assert hi >= lo - 1e-12


def test_measop_accounting():
    arch = Architecture(3, ((0, 1),))
    op = MeasOp((True, False, True), Circuit(arch, (haar_su4(RNG),)))
    assert op.w == 2
    assert op.size == 2
    assert op.mask_bits() == 0b101


def test_eval_measop_matches_dense_conjugation():
    arch = Architecture(3, ((0, 1), (1, 2)))
    gates = tuple(haar_su4(RNG) for _ in arch.slots)
    op = MeasOp((True, True, False), Circuit(arch, gates))
    rho = random_density(3, RNG)
    prob, size = eval_measop(op, rho)
    from unclab.circuits import circuit_unitary

    u = circuit_unitary(op.prep)
    q0 = np.diag(((np.arange(8) & 0b110) == 0).astype(float))
    want = float(np.trace(q0 @ u @ rho.mat @ u.conj().T).real)
    assert abs(prob - want) < 1e-10
    assert size == 2


def test_complexity_entropy_zero_state():
    res = complexity_entropy(zero_state(3).density(), 0, 1.0, FAST)
    assert res.value == 0.0
    assert res.achieved_prob >= 1 - 1e-9


def test_complexity_entropy_plus_state_r0():
    amps = np.full(8, 8**-0.5, dtype=complex)
    rho = PureState(3, amps).density()
    res = complexity_entropy(rho, 0, 1.0, FAST)
    assert res.value == 3.0
    # but each qubit reads |0> half the time, so eta=1/8 is free
    assert complexity_entropy(rho, 0, 0.12, FAST).value == 0.0


def test_complexity_entropy_bounded_by_hypothesis_entropy():
    for _ in range(3):
        rho = random_state(3, RNG).density()
        hh = hypothesis_entropy(rho, 0.8).value
        hc = complexity_entropy(rho, 1, 0.8, FAST).value
        assert hc >= hh - 1e-9


def test_complexity_entropy_integer_range():
    rho = random_state(3, RNG).density()
    res = complexity_entropy(rho, 1, 0.7, FAST)
    assert res.value == int(res.value)
    assert 0 <= res.value <= 3
    assert complexity_negentropy(rho, 1, 0.7, FAST) == 3 - int(res.value)


def test_complexity_entropy_witness_is_verified():
    rho = random_state(2, RNG).density()
    res = complexity_entropy(rho, 1, 0.9, FAST)
    prob, _ = eval_measop(res.witness, rho)
    assert prob >= min(0.9, 1 - 1e-9) - 10 * ETA_SLACK


def test_complexity_entropy_single_gate_purification():
    # any 2-qubit pure state is one gate away from |00>
    psi = random_state(2, RNG)
    res = complexity_entropy(psi.density(), 1, 1 - 1e-9, FAST)
    assert res.value == 0.0
    assert res.achieved_prob >= 1 - 1e-7


def test_complexity_entropy_validation():
    rho = random_density(1, RNG)
    with pytest.raises(ValueError):
        complexity_entropy(rho, -1, 0.9, FAST)
    with pytest.raises(ValueError):
        complexity_entropy(rho, 0, 0.0, FAST)


def test_optimized_mode_upper_bounds_exhaustive():
    rho = random_state(3, RNG).density()
    opt = SearchConfig(mode="optimized", restarts=6, seed=5, n_random_archs=4)
    a = complexity_entropy(rho, 2, 0.9, FAST)
    b = complexity_entropy(rho, 2, 0.9, opt)
    assert b.mode == "optimized-upper-bound"
    assert b.value >= a.value - 1e-12


def test_profile_consistent_with_direct_search():
    rho = random_state(3, RNG).density()
    prof = complexity_profile(rho, 2, FAST)
    for r in (0, 1, 2):
        direct = complexity_entropy(rho, r, 0.8, FAST).value
        assert prof.entropy(r, 0.8) == direct
    # monotone structure of the profile table
    vals = [prof.entropy(r, 0.8) for r in (0, 1, 2)]
    assert vals == sorted(vals, reverse=True)


def test_grid_oracle_single_gate_family():
    """One-parameter oracle: for gates e^{i theta P} the optimizer must do at
    least as well as a dense scan of the same family."""
    from unclab.centropy import _PB

    rho = random_state(2, RNG).density()
    best_scan = 0.0
    for theta in np.linspace(-2, 2, 401):
        u = np.cos(theta) * np.eye(4) + 1j * np.sin(theta) * _PB[3]  # XI axis
        out = u @ rho.mat @ u.conj().T
        best_scan = max(best_scan, float(np.diag(out).real[0]))
    res = complexity_entropy(rho, 1, min(best_scan, 1 - 1e-9), FAST)
    assert res.value == 0.0  # full mask feasible at the scanned probability
