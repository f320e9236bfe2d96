import numpy as np
import pytest

from unclab.centropy import SearchConfig, complexity_entropy
from unclab.fuzz import FuzzModel
from unclab.protocols import (
    expend,
    extract,
    extraction_converse,
    plan_extraction,
    run_extraction_trial,
)
from unclab.qcore import (
    DensityOp,
    compose_on_qubits,
    embed_two_qubit,
    haar_su4,
    random_density,
    random_state,
    zero_state,
)

RNG = np.random.default_rng(31)
FAST = SearchConfig(mode="exhaustive", restarts=6, seed=5)
EXACT = FuzzModel(0.0)
NOISY = FuzzModel(0.01)


def ghz3() -> DensityOp:
    amps = np.zeros(8, dtype=complex)
    amps[0] = amps[-1] = 2**-0.5
    from unclab.qcore import PureState

    return PureState(3, amps).density()


def test_plan_extraction_ghz():
    plan = plan_extraction(ghz3(), 2, 1 - 1e-9, FAST)
    assert plan.w == 3


def test_plan_extraction_rejects_bad_witness():
    rho = ghz3()
    good = plan_extraction(rho, 2, 1 - 1e-9, FAST).witness
    other = random_state(3, RNG).density()
    with pytest.raises(ValueError):
        plan_extraction(other, 2, 1 - 1e-9, FAST, witness=good)


def test_extraction_exact_gates_hit_target():
    plan = plan_extraction(ghz3(), 2, 1 - 1e-9, FAST)
    res = run_extraction_trial(plan, EXACT, RNG)
    assert res.w == 3
    assert res.distance <= 1e-6
    assert res.passed


def test_extraction_fuzzy_within_bound():
    plan = plan_extraction(ghz3(), 2, 1 - 1e-9, FAST)
    for _ in range(50):
        res = run_extraction_trial(plan, NOISY, RNG)
        assert res.distance <= res.bound + 1e-12
        assert abs(res.bound - (np.sqrt(1e-9) + 0.02)) < 1e-12


def test_extraction_delta_regime_guard():
    plan = plan_extraction(ghz3(), 2, 1 - 1e-9, FAST)
    with pytest.raises(ValueError):
        run_extraction_trial(plan, NOISY, RNG, delta=0.001)  # below r*epsilon


def test_extraction_w_zero_trivial():
    # maximally mixed state: nothing extractable at high eta
    rho = DensityOp.maximally_mixed(2)
    res = extract(rho, 1, 0.9, EXACT, RNG, search=FAST)
    assert res.w == 0
    assert res.distance == 0.0


def test_extraction_converse_cap():
    rho = ghz3()
    cap = extraction_converse(rho, 2, 0.1, FAST)
    assert cap == 3
    assert extraction_converse(rho, 0, 0.1, FAST) == 0
    with pytest.raises(ValueError):
        extraction_converse(rho, 1, 1.0, FAST)


def test_achieved_w_never_exceeds_converse():
    for _ in range(5):
        rho = random_state(3, RNG).density()
        delta = float(RNG.uniform(0.05, 0.5))
        eta = 1 - delta**2
        plan = plan_extraction(rho, 2, eta, FAST)
        cap = extraction_converse(rho, 2, delta, FAST)
        assert plan.w <= cap


def test_expenditure_exact_gates_guess_prob_one():
    rho = ghz3()
    res = expend(rho, 2, 1 - 1e-9, 0.0, None, EXACT, RNG, search=FAST)
    assert abs(res.guess_prob - 1) < 1e-9
    assert res.passed


def test_expenditure_fuzzy_within_bound():
    rho = ghz3()
    for _ in range(20):
        res = expend(rho, 2, 1 - 1e-9, 0.04, None, NOISY, RNG, search=FAST)
        assert res.guess_prob >= res.bound - 1e-12
        assert res.bound == 0.96


def test_expenditure_regime_guard():
    with pytest.raises(ValueError):
        expend(ghz3(), 2, 0.9, 0.01, None, NOISY, RNG, search=FAST)


def partially_clean_state() -> DensityOp:
    """rho = V (|0><0| (x) rho_2) V^dag with one clean qubit buried under
    two gates; eta=0.9 forces w=1 (top two eigenvalues sum to 0.85)."""
    rng = np.random.default_rng(99)
    rho2 = DensityOp(2, np.diag([0.55, 0.30, 0.10, 0.05]).astype(complex))
    full = compose_on_qubits(3, [((0,), zero_state(1).density().mat), ((1, 2), rho2.mat)])
    v = embed_two_qubit(haar_su4(rng), 3, 0, 1) @ embed_two_qubit(haar_su4(rng), 3, 1, 2)
    return DensityOp(3, v @ full @ v.conj().T)


def test_expenditure_nontrivial_bank():
    rho = partially_clean_state()
    result = complexity_entropy(rho, 2, 0.9, FAST)
    w = 3 - int(result.value)
    assert 1 <= w <= 2  # bank register is exercised
    witness = result.witness
    mixed = expend(rho, 2, 0.9, 0.04, None, NOISY, RNG, search=FAST, witness=witness)
    assert mixed.sigma_desc == "maximally-mixed"
    assert mixed.guess_prob >= mixed.bound - 1e-12
    pure_bank = random_state(3 - w, RNG).density()
    pure = expend(rho, 2, 0.9, 0.04, pure_bank, NOISY, RNG, search=FAST, witness=witness)
    assert pure.sigma_desc == "fixed"
    assert pure.guess_prob >= pure.bound - 1e-12


def test_expenditure_bank_size_mismatch():
    rho = partially_clean_state()
    result = complexity_entropy(rho, 2, 0.9, FAST)
    wrong = random_density(3, RNG)  # needs 3 - w qubits with w >= 1
    with pytest.raises(ValueError):
        expend(rho, 2, 0.9, 0.04, wrong, NOISY, RNG, search=FAST, witness=result.witness)


def test_expenditure_bank_supplier():
    rho = ghz3()
    # w = 3 here, so the supplier must never be called
    calls = []

    def supplier(m):
        calls.append(m)
        return DensityOp.maximally_mixed(m)

    res = expend(rho, 2, 1 - 1e-9, 0.04, supplier, NOISY, RNG, search=FAST)
    assert res.sigma_desc == "empty"
    assert not calls
