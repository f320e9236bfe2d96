import numpy as np
import pytest

from unclab.circuits import Architecture, Circuit, brickwork, contract
from unclab.fuzz import FuzzModel
from unclab.geometry import (
    accessible_dimension,
    brickwork_monotone_trial,
    embed_substate,
    negentropy_dimension_trial,
    numerical_rank,
    sphere_tangent_basis,
    tangent_frame,
)
from unclab.qcore import PAULI_2Q_TRACELESS, PureState, haar_su4, zero_state

RNG = np.random.default_rng(17)


def test_numerical_rank_basic():
    assert numerical_rank(np.eye(4))[0] == 4
    m = np.zeros((4, 3))
    m[0, 0] = 1.0
    m[1, 1] = 1e-12
    rank, gap = numerical_rank(m, tol=1e-8)
    assert rank == 1
    assert gap > 1e10
    assert numerical_rank(np.zeros((4, 0)))[0] == 0
    assert numerical_rank(np.zeros((4, 2)))[0] == 0


def _real_embed(v):
    return np.concatenate([v.real, v.imag])


def test_tangent_frame_matches_finite_differences():
    """Analytic Jacobian columns vs central differences of the contraction
    map along each Pauli direction, at two step sizes."""
    arch = Architecture(3, ((0, 1), (1, 2)))
    gates = tuple(haar_su4(RNG) for _ in arch.slots)
    circ = Circuit(arch, gates)
    inp = zero_state(3)
    frame = tangent_frame(circ, inp)
    for h in (1e-4, 1e-5):
        col = 0
        for jslot, _ in enumerate(arch.slots):
            for p in PAULI_2Q_TRACELESS:
                def out(step):
                    pert = list(gates)
                    # d/dt e^{i t P} U at t=0 gives the analytic column
                    from scipy.linalg import expm

                    pert[jslot] = expm(1j * step * p) @ gates[jslot]
                    return contract(Circuit(arch, tuple(pert)), inp).amps

                fd = (_real_embed(out(h)) - _real_embed(out(-h))) / (2 * h)
                assert np.max(np.abs(fd - frame.columns[:, col])) < 10 * h
                col += 1


def test_accessible_dimension_n2_single_gate():
    rep = accessible_dimension(Architecture(2, ((0, 1),)), zero_state(2), 3, 1e-8, RNG)
    assert rep.dimension == 7
    assert rep.saturated  # 2*2^2 - 1 = 7, the whole n=2 state sphere
    assert all(g > 1e3 for g in rep.gap_ratios)


def test_accessible_dimension_n2_saturation_flag():
    rep = accessible_dimension(Architecture(2, ((0, 1),)), zero_state(2), 2, 1e-8, RNG)
    # 2*2^2 - 1 = 7: a single SU(4) gate reaches the whole state sphere
    assert rep.dimension == 2 * 2**2 - 1
    assert rep.saturated


def test_accessible_dimension_empty_architecture():
    rep = accessible_dimension(Architecture(2, ()), zero_state(2), 1, 1e-8, RNG)
    assert rep.dimension == 1  # only the global phase direction


def test_accessible_dimension_brickwork_saturates():
    dims = []
    for layers in (1, 2, 3):
        arch = brickwork(3, layers, periodic=True)
        rep = accessible_dimension(arch, zero_state(3), 2, 1e-8, RNG)
        dims.append(rep.dimension)
    assert dims == sorted(dims)
    assert dims[-1] == 2 * 2**3 - 1


def test_dim_report_json():
    rep = accessible_dimension(Architecture(2, ((0, 1),)), zero_state(2), 1, 1e-8, RNG)
    d = rep.to_json_dict()
    assert d["dimension"] == rep.dimension
    assert len(d["ranks"]) == 1


def test_brickwork_monotone_trial():
    model = FuzzModel(0.05)
    tr = brickwork_monotone_trial(3, 1, model, RNG)
    assert tr.layers_long == 4
    assert tr.R_long > tr.R_short
    if not tr.saturated:
        assert tr.rank_long > tr.rank_short
    assert tr.passed


def test_sphere_tangent_basis():
    v = RNG.normal(size=4) + 1j * RNG.normal(size=4)
    phi = v / np.linalg.norm(v)
    basis = sphere_tangent_basis(phi)
    assert basis.shape == (7, 4)
    emb = np.array([_real_embed(b) for b in basis])
    assert np.allclose(emb @ emb.T, np.eye(7), atol=1e-10)
    assert np.allclose(emb @ _real_embed(phi), 0, atol=1e-10)


def test_embed_substate():
    v = RNG.normal(size=4) + 1j * RNG.normal(size=4)
    v /= np.linalg.norm(v)
    full = embed_substate(v, (0, 2), 3)
    assert abs(np.linalg.norm(full) - 1) < 1e-12
    # qubit 1 reads |0>: indices with bit 1 set are empty
    assert np.allclose(full[(np.arange(8) & 0b010) != 0], 0)
    st = PureState(3, full)
    t = full.reshape(2, 2, 2)
    assert np.allclose(t[:, 0, :].reshape(-1), v)


def test_negentropy_dimension_trial_regime_labeling():
    tr = negentropy_dimension_trial(6, 3, 2, RNG, archs_per_point=1)
    assert not tr.in_regime  # k=3 <= log2(30)
    assert tr.passed  # out-of-regime runs never count as violations
    tr0 = negentropy_dimension_trial(3, 2, 0, RNG, archs_per_point=1)
    assert tr0.in_regime


def test_negentropy_dimension_growth_in_regime():
    tr = negentropy_dimension_trial(6, 5, 2, RNG, archs_per_point=1)
    assert tr.in_regime
    assert tr.rank_k > tr.rank_km1
    assert tr.rank_k >= 2 * 2**5 - 1  # input-sphere directions alone


def test_negentropy_dimension_validation():
    with pytest.raises(ValueError):
        negentropy_dimension_trial(3, 0, 1, RNG)
    with pytest.raises(ValueError):
        negentropy_dimension_trial(3, 2, -1, RNG)
