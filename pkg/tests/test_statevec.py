import numpy as np
import pytest

import helpers
from qelm.circuit import (
    BlockParams,
    BoundCircuit,
    BoundLayer,
    HyperParams,
    LayerSchedule,
    block_unitary,
    bind_input,
    sample_circuit,
)
from qelm.statevec import (
    WEIGHT2_LABELS,
    PauliObservable,
    apply_circuit,
    expect,
    expectations,
    feature_matrix,
    feature_row,
    full_observables,
    init_bell_chain,
    run_circuit,
    tuning_observables,
    weight1_observables,
    weight2_observables,
)


def obs(label, *qubits):
    return PauliObservable(label, tuple(qubits))


def test_bell_pair_amplitudes():
    state = init_bell_chain(2)
    expected = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
    assert np.allclose(state.amplitudes, expected, atol=1e-15)


def test_bell_chain_pair_correlators():
    state = init_bell_chain(4)
    assert expect(state, obs("ZZ", 0, 1)) == pytest.approx(1.0, abs=1e-12)
    assert expect(state, obs("XX", 0, 1)) == pytest.approx(1.0, abs=1e-12)
    assert expect(state, obs("YY", 0, 1)) == pytest.approx(-1.0, abs=1e-12)
    assert expect(state, obs("Z", 0)) == pytest.approx(0.0, abs=1e-12)
    assert expect(state, obs("ZZ", 1, 2)) == pytest.approx(0.0, abs=1e-12)


def test_bell_chain_eight_qubits_support():
    state = init_bell_chain(8)
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    nonzero = np.abs(state.amplitudes) > 1e-15
    assert nonzero.sum() == 16
    assert np.allclose(np.abs(state.amplitudes[nonzero]), 0.25, atol=1e-15)


def test_bell_chain_validation():
    with pytest.raises(ValueError):
        init_bell_chain(5)
    with pytest.raises(ValueError):
        init_bell_chain(18)
    # the cap is explicit, not hard-wired
    assert init_bell_chain(4, max_qubits=4).n_qubits == 4


def test_identity_circuit_is_identity():
    sched = LayerSchedule.standard(6, 4)
    blocks = tuple(
        tuple(BlockParams(0.0, 0.0, 0.0) for _ in range(3)) for _ in range(4)
    )
    bound = BoundCircuit(
        n_qubits=6,
        layers=tuple(
            BoundLayer(pairs=sched.pairs(i), blocks=blocks[i]) for i in range(4)
        ),
    )
    state = helpers.random_state(6, seed=0)
    out = apply_circuit(state, bound)
    assert np.abs(out.amplitudes - state.amplitudes).max() < 1e-12


def test_adjoint_round_trip_fidelity():
    spec = sample_circuit(HyperParams.tuned(rng_seed=2), LayerSchedule.standard(8, 4))
    bound = bind_input(spec, np.array([0.4, -0.8, 0.1, 0.9]))
    state = init_bell_chain(8)
    fwd = apply_circuit(state, bound)
    # layer-by-layer adjoint: reverse layers, reverse blocks, conjugate gates
    rev_layers = []
    for layer in reversed(bound.layers):
        rev_layers.append(layer)
    back = fwd
    for layer in rev_layers:
        for (qa, qb), params in zip(reversed(layer.pairs), reversed(layer.blocks)):
            gate = block_unitary(params).conj().T
            amps = back.amplitudes
            full = helpers.embed_pair_gate(gate, qa, qb, back.n_qubits)
            back = type(back)(back.n_qubits, full @ amps)
    overlap = abs(np.vdot(state.amplitudes, back.amplitudes)) ** 2
    assert overlap == pytest.approx(1.0, abs=1e-9)


def test_apply_circuit_matches_dense_oracle():
    spec = sample_circuit(HyperParams.tuned(rng_seed=1), LayerSchedule.standard(8, 4))
    bound = bind_input(spec, np.zeros(4))
    state = init_bell_chain(8)
    out = apply_circuit(state, bound)
    full = helpers.dense_circuit_matrix(bound, block_unitary)
    expected = full @ state.amplitudes
    assert np.abs(out.amplitudes - expected).max() < 1e-9
    for q in range(8):
        assert expect(out, obs("X", q)) == pytest.approx(
            helpers.dense_expect(out, "X", (q,)), abs=1e-9
        )


def test_norm_preserved_through_layers():
    spec = sample_circuit(HyperParams.tuned(rng_seed=9), LayerSchedule.standard(10, 8))
    state = run_circuit(spec, np.array([0.7, -0.3, 0.2, 0.9, -0.5]))
    assert state.norm() == pytest.approx(1.0, abs=1e-10)


def test_dimension_mismatch_rejected():
    spec = sample_circuit(HyperParams.tuned(), LayerSchedule.standard(6, 4))
    bound = bind_input(spec, np.zeros(3))
    with pytest.raises(ValueError):
        apply_circuit(init_bell_chain(4), bound)


def test_expect_matches_dense_oracle_on_random_state():
    state = helpers.random_state(6, seed=4)
    for o in [obs("X", 3), obs("Y", 0), obs("Z", 5), obs("XY", 2, 3), obs("ZZ", 5, 0)]:
        assert expect(state, o) == pytest.approx(
            helpers.dense_expect(state, o.label, o.qubits), abs=1e-12
        )


def test_expectations_batch_matches_expect():
    state = helpers.random_state(6, seed=8)
    observables = full_observables(6)
    batch = expectations(state, observables)
    single = np.array([expect(state, o) for o in observables])
    assert np.abs(batch - single).max() < 1e-12


def test_expect_bounds_and_support_checks():
    state = init_bell_chain(4)
    with pytest.raises(ValueError):
        expect(state, obs("X", 7))
    with pytest.raises(ValueError):
        expect(state, obs("XX", 0, 2))  # not a ring bond
    with pytest.raises(ValueError):
        PauliObservable("Q", (0,))


def test_feature_row_counts():
    spec = sample_circuit(HyperParams.tuned(), LayerSchedule.standard(8, 4))
    u = np.array([0.2, -0.1, 0.6, 0.0])
    assert feature_row(spec, u, []).shape == (1,)
    row1 = feature_row(spec, u, weight1_observables(8))
    assert row1.shape == (25,)
    row2 = feature_row(spec, u, full_observables(8))
    assert row2.shape == (97,)
    assert row2[0] == 1.0
    assert np.all(np.abs(row2[1:]) <= 1.0 + 1e-12)


def test_observable_set_shapes():
    assert len(weight1_observables(8)) == 24
    assert len(weight2_observables(8)) == 24
    assert len(weight2_observables(8, labels=WEIGHT2_LABELS)) == 72
    assert len(tuning_observables(8)) == 48
    assert len(full_observables(8)) == 96
    names = [o.name for o in weight2_observables(4)]
    assert names == ["XX@0-1", "YY@0-1", "ZZ@0-1", "XX@1-2", "YY@1-2", "ZZ@1-2",
                     "XX@2-3", "YY@2-3", "ZZ@2-3", "XX@3-0", "YY@3-0", "ZZ@3-0"]


def test_zero_input_strength_kills_variability():
    hp = HyperParams.tuned(rng_seed=6, input_strength=0.0)
    spec = sample_circuit(hp, LayerSchedule.standard(6, 4))
    inputs = np.linspace(-1, 1, 5)[:, None] * np.ones((5, 3))
    fm = feature_matrix(spec, inputs, tuning_observables(6))
    assert np.abs(fm.values - fm.values[0]).max() < 1e-12


def test_feature_matrix_shape_and_names():
    spec = sample_circuit(HyperParams.tuned(), LayerSchedule.standard(6, 4))
    inputs = np.array([[0.1, 0.2, 0.3], [0.0, -0.5, 0.7]])
    fm = feature_matrix(spec, inputs, weight1_observables(6))
    assert fm.values.shape == (2, 19)
    assert fm.names[0] == "X@0"
    assert fm.n_features == 18
