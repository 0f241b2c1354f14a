import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellscope import correlation as corr
from bellscope.correlation import (
    ClassicalConfiguration,
    CorrelationTable,
    ExperimentShape,
    JointDevice,
    LhvModel,
)
from bellscope.errors import (
    GuardError,
    InconsistentDeviceError,
    SignallingError,
    StructuralError,
)

from conftest import CHSH_ALICE, CHSH_BOB, singlet_table

S222 = ExperimentShape(2, 2, 2)


def uniform_table():
    return CorrelationTable(S222, np.full((2, 2, 2, 2), 0.25))


def all_configurations(shape):
    for cfg in itertools.product(range(shape.v), repeat=shape.n * shape.m):
        yield ClassicalConfiguration(np.array(cfg).reshape(shape.n, shape.m))


# -------------------------------------------------------------- shapes / tables


def test_shape_guard_rejects_huge_configuration_space():
    with pytest.raises(GuardError):
        ExperimentShape(5, 5, 2)
    with pytest.raises(StructuralError):
        ExperimentShape(2, 2, 1)


def test_table_keys_string_and_tuple():
    t = CorrelationTable.from_entries(S222, {"s=01;a=10": 0.5, ((0, 1), (0, 1)): 0.5})
    assert t["s=01;a=10"] == 0.5
    assert t[((0, 1), (0, 1))] == 0.5
    with pytest.raises(StructuralError, match="s=0;a=00"):
        CorrelationTable.from_entries(S222, {"s=0;a=00": 1.0})
    with pytest.raises(StructuralError):
        t["bogus"]


def test_validate_uniform_passes():
    assert corr.validate_table(uniform_table()).passed


def test_validate_negative_entry_fails():
    probs = np.full((2, 2, 2, 2), 0.25)
    probs[0, 0, 0, 0] = 1.1
    probs[0, 0, 0, 1] = -0.1
    probs[0, 0, 1, :] = 0.0
    report = corr.validate_table(CorrelationTable(S222, probs))
    assert not report.passed
    assert report.negative_entries == [((0, 0), (0, 1), pytest.approx(-0.1))]
    assert report.max_residual == pytest.approx(0.0, abs=1e-15)


def test_validate_singlet_table_passes():
    assert corr.validate_table(singlet_table(CHSH_ALICE, CHSH_BOB)).passed


def test_marginals():
    np.testing.assert_allclose(corr.marginal(uniform_table(), 0, (0, 1)), [0.5, 0.5])
    pa, qb = np.array([0.3, 0.7]), np.array([0.9, 0.1])
    product = CorrelationTable(S222, np.broadcast_to(np.outer(pa, qb), (2, 2, 2, 2)))
    np.testing.assert_allclose(corr.marginal(product, 0, (1, 0)), pa, rtol=0, atol=1e-15)
    np.testing.assert_allclose(corr.marginal(singlet_table(CHSH_ALICE, CHSH_BOB), 1, (1, 1)), [0.5, 0.5])
    with pytest.raises(IndexError):
        corr.marginal(product, 2, (0, 0))


def test_no_signalling_detects_constructed_violation():
    probs = np.full((2, 2, 2, 2), 0.25)
    # Alice's marginal (0.6, 0.4) under Bob's setting 0, (0.5, 0.5) under setting 1
    probs[0, 0] = [[0.3, 0.3], [0.2, 0.2]]
    report = corr.no_signalling_check(CorrelationTable(S222, probs))
    assert not report.passed
    assert report.max_deviation == pytest.approx(0.1)
    assert corr.no_signalling_check(singlet_table(CHSH_ALICE, CHSH_BOB)).passed


# ---------------------------------------------------------------- LHV models


def test_deterministic_model_gives_indicator_table():
    cfg = ClassicalConfiguration(((0, 1), (1, 1)))
    t = corr.lhv_to_table(LhvModel.from_configurations(S222, [cfg], [1.0]))
    for (s, a), p in t.entries().items():
        expected = 1.0 if a == (cfg.assignment[0][s[0]], cfg.assignment[1][s[1]]) else 0.0
        assert p == expected


def test_two_configuration_model_is_perfectly_correlated():
    plus = ClassicalConfiguration(((0, 0), (0, 0)))
    minus = ClassicalConfiguration(((1, 1), (1, 1)))
    t = corr.lhv_to_table(LhvModel.from_configurations(S222, [plus, minus], [0.5, 0.5]))
    for s in S222.setting_tuples():
        assert t.correlator(s) == 1.0
    assert corr.chsh_value(t) == 1.0


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.sampled_from([(2, 2, 2), (3, 2, 2), (2, 3, 3)]))
def test_lhv_tables_are_valid_no_signalling_and_classical(seed, states, dims):
    shape = ExperimentShape(*dims)
    rng = np.random.default_rng(seed)
    t = corr.lhv_to_table(corr.random_lhv_model(shape, states, rng, deterministic_fraction=0.3))
    assert corr.validate_table(t, tol=1e-12).passed
    assert corr.no_signalling_check(t, tol=1e-12).passed
    if dims == (2, 2, 2):
        assert corr.chsh_value(t) <= 1 + 1e-12


def test_every_deterministic_configuration_obeys_chsh():
    for cfg in all_configurations(S222):
        t = corr.lhv_to_table(LhvModel.from_configurations(S222, [cfg], [1.0]))
        assert corr.chsh_value(t) == 1.0


def test_derandomize_uniform_single_state():
    model = LhvModel(S222, [1.0], np.full((1, 2, 2, 2), 0.5))
    det = corr.derandomize(model)
    assert det.num_states == 16
    np.testing.assert_allclose(det.weights, 1 / 16, atol=1e-15)
    assert det.is_deterministic()


def test_derandomize_biased_state_weights():
    model = LhvModel(S222, [1.0], np.broadcast_to([0.75, 0.25], (1, 2, 2, 2)))
    det = corr.derandomize(model)
    plus_count = (det.responses[..., 0] == 1).sum(axis=(1, 2))
    np.testing.assert_allclose(det.weights, 0.75**plus_count * 0.25 ** (4 - plus_count), atol=1e-15)
    np.testing.assert_allclose(corr.lhv_to_table(det).probs, corr.lhv_to_table(model).probs, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_derandomize_preserves_table_and_is_idempotent(seed, states):
    rng = np.random.default_rng(seed)
    shape = ExperimentShape(2, 2, 3)
    model = corr.random_lhv_model(shape, states, rng)
    det = corr.derandomize(model)
    assert det.is_deterministic()
    np.testing.assert_allclose(corr.lhv_to_table(det).probs, corr.lhv_to_table(model).probs, atol=1e-12)
    again = corr.derandomize(det)
    assert again.num_states == det.num_states
    np.testing.assert_allclose(again.weights, det.weights, atol=1e-15)


def test_derandomize_guard():
    model = corr.random_lhv_model(ExperimentShape(3, 3, 3), 2, np.random.default_rng(0))
    with pytest.raises(GuardError):
        corr.derandomize(model, limit=1000)


# ------------------------------------------------------------------- CHSH


def test_chsh_singlet_optimal_angles():
    assert corr.chsh_value(singlet_table(CHSH_ALICE, CHSH_BOB)) == pytest.approx(np.sqrt(2), abs=1e-12)


def test_chsh_wrong_shape():
    with pytest.raises(StructuralError):
        corr.chsh_value(CorrelationTable(ExperimentShape(3, 2, 2), np.full((2,) * 6, 1 / 8)))


def test_chsh_variants_cover_both_kinds():
    betas, values = corr.chsh_variants(uniform_table())
    nonzero = (np.abs(betas) > 1e-12).sum(axis=1)
    assert sorted(nonzero) == [1] * 8 + [4] * 8
    np.testing.assert_allclose(values, 0.0, atol=1e-15)


# ------------------------------------------------------------------- Fine


def test_fine_product_table_feasible():
    pa, qb = np.array([0.3, 0.7]), np.array([0.9, 0.1])
    res = corr.fine_joint_lp(CorrelationTable(S222, np.broadcast_to(np.outer(pa, qb), (2, 2, 2, 2))))
    assert res.feasible
    assert res.joint.min() >= 0 and res.joint.sum() == pytest.approx(1.0)


def test_fine_singlet_infeasible_with_chsh_certificate():
    res = corr.fine_joint_lp(singlet_table(CHSH_ALICE, CHSH_BOB))
    assert not res.feasible
    assert res.certificate.value == pytest.approx(np.sqrt(2), abs=1e-12)
    assert sorted(np.abs(res.certificate.beta)) == [0.5] * 4


def test_fine_two_configuration_model():
    plus = ClassicalConfiguration(((0, 0), (0, 0)))
    minus = ClassicalConfiguration(((1, 1), (1, 1)))
    t = corr.lhv_to_table(LhvModel.from_configurations(S222, [plus, minus], [0.5, 0.5]))
    res = corr.fine_joint_lp(t)
    assert res.feasible
    # q indexed [a1, a2, b1, b2]; the two configurations must carry all the weight
    assert res.joint[0, 0, 0, 0] == pytest.approx(0.5, abs=1e-9)
    assert res.joint[1, 1, 1, 1] == pytest.approx(0.5, abs=1e-9)


def test_fine_rejects_signalling_tables():
    probs = np.full((2, 2, 2, 2), 0.25)
    probs[0, 0] = [[0.3, 0.3], [0.2, 0.2]]
    with pytest.raises(SignallingError):
        corr.fine_joint_lp(CorrelationTable(S222, probs))


def test_fine_matches_chsh_variants_on_random_tables(rng):
    for _ in range(300):
        t = corr.random_no_signalling_table(rng)
        _, values = corr.chsh_variants(t)
        assert corr.fine_joint_lp(t).feasible == bool(values.max() <= 1 + 1e-9)


# -------------------------------------------------------------- telephone


def test_telephone_fair_coins_chance_level():
    p = np.full((2, 2, 2), 1 / 8)
    res = corr.telephone_p_ok(JointDevice(p, p))
    assert res.p_ok == pytest.approx(0.5)
    assert res.bound_satisfied


def test_telephone_perfect_discrimination():
    p1 = np.zeros((2, 2, 2))
    p1[0, 0, 0] = 1.0  # a1 = b1 = b2 = +1
    p2 = np.zeros((2, 2, 2))
    p2[0, 0, 1] = 0.5  # b1 = -b2
    p2[1, 1, 0] = 0.5
    res = corr.telephone_p_ok(JointDevice(p1, p2))
    assert res.p_ok == 1.0
    assert res.bound_satisfied


def test_joint_device_consistency_with_table():
    p = np.full((2, 2, 2), 1 / 8)
    JointDevice(p, p, table=uniform_table())
    with pytest.raises(InconsistentDeviceError):
        JointDevice(p, p, table=singlet_table(CHSH_ALICE, CHSH_BOB))
    with pytest.raises(InconsistentDeviceError):
        JointDevice(p * 2, p)


def test_telephone_bound_on_random_devices(rng):
    for _ in range(1000):
        p1 = rng.dirichlet(np.full(8, 0.3)).reshape(2, 2, 2)
        p2 = rng.dirichlet(np.full(8, 0.3)).reshape(2, 2, 2)
        assert corr.telephone_p_ok(JointDevice(p1, p2)).bound_satisfied
