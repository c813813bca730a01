import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from lcanon import choi, kraus, superop
from lcanon.choi import ChoiOperator, WeightedBasis
from lcanon.exceptions import NotCompletelyPositiveError, ValidationError
from lcanon.kraus import KrausSet

from helpers import (
    SIGMA_X,
    amplitude_damping,
    random_isometry,
    random_kraus,
    random_operator,
    random_psd,
    random_reference,
    random_unitary,
    unit,
)

seeds = integers(min_value=0, max_value=2**32 - 1)


def test_kraus_set_shape_mismatch():
    with pytest.raises(ValidationError):
        KrausSet.from_operators([np.eye(2), np.eye(3)])


def test_empty_kraus_set_needs_shape():
    with pytest.raises(ValidationError):
        KrausSet.from_operators([])
    ks = KrausSet.from_operators([], shape=(2, 2))
    assert len(ks) == 0
    assert not np.any(ks.superop().matrix)


def test_kraus_from_maximally_entangled():
    gamma = np.array([1, 0, 0, 1])
    ks = kraus.kraus_from_choi(ChoiOperator(2, 2, np.outer(gamma, gamma)))
    assert len(ks) == 1
    assert np.allclose(ks.operators[0], np.eye(2))


def test_kraus_from_maximally_mixed():
    ks = kraus.kraus_from_choi(ChoiOperator(2, 2, np.eye(4) / 2))
    assert len(ks) == 4
    for V in ks:
        assert np.linalg.norm(V) == pytest.approx(1 / np.sqrt(2))
    assert np.allclose(ks.gram(), np.eye(2))


def test_kraus_from_swap_is_not_cp():
    swap = superop.transposition(2).matrix
    with pytest.raises(NotCompletelyPositiveError):
        kraus.kraus_from_choi(ChoiOperator(2, 2, swap))


def test_kraus_from_non_hermitian(rng):
    with pytest.raises(ValidationError):
        kraus.kraus_from_choi(ChoiOperator(2, 2, random_operator(rng, 4)))


def test_kraus_from_zero():
    ks = kraus.kraus_from_choi(ChoiOperator(2, 2, np.zeros((4, 4))))
    assert len(ks) == 0
    assert ks.shape == (2, 2)


def test_kraus_from_rounding_noise(rng):
    assert len(kraus.kraus_from_choi(ChoiOperator(2, 2, 1e-30 * np.eye(4)))) == 0
    noise = 1e-17 * random_psd(rng, 9)
    assert len(kraus.kraus_from_choi(ChoiOperator(3, 3, noise))) == 0


@settings(deadline=None, max_examples=200)
@given(seeds)
def test_kraus_roundtrip(seed):
    rng = np.random.default_rng(seed)
    d, d_out = int(rng.integers(2, 6)), int(rng.integers(1, 6))
    ks = random_kraus(rng, d, 2, d_out=d_out)
    phi = ks.superop()
    recovered = kraus.kraus_from_choi(choi.unweighted_choi(phi))
    assert recovered.shape == (d_out, d)
    assert len(recovered) <= 2
    assert recovered.superop().distance(phi) < 1e-11


def test_kraus_operators_are_orthogonal(rng):
    ks = kraus.kraus_from_choi(choi.unweighted_choi(random_kraus(rng, 3, 4).superop()))
    overlaps = np.array([[np.vdot(V, W) for W in ks] for V in ks])
    assert np.allclose(overlaps, np.diag(ks.eigenvalues), atol=1e-12)
    assert np.all(np.diff(ks.eigenvalues) <= 0)


def test_kraus_from_weighted_choi(rng):
    ks = random_kraus(rng, 3, 2)
    wb = WeightedBasis(random_unitary(rng, 3), [0.5, 0.25j, 1.5])
    recovered = kraus.kraus_from_choi(choi.choi_map(ks.superop(), wb))
    assert recovered.superop().distance(ks.superop()) < 1e-11


def test_kraus_from_choi_is_deterministic(rng):
    C = choi.unweighted_choi(random_kraus(rng, 3, 3).superop())
    first, second = kraus.kraus_from_choi(C), kraus.kraus_from_choi(C)
    for V, W in zip(first, second):
        assert np.array_equal(V, W)


def test_superop_from_kraus_amplitude_damping():
    phi = amplitude_damping().superop()
    assert np.allclose(phi(unit(2, 1, 1)), unit(2, 0, 0))
    assert not np.any(phi(unit(2, 0, 0)))


def test_superop_from_kraus_unitary(rng):
    U = random_unitary(rng, 3)
    X = random_operator(rng, 3)
    phi = KrausSet.from_operators([U]).superop()
    assert np.max(np.abs(phi(X) - U @ X @ U.conj().T)) < 1e-12


def test_superop_from_kraus_rectangular(rng):
    ks = random_kraus(rng, 2, 3, d_out=4)
    X = random_operator(rng, 2)
    expected = sum(V @ X @ V.conj().T for V in ks)
    assert np.max(np.abs(ks.superop()(X) - expected)) < 1e-12


def test_adjoint_is_dual(rng):
    ks = random_kraus(rng, 3, 2, d_out=2)
    assert ks.adjoint().superop().distance(superop.dual(ks.superop())) < 1e-12


def test_is_completely_positive():
    check = kraus.is_completely_positive(superop.identity(2))
    assert check.is_cp
    assert check.min_eigenvalue == pytest.approx(0, abs=1e-12)
    check = kraus.is_completely_positive(superop.transposition(2))
    assert not check.is_cp
    assert check.min_eigenvalue == pytest.approx(-1)


def test_weighted_trace_identity_channel():
    result = kraus.weighted_trace_via_kraus(KrausSet.from_operators([np.eye(2)]), np.eye(2))
    assert result.value == pytest.approx(4)
    assert np.allclose(result.v, [2])


@settings(deadline=None, max_examples=500)
@given(seeds)
def test_weighted_trace_three_routes(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    ks = random_kraus(rng, d, 3)
    wb = WeightedBasis(random_unitary(rng, d), 0.2 + rng.random(d))
    B = wb.reference
    value = kraus.weighted_trace_via_kraus(ks, B).value
    via_superop = superop.superop_trace(superop.sandwich(ks.superop(), B))
    via_choi = choi.weighted_trace_via_choi(ks.superop(), wb, np.eye(d), np.eye(d))
    assert value >= 0
    assert abs(via_superop - value) <= 1e-10 * max(1, value)
    assert abs(via_choi - value) <= 1e-10 * max(1, value)


def test_weighted_trace_rejects_dimension_mismatch(rng):
    with pytest.raises(ValidationError):
        kraus.weighted_trace_via_kraus(random_kraus(rng, 2, 1), np.eye(3))


def test_is_in_cp_b():
    assert kraus.is_in_cp_b(KrausSet.from_operators([SIGMA_X]), np.eye(2))
    assert not kraus.is_in_cp_b(KrausSet.from_operators([np.eye(2)]), np.eye(2))
    assert kraus.is_in_cp_b(KrausSet.empty(2), np.eye(2))


def test_is_in_cp_b_after_removing_reference_direction(rng):
    B = random_reference(rng, 3)
    ks = random_kraus(rng, 3, 3)
    trB = np.trace(B)
    shifted = KrausSet.from_operators([V - (np.vdot(B, V) / np.conj(trB)) * np.eye(3) for V in ks])
    assert kraus.is_in_cp_b(shifted, B)
    assert not kraus.is_in_cp_b(ks, B)


def test_one_to_one_norm():
    assert kraus.one_to_one_norm_cp(amplitude_damping(0.3)) == pytest.approx(0.3)
    assert kraus.one_to_one_norm_cp(KrausSet.from_operators([SIGMA_X])) == pytest.approx(1)
    with pytest.raises(ValidationError):
        kraus.one_to_one_norm_cp(KrausSet.empty(2))


def test_one_to_one_norm_is_trace_norm_bound(rng):
    ks = random_kraus(rng, 3, 3)
    norm = kraus.one_to_one_norm_cp(ks)
    for _ in range(10):
        X = random_operator(rng, 3)
        X = X @ X.conj().T
        assert np.trace(ks.superop()(X)).real <= norm * np.trace(X).real + 1e-12


@settings(deadline=None, max_examples=100)
@given(seeds)
def test_gauge_invariance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    ks = random_kraus(rng, d, 2)
    W = random_isometry(rng, 4, 2)
    mixed = kraus.mix(ks, W)
    B = random_operator(rng, d)
    assert len(mixed) == 4
    assert mixed.superop().distance(ks.superop()) < 1e-12
    assert np.allclose(mixed.gram(), ks.gram(), atol=1e-12)
    assert kraus.weighted_trace_via_kraus(mixed, B).value == pytest.approx(
        kraus.weighted_trace_via_kraus(ks, B).value, rel=1e-10, abs=1e-12)


def test_mix_rejects_non_isometry(rng):
    ks = random_kraus(rng, 2, 2)
    with pytest.raises(ValidationError):
        kraus.mix(ks, 2 * np.eye(2))
    with pytest.raises(ValidationError):
        kraus.mix(ks, np.eye(3))


@settings(deadline=None, max_examples=200)
@given(seeds)
def test_trace_identity(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    ks = random_kraus(rng, d, int(rng.integers(1, 5)))
    A = random_psd(rng, d)
    expected = np.trace(ks.gram() @ A)
    assert abs(np.trace(ks.superop()(A)) - expected) <= 1e-11 * max(1, abs(expected))


def test_trace_identity_on_general_operator(rng):
    ks = random_kraus(rng, 3, 4)
    X = random_operator(rng, 3)
    assert np.trace(ks.superop()(X)) == pytest.approx(np.trace(ks.gram() @ X), abs=1e-12)


@settings(deadline=None, max_examples=100)
@given(seeds)
def test_coefficient_bound(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    ks = random_kraus(rng, d, 3)
    result = kraus.coefficient_bound(ks, random_reference(rng, d))
    assert result.value <= result.bound * (1 + 1e-10) + 1e-14


def test_coefficient_bound_needs_nonzero_trace():
    with pytest.raises(ValidationError):
        kraus.coefficient_bound(KrausSet.from_operators([np.eye(2)]), np.diag([1, -1]))
