import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis.strategies import integers, sampled_from

from lcanon import schatten
from lcanon.exceptions import ValidationError

from helpers import random_operator, random_unitary

seeds = integers(min_value=0, max_value=2**32 - 1)


def test_svd_schmidt_diagonal():
    decomposition = schatten.svd_schmidt(np.diag([3.0, -4.0]))
    assert np.allclose(decomposition.singular_values, [4, 3])
    assert np.allclose(decomposition.reconstruct(), np.diag([3, -4]))


def test_svd_schmidt_rank_one(rng):
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
    decomposition = schatten.svd_schmidt(np.outer(x, y.conj()))
    assert decomposition.rank == 1
    assert decomposition.singular_values[0] == pytest.approx(1, abs=1e-12)


def test_svd_schmidt_matches_characteristic_polynomial(rng):
    X = random_operator(rng, 4, 3)
    decomposition = schatten.svd_schmidt(X)
    roots = np.roots(np.poly(X.conj().T @ X)).real
    oracle = np.sort(np.sqrt(np.clip(roots, 0, None)))[::-1]
    assert np.allclose(decomposition.singular_values, oracle, atol=1e-8)
    assert np.all(np.diff(decomposition.singular_values) <= 0)
    assert np.max(np.abs(decomposition.reconstruct() - X)) < 1e-12


def test_svd_schmidt_vectors_orthonormal(rng):
    decomposition = schatten.svd_schmidt(random_operator(rng, 5, 3))
    F, G = decomposition.left_vectors, decomposition.right_vectors
    assert np.allclose(F.conj().T @ F, np.eye(3), atol=1e-12)
    assert np.allclose(G.conj().T @ G, np.eye(3), atol=1e-12)


def test_svd_schmidt_zero_matrix():
    assert schatten.svd_schmidt(np.zeros((2, 3))).rank == 0


def test_svd_schmidt_is_deterministic_on_ties():
    first = schatten.svd_schmidt(np.eye(3))
    second = schatten.svd_schmidt(np.eye(3))
    assert np.array_equal(first.left_vectors, second.left_vectors)


@pytest.mark.parametrize("delta", [1e-14, -1e-14, 3e-13])
def test_svd_schmidt_near_ties_stay_sorted(rng, delta):
    for values in ([1 + delta, 1, 0.5], [1, 1 + delta, 0.5], [0.5, 1, 1 + delta]):
        for X in (np.diag(values), random_unitary(rng, 3) @ np.diag(values) @ random_unitary(rng, 3)):
            decomposition = schatten.svd_schmidt(X)
            assert np.all(np.diff(decomposition.singular_values) <= 0)
            assert np.max(np.abs(decomposition.reconstruct() - X)) < 1e-11


def test_rejects_non_finite():
    with pytest.raises(ValidationError):
        schatten.svd_schmidt(np.array([[np.nan, 0], [0, 1]]))


@pytest.mark.parametrize("p,expected", [(1, 7), (2, 5), (math.inf, 4)])
def test_schatten_norm_diagonal(p, expected):
    assert schatten.schatten_norm(np.diag([3, -4]), p) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p", [0.5, 1, 2, 3, math.inf])
def test_schatten_norm_rank_one(rng, p):
    x = random_operator(rng, 3, 1)
    y = random_operator(rng, 3, 1)
    expected = np.linalg.norm(x) * np.linalg.norm(y)
    assert schatten.schatten_norm(x @ y.conj().T, p) == pytest.approx(expected, rel=1e-12)


def test_schatten_norm_frobenius(rng):
    X = random_operator(rng, 4, 6)
    assert schatten.schatten_norm(X, 2) == pytest.approx(np.sqrt(np.sum(np.abs(X) ** 2)), rel=1e-12)


def test_schatten_norm_rejects_non_positive_p():
    with pytest.raises(ValidationError):
        schatten.schatten_norm(np.eye(2), 0)


def test_quasi_norm_is_logged(caplog):
    with caplog.at_level('INFO', logger='lcanon.schatten'):
        schatten.schatten_norm(np.eye(2), 0.5)
    assert 'not a norm' in caplog.text
    assert not schatten.is_norm(0.5)
    assert schatten.is_norm(1)


@settings(deadline=None, max_examples=1000)
@given(seeds, sampled_from([(2, 2, 1), (1, math.inf, 1), (4, 4, 2)]))
def test_holder(seed, pqr):
    p, q, r = pqr
    rng = np.random.default_rng(seed)
    X, Y = random_operator(rng, 4), random_operator(rng, 4)
    lhs = schatten.schatten_norm(X @ Y, r)
    assert lhs <= schatten.schatten_norm(X, p) * schatten.schatten_norm(Y, q) + 1e-10


@settings(deadline=None, max_examples=1000)
@given(seeds, sampled_from([(1, 2), (1, math.inf), (2, 3), (2, math.inf), (3, 7)]))
def test_monotonicity(seed, pq):
    p, q = pq
    X = random_operator(np.random.default_rng(seed), 5)
    assert schatten.schatten_norm(X, q) <= schatten.schatten_norm(X, p) + 1e-12


@settings(deadline=None, max_examples=1000)
@given(seeds, sampled_from([1, 2, math.inf]))
def test_ideal_bound(seed, p):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_operator(rng, 3) for _ in range(3))
    bound = (schatten.schatten_norm(X, math.inf) * schatten.schatten_norm(Y, p)
             * schatten.schatten_norm(Z, math.inf))
    assert schatten.schatten_norm(X @ Y @ Z, p) <= bound + 1e-10


def test_trace():
    assert schatten.trace(np.eye(3)) == 3


def test_trace_of_outer_product(rng):
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert schatten.trace(np.outer(x, y.conj())) == pytest.approx(np.vdot(y, x), abs=1e-12)


def test_trace_is_basis_independent(rng):
    X = random_operator(rng, 4)
    U = random_unitary(rng, 4)
    assert schatten.trace(U.conj().T @ X @ U) == pytest.approx(schatten.trace(X), abs=1e-12)


def test_trace_rejects_rectangular():
    with pytest.raises(ValidationError):
        schatten.trace(np.zeros((2, 3)))


def test_hs_inner_matrix_units():
    units = [np.outer(np.eye(2)[k], np.eye(2)[j]) for k in range(2) for j in range(2)]
    for a, X in enumerate(units):
        for b, Y in enumerate(units):
            assert schatten.hs_inner(X, Y) == (1 if a == b else 0)


def test_hs_inner_is_squared_frobenius(rng):
    X = random_operator(rng, 3, 2)
    assert schatten.hs_inner(X, X) == pytest.approx(schatten.schatten_norm(X, 2) ** 2, rel=1e-12)


def test_hs_inner_conjugate_linear_in_first(rng):
    X, Y = random_operator(rng, 2), random_operator(rng, 2)
    assert schatten.hs_inner(1j * X, Y) == pytest.approx(-1j * schatten.hs_inner(X, Y), abs=1e-12)


def test_hs_inner_shape_mismatch():
    with pytest.raises(ValidationError):
        schatten.hs_inner(np.eye(2), np.eye(3))


def test_factor_split_diagonal():
    Y, Z = schatten.factor_split(np.diag([4.0, 1.0]), 2, 2)
    assert np.allclose(Y, np.diag([2, 1]), atol=1e-12)
    assert np.allclose(Z, np.diag([2, 1]), atol=1e-12)


def test_factor_split_identity():
    Y, Z = schatten.factor_split(np.eye(3), 1, 3)
    assert np.allclose(Y, np.eye(3))
    assert np.allclose(Z, np.eye(3))


@pytest.mark.parametrize("p,q", [(2, 2), (1, math.inf), (3, 1.5)])
def test_factor_split_reconstructs(rng, p, q):
    X = random_operator(rng, 4, 3)
    Y, Z = schatten.factor_split(X, p, q)
    assert np.max(np.abs(Y @ Z - X)) < 1e-10


def test_factor_split_norms(rng):
    X = random_operator(rng, 4)
    Y, Z = schatten.factor_split(X, 2, 2)
    product = schatten.schatten_norm(Y, 2) * schatten.schatten_norm(Z, 2)
    assert product == pytest.approx(schatten.schatten_norm(X, 1), abs=1e-10)


def test_partial_trace_product_state(rng):
    rho, sigma = random_operator(rng, 2), random_operator(rng, 3)
    result = schatten.partial_trace_first(np.kron(rho, sigma), 2, 3)
    assert np.allclose(result, np.trace(rho) * sigma, atol=1e-12)


def test_partial_trace_defining_identity(rng):
    A = random_operator(rng, 6)
    T = schatten.partial_trace_first(A, 2, 3)
    for j in range(3):
        for k in range(3):
            E = np.zeros((3, 3))
            E[j, k] = 1
            assert np.trace(T @ E) == pytest.approx(np.trace(A @ np.kron(np.eye(2), E)), abs=1e-12)
    assert np.trace(T) == pytest.approx(np.trace(A), abs=1e-12)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValidationError):
        schatten.partial_trace_first(np.eye(5), 2, 3)


def test_block_truncate_diagonal():
    A = np.diag([1, 0.5, 0.25])
    truncated = schatten.block_truncate(A, [0, 1], [0, 1])
    assert np.allclose(truncated, np.diag([1, 0.5, 0]))
    assert schatten.schatten_norm(A - truncated, 1) == pytest.approx(0.25)


def test_block_truncate_full_sets(rng):
    A = random_operator(rng, 3, 4)
    F, G = random_unitary(rng, 3), random_unitary(rng, 4)
    assert np.allclose(schatten.block_truncate(A, range(3), range(4), F, G), A, atol=1e-12)


def test_block_truncate_empty_set(rng):
    A = random_operator(rng, 3)
    assert not np.any(schatten.block_truncate(A, [], [0, 1]))


def test_block_truncate_out_of_range():
    with pytest.raises(ValidationError):
        schatten.block_truncate(np.eye(3), [3], [0])


def test_block_truncate_rejects_non_unitary_basis():
    with pytest.raises(ValidationError):
        schatten.block_truncate(np.eye(2), [0], [0], basisF=2 * np.eye(2))


def _decaying(rng, d):
    U, V = random_unitary(rng, d), random_unitary(rng, d)
    return (U * 2.0 ** -np.arange(d)) @ V.conj().T


@settings(deadline=None, max_examples=100)
@given(seeds, sampled_from([1, 2, math.inf]))
def test_block_truncation_monotone_in_schmidt_bases(seed, p):
    A = _decaying(np.random.default_rng(seed), 6)
    U, _, Vh = scipy.linalg.svd(A)
    errors = [schatten.schatten_norm(A - schatten.block_truncate(A, range(m), range(m), U, Vh.conj().T), p)
              for m in range(7)]
    assert all(b <= a + 1e-10 for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-12


@settings(deadline=None, max_examples=100)
@given(seeds)
def test_block_truncation_monotone_in_hilbert_schmidt_norm(seed):
    rng = np.random.default_rng(seed)
    A = _decaying(rng, 6)
    F, G = random_unitary(rng, 6), random_unitary(rng, 6)
    rows = rng.permutation(6)
    cols = rng.permutation(6)
    errors = [schatten.schatten_norm(A - schatten.block_truncate(A, rows[:m], cols[:m], F, G), 2)
              for m in range(7)]
    assert all(b <= a + 1e-10 for a, b in zip(errors, errors[1:]))
