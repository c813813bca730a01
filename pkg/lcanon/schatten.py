"""
Dense-matrix foundation: Schmidt decompositions, Schatten-p norms, traces,
the Hilbert-Schmidt inner product, partial traces, the Schatten factorization
X = YZ and block truncation in arbitrary orthonormal bases.

Operators are plain 2-D ``numpy`` arrays of dtype complex128. Every public
function validates its inputs through :func:`as_operator`.
"""
import logging
import math
import typing

import numpy as np
import scipy.linalg

from .exceptions import NumericalFailure, ValidationError

logger = logging.getLogger(__name__)

# Singular values below s_1 * RANK_CUTOFF count as zero for rank decisions.
RANK_CUTOFF = 1e-13

# Deviation from unitarity tolerated for basis matrices.
UNITARY_TOL = 1e-12


class SchmidtDecomposition(typing.NamedTuple):
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.singular_values)

    def reconstruct(self) -> np.ndarray:
        """Return sum_j s_j |f_j><g_j|."""
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T


def as_operator(X, name: str = 'operator') -> np.ndarray:
    """Validate and convert X to a finite 2-D complex array."""
    arr = np.asarray(X, dtype=complex)
    if arr.ndim != 2 or 0 in arr.shape:
        raise ValidationError(f"{name} must be a non-empty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def as_square(X, name: str = 'operator') -> np.ndarray:
    arr = as_operator(X, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    return arr


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def is_norm(p: float) -> bool:
    """The Schatten functional is a norm only for p >= 1."""
    return p >= 1


def _svd(X: np.ndarray):
    try:
        return scipy.linalg.svd(X, full_matrices=False, lapack_driver='gesdd')
    except np.linalg.LinAlgError:
        logger.debug('gesdd did not converge, retrying with gesvd')
    try:
        return scipy.linalg.svd(X, full_matrices=False, lapack_driver='gesvd')
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"SVD did not converge: {e}")


def singular_values(X) -> np.ndarray:
    """All singular values of X, non-increasing."""
    X = as_operator(X)
    try:
        return scipy.linalg.svdvals(X)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"SVD did not converge: {e}")


def svd_schmidt(X) -> SchmidtDecomposition:
    """
    Schmidt decomposition X = sum_j s_j |f_j><g_j|.

    Only the numerically nonzero terms are kept. Equal singular values are
    ordered by a lexicographic comparison of their left vectors so that the
    result is reproducible.
    """
    X = as_operator(X)
    U, s, Vh = _svd(X)
    if s.size == 0 or s[0] == 0:
        rows, cols = X.shape
        return SchmidtDecomposition(np.zeros(0), np.zeros((rows, 0), dtype=complex),
                                    np.zeros((cols, 0), dtype=complex))
    rank = int(np.count_nonzero(s > s[0] * RANK_CUTOFF))
    s, U, V = s[:rank], U[:, :rank], Vh[:rank].conj().T

    scale = s[0]

    def key(j):
        level = round(s[j] / scale, 12)
        vector = tuple(np.round(np.concatenate([U[:, j].real, U[:, j].imag]), 12))
        return (-level, vector)

    order = sorted(range(rank), key=key)
    # values inside a tie group may differ below the rounding level
    values = np.minimum.accumulate(s[order])
    return SchmidtDecomposition(values, U[:, order], V[:, order])


def schatten_norm(X, p: float) -> float:
    """
    Schatten-p functional (sum_j s_j^p)^(1/p); p = inf gives the operator norm.

    For p in (0, 1) the value is computed but it is only a quasi-norm.
    """
    if not p > 0:
        raise ValidationError(f"p must be positive, got {p}")
    s = singular_values(X)
    if s.size == 0 or s[0] == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    if not is_norm(p):
        logger.info('schatten p=%g < 1 is not a norm', p)
    top = s[0]
    s = s[s > top * RANK_CUTOFF]
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def trace(X) -> complex:
    X = as_square(X)
    return complex(np.trace(X))


def hs_inner(X, Y) -> complex:
    """<X, Y>_HS = tr(X* Y), conjugate-linear in X."""
    X = as_operator(X, 'X')
    Y = as_operator(Y, 'Y')
    if X.shape != Y.shape:
        raise ValidationError(f"shape mismatch: {X.shape} vs {Y.shape}")
    return complex(np.vdot(X, Y))


def factor_split(X, p: float, q: float) -> typing.Tuple[np.ndarray, np.ndarray]:
    """
    Split X = YZ with Y in the Schatten-p class and Z in the Schatten-q class.

    With r given by 1/r = 1/p + 1/q, Y = sum s_j^(r/p) |f_j><f_j| and
    Z = sum s_j^(r/q) |f_j><g_j|.
    """
    if not (p > 0 and q > 0):
        raise ValidationError(f"p and q must be positive, got p={p}, q={q}")
    X = as_operator(X)
    r = 1.0 / (1.0 / p + 1.0 / q)
    schmidt = svd_schmidt(X)
    s, F, G = schmidt
    Y = (F * s ** (r / p)) @ F.conj().T
    Z = (F * s ** (r / q)) @ G.conj().T
    return Y, Z


def partial_trace_first(A, dimH: int, dimZ: int) -> np.ndarray:
    """Trace out the first factor of an operator on H (x) Z."""
    A = as_square(A, 'A')
    if dimH < 1 or dimZ < 1 or A.shape[0] != dimH * dimZ:
        raise ValidationError(f"operator of shape {A.shape} is not on a {dimH}x{dimZ} tensor product")
    return np.einsum('ijik->jk', A.reshape(dimH, dimZ, dimH, dimZ))


def _check_indices(indices, bound: int, name: str) -> typing.List[int]:
    result = sorted(set(int(i) for i in indices))
    if result and (result[0] < 0 or result[-1] >= bound):
        raise ValidationError(f"{name} indices must lie in [0, {bound}), got {result}")
    return result


def block_truncate(A, row_set, col_set, basisF=None, basisG=None) -> np.ndarray:
    """
    Block compression sum_{k in rows, j in cols} <f_k, A g_j> |f_k><g_j|.

    Indices are 0-based. The bases default to the standard bases and must be
    unitary; the result keeps the full shape of A.
    """
    A = as_operator(A, 'A')
    rows, cols = A.shape
    F = np.eye(rows, dtype=complex) if basisF is None else as_square(basisF, 'basisF')
    G = np.eye(cols, dtype=complex) if basisG is None else as_square(basisG, 'basisG')
    if F.shape[0] != rows or G.shape[0] != cols:
        raise ValidationError("basis dimensions do not match the operator")
    if not is_unitary(F) or not is_unitary(G):
        raise ValidationError("truncation bases must be unitary")
    row_idx = _check_indices(row_set, rows, 'row')
    col_idx = _check_indices(col_set, cols, 'column')

    coefficients = F.conj().T @ A @ G
    kept = np.zeros_like(coefficients)
    if not row_idx or not col_idx:
        return kept
    kept[np.ix_(row_idx, col_idx)] = coefficients[np.ix_(row_idx, col_idx)]
    return F @ kept @ G.conj().T
