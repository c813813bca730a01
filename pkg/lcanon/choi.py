"""
The weighted Choi formalism.

For an orthonormal basis G = {g_j} (the columns of a unitary matrix) and a
weight vector lambda the Choi operator of a map phi is::

    C(phi) = sum_{j,k} conj(lambda_j) lambda_k |g_j><g_k| (x) phi(|g_j><g_k|)

with the input as first tensor factor. The same pair (lambda, G) defines the
diagonal reference operator B = sum_j lambda_j |g_j><g_j|.
"""
import dataclasses
import logging
import math
import re
import typing

import numpy as np
import scipy.linalg

from . import schatten
from .exceptions import NumericalFailure, PreconditionError, ValidationError
from .schatten import as_operator, as_square
from .superop import SuperOperator, vec

logger = logging.getLogger(__name__)

DEFAULT_PSD_TOL = 1e-9


class WeightRule(typing.NamedTuple):
    """A named rule j -> lambda_j for j = 1, 2, ..."""

    kind: str
    parameter: float

    def __str__(self):
        return f"{self.kind}:{self.parameter:g}"

    def weight(self, j: int) -> float:
        if self.kind == 'geometric':
            return self.parameter ** j
        return float(j) ** (-self.parameter)

    def weights(self, d: int) -> np.ndarray:
        return np.array([self.weight(j) for j in range(1, d + 1)])

    @property
    def regime(self) -> str:
        """'l1' for absolutely summable sequences, 'l2' for square summable only."""
        if self.kind == 'geometric':
            return 'l1' if abs(self.parameter) < 1 else 'none'
        if self.parameter > 1:
            return 'l1'
        if self.parameter > 0.5:
            return 'l2'
        return 'none'


def weight_rule(text: str) -> WeightRule:
    """Parse 'geometric:r' or 'power:p'."""
    m = re.match(r'^\s*(geometric|power)\s*:\s*(\S+)\s*$', text or '')
    if m is None:
        raise ValidationError(f"weight rule must be 'geometric:r' or 'power:p', got {text!r}")
    try:
        parameter = float(m.group(2))
    except ValueError:
        raise ValidationError(f"weight rule parameter is not a number: {m.group(2)!r}")
    if not math.isfinite(parameter):
        raise ValidationError(f"weight rule parameter must be finite, got {parameter}")
    return WeightRule(m.group(1), parameter)


@dataclasses.dataclass(frozen=True, eq=False)
class WeightedBasis:
    """Orthonormal basis (columns of ``basis``) with weights lambda_j."""

    basis: np.ndarray
    weights: np.ndarray
    rule: str = 'explicit'

    def __post_init__(self):
        basis = as_square(self.basis, 'basis')
        weights = np.asarray(self.weights, dtype=complex).reshape(-1)
        if weights.size != basis.shape[0]:
            raise ValidationError(f"{weights.size} weights for a basis of dimension {basis.shape[0]}")
        if not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be finite")
        if not schatten.is_unitary(basis):
            raise ValidationError("basis matrix is not unitary")
        object.__setattr__(self, 'basis', basis)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def standard(cls, weights) -> 'WeightedBasis':
        weights = np.asarray(weights, dtype=complex).reshape(-1)
        return cls(np.eye(weights.size, dtype=complex), weights)

    @classmethod
    def unit(cls, d: int) -> 'WeightedBasis':
        """Standard basis with all weights one (the usual Choi matrix)."""
        return cls(np.eye(d, dtype=complex), np.ones(d), rule='unit')

    @classmethod
    def from_rule(cls, rule: WeightRule, d: int, basis=None) -> 'WeightedBasis':
        basis = np.eye(d, dtype=complex) if basis is None else basis
        return cls(basis, rule.weights(d), rule=str(rule))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def nonvanishing(self) -> bool:
        return bool(np.all(self.weights != 0))

    @property
    def reference(self) -> np.ndarray:
        """B = sum_j lambda_j |g_j><g_j|."""
        return (self.basis * self.weights) @ self.basis.conj().T

    def weights_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.weights) ** 2))


@dataclasses.dataclass(frozen=True, eq=False)
class ChoiOperator:
    dim_in: int
    dim_out: int
    matrix: np.ndarray
    basis: typing.Optional[WeightedBasis] = None

    def __post_init__(self):
        matrix = as_square(self.matrix, 'Choi matrix')
        if matrix.shape[0] != self.dim_in * self.dim_out:
            raise ValidationError(f"Choi matrix of size {matrix.shape[0]} for dimensions "
                                  f"{self.dim_in}x{self.dim_out}")
        object.__setattr__(self, 'matrix', matrix)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = 1e-11) -> bool:
        return self.hermiticity_defect() <= tol

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the Hermitian part, ascending."""
        hermitian = (self.matrix + self.matrix.conj().T) / 2
        try:
            return scipy.linalg.eigvalsh(hermitian)
        except np.linalg.LinAlgError as e:
            raise NumericalFailure(f"eigensolver failed: {e}")

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def psd_threshold(self, psd_tol: float = DEFAULT_PSD_TOL) -> float:
        """psd_tol scaled by |tr C| when the trace is nonzero."""
        tr = abs(np.trace(self.matrix))
        return psd_tol * tr if tr > 0 else psd_tol

    def is_psd(self, psd_tol: float = DEFAULT_PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -self.psd_threshold(psd_tol)

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def entangled_vector(wb: WeightedBasis) -> np.ndarray:
    """Gamma = sum_j conj(lambda_j) g_j (x) g_j."""
    G = wb.basis
    return np.einsum('j,aj,bj->ab', wb.weights.conj(), G, G).reshape(-1)


def _basis_units(wb: WeightedBasis) -> np.ndarray:
    # column k*d + j holds vec(|g_j><g_k|)
    return np.kron(wb.basis.conj(), wb.basis)


def choi_map(phi: SuperOperator, wb: WeightedBasis) -> ChoiOperator:
    if phi.dim_in != wb.dim:
        raise ValidationError(f"map acts on dimension {phi.dim_in}, basis has dimension {wb.dim}")
    d, do = wb.dim, phi.dim_out
    images = (phi.matrix @ _basis_units(wb)).reshape(do, do, d, d)
    # images[b, a, k, j] = phi(|g_j><g_k|)[a, b]
    lam = wb.weights
    blocks = np.einsum('j,k,bakj->jakb', lam.conj(), lam, images).reshape(d * do, d * do)
    rotate = np.kron(wb.basis, np.eye(do))
    matrix = rotate @ blocks @ rotate.conj().T
    return ChoiOperator(d, do, matrix, wb)


def unweighted_choi(phi: SuperOperator) -> ChoiOperator:
    return choi_map(phi, WeightedBasis.unit(phi.dim_in))


def choi_inverse(C: ChoiOperator, wb: WeightedBasis) -> SuperOperator:
    """
    The map phi with choi_map(phi, wb) = C.

    phi(|g_j><g_k|) = (conj(lambda_j) lambda_k)^-1 tr_H((|g_k><g_j| (x) 1) C),
    which needs every weight to be nonzero.
    """
    if not wb.nonvanishing:
        raise PreconditionError("choi_inverse needs all weights nonzero: "
                                "the weighted Choi map is only surjective when no lambda_j vanishes")
    if C.dim_in != wb.dim:
        raise ValidationError(f"Choi operator has input dimension {C.dim_in}, basis has {wb.dim}")
    d, do = wb.dim, C.dim_out
    rotate = np.kron(wb.basis, np.eye(do))
    blocks = (rotate.conj().T @ C.matrix @ rotate).reshape(d, do, d, do)
    lam = wb.weights
    scale = np.outer(lam.conj(), lam)
    # images[b, a, k, j] = phi(|g_j><g_k|)[a, b]
    images = np.einsum('jakb,jk->bakj', blocks, 1.0 / scale)
    columns = images.reshape(do * do, d * d)
    return SuperOperator(d, do, columns @ _basis_units(wb).conj().T)


def vectorize(X, wb: WeightedBasis) -> np.ndarray:
    """vec_G(X) = sum_j g_j (x) X g_j."""
    X = as_square(X, 'X')
    if X.shape[0] != wb.dim:
        raise ValidationError(f"X is {X.shape[0]}x{X.shape[0]}, basis has dimension {wb.dim}")
    G = wb.basis
    return np.einsum('ij,kj->ik', G, X @ G).reshape(-1)


def weighted_trace_via_choi(phi: SuperOperator, wb: WeightedBasis, X, Y) -> complex:
    """<vec_G X, C(phi) vec_G Y>, which equals tr(phi((XB)* (.) YB))."""
    C = choi_map(phi, wb)
    return complex(np.vdot(vectorize(X, wb), C.matrix @ vectorize(Y, wb)))


def kernel_residual(phi: SuperOperator, wb: WeightedBasis, X) -> float:
    """||C(phi) vec_G X||; vanishes for CP maps with tr(phi((XB)*(.)XB)) = 0."""
    C = choi_map(phi, wb)
    return float(np.linalg.norm(C.matrix @ vectorize(X, wb)))


def kernel_witness(wb: WeightedBasis, j: int, Z) -> typing.Tuple[SuperOperator, float]:
    """
    The nonzero map X -> <g_j, X g_j> Z for a vanishing weight lambda_j.

    Returns the map together with the HS norm of its Choi operator, which is
    zero: the weighted Choi map is not injective once a weight vanishes.
    """
    if not 0 <= j < wb.dim:
        raise ValidationError(f"basis index {j} out of range for dimension {wb.dim}")
    if wb.weights[j] != 0:
        raise PreconditionError(f"weight lambda_{j} = {wb.weights[j]} is nonzero")
    Z = as_square(Z, 'Z')
    if not np.any(Z):
        raise PreconditionError("Z must be nonzero")
    g = wb.basis[:, j]
    projector = np.outer(g, g.conj())
    phi = SuperOperator(wb.dim, Z.shape[0], np.outer(vec(Z), vec(projector.T)))
    return phi, choi_map(phi, wb).hs_norm()


class WitnessTable(typing.NamedTuple):
    rule: str
    regime: str
    rows: typing.List[typing.Tuple[int, float]]

    def first_exceeding(self, threshold: float) -> typing.Optional[int]:
        for d, value in self.rows:
            if value > threshold:
                return d
        return None


def surjectivity_witness(rule: WeightRule, d_list) -> WitnessTable:
    """
    ||Lambda_d||_inf = max_{j<=d} (j |lambda_j|)^-2 for each truncation d.

    Lambda = sum_j (j |lambda_j|)^-2 |g_j><g_j| is the formal preimage of a
    trace-class Choi operator; for absolutely summable weights it is unbounded.
    """
    if rule.regime != 'l1':
        raise ValidationError(f"weight rule {rule} is not absolutely summable")
    dims = [int(d) for d in d_list]
    if not dims or dims[0] < 1 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValidationError(f"dimensions must be ascending positive integers, got {dims}")

    rows = []
    running = 0.0
    j = 0
    for d in dims:
        while j < d:
            j += 1
            weight = abs(rule.weight(j))
            if weight == 0:
                raise ValidationError(f"weight rule {rule} yields a zero weight at j={j}")
            running = max(running, 1.0 / (j * weight) ** 2)
        rows.append((d, running))
    logger.debug('surjectivity witness %s: %s', rule, rows)
    return WitnessTable(str(rule), rule.regime, rows)


def reference_factorization(B) -> typing.Tuple[np.ndarray, WeightedBasis]:
    """
    Factor B = B1 B2 through its Schmidt decomposition B = sum s_j |f_j><g_j|.

    B1 = sum sqrt(s_j) |f_j><g_j| and B2 = sum lambda_j |g_j><g_j| with
    lambda_j = sqrt(s_j), or 2^-j where s_j vanishes; B2 is returned as the
    weighted basis (lambda, G) with G completed to an orthonormal basis.
    """
    B = as_square(B, 'B')
    d = B.shape[0]
    U, s, Vh = scipy.linalg.svd(B)
    cutoff = s[0] * schatten.RANK_CUTOFF if s.size and s[0] > 0 else 0.0
    root = np.where(s > cutoff, np.sqrt(s), 0.0)
    B1 = (U * root) @ Vh
    lam = np.array([root[j] if root[j] > 0 else 2.0 ** -(j + 1) for j in range(d)])
    return B1, WeightedBasis(Vh.conj().T, lam, rule='schmidt')
