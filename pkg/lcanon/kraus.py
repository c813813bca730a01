"""
Kraus decompositions of completely positive maps.

A Kraus set {V_j} represents the map X -> sum_j V_j X V_j*. Sets are finite
and ordered; any two sets related by an isometric mixing represent the same
map, so only gauge-invariant quantities should be compared between them.
"""
import dataclasses
import logging
import typing

import numpy as np
import scipy.linalg

from . import choi as choi_mod
from .exceptions import NotCompletelyPositiveError, NumericalFailure, ValidationError
from .schatten import as_operator, as_square
from .superop import SuperOperator

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class KrausSet:
    """Ordered family of d_out x d_in operators."""

    operators: typing.Tuple[np.ndarray, ...]
    shape: typing.Tuple[int, int]
    eigenvalues: typing.Optional[np.ndarray] = None

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 2 or min(shape) < 1:
            raise ValidationError(f"invalid Kraus operator shape {self.shape}")
        operators = []
        for j, V in enumerate(self.operators):
            V = as_operator(V, f'Kraus operator {j}')
            if V.shape != shape:
                raise ValidationError(f"Kraus operator {j} has shape {V.shape}, expected {shape}")
            operators.append(V)
        object.__setattr__(self, 'shape', shape)
        object.__setattr__(self, 'operators', tuple(operators))

    @classmethod
    def from_operators(cls, operators, shape=None) -> 'KrausSet':
        """Build a set from a list of operators; ``shape`` is needed for an empty list."""
        operators = [as_operator(V, 'Kraus operator') for V in operators]
        if shape is None:
            if not operators:
                raise ValidationError("an empty Kraus set needs an explicit shape")
            shape = operators[0].shape
        return cls(tuple(operators), shape)

    @classmethod
    def empty(cls, dim_out: int, dim_in: typing.Optional[int] = None) -> 'KrausSet':
        dim_in = dim_out if dim_in is None else dim_in
        return cls((), (dim_out, dim_in))

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    @property
    def dim_out(self) -> int:
        return self.shape[0]

    @property
    def dim_in(self) -> int:
        return self.shape[1]

    def gram(self) -> np.ndarray:
        """sum_j V_j* V_j."""
        total = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for V in self.operators:
            total += V.conj().T @ V
        return total

    def adjoint(self) -> 'KrausSet':
        """The set {V_j*}, representing the dual map."""
        return KrausSet(tuple(V.conj().T for V in self.operators), (self.dim_in, self.dim_out))

    def superop(self) -> SuperOperator:
        return superop_from_kraus(self)


class PositivityCheck(typing.NamedTuple):
    is_cp: bool
    min_eigenvalue: float


class WeightedTrace(typing.NamedTuple):
    value: float
    v: np.ndarray


class CoefficientBound(typing.NamedTuple):
    value: float
    bound: float


def _phase_fix(w: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry real positive
    k = int(np.argmax(np.abs(w)))
    if w[k] == 0:
        return w
    return w * (abs(w[k]) / w[k])


def kraus_from_choi(C: 'choi_mod.ChoiOperator', rank_tol: float = 1e-12,
                    psd_tol: float = choi_mod.DEFAULT_PSD_TOL, tol_eq: float = 1e-10) -> KrausSet:
    """
    Kraus operators from the spectral decomposition C = sum_m mu_m |w_m><w_m|.

    V_m = sqrt(mu_m) unvec(w_m) for mu_m > rank_tol * max(1, mu_max), so a
    Choi matrix that is zero up to rounding gives the empty set. Choi operators
    taken with weights or in a rotated basis are first brought to the plain
    Choi matrix.
    """
    scale = max(1.0, float(np.max(np.abs(C.matrix))))
    if C.hermiticity_defect() > tol_eq * scale:
        raise ValidationError(f"Choi operator is not Hermitian (defect {C.hermiticity_defect():.3g})")
    wb = C.basis
    if wb is not None and not (np.allclose(wb.weights, 1) and np.allclose(wb.basis, np.eye(wb.dim))):
        C = choi_mod.unweighted_choi(choi_mod.choi_inverse(C, wb))

    hermitian = (C.matrix + C.matrix.conj().T) / 2
    try:
        mu, w = scipy.linalg.eigh(hermitian)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"eigensolver failed: {e}")
    threshold = C.psd_threshold(psd_tol)
    if mu[0] < -threshold:
        raise NotCompletelyPositiveError(
            f"map is not completely positive: Choi eigenvalue {mu[0]:.6g} < {-threshold:.3g}")

    shape = (C.dim_out, C.dim_in)
    cut = rank_tol * max(1.0, mu[-1])
    if mu[-1] <= max(cut, threshold):
        return KrausSet((), shape, eigenvalues=np.zeros(0))
    keep = [m for m in range(mu.size - 1, -1, -1) if mu[m] > cut]
    operators = []
    for m in keep:
        vector = _phase_fix(w[:, m])
        operators.append(np.sqrt(mu[m]) * vector.reshape(C.dim_in, C.dim_out).T)
    logger.debug('kraus_from_choi: kept %d of %d eigenvalues, min %.3g', len(keep), mu.size, mu[0])
    return KrausSet(tuple(operators), shape, eigenvalues=mu[keep])


def superop_from_kraus(ks: KrausSet) -> SuperOperator:
    """Matrix sum_j conj(V_j) (x) V_j; the zero map for an empty set."""
    do, di = ks.shape
    matrix = np.zeros((do * do, di * di), dtype=complex)
    for V in ks.operators:
        matrix += np.kron(V.conj(), V)
    return SuperOperator(di, do, matrix)


def is_completely_positive(phi: SuperOperator, tol: float = choi_mod.DEFAULT_PSD_TOL) -> PositivityCheck:
    min_eig = choi_mod.unweighted_choi(phi).min_eigenvalue()
    return PositivityCheck(min_eig >= -tol, min_eig)


def _check_reference(ks: KrausSet, B) -> np.ndarray:
    B = as_square(B, 'B')
    if ks.dim_in != ks.dim_out:
        raise ValidationError(f"weighted trace needs square Kraus operators, got shape {ks.shape}")
    if B.shape[0] != ks.dim_in:
        raise ValidationError(f"B is {B.shape[0]}x{B.shape[0]}, Kraus operators act on dimension {ks.dim_in}")
    return B


def weighted_trace_via_kraus(ks: KrausSet, B) -> WeightedTrace:
    """tr(phi(B* (.) B)) = sum_j |tr(B* V_j)|^2, with v_j = tr(B* V_j)."""
    B = _check_reference(ks, B)
    v = np.array([np.vdot(B, V) for V in ks.operators], dtype=complex)
    return WeightedTrace(float(np.sum(np.abs(v) ** 2)), v)


def is_in_cp_b(ks: KrausSet, B, tol: float = 1e-10) -> bool:
    """Whether the weighted trace vanishes, relative to ||B||_1^2 sum_j ||V_j||_inf^2."""
    B = _check_reference(ks, B)
    value = weighted_trace_via_kraus(ks, B).value
    trace_norm = float(np.sum(scipy.linalg.svdvals(B)))
    norms = sum(float(scipy.linalg.svdvals(V)[0]) ** 2 for V in ks.operators)
    return value <= tol * (1 + trace_norm ** 2 * norms)


def one_to_one_norm_cp(ks: KrausSet) -> float:
    """||sum_j V_j* V_j||_inf, the 1->1 norm of the Kraus map."""
    if not len(ks):
        raise ValidationError("one_to_one_norm_cp needs a non-empty Kraus set")
    return float(max(scipy.linalg.eigvalsh(ks.gram())[-1], 0.0))


def mix(ks: KrausSet, W) -> KrausSet:
    """Re-mix the set by an isometry W: V'_i = sum_j W_ij V_j."""
    W = as_operator(W, 'W')
    if W.shape[1] != len(ks):
        raise ValidationError(f"mixing matrix has {W.shape[1]} columns for {len(ks)} Kraus operators")
    if W.shape[0] < W.shape[1] or not np.allclose(W.conj().T @ W, np.eye(W.shape[1]), atol=1e-12):
        raise ValidationError("mixing matrix is not an isometry")
    if not len(ks):
        return ks
    stacked = np.stack(ks.operators)
    return KrausSet(tuple(np.einsum('ij,jab->iab', W, stacked)), ks.shape)


def coefficient_bound(ks: KrausSet, B) -> CoefficientBound:
    """
    ||sum_j conj(c_j) V_j||_inf with c_j = tr(B* V_j) / tr(B*), next to its
    bound |tr B|^-1 ||v||_2 ||sum_j V_j* V_j||_inf^(1/2).
    """
    B = _check_reference(ks, B)
    trB = np.trace(B)
    if trB == 0:
        raise ValidationError("coefficient_bound needs tr(B) != 0")
    v = weighted_trace_via_kraus(ks, B).v
    coefficients = v / np.conj(trB)
    total = np.zeros((ks.dim_in, ks.dim_in), dtype=complex)
    for c, V in zip(coefficients, ks.operators):
        total += np.conj(c) * V
    value = float(scipy.linalg.svdvals(total)[0])
    gram_norm = one_to_one_norm_cp(ks) if len(ks) else 0.0
    bound = float(np.linalg.norm(v) * np.sqrt(gram_norm) / abs(trB))
    return CoefficientBound(value, bound)
