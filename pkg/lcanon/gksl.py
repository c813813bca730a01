"""
Generators of completely positive semigroups and their canonical
decomposition L = K(.) + (.)K* + phi relative to a reference operator B.

For B with Re tr(B) != 0 there is exactly one pair (K, phi) with phi
completely positive, tr(phi(B* (.) B)) = 0 and Im tr(B* K) = 0. The
construction starts from any decomposition of L and shifts the Kraus
operators off the reference direction; see :func:`canonicalize`.
"""
import dataclasses
import enum
import logging
import typing

import numpy as np
import scipy.linalg

from . import choi, kraus, superop
from .config import Config
from .exceptions import (
    InconsistentGeneratorError,
    NotAGeneratorError,
    PreconditionError,
    ValidationError,
)
from .kraus import KrausSet
from .schatten import as_square
from .superop import SuperOperator

logger = logging.getLogger(__name__)

# Relative residual accepted when solving for K in the extraction step.
EXTRACTION_RESIDUAL = 1e-8

# Re tr(B) must exceed this fraction of ||B||_1.
REFERENCE_GUARD = 1e-12


class GeneratorClass(enum.Enum):
    CP_SEMIGROUP = 'cp_semigroup'
    CPTP_SEMIGROUP = 'cptp_semigroup'
    CPU_SEMIGROUP = 'cpu_semigroup'
    UNKNOWN = 'unknown'


@dataclasses.dataclass(frozen=True, eq=False)
class Generator:
    superop: SuperOperator
    claimed_class: GeneratorClass = GeneratorClass.UNKNOWN

    def __post_init__(self):
        if not self.superop.is_square:
            raise ValidationError("a generator must map an operator space into itself")
        if self.claimed_class is GeneratorClass.CPTP_SEMIGROUP:
            scale = max(1.0, float(np.max(np.abs(self.superop.matrix))))
            if self.trace_defect() > 1e-10 * scale:
                raise ValidationError(f"generator claimed trace preserving but "
                                      f"||L*(1)|| = {self.trace_defect():.3g}")

    @classmethod
    def from_matrix(cls, matrix, claimed_class=GeneratorClass.UNKNOWN) -> 'Generator':
        return cls(SuperOperator.from_matrix(matrix), claimed_class)

    @property
    def dim(self) -> int:
        return self.superop.dim_in

    @property
    def matrix(self) -> np.ndarray:
        return self.superop.matrix

    def is_hermiticity_preserving(self, tol: float = 1e-10) -> bool:
        return superop.is_hermiticity_preserving(self.superop, tol)

    def trace_defect(self) -> float:
        """||L*(1)||_inf; zero for trace-preserving generators."""
        image = superop.dual(self.superop)(np.eye(self.dim))
        return float(scipy.linalg.svdvals(image)[0])

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        return self.trace_defect() <= tol


class InitialDecomposition(typing.NamedTuple):
    K: np.ndarray
    kraus: KrausSet


class ShiftedDecomposition(typing.NamedTuple):
    K: np.ndarray
    kraus: KrausSet
    coefficients: np.ndarray


class HeisenbergDecomposition(typing.NamedTuple):
    H: np.ndarray
    kraus: KrausSet


@dataclasses.dataclass(frozen=True, eq=False)
class CanonicalDecomposition:
    """
    The unique pair (K, phi) for the reference operator B.

    In ``cptp`` mode ``H`` holds the Hamiltonian with K = -iH - phi*(1)/2.
    """

    K: np.ndarray
    phi: KrausSet
    reference: np.ndarray
    mode: str = 'cp'
    H: typing.Optional[np.ndarray] = None
    residuals: typing.Dict[str, float] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ('cp', 'cptp'):
            raise ValidationError(f"mode must be 'cp' or 'cptp', got {self.mode!r}")
        if self.mode == 'cptp' and self.H is None:
            raise ValidationError("cptp decomposition without H")

    @property
    def dim(self) -> int:
        return self.K.shape[0]

    def generator(self) -> Generator:
        if self.mode == 'cptp':
            return build_gksl_generator(self.H, self.phi)
        return build_cp_generator(self.K, self.phi)


class VerificationReport(typing.NamedTuple):
    residuals: typing.Dict[str, float]
    thresholds: typing.Dict[str, float]

    @property
    def failed(self) -> typing.List[str]:
        return sorted(name for name, limit in self.thresholds.items()
                      if not self.residuals[name] <= limit)

    @property
    def passed(self) -> bool:
        return not self.failed


def _opnorm(X) -> float:
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(X)[0])


def _trace_norm(X) -> float:
    return float(np.sum(scipy.linalg.svdvals(X)))


def _check_kraus_square(K: np.ndarray, ks: KrausSet) -> None:
    d = K.shape[0]
    if ks.shape != (d, d):
        raise ValidationError(f"Kraus operators of shape {ks.shape} do not fit a {d}x{d} operator")


def _left_right(K: np.ndarray) -> np.ndarray:
    """Matrix of X -> KX + XK*."""
    eye = np.eye(K.shape[0])
    return np.kron(eye, K) + np.kron(K.conj(), eye)


def build_cp_generator(K, ks: KrausSet) -> Generator:
    """L = K(.) + (.)K* + phi."""
    K = as_square(K, 'K')
    _check_kraus_square(K, ks)
    matrix = _left_right(K) + kraus.superop_from_kraus(ks).matrix
    return Generator(SuperOperator(K.shape[0], K.shape[0], matrix), GeneratorClass.CP_SEMIGROUP)


def _check_hamiltonian(H, tol: float = 1e-10) -> np.ndarray:
    H = as_square(H, 'H')
    defect = float(np.max(np.abs(H - H.conj().T)))
    if defect > tol:
        raise ValidationError(f"H is not Hermitian (defect {defect:.3g})")
    return H


def build_gksl_generator(H, ks: KrausSet) -> Generator:
    """L = -i[H, .] + phi - {phi*(1)/2, .}."""
    H = _check_hamiltonian(H)
    _check_kraus_square(H, ks)
    K = -1j * H - ks.gram() / 2
    matrix = _left_right(K) + kraus.superop_from_kraus(ks).matrix
    return Generator(SuperOperator(H.shape[0], H.shape[0], matrix), GeneratorClass.CPTP_SEMIGROUP)


def build_heisenberg_generator(H, ks: KrausSet) -> Generator:
    """Unital generator X -> -i[H, X] + phi(X) - {phi(1)/2, X}."""
    H = _check_hamiltonian(H)
    _check_kraus_square(H, ks)
    K = -1j * H - ks.adjoint().gram() / 2
    matrix = _left_right(K) + kraus.superop_from_kraus(ks).matrix
    return Generator(SuperOperator(H.shape[0], H.shape[0], matrix), GeneratorClass.CPU_SEMIGROUP)


def extract_initial_decomposition(L: Generator, config: typing.Optional[Config] = None) -> InitialDecomposition:
    """
    Find some (K0, {V_j}) with L = K0(.) + (.)K0* + sum_j V_j (.) V_j*.

    The Choi matrix of L is compressed off the maximally entangled vector;
    L generates a CP semigroup iff that compression is positive semi-definite.
    Its Kraus operators give the CP part and K0 is solved from the remainder
    with the gauge Im tr(K0) = 0.
    """
    config = config or Config()
    d = L.dim
    scale = max(1.0, float(np.max(np.abs(L.matrix))))
    if not L.is_hermiticity_preserving(config.tol_eq * scale):
        raise NotAGeneratorError("not a CP-semigroup generator: L does not preserve Hermiticity")

    C = choi.unweighted_choi(L.superop).matrix
    C = (C + C.conj().T) / 2
    gamma = choi.entangled_vector(choi.WeightedBasis.unit(d))
    Q = np.eye(d * d) - np.outer(gamma, gamma.conj()) / d
    C0 = Q @ C @ Q
    C0 = (C0 + C0.conj().T) / 2

    mu, w = scipy.linalg.eigh(C0)
    choi_scale = max(1.0, _trace_norm(C))
    logger.debug('extract: projected Choi spectrum %s', mu)
    if mu[0] < -config.tol_psd * choi_scale:
        raise NotAGeneratorError(f"not a CP-semigroup generator: projected Choi eigenvalue "
                                 f"{mu[0]:.6g} < {-config.tol_psd * choi_scale:.3g}")
    # eigenvalues at rounding level of C(L) belong to the zero map
    mu = np.where(mu > config.rank_tol * choi_scale, mu, 0.0)
    C0 = (w * mu) @ w.conj().T
    ks0 = kraus.kraus_from_choi(choi.ChoiOperator(d, d, C0), rank_tol=config.rank_tol,
                                psd_tol=config.tol_psd, tol_eq=config.tol_eq)

    remainder = L.superop - kraus.superop_from_kraus(ks0)
    CM = choi.unweighted_choi(remainder).matrix
    # C(K(.) + (.)K*) = |k><gamma| + |gamma><k| with k = vec(K)
    column = CM @ gamma
    trace_K = (np.vdot(gamma, column) / (2 * d)).real
    k = (column - gamma * trace_K) / d
    K0 = k.reshape(d, d).T

    error = float(np.linalg.norm(_left_right(K0) - remainder.matrix))
    relative = error / max(1.0, float(np.linalg.norm(remainder.matrix)))
    logger.debug('extract: %d Kraus operators, K0 residual %.3g', len(ks0), relative)
    if relative > EXTRACTION_RESIDUAL:
        raise InconsistentGeneratorError(f"inconsistent generator: K0 solve residual {relative:.3g}")
    return InitialDecomposition(K0, ks0)


def check_reference(B, d: int) -> np.ndarray:
    """Validate B and its hypothesis Re tr(B) != 0."""
    B = as_square(B, 'B')
    if B.shape[0] != d:
        raise ValidationError(f"B is {B.shape[0]}x{B.shape[0]}, generator acts on dimension {d}")
    trace_norm = _trace_norm(B)
    if not abs(np.trace(B).real) > REFERENCE_GUARD * trace_norm or trace_norm == 0:
        raise PreconditionError(f"reference operator violates the hypothesis Re(tr(B)) != 0 "
                                f"(tr B = {complex(np.trace(B)):.6g})")
    return B


def shift_to_cp_b(K0, ks: KrausSet, B, rank_tol: float = 1e-12) -> ShiftedDecomposition:
    """
    Move (K0, {V_j}) to a decomposition whose CP part lies in CP_B.

    V_j -> V_j - c_j 1 with c_j = tr(B* V_j) / tr(B*), and
    K0 -> K0 + sum_j conj(c_j) V_j - sum_j |tr(B* V_j)|^2 / (2 |tr B|^2) 1.
    """
    K0 = as_square(K0, 'K0')
    _check_kraus_square(K0, ks)
    B = check_reference(B, K0.shape[0])
    d = K0.shape[0]
    trB = complex(np.trace(B))
    v = kraus.weighted_trace_via_kraus(ks, B).v
    coefficients = v / np.conj(trB)

    eye = np.eye(d)
    K = K0.astype(complex)
    shifted = []
    for c, V in zip(coefficients, ks.operators):
        K = K + np.conj(c) * V
        shifted.append(V - c * eye)
    K = K - (np.sum(np.abs(v) ** 2) / (2 * abs(trB) ** 2)) * eye

    size = max([1.0] + [float(np.linalg.norm(V)) for V in ks.operators])
    kept = tuple(V for V in shifted if np.linalg.norm(V) > rank_tol * size)
    logger.debug('shift: coefficients %s, dropped %d null Kraus operators',
                 coefficients, len(shifted) - len(kept))
    return ShiftedDecomposition(K, KrausSet(kept, ks.shape), coefficients)


def _residuals(K, ks: KrausSet, B, L: Generator) -> typing.Dict[str, float]:
    rebuilt = build_cp_generator(K, ks)
    trB_K = complex(np.vdot(B, K))
    phi_choi = choi.unweighted_choi(kraus.superop_from_kraus(ks))
    return {
        'reconstruction': rebuilt.superop.distance(L.superop),
        'im_tr_bk': abs(trB_K.imag),
        'weighted_trace': kraus.weighted_trace_via_kraus(ks, B).value,
        'cp_negativity': max(0.0, -phi_choi.min_eigenvalue()),
    }


def canonicalize_decomposition(K0, ks: KrausSet, B, L: typing.Optional[Generator] = None,
                               config: typing.Optional[Config] = None) -> CanonicalDecomposition:
    """Canonical (K, phi) starting from an explicit decomposition (K0, ks)."""
    config = config or Config()
    K0 = as_square(K0, 'K0')
    B = check_reference(B, K0.shape[0])
    if L is None:
        L = build_cp_generator(K0, ks)

    shifted = shift_to_cp_b(K0, ks, B, rank_tol=config.rank_tol)
    K_tilde = shifted.K
    alpha = complex(np.vdot(B, K_tilde)).imag / np.trace(B).real
    K = K_tilde - 1j * alpha * np.eye(K0.shape[0])
    logger.debug('canonicalize: imaginary shift %.6g', alpha)

    residuals = _residuals(K, shifted.kraus, B, L)
    return CanonicalDecomposition(K, shifted.kraus, B, 'cp', None, residuals)


def canonicalize(L: Generator, B, config: typing.Optional[Config] = None) -> CanonicalDecomposition:
    """The unique (K, phi) with phi in CP_B and Im tr(B* K) = 0."""
    config = config or Config()
    B = check_reference(B, L.dim)
    initial = extract_initial_decomposition(L, config)
    return canonicalize_decomposition(initial.K, initial.kraus, B, L, config)


def cptp_domain_gap(H, ks: KrausSet, B) -> float:
    """|Im tr(phi(B)) - 2 Re tr(B* H)|."""
    phi_B = kraus.superop_from_kraus(ks)(B)
    return abs(np.trace(phi_B).imag - 2 * complex(np.vdot(B, H)).real)


def _is_self_adjoint(B) -> bool:
    return bool(np.max(np.abs(B - B.conj().T)) <= 1e-12 * max(1.0, float(np.max(np.abs(B)))))


def canonicalize_cptp(L: Generator, B, config: typing.Optional[Config] = None) -> CanonicalDecomposition:
    """Canonical (H, phi) with L = -i[H, .] + phi - {phi*(1)/2, .}."""
    config = config or Config()
    scale = max(1.0, float(np.max(np.abs(L.matrix))))
    if not L.is_trace_preserving(config.tol_recon * scale):
        raise ValidationError(f"generator is not trace preserving (||L*(1)|| = {L.trace_defect():.3g})")
    cd = canonicalize(L, B, config)
    B = cd.reference
    ks = cd.phi

    H = 1j * (cd.K + ks.gram() / 2)
    defect = float(np.max(np.abs(H - H.conj().T)))
    if defect > config.tol_recon * max(1.0, _opnorm(cd.K)):
        raise InconsistentGeneratorError(f"Hamiltonian part is not Hermitian (defect {defect:.3g}): "
                                         f"L does not generate a CPTP semigroup")
    H = (H + H.conj().T) / 2

    rebuilt = build_gksl_generator(H, ks)
    error = rebuilt.superop.distance(L.superop)
    if error > config.tol_recon * scale:
        raise InconsistentGeneratorError(f"GKSL reconstruction residual {error:.3g}")
    tr_bh = abs(complex(np.trace(B @ H)))
    if _is_self_adjoint(B) and tr_bh > config.tol_recon * max(1.0, _trace_norm(B) * _opnorm(H)):
        raise InconsistentGeneratorError(f"tr(BH) = {tr_bh:.3g} does not vanish")

    residuals = dict(cd.residuals)
    residuals.update({
        'reconstruction': error,
        'trace_preservation': L.trace_defect(),
        'h_hermiticity': defect,
        'tr_bh': tr_bh,
        'cptp_domain_gap': cptp_domain_gap(H, ks, B),
    })
    return CanonicalDecomposition(cd.K, ks, B, 'cptp', H, residuals)


def verify_canonical(cd: CanonicalDecomposition, L: Generator,
                     config: typing.Optional[Config] = None) -> VerificationReport:
    """Recompute the defining properties of ``cd`` and compare with tolerances."""
    config = config or Config()
    B = as_square(cd.reference, 'reference')
    ks = cd.phi
    if cd.mode == 'cptp':
        H = as_square(cd.H, 'H')
        K = -1j * H - ks.gram() / 2
        rebuilt = build_gksl_generator((H + H.conj().T) / 2, ks)
    else:
        K = as_square(cd.K, 'K')
        rebuilt = build_cp_generator(K, ks)
    if rebuilt.dim != L.dim:
        raise ValidationError(f"decomposition has dimension {rebuilt.dim}, generator {L.dim}")

    L_scale = max(1.0, float(np.max(np.abs(L.matrix))))
    B_norm = _trace_norm(B)
    phi_choi = choi.unweighted_choi(kraus.superop_from_kraus(ks))
    gram_norm = _opnorm(ks.gram())
    residuals = {
        'reconstruction': rebuilt.superop.distance(L.superop),
        'im_tr_bk': abs(complex(np.vdot(B, K)).imag),
        'weighted_trace': kraus.weighted_trace_via_kraus(ks, B).value,
        'cp_negativity': max(0.0, -phi_choi.min_eigenvalue()),
    }
    thresholds = {
        'reconstruction': config.tol_recon * L_scale,
        'im_tr_bk': config.tol_recon * max(1.0, B_norm * _opnorm(K)),
        'weighted_trace': config.tol_recon * (1 + B_norm ** 2 * gram_norm),
        'cp_negativity': config.tol_psd * max(1.0, abs(np.trace(phi_choi.matrix))),
    }
    if cd.mode == 'cptp':
        residuals['trace_preservation'] = L.trace_defect()
        thresholds['trace_preservation'] = config.tol_recon * L_scale
        residuals['h_hermiticity'] = float(np.max(np.abs(H - H.conj().T)))
        thresholds['h_hermiticity'] = config.tol_recon * max(1.0, _opnorm(H))
        residuals['cptp_domain_gap'] = cptp_domain_gap(H, ks, B)
        if _is_self_adjoint(B):
            residuals['tr_bh'] = abs(complex(np.trace(B @ H)))
            thresholds['tr_bh'] = config.tol_recon * max(1.0, B_norm * _opnorm(H))
    report = VerificationReport(residuals, thresholds)
    logger.debug('verify: residuals %s, failed %s', residuals, report.failed)
    return report


def dual_generator(cd: CanonicalDecomposition) -> HeisenbergDecomposition:
    """(-H, {V_j*}), the canonical pair of the Heisenberg-picture generator."""
    if cd.mode != 'cptp':
        raise ValidationError("dual_generator needs a cptp decomposition")
    return HeisenbergDecomposition(-cd.H, cd.phi.adjoint())


def is_imaginary_scalar(K, tol: float = 1e-8) -> bool:
    """Whether K = i lambda 1 for a real lambda."""
    K = as_square(K, 'K')
    d = K.shape[0]
    deviation = K - 1j * (np.trace(K).imag / d) * np.eye(d)
    return bool(np.max(np.abs(deviation)) <= tol * max(1.0, float(np.max(np.abs(K)))))
