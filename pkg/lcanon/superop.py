"""
Superoperators as matrices acting on vectorized operators.

We use the column stacking convention throughout::

    vec(X) = sum_j e_j (x) X e_j

i.e. the columns of X are stacked in order and the column index is the
leading tensor factor. Consequently the matrix of X -> A X B is B^T (x) A.
"""
import dataclasses
import logging
import typing

import numpy as np

from . import schatten
from .exceptions import ValidationError
from .schatten import as_operator, as_square

logger = logging.getLogger(__name__)


def vec(X) -> np.ndarray:
    """Stack the columns of X into a 1-D array."""
    return np.asarray(X).reshape(-1, order='F')


def unvec(v, rows: int, cols: typing.Optional[int] = None) -> np.ndarray:
    """Inverse of :func:`vec` for a rows x cols matrix."""
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValidationError(f"vector of length {v.size} cannot be a {rows}x{cols} matrix")
    return v.reshape((rows, cols), order='F')


def _commutation(d: int) -> np.ndarray:
    """Matrix of the transposition X -> X^T on d x d matrices."""
    T = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            T[j * d + i, i * d + j] = 1.0
    return T


@dataclasses.dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map from d_in x d_in to d_out x d_out operators."""

    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (self.dim_out ** 2, self.dim_in ** 2):
            raise ValidationError(
                f"superoperator matrix has shape {matrix.shape}, "
                f"expected {(self.dim_out ** 2, self.dim_in ** 2)}")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("superoperator matrix has non-finite entries")
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_matrix(cls, matrix) -> 'SuperOperator':
        """Wrap a square d^2 x d^2 matrix."""
        matrix = as_square(matrix, 'superoperator matrix')
        d = int(round(np.sqrt(matrix.shape[0])))
        if d * d != matrix.shape[0]:
            raise ValidationError(f"{matrix.shape[0]} is not a square dimension")
        return cls(d, d, matrix)

    @property
    def is_square(self) -> bool:
        return self.dim_in == self.dim_out

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)

    def __matmul__(self, other: 'SuperOperator') -> 'SuperOperator':
        return compose(self, other)

    def __add__(self, other: 'SuperOperator') -> 'SuperOperator':
        _check_same_dims(self, other)
        return SuperOperator(self.dim_in, self.dim_out, self.matrix + other.matrix)

    def __sub__(self, other: 'SuperOperator') -> 'SuperOperator':
        _check_same_dims(self, other)
        return SuperOperator(self.dim_in, self.dim_out, self.matrix - other.matrix)

    def __mul__(self, scalar) -> 'SuperOperator':
        return SuperOperator(self.dim_in, self.dim_out, scalar * self.matrix)

    __rmul__ = __mul__

    def distance(self, other: 'SuperOperator') -> float:
        """Largest entrywise deviation between the two matrices."""
        _check_same_dims(self, other)
        return float(np.max(np.abs(self.matrix - other.matrix)))


def _check_same_dims(a: SuperOperator, b: SuperOperator) -> None:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ValidationError(
            f"superoperator dimensions differ: {(a.dim_in, a.dim_out)} vs {(b.dim_in, b.dim_out)}")


def identity(d: int) -> SuperOperator:
    return SuperOperator(d, d, np.eye(d * d, dtype=complex))


def zero(dim_in: int, dim_out: typing.Optional[int] = None) -> SuperOperator:
    dim_out = dim_in if dim_out is None else dim_out
    return SuperOperator(dim_in, dim_out, np.zeros((dim_out ** 2, dim_in ** 2), dtype=complex))


def transposition(d: int) -> SuperOperator:
    """X -> X^T in the standard basis."""
    return SuperOperator(d, d, _commutation(d))


def from_function(func: typing.Callable[[np.ndarray], np.ndarray], dim_in: int) -> SuperOperator:
    """Tabulate a linear Python callable on the matrix units."""
    columns = []
    dim_out = None
    for col in range(dim_in):
        for row in range(dim_in):
            unit = np.zeros((dim_in, dim_in), dtype=complex)
            unit[row, col] = 1.0
            image = as_square(func(unit), 'image')
            if dim_out is None:
                dim_out = image.shape[0]
            elif image.shape[0] != dim_out:
                raise ValidationError("callable returned images of varying shape")
            columns.append(vec(image))
    return SuperOperator(dim_in, dim_out, np.stack(columns, axis=1))


def apply(phi: SuperOperator, X) -> np.ndarray:
    X = as_square(X, 'X')
    if X.shape[0] != phi.dim_in:
        raise ValidationError(f"input is {X.shape[0]}x{X.shape[0]}, map expects dimension {phi.dim_in}")
    return unvec(phi.matrix @ vec(X), phi.dim_out)


def compose(phi: SuperOperator, psi: SuperOperator) -> SuperOperator:
    """phi o psi."""
    if psi.dim_out != phi.dim_in:
        raise ValidationError(f"cannot compose: {psi.dim_out} != {phi.dim_in}")
    return SuperOperator(psi.dim_in, phi.dim_out, phi.matrix @ psi.matrix)


def from_left_right(A, B) -> SuperOperator:
    """The map X -> A X B, with matrix B^T (x) A."""
    A = as_operator(A, 'A')
    B = as_operator(B, 'B')
    if A.shape[1] != B.shape[0] or A.shape[0] != B.shape[1]:
        raise ValidationError(f"A{A.shape} (.) B{B.shape} does not map square matrices to square matrices")
    return SuperOperator(A.shape[1], A.shape[0], np.kron(B.T, A))


def dual(phi: SuperOperator) -> SuperOperator:
    """
    The dual map with respect to the trace pairing, tr(phi(A) B) = tr(A phi*(B)).

    For Hermiticity-preserving maps this is the Hilbert-Schmidt adjoint, i.e.
    the conjugate transpose of the matrix.
    """
    matrix = _commutation(phi.dim_in) @ phi.matrix.T @ _commutation(phi.dim_out)
    return SuperOperator(phi.dim_out, phi.dim_in, matrix)


def _as_tensor(phi: SuperOperator) -> np.ndarray:
    # t[a, b, c, d] is the coefficient of X[c, d] in phi(X)[a, b]
    do, di = phi.dim_out, phi.dim_in
    return phi.matrix.reshape(do, do, di, di).transpose(1, 0, 3, 2)


def _from_tensor(t: np.ndarray) -> SuperOperator:
    do, di = t.shape[0], t.shape[2]
    return SuperOperator(di, do, t.transpose(1, 0, 3, 2).reshape(do * do, di * di))


def tensor_lift(phi: SuperOperator, n: int) -> SuperOperator:
    """id_n (x) phi acting blockwise on n x n block matrices."""
    if n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if n == 1:
        return phi
    t = _as_tensor(phi)
    eye = np.eye(n)
    lifted = np.einsum('jJ,kK,abcd->jakbJcKd', eye, eye, t)
    do, di = phi.dim_out, phi.dim_in
    return _from_tensor(lifted.reshape(n * do, n * do, n * di, n * di))


def sandwich(phi: SuperOperator, B) -> SuperOperator:
    """phi(B* (.) B)."""
    B = as_square(B, 'B')
    if B.shape[0] != phi.dim_in:
        raise ValidationError(f"B is {B.shape[0]}x{B.shape[0]}, map expects dimension {phi.dim_in}")
    return SuperOperator(phi.dim_in, phi.dim_out, phi.matrix @ np.kron(B.T, B.conj().T))


def superop_trace(phi: SuperOperator) -> complex:
    if not phi.is_square:
        raise ValidationError("trace needs a map from an operator space into itself")
    return complex(np.trace(phi.matrix))


def superop_norm(phi: SuperOperator, p: float) -> float:
    """Schatten-p norm of phi regarded as an operator on the Hilbert-Schmidt space."""
    return schatten.schatten_norm(phi.matrix, p)


def is_hermiticity_preserving(phi: SuperOperator, tol: float = 1e-10) -> bool:
    """Check phi(X*) = phi(X)* on the matrix units."""
    t = _as_tensor(phi)
    # phi(E_cd)* = phi(E_dc) <=> conj(t[b, a, c, d]) = t[a, b, d, c]
    mirrored = t.transpose(1, 0, 3, 2).conj()
    return bool(np.max(np.abs(t - mirrored), initial=0.0) <= tol)
