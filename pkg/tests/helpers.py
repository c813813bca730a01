"""
Random instances shared by the test suite.
"""
import numpy as np

from lcanon import gksl
from lcanon.kraus import KrausSet


def random_operator(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_operator(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_isometry(rng, rows, cols):
    return random_unitary(rng, rows)[:, :cols]


def random_hermitian(rng, d):
    X = random_operator(rng, d)
    return (X + X.conj().T) / 2


def random_psd(rng, d):
    X = random_operator(rng, d)
    return X @ X.conj().T


def random_kraus(rng, d, n, d_out=None):
    d_out = d if d_out is None else d_out
    return KrausSet.from_operators([random_operator(rng, d_out, d) / np.sqrt(d * n)
                                    for _ in range(n)], shape=(d_out, d))


def random_generator(rng, d, n=None):
    """A random L = K(.) + (.)K* + phi together with its (K, kraus)."""
    n = d if n is None else n
    K = random_operator(rng, d)
    ks = random_kraus(rng, d, n)
    return gksl.build_cp_generator(K, ks), K, ks


def random_gksl(rng, d, n=None):
    n = d if n is None else n
    H = random_hermitian(rng, d)
    ks = random_kraus(rng, d, n)
    return gksl.build_gksl_generator(H, ks), H, ks


def random_reference(rng, d, min_real_trace=0.1):
    """A random B with |Re tr B| >= min_real_trace."""
    B = random_operator(rng, d) / d
    shift = min_real_trace + abs(np.trace(B).real)
    return B + (shift / d) * np.eye(d)


def ket(d, j):
    v = np.zeros(d, dtype=complex)
    v[j] = 1
    return v


def unit(d, j, k):
    """|j><k|"""
    return np.outer(ket(d, j), ket(d, k))


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def amplitude_damping(gamma=1.0):
    return KrausSet.from_operators([np.sqrt(gamma) * unit(2, 0, 1)])
