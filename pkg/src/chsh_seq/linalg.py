"""Dense complex linear algebra on numpy ``complex128`` arrays.

Every operator and state in the package is a plain numpy array. Functions
here never mutate their inputs and always return fresh arrays. The
Hermitian eigendecomposition is the single numerical kernel: the operator
norm and the matrix exponential are both derived from it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, HermiticityError, NumericalError

HERMITICITY_TOL = 1e-10
EIG_TOL = 1e-9

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

for _m in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
    _m.setflags(write=False)


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D ``complex128`` array (copied)."""
    arr = np.array(m, dtype=np.complex128, copy=True)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("matrix contains NaN or Inf entries")
    return arr


def _square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T.copy()


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; indices of ``a`` are the outer (slow) ones."""
    return np.kron(a, b)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return matmul(a, b) - matmul(b, a)


def hermiticity_defect(m: np.ndarray) -> float:
    """Frobenius norm of ``m - m^dagger``; bounds the operator-norm defect."""
    m = _square(m)
    return float(np.linalg.norm(m - m.conj().T))


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return hermiticity_defect(m) <= tol


@dataclass(frozen=True, eq=False)
class HermitianEigensystem:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # Make the largest-modulus entry of each column real positive so the
    # output is a pure function of the input (LAPACK phases are arbitrary).
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)


def hermitian_eig(m: np.ndarray, tol: float = HERMITICITY_TOL) -> HermitianEigensystem:
    m = _square(np.asarray(m, dtype=np.complex128))
    defect = hermiticity_defect(m)
    if defect > tol:
        raise HermiticityError(f"matrix is not Hermitian: ||M - M^dagger|| = {defect:.3e}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix contains NaN or Inf entries")
    h = 0.5 * (m + m.conj().T)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver failed: {exc}") from exc
    return HermitianEigensystem(eigenvalues=w, eigenvectors=_fix_phases(v))


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value.

    For Hermitian input this is ``max |lambda_i|``; otherwise it is the
    square root of the top eigenvalue of ``m^dagger m``.
    """
    m = _square(np.asarray(m, dtype=np.complex128))
    if is_hermitian(m):
        w = hermitian_eig(m).eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))
    gram = m.conj().T @ m
    top = hermitian_eig(gram).eigenvalues[-1]
    return float(np.sqrt(max(top, 0.0)))


def unitary_from_generator(h: np.ndarray) -> np.ndarray:
    """``exp(iH)`` for Hermitian ``H`` via its eigendecomposition."""
    es = hermitian_eig(h)
    v = es.eigenvectors
    return (v * np.exp(1j * es.eigenvalues)) @ v.conj().T


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Symmetrized matrix with independent N(0, 1) real and imaginary parts."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + z.conj().T)


def hermitian_from_params(params: np.ndarray, dim: int) -> np.ndarray:
    """Hermitian matrix from ``dim**2`` reals.

    Layout: ``dim`` diagonal entries, then the real parts of the strict
    upper triangle (row-major), then the matching imaginary parts.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (dim * dim,):
        raise DimensionError(f"expected {dim * dim} parameters, got {params.shape}")
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = params[:dim]
    iu = np.triu_indices(dim, k=1)
    k = len(iu[0])
    h[iu] = params[dim:dim + k] + 1j * params[dim + k:]
    h[iu[1], iu[0]] = np.conj(h[iu])
    return h
