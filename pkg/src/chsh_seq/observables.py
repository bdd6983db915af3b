"""Dichotomic (+1/-1 valued) observables and their spectral projectors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import linalg
from .errors import DimensionError, SignatureError, SpectrumError

SPECTRUM_TOL = 1e-8

Site = Literal["left", "right"]


@dataclass(frozen=True)
class Signature:
    """Multiplicities of the +1 and -1 eigenvalues."""

    plus: int
    minus: int

    def __post_init__(self):
        if self.plus < 1 or self.minus < 1:
            raise SignatureError(f"both multiplicities must be >= 1, got ({self.plus}, {self.minus})")

    @property
    def dim(self) -> int:
        return self.plus + self.minus

    @classmethod
    def balanced(cls, dim: int) -> "Signature":
        if dim < 2:
            raise SignatureError(f"a dichotomic observable needs dim >= 2, got {dim}")
        return cls(plus=dim - dim // 2, minus=dim // 2)

    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.ones(self.plus), -np.ones(self.minus)])


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """An observable ``A = P+ - P-`` with complementary orthogonal projectors.

    The operator is always rebuilt from the projectors, so serializing the
    two projectors reproduces the observable bit for bit.
    """

    proj_plus: np.ndarray
    proj_minus: np.ndarray
    name: str = ""

    def __post_init__(self):
        pp = linalg.as_matrix(self.proj_plus, square=True)
        pm = linalg.as_matrix(self.proj_minus, square=True)
        if pp.shape != pm.shape:
            raise DimensionError(f"projector shapes differ: {pp.shape} vs {pm.shape}")
        for attr, p in (("proj_plus", pp), ("proj_minus", pm)):
            p.setflags(write=False)
            object.__setattr__(self, attr, p)
        op = pp - pm
        op.setflags(write=False)
        object.__setattr__(self, "_operator", op)

    @property
    def operator(self) -> np.ndarray:
        return self._operator

    @property
    def dim(self) -> int:
        return self.proj_plus.shape[0]

    def projector(self, sign: int) -> np.ndarray:
        if sign == 1:
            return self.proj_plus
        if sign == -1:
            return self.proj_minus
        raise ValueError(f"outcome sign must be +1 or -1, got {sign!r}")

    def renamed(self, name: str) -> "DichotomicObservable":
        return DichotomicObservable(self.proj_plus.copy(), self.proj_minus.copy(), name)

    def invariant_defects(self) -> dict[str, float]:
        """Frobenius-norm defects of the defining identities."""
        eye = np.eye(self.dim)
        pp, pm, op = self.proj_plus, self.proj_minus, self.operator
        return {
            "square": float(np.linalg.norm(op @ op - eye)),
            "completeness": float(np.linalg.norm(pp + pm - eye)),
            "orthogonality": float(np.linalg.norm(pp @ pm)),
            "idempotent_plus": float(np.linalg.norm(pp @ pp - pp)),
            "idempotent_minus": float(np.linalg.norm(pm @ pm - pm)),
            "hermitian_plus": linalg.hermiticity_defect(pp),
            "hermitian_minus": linalg.hermiticity_defect(pm),
        }


def _from_columns(v: np.ndarray, plus_mask: np.ndarray, name: str) -> DichotomicObservable:
    vp = v[:, plus_mask]
    vm = v[:, ~plus_mask]
    return DichotomicObservable(vp @ vp.conj().T, vm @ vm.conj().T, name)


def from_matrix(m, *, allow_trivial: bool = False, name: str = "") -> DichotomicObservable:
    """Validate a Hermitian matrix with spectrum in {+1, -1} and split it."""
    m = linalg.as_matrix(m, square=True)
    es = linalg.hermitian_eig(m)
    w = es.eigenvalues
    plus = np.abs(w - 1.0) <= SPECTRUM_TOL
    minus = np.abs(w + 1.0) <= SPECTRUM_TOL
    bad = ~(plus | minus)
    if np.any(bad):
        raise SpectrumError(f"eigenvalues {w[bad].tolist()} are not within {SPECTRUM_TOL:g} of +1 or -1")
    if not allow_trivial and (not plus.any() or not minus.any()):
        raise SpectrumError("observable has a single eigenvalue; pass allow_trivial=True to accept it")
    return _from_columns(es.eigenvectors, plus, name)


def identity_observable(dim: int, name: str = "I") -> DichotomicObservable:
    """The trivial measurement that always yields +1."""
    return DichotomicObservable(np.eye(dim, dtype=np.complex128), np.zeros((dim, dim), dtype=np.complex128), name)


def spin_operator(theta: float, phi: float) -> np.ndarray:
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return n[0] * linalg.PAULI_X + n[1] * linalg.PAULI_Y + n[2] * linalg.PAULI_Z


def from_spin_direction(theta: float, phi: float = 0.0, name: str = "") -> DichotomicObservable:
    """Spin observable along ``(sin t cos p, sin t sin p, cos t)``.

    ``theta`` is the polar angle from +z and ``phi`` the azimuth, so
    ``(0, 0)`` is sigma_z and ``(pi/2, 0)`` is sigma_x.
    """
    s = spin_operator(theta, phi)
    return DichotomicObservable(0.5 * (linalg.PAULI_I + s), 0.5 * (linalg.PAULI_I - s), name)


def pauli(label: str, name: str = "") -> DichotomicObservable:
    """Exact Pauli observable for ``"x"``, ``"y"``, ``"z"`` (``"i"`` is the trivial one)."""
    label = label.lower()
    mats = {"x": linalg.PAULI_X, "y": linalg.PAULI_Y, "z": linalg.PAULI_Z}
    if label == "i":
        return identity_observable(2, name or "I")
    if label not in mats:
        raise ValueError(f"unknown Pauli label {label!r}")
    s = mats[label]
    return DichotomicObservable(0.5 * (linalg.PAULI_I + s), 0.5 * (linalg.PAULI_I - s), name or label.upper())


def lift(obs: DichotomicObservable, site: Site, other_dim: int) -> DichotomicObservable:
    """Embed ``obs`` in a bipartite space: ``obs (x) I`` or ``I (x) obs``."""
    if other_dim < 1:
        raise DimensionError(f"other_dim must be positive, got {other_dim}")
    eye = np.eye(other_dim, dtype=np.complex128)
    if site == "left":
        pp, pm = np.kron(obs.proj_plus, eye), np.kron(obs.proj_minus, eye)
    elif site == "right":
        pp, pm = np.kron(eye, obs.proj_plus), np.kron(eye, obs.proj_minus)
    else:
        raise ValueError(f"site must be 'left' or 'right', got {site!r}")
    return DichotomicObservable(pp, pm, obs.name)


def from_unitary(u: np.ndarray, sig: Signature, name: str = "") -> DichotomicObservable:
    """``U diag(+1 x plus, -1 x minus) U^dagger``."""
    if u.shape != (sig.dim, sig.dim):
        raise SignatureError(f"signature {sig} does not fit a {u.shape[0]}-dim unitary")
    mask = np.zeros(sig.dim, dtype=bool)
    mask[: sig.plus] = True
    return _from_columns(u, mask, name)


def random_dichotomic(seed, dim: int, sig: Signature | None = None, name: str = "") -> DichotomicObservable:
    """Seeded random observable ``U D U^dagger`` with ``U = exp(iH)``."""
    sig = Signature.balanced(dim) if sig is None else sig
    if sig.dim != dim:
        raise SignatureError(f"signature {sig} inconsistent with dim {dim}")
    rng = np.random.default_rng(seed)
    u = linalg.unitary_from_generator(linalg.random_hermitian(rng, dim))
    return from_unitary(u, sig, name)
