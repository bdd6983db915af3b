"""Born probabilities, projective collapse and order-mixed joint distributions.

Outcomes are labelled by their sign, ``+1`` or ``-1``. Arrays indexed by
outcome use index 0 for ``+1`` and index 1 for ``-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DimensionError,
    InternalConsistencyError,
    NumericalError,
    ProjectorError,
    ZeroProbabilityCollapse,
)
from .observables import DichotomicObservable

NORM_TOL = 1e-10
PROJECTOR_TOL = 1e-10
COLLAPSE_FLOOR = 1e-14
CLAMP_TOL = 1e-12
ROUTE_TOL = 1e-12

SIGNS = (1, -1)
Side = Literal["Alice", "Bob"]


def sign_index(sign: int) -> int:
    if sign == 1:
        return 0
    if sign == -1:
        return 1
    raise ValueError(f"outcome sign must be +1 or -1, got {sign!r}")


def sign_label(sign: int) -> str:
    return "+" if sign == 1 else "-"


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit vector in C^dim."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if amp.ndim != 1 or amp.size == 0:
            raise DimensionError(f"state must be a non-empty vector, got shape {amp.shape}")
        if not np.all(np.isfinite(amp)):
            raise NumericalError("state contains NaN or Inf amplitudes")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: ||psi|| = {norm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def normalized(cls, vector) -> "QuantumState":
        v = np.asarray(vector, dtype=np.complex128)
        n = np.linalg.norm(v)
        if n == 0 or not np.isfinite(n):
            raise NumericalError("cannot normalize a zero or non-finite vector")
        return cls(v / n)

    def expectation(self, op: np.ndarray) -> complex:
        op = np.asarray(op)
        if op.shape != (self.dim, self.dim):
            raise DimensionError(f"operator shape {op.shape} does not act on a {self.dim}-dim state")
        psi = self.amplitudes
        return complex(np.vdot(psi, op @ psi))


def basis_state(dim: int, index: int = 0) -> QuantumState:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return QuantumState(v)


def singlet_state() -> QuantumState:
    """``(|+-> - |-+>)/sqrt(2)`` with ``|+>`` the first basis vector of C^2."""
    s = 1.0 / np.sqrt(2.0)
    return QuantumState(np.array([0.0, s, -s, 0.0], dtype=np.complex128))


def _check_dim(psi: QuantumState, *ops) -> None:
    for op in ops:
        d = op.dim if isinstance(op, DichotomicObservable) else np.asarray(op).shape[0]
        if d != psi.dim:
            raise DimensionError(f"dimension mismatch: state has dim {psi.dim}, operator has dim {d}")


def _check_projector(p: np.ndarray) -> None:
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DimensionError(f"projector must be square, got shape {p.shape}")
    if np.linalg.norm(p - p.conj().T) > PROJECTOR_TOL or np.linalg.norm(p @ p - p) > PROJECTOR_TOL:
        raise ProjectorError("matrix is not an orthogonal projector (P^2 = P = P^dagger fails)")


def _clamp(value: float) -> float:
    if value < -CLAMP_TOL or value > 1.0 + CLAMP_TOL:
        raise NumericalError(f"probability {value!r} outside [0, 1]; upstream projector is broken")
    return min(max(value, 0.0), 1.0)


def born_probability(psi: QuantumState, p: np.ndarray) -> float:
    """``<psi|P|psi>`` for an orthogonal projector ``P``."""
    _check_dim(psi, p)
    _check_projector(p)
    return _clamp(float(np.vdot(psi.amplitudes, np.asarray(p) @ psi.amplitudes).real))


def collapse(psi: QuantumState, p: np.ndarray) -> QuantumState:
    """Projection-postulate update ``P psi / <psi|P|psi>^(1/2)``."""
    prob = born_probability(psi, p)
    if prob < COLLAPSE_FLOOR:
        raise ZeroProbabilityCollapse(f"outcome has probability {prob:.3e}; cannot collapse onto it")
    v = np.asarray(p) @ psi.amplitudes
    return QuantumState(v / np.linalg.norm(v))


def _sequential(psi: np.ndarray, p_first: np.ndarray, p_second: np.ndarray) -> float:
    # <psi|P1 P2 P1|psi> = ||P2 P1 psi||^2, non-negative by construction
    v = p_second @ (p_first @ psi)
    return float(np.vdot(v, v).real)


def sequential_probability(
    psi: QuantumState,
    first: DichotomicObservable,
    i: int,
    second: DichotomicObservable,
    j: int,
) -> float:
    """Probability of ``first -> i`` followed immediately by ``second -> j``."""
    _check_dim(psi, first, second)
    return _clamp(_sequential(psi.amplitudes, first.projector(i), second.projector(j)))


def conditional_probability(
    psi: QuantumState,
    first: DichotomicObservable,
    i: int,
    second: DichotomicObservable,
    j: int,
) -> float | None:
    """P(second = j | first = i), or ``None`` when outcome ``i`` is impossible."""
    p_i = born_probability(psi, first.projector(i))
    if p_i <= COLLAPSE_FLOOR:
        return None
    return born_probability(collapse(psi, first.projector(i)), second.projector(j))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint outcome probabilities; ``probs[sign_index(i), sign_index(j)]``."""

    probs: np.ndarray
    labels: tuple[str, str] = ("A", "B")

    def prob(self, i: int, j: int) -> float:
        return float(self.probs[sign_index(i), sign_index(j)])

    def correlation(self) -> float:
        """Sum of ``i * j * P(i, j)``."""
        p = self.probs
        return float((p[0, 0] + p[1, 1]) - (p[0, 1] + p[1, 0]))

    def as_dict(self) -> dict[str, float]:
        return {f"{sign_label(i)}{sign_label(j)}": self.prob(i, j) for i in SIGNS for j in SIGNS}


def mixed_joint_distribution(psi: QuantumState, a: DichotomicObservable, b: DichotomicObservable) -> JointDistribution:
    """Uniform average of the two measurement orders A->B and B->A."""
    _check_dim(psi, a, b)
    v = psi.amplitudes
    probs = np.empty((2, 2))
    for i in SIGNS:
        pa = a.projector(i)
        for j in SIGNS:
            pb = b.projector(j)
            probs[sign_index(i), sign_index(j)] = 0.5 * (_sequential(v, pa, pb) + _sequential(v, pb, pa))
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NumericalError(f"joint distribution sums to {total!r}")
    return JointDistribution(probs, (a.name or "A", b.name or "B"))


@dataclass(frozen=True)
class MarginalDeviation:
    """Change in a fixed observable's marginal when the other side switches context."""

    side: str
    fixed: str
    outcome: int
    contexts: tuple[str, str]
    value: float

    def as_dict(self) -> dict:
        return {
            "side": self.side,
            "fixed": self.fixed,
            "outcome": sign_label(self.outcome),
            "contexts": list(self.contexts),
            "value": self.value,
        }


@dataclass(frozen=True)
class MarginalDeviationReport:
    entries: tuple[MarginalDeviation, ...] = field(default_factory=tuple)

    @property
    def max_abs_deviation(self) -> float:
        return max((abs(e.value) for e in self.entries), default=0.0)

    def as_dict(self) -> dict:
        return {
            "entries": [e.as_dict() for e in self.entries],
            "max_abs_deviation": self.max_abs_deviation,
        }


def marginal_deviation(
    psi: QuantumState,
    fixed: DichotomicObservable,
    ctx1: DichotomicObservable,
    ctx2: DichotomicObservable,
    side: Side = "Alice",
) -> list[MarginalDeviation]:
    """Marginal of ``fixed`` in context ``ctx1`` minus that in ``ctx2``.

    Computed twice: by summing the mixed joint distributions, and from the
    closed form that only keeps the reversed-order terms,
    ``1/2 sum_j <psi|Q1_j P_i Q1_j|psi> - 1/2 sum_j <psi|Q2_j P_i Q2_j|psi>``.
    The routes must agree to ``ROUTE_TOL``.
    """
    _check_dim(psi, fixed, ctx1, ctx2)
    if side not in ("Alice", "Bob"):
        raise ValueError(f"side must be 'Alice' or 'Bob', got {side!r}")
    # The order-mixed joint law is symmetric in its arguments, so the fixed
    # observable can always be placed first.
    d1 = mixed_joint_distribution(psi, fixed, ctx1).probs
    d2 = mixed_joint_distribution(psi, fixed, ctx2).probs
    v = psi.amplitudes
    out = []
    for i in SIGNS:
        k = sign_index(i)
        via_joint = float(d1[k].sum() - d2[k].sum())
        p = fixed.projector(i)
        closed = 0.5 * sum(_sequential(v, ctx1.projector(j), p) for j in SIGNS) - 0.5 * sum(
            _sequential(v, ctx2.projector(j), p) for j in SIGNS
        )
        if abs(via_joint - closed) > ROUTE_TOL:
            raise InternalConsistencyError(
                f"marginal deviation routes disagree: {via_joint!r} vs {closed!r}"
            )
        out.append(
            MarginalDeviation(
                side=side,
                fixed=fixed.name,
                outcome=i,
                contexts=(ctx1.name, ctx2.name),
                value=via_joint,
            )
        )
    return out


def marginal_laws_report(
    psi: QuantumState,
    a: DichotomicObservable,
    a_prime: DichotomicObservable,
    b: DichotomicObservable,
    b_prime: DichotomicObservable,
) -> MarginalDeviationReport:
    """All eight no-signalling differences of a CHSH scenario."""
    entries: list[MarginalDeviation] = []
    for fixed in (a, a_prime):
        entries.extend(marginal_deviation(psi, fixed, b, b_prime, "Alice"))
    for fixed in (b, b_prime):
        entries.extend(marginal_deviation(psi, fixed, a, a_prime, "Bob"))
    return MarginalDeviationReport(tuple(entries))
