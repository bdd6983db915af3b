"""CHSH correlations for order-mixed sequential measurements.

The correlation of a uniformly mixed pair of sequential measurements equals
the expectation of the symmetrized product ``(AB + BA)/2``. This module
computes it both ways and cross-checks them, builds the CHSH operator, and
exposes the term-by-term decomposition of its square used to bound it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, InternalConsistencyError
from .observables import DichotomicObservable
from .sequential import (
    MarginalDeviationReport,
    QuantumState,
    marginal_laws_report,
    mixed_joint_distribution,
)

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
MIXED_SEQUENTIAL_BOUND = 2.0 * math.sqrt(3.0)

CLASSIFICATION_TOL = 1e-9
ROUTE_AGREEMENT_TOL = 1e-8
DECOMPOSITION_TOL = 1e-8


class BoundClass(str, enum.Enum):
    WITHIN_CLASSICAL = "within_classical"
    WITHIN_TSIRELSON = "within_tsirelson"
    WITHIN_SQRT3 = "within_sqrt3"
    BEYOND_SQRT3 = "beyond_sqrt3"


def classify_bound(value: float, tol: float = CLASSIFICATION_TOL) -> BoundClass:
    v = abs(value)
    if v <= CLASSICAL_BOUND + tol:
        return BoundClass.WITHIN_CLASSICAL
    if v <= TSIRELSON_BOUND + tol:
        return BoundClass.WITHIN_TSIRELSON
    if v <= MIXED_SEQUENTIAL_BOUND + tol:
        return BoundClass.WITHIN_SQRT3
    return BoundClass.BEYOND_SQRT3


def _op(x) -> np.ndarray:
    return x.operator if isinstance(x, DichotomicObservable) else np.asarray(x, dtype=np.complex128)


def _shared_dim(*ops: np.ndarray) -> int:
    shapes = {o.shape for o in ops}
    if len(shapes) != 1:
        raise DimensionError(f"observables do not share a dimension: {sorted(shapes)}")
    return ops[0].shape[0]


@dataclass(frozen=True, eq=False)
class BellScenario:
    psi: QuantumState
    a: DichotomicObservable
    a_prime: DichotomicObservable
    b: DichotomicObservable
    b_prime: DichotomicObservable

    def __post_init__(self):
        dims = {self.psi.dim, self.a.dim, self.a_prime.dim, self.b.dim, self.b_prime.dim}
        if len(dims) != 1:
            raise DimensionError(f"scenario objects do not share one dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.psi.dim

    @property
    def observables(self) -> tuple[DichotomicObservable, ...]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    def pairs(self) -> tuple[tuple[DichotomicObservable, DichotomicObservable], ...]:
        """The four measured pairs, in CHSH order (A,B), (A,B'), (A',B'), (A',B)."""
        return ((self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b_prime), (self.a_prime, self.b))


CHSH_SIGNS = (1.0, -1.0, 1.0, 1.0)
PAIR_NAMES = ("AB", "AB'", "A'B'", "A'B")


def correlation(psi: QuantumState, a: DichotomicObservable, b: DichotomicObservable) -> float:
    """Sum of ``i * j * P(i, j)`` over the order-mixed joint distribution."""
    return mixed_joint_distribution(psi, a, b).correlation()


def symmetrized_product(a, b) -> np.ndarray:
    """``(AB + BA) / 2``."""
    x, y = _op(a), _op(b)
    _shared_dim(x, y)
    return 0.5 * (x @ y + y @ x)


def chsh_operator(a, a_prime, b, b_prime) -> np.ndarray:
    """Hermitian part of ``AB - AB' + A'B' + A'B``."""
    x, xp, y, yp = _op(a), _op(a_prime), _op(b), _op(b_prime)
    _shared_dim(x, xp, y, yp)
    return (
        symmetrized_product(x, y)
        - symmetrized_product(x, yp)
        + symmetrized_product(xp, yp)
        + symmetrized_product(xp, y)
    )


def unsymmetrized_chsh_operator(a, a_prime, b, b_prime) -> np.ndarray:
    x, xp, y, yp = _op(a), _op(a_prime), _op(b), _op(b_prime)
    _shared_dim(x, xp, y, yp)
    return x @ y - x @ yp + xp @ yp + xp @ y


@dataclass(frozen=True, eq=False)
class CHSHReport:
    correlations: tuple[float, float, float, float]
    chsh_value: float
    chsh_via_operator: float
    marginal_report: MarginalDeviationReport
    classification: BoundClass

    @property
    def route_gap(self) -> float:
        return abs(self.chsh_value - self.chsh_via_operator)

    def as_dict(self) -> dict:
        return {
            "correlations": dict(zip(PAIR_NAMES, self.correlations)),
            "chsh_value": self.chsh_value,
            "chsh_via_operator": self.chsh_via_operator,
            "route_gap": self.route_gap,
            "classification": self.classification.value,
            "marginal_deviations": self.marginal_report.as_dict(),
        }


def chsh_value(scenario: BellScenario, tol: float = CLASSIFICATION_TOL) -> CHSHReport:
    """CHSH quantity from outcome probabilities, cross-checked against the operator route."""
    psi = scenario.psi
    corr = tuple(correlation(psi, x, y) for x, y in scenario.pairs())
    value = float(sum(s * e for s, e in zip(CHSH_SIGNS, corr)))
    c_hat = chsh_operator(*scenario.observables)
    via_op = psi.expectation(c_hat)
    if abs(via_op.imag) > ROUTE_AGREEMENT_TOL:
        raise InternalConsistencyError(f"CHSH operator expectation has imaginary part {via_op.imag!r}")
    via_op = via_op.real
    if abs(value - via_op) > ROUTE_AGREEMENT_TOL:
        raise InternalConsistencyError(
            f"probability route gives {value!r} but operator route gives {via_op!r}"
        )
    return CHSHReport(
        correlations=corr,
        chsh_value=value,
        chsh_via_operator=via_op,
        marginal_report=marginal_laws_report(psi, *scenario.observables),
        classification=classify_bound(value, tol),
    )


def max_chsh_over_states(a, a_prime, b, b_prime) -> tuple[float, QuantumState]:
    """Top eigenvalue of the CHSH operator and a state attaining it."""
    es = linalg.hermitian_eig(chsh_operator(a, a_prime, b, b_prime))
    return es.max_eigenvalue, QuantumState.normalized(es.eigenvectors[:, -1])


TERM_NAMES = ("g1", "g2", "d1", "d2", "d3", "d4")


@dataclass(frozen=True, eq=False)
class NormDecomposition:
    """Square of the (symmetrized or plain) CHSH operator split into six terms.

    With the four pair operators ``X = AB, Y = AB', Z = A'B', W = A'B`` (or
    their symmetrized versions) and ``C = X - Y + Z + W``::

        g1 = X^2 + Y^2 + Z^2 + W^2
        g2 = XZ - YW + ZX - WY
        d1 = XW - YZ,  d2 = ZW - YX,  d3 = WX - ZY,  d4 = WZ - XY

    In the plain variant these are C1, C2 and Delta_1..Delta_4.
    """

    symmetrized: bool
    square: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray
    residual: float
    norms: dict[str, float]

    @property
    def terms(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in TERM_NAMES}

    @property
    def term_bounds(self) -> dict[str, float]:
        # plain products of unitaries: each Delta is a difference of two
        # unitaries; symmetrized: each D expands to six unitaries over four
        d_bound = 1.5 if self.symmetrized else 2.0
        return {"g1": 4.0, "g2": 4.0, "d1": d_bound, "d2": d_bound, "d3": d_bound, "d4": d_bound}

    @property
    def square_bound(self) -> float:
        return 12.0 if self.symmetrized else 16.0

    def within_bounds(self, tol: float = CLASSIFICATION_TOL) -> bool:
        ok = all(self.norms[k] <= b + tol for k, b in self.term_bounds.items())
        return ok and self.norms["square"] <= self.square_bound + tol

    def as_dict(self) -> dict:
        return {
            "symmetrized": self.symmetrized,
            "norms": dict(self.norms),
            "residual": self.residual,
            "within_bounds": self.within_bounds(),
        }


def norm_decomposition(a, a_prime, b, b_prime, symmetrized: bool = True) -> NormDecomposition:
    x0, xp, y0, yp = _op(a), _op(a_prime), _op(b), _op(b_prime)
    _shared_dim(x0, xp, y0, yp)
    if symmetrized:
        x, y, z, w = (symmetrized_product(p, q) for p, q in ((x0, y0), (x0, yp), (xp, yp), (xp, y0)))
    else:
        x, y, z, w = x0 @ y0, x0 @ yp, xp @ yp, xp @ y0
    c = x - y + z + w
    square = c @ c
    terms = {
        "g1": x @ x + y @ y + z @ z + w @ w,
        "g2": x @ z - y @ w + z @ x - w @ y,
        "d1": x @ w - y @ z,
        "d2": z @ w - y @ x,
        "d3": w @ x - z @ y,
        "d4": w @ z - x @ y,
    }
    residual = linalg.operator_norm(square - sum(terms.values()))
    if residual > DECOMPOSITION_TOL:
        raise InternalConsistencyError(f"decomposition residual {residual:.3e} exceeds {DECOMPOSITION_TOL:g}")
    norms = {k: linalg.operator_norm(v) for k, v in terms.items()}
    norms["square"] = linalg.operator_norm(square)
    norms["operator"] = linalg.operator_norm(c)
    return NormDecomposition(symmetrized=symmetrized, square=square, residual=residual, norms=norms, **terms)


def delta_commutator_forms(a, a_prime, b, b_prime) -> dict[str, np.ndarray]:
    """The plain Delta terms rewritten with commutators.

    Valid only when every observable squares to the identity; comparing
    these with the product forms is a check on that assumption.
    """
    x, xp, y, yp = _op(a), _op(a_prime), _op(b), _op(b_prime)
    cm = linalg.commutator
    return {
        "d1": x @ cm(y, xp) @ y - x @ cm(yp, xp) @ yp,
        "d2": xp @ cm(yp, xp) @ y - x @ cm(yp, x) @ y,
        "d3": xp @ cm(y, x) @ y - xp @ cm(yp, x) @ yp,
        "d4": xp @ cm(y, xp) @ yp - x @ cm(y, x) @ yp,
    }
