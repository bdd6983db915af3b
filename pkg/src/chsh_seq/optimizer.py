"""Derivative-free search for the largest CHSH value over observable quadruples.

Each observable is ``U diag(signature) U^dagger`` with ``U = exp(iH)`` and
``H`` a Hermitian matrix packed into ``d**2`` real parameters. The state is
never searched: for fixed observables the best state is the top eigenvector
of the (self-adjoint) CHSH operator, so the objective is its top eigenvalue.

Local refinement is a Hooke-Jeeves pattern search (coordinate exploration
plus an accelerating pattern move; initial step 0.5, halved on failure,
stop below ``STEP_TOL``), run from seeded random starts.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, linalg
from .chsh import BellScenario, max_chsh_over_states
from .errors import ParameterError
from .montecarlo import worker_count
from .observables import DichotomicObservable, Signature, from_unitary, identity_observable, lift

MAX_DIM = 8
INITIAL_STEP = 0.5
SHRINK = 0.5
STEP_TOL = 1e-6
DEFAULT_BUDGET = 20_000
DEFAULT_RESTARTS = 16
START_SCALE = 1.0


class Constraint(str, enum.Enum):
    FREE = "free"
    PRODUCT_FORM = "product_form"
    A_EQUALS_A_PRIME = "a_equals_a_prime"
    PRIMES_IDENTITY = "primes_identity"


def site_dims(dim: int) -> tuple[int, int]:
    """Left/right factor dimensions used by the product-form constraint."""
    r = math.isqrt(dim)
    if r * r == dim and r >= 2:
        return r, r
    if dim % 2 == 0 and dim >= 4:
        return 2, dim // 2
    raise ParameterError(f"product_form needs a composite dim with both factors >= 2, got {dim}")


# kind codes shared with _kernels
_GENERATED, _IDENTITY, _COPY = 0, 1, 2
_NO_LIFT, _LEFT, _RIGHT = 0, 1, 2


@dataclass(frozen=True)
class SearchSpace:
    dim: int
    constraint: Constraint = Constraint.FREE
    signatures: tuple[Signature, Signature, Signature, Signature] | None = None
    max_dim: int = MAX_DIM

    def __post_init__(self):
        object.__setattr__(self, "constraint", Constraint(self.constraint))
        if not 2 <= self.dim <= self.max_dim:
            raise ParameterError(f"dim must be in [2, {self.max_dim}], got {self.dim}")
        if self.signatures is None:
            object.__setattr__(self, "signatures", tuple(Signature.balanced(d) for d in self.observable_dims))
        elif len(self.signatures) != 4:
            raise ParameterError("exactly four signatures are required")
        for sig, d in zip(self.signatures, self.observable_dims):
            if sig.dim != d:
                raise ParameterError(f"signature {sig} does not fit an observable of dim {d}")

    @property
    def observable_dims(self) -> tuple[int, int, int, int]:
        """Dimension each observable's generator acts on (A, A', B, B')."""
        if self.constraint is Constraint.PRODUCT_FORM:
            left, right = site_dims(self.dim)
            return (left, left, right, right)
        return (self.dim,) * 4

    @property
    def layout(self) -> np.ndarray:
        rows = []
        offset = 0
        left, right = site_dims(self.dim) if self.constraint is Constraint.PRODUCT_FORM else (0, 0)
        for s, (d, sig) in enumerate(zip(self.observable_dims, self.signatures)):
            if self.constraint is Constraint.PRIMES_IDENTITY and s in (1, 3):
                rows.append([_IDENTITY, 0, 0, d, 0, _NO_LIFT, 0])
                continue
            if self.constraint is Constraint.A_EQUALS_A_PRIME and s == 1:
                rows.append([_COPY, 0, 0, d, 0, _NO_LIFT, 0])
                continue
            if self.constraint is Constraint.PRODUCT_FORM:
                mode, other = (_LEFT, right) if s < 2 else (_RIGHT, left)
            else:
                mode, other = _NO_LIFT, 0
            rows.append([_GENERATED, 0, offset, d, sig.plus, mode, other])
            offset += d * d
        return np.array(rows, dtype=np.int64)

    @property
    def parameter_count(self) -> int:
        lay = self.layout
        gen = lay[:, 0] == _GENERATED
        return int(np.sum(lay[gen, 3] ** 2))


def _check_params(params, space: SearchSpace) -> np.ndarray:
    params = np.ascontiguousarray(params, dtype=np.float64)
    if params.shape != (space.parameter_count,):
        raise ParameterError(f"expected {space.parameter_count} parameters, got shape {params.shape}")
    return params


def build_observables(params, space: SearchSpace) -> tuple[DichotomicObservable, ...]:
    """Observables A, A', B, B' for a parameter vector (pure-numpy reference path)."""
    params = _check_params(params, space)
    names = ("A", "A'", "B", "B'")
    out: list[DichotomicObservable] = []
    for s, row in enumerate(space.layout):
        kind, ref, offset, d, _, mode, other = (int(x) for x in row)
        if kind == _IDENTITY:
            out.append(identity_observable(space.dim, names[s]))
            continue
        if kind == _COPY:
            out.append(out[ref].renamed(names[s]))
            continue
        h = linalg.hermitian_from_params(params[offset:offset + d * d], d)
        obs = from_unitary(linalg.unitary_from_generator(h), space.signatures[s], names[s])
        if mode == _LEFT:
            obs = lift(obs, "left", other)
        elif mode == _RIGHT:
            obs = lift(obs, "right", other)
        out.append(obs)
    return tuple(out)


def objective(params, space: SearchSpace) -> float:
    """Largest eigenvalue of the symmetrized CHSH operator."""
    params = _check_params(params, space)
    return _kernels.objective_value(params, space.layout, space.dim)


@dataclass
class _Counter:
    budget: int
    evaluations: int = 0
    trace: list = field(default_factory=list)
    best: float = -math.inf

    @property
    def exhausted(self) -> bool:
        return self.evaluations >= self.budget


def pattern_search(f, x0: np.ndarray, budget: int, step: float = INITIAL_STEP, step_tol: float = STEP_TOL):
    """Maximize ``f`` by Hooke-Jeeves pattern search.

    Returns ``(x, fx, evaluations, converged, trace)`` where ``trace`` lists
    ``(evaluation_index, best_so_far)`` at every improvement.
    """
    ctr = _Counter(budget)

    def evaluate(x):
        ctr.evaluations += 1
        v = f(x)
        if v > ctr.best:
            ctr.best = v
            ctr.trace.append((ctr.evaluations, v))
        return v

    def explore(base, f_base, h):
        x = base.copy()
        fx = f_base
        for i in range(x.size):
            for delta in (h, -h):
                if ctr.exhausted:
                    return x, fx
                old = x[i]
                x[i] = old + delta
                ft = evaluate(x)
                if ft > fx:
                    fx = ft
                    break
                x[i] = old
        return x, fx

    x = np.array(x0, dtype=np.float64)
    fx = evaluate(x)
    h = step
    while h >= step_tol and not ctr.exhausted:
        x_new, f_new = explore(x, fx, h)
        if f_new <= fx:
            h *= SHRINK
            continue
        # accelerate along the successful direction while it keeps paying off
        while not ctr.exhausted:
            x_pattern = x_new + (x_new - x)
            x, fx = x_new, f_new
            f_pattern = evaluate(x_pattern)
            x_try, f_try = explore(x_pattern, f_pattern, h)
            if f_try > fx:
                x_new, f_new = x_try, f_try
            else:
                break
    return x, fx, ctr.evaluations, h < step_tol, ctr.trace


@dataclass(frozen=True, eq=False)
class RestartResult:
    index: int
    value: float
    parameters: np.ndarray
    evaluations: int
    converged: bool
    trace: list


@dataclass(frozen=True, eq=False)
class SearchResult:
    space: SearchSpace
    best_value: float
    best_parameters: np.ndarray
    best_scenario: BellScenario
    restarts: int
    evaluations: int
    converged: bool
    seed: int
    restart_results: tuple[RestartResult, ...]

    @property
    def best_restart(self) -> RestartResult:
        return max(self.restart_results, key=lambda r: (r.value, -r.index))

    def as_dict(self) -> dict:
        return {
            "dim": self.space.dim,
            "constraint": self.space.constraint.value,
            "signatures": [[s.plus, s.minus] for s in self.space.signatures],
            "parameter_count": self.space.parameter_count,
            "best_value": self.best_value,
            "best_parameters": self.best_parameters.tolist(),
            "restarts": self.restarts,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "seed": self.seed,
            "restart_values": [r.value for r in self.restart_results],
        }


def restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _one_restart(space: SearchSpace, budget: int, seed: int, index: int) -> RestartResult:
    layout = space.layout
    x0 = START_SCALE * restart_rng(seed, index).standard_normal(space.parameter_count)

    def f(x):
        return _kernels.objective_value(x, layout, space.dim)

    x, fx, evals, converged, trace = pattern_search(f, x0, budget)
    return RestartResult(index, fx, x, evals, converged, trace)


def search(
    space: SearchSpace,
    budget: int = DEFAULT_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    *,
    workers: int | None = None,
) -> SearchResult:
    """Best CHSH value over ``restarts`` pattern searches of ``budget`` evaluations each."""
    if budget < 1:
        raise ParameterError(f"budget must be >= 1, got {budget}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    n_workers = min(worker_count(workers), restarts)
    if n_workers == 1:
        results = [_one_restart(space, budget, seed, r) for r in range(restarts)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda r: _one_restart(space, budget, seed, r), range(restarts)))
    best = max(results, key=lambda r: (r.value, -r.index))

    obs = build_observables(best.parameters, space)
    _, psi = max_chsh_over_states(*obs)
    scenario = BellScenario(psi, *obs)
    return SearchResult(
        space=space,
        best_value=best.value,
        best_parameters=best.parameters,
        best_scenario=scenario,
        restarts=restarts,
        evaluations=sum(r.evaluations for r in results),
        converged=best.converged,
        seed=seed,
        restart_results=tuple(results),
    )
