"""Trajectory-level simulation of order-mixed sequential measurements.

Each trajectory flips a fair coin for the order, draws the first outcome by
the Born rule, collapses the state, and draws the second outcome from the
collapsed state.

Random numbers come from numpy's Philox counter-based generator. A run is
cut into fixed-size chunks and chunk ``k`` draws from
``SeedSequence(seed, spawn_key=(k,))``; chunk boundaries do not depend on
the number of workers, so serial and sharded runs give identical counts.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from .errors import LabelError, NumericalError, ParameterError, ZeroProbabilityCollapse
from .observables import DichotomicObservable
from .sequential import (
    JointDistribution,
    QuantumState,
    _check_dim,
    collapse,
    mixed_joint_distribution,
)

CHUNK_SIZE = 1 << 16
Z_GATE = 5.0

Order = Literal["AB", "BA"]


def worker_count(requested: int | None = None) -> int:
    """Workers to use; ``CHSH_SEQ_THREADS`` caps it (0 or unset means auto)."""
    if requested is None:
        requested = int(os.environ.get("CHSH_SEQ_THREADS", "0") or 0)
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


def chunk_generator(seed, index: int) -> np.random.Generator:
    entropy = list(seed) if isinstance(seed, (tuple, list)) else seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy, spawn_key=(index,))))


@dataclass(frozen=True)
class TrajectorySample:
    order: Order
    outcome_first: int
    outcome_second: int

    @property
    def canonical_pair(self) -> tuple[int, int]:
        """Outcomes relabelled as (A outcome, B outcome)."""
        if self.order == "AB":
            return (self.outcome_first, self.outcome_second)
        return (self.outcome_second, self.outcome_first)


def sample_once(rng: np.random.Generator, psi: QuantumState, a: DichotomicObservable, b: DichotomicObservable) -> TrajectorySample:
    """One trajectory, consuming three uniforms in the same order as the kernels."""
    _check_dim(psi, a, b)
    u_order, u_first, u_second = rng.random(3)
    first, second = (a, b) if u_order < 0.5 else (b, a)
    p_plus = float(np.vdot(psi.amplitudes, first.proj_plus @ psi.amplitudes).real)
    i = 1 if u_first < p_plus else -1
    try:
        collapsed = collapse(psi, first.projector(i))
    except ZeroProbabilityCollapse as exc:
        raise NumericalError(f"sampled an outcome that cannot be collapsed onto: {exc}") from exc
    q_plus = float(np.vdot(collapsed.amplitudes, second.proj_plus @ collapsed.amplitudes).real)
    j = 1 if u_second < q_plus else -1
    return TrajectorySample("AB" if u_order < 0.5 else "BA", i, j)


@dataclass(frozen=True, eq=False)
class EmpiricalStats:
    n: int
    counts: np.ndarray
    order_ab_count: int
    labels: tuple[str, str]
    max_abs_error_vs_analytic: float
    seed: object = None

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def order_ab_fraction(self) -> float:
        return self.order_ab_count / self.n

    def correlation(self) -> float:
        f = self.frequencies
        return float(f[0, 0] + f[1, 1] - f[0, 1] - f[1, 0])

    def as_dict(self) -> dict:
        keys = ("++", "+-", "-+", "--")
        return {
            "n": self.n,
            "labels": list(self.labels),
            "counts": dict(zip(keys, self.counts.ravel().tolist())),
            "frequencies": dict(zip(keys, self.frequencies.ravel().tolist())),
            "order_ab_fraction": self.order_ab_fraction,
            "max_abs_error_vs_analytic": self.max_abs_error_vs_analytic,
            "seed": self.seed,
        }


def _projector_stack(obs: DichotomicObservable) -> np.ndarray:
    return np.ascontiguousarray(np.stack([obs.proj_plus, obs.proj_minus]))


def _run_chunks(indices: Sequence[int], sizes: Sequence[int], seed, psi, pa, pb, kernel):
    counts = np.zeros((2, 2), dtype=np.int64)
    n_ab = 0
    bad = 0
    for k, m in zip(indices, sizes):
        u = chunk_generator(seed, k).random((m, 3))
        c, nab, nbad = kernel(psi, pa, pb, u)
        counts += c
        n_ab += int(nab)
        bad += int(nbad)
    return counts, n_ab, bad


def run(
    n: int,
    seed,
    psi: QuantumState,
    a: DichotomicObservable,
    b: DichotomicObservable,
    *,
    workers: int | None = None,
    chunk_size: int = CHUNK_SIZE,
    kernel=None,
) -> EmpiricalStats:
    """Simulate ``n`` trajectories and tally canonical (A, B) outcome pairs."""
    if n < 1:
        raise ParameterError(f"number of samples must be >= 1, got {n}")
    _check_dim(psi, a, b)
    kernel = kernel or _kernels.sample_counts
    psi_arr = np.ascontiguousarray(psi.amplitudes)
    pa, pb = _projector_stack(a), _projector_stack(b)

    n_chunks = -(-n // chunk_size)
    sizes = [chunk_size] * (n_chunks - 1) + [n - chunk_size * (n_chunks - 1)]
    n_workers = min(worker_count(workers), n_chunks)
    shards = [list(range(w, n_chunks, n_workers)) for w in range(n_workers)]

    if n_workers == 1:
        results = [_run_chunks(shards[0], sizes, seed, psi_arr, pa, pb, kernel)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(_run_chunks, idx, [sizes[k] for k in idx], seed, psi_arr, pa, pb, kernel)
                for idx in shards
            ]
            results = [f.result() for f in futures]

    counts = sum(r[0] for r in results)
    n_ab = sum(r[1] for r in results)
    bad = sum(r[2] for r in results)
    if bad:
        raise NumericalError(f"{bad} trajectories sampled a zero-probability outcome")
    analytic = mixed_joint_distribution(psi, a, b)
    err = float(np.max(np.abs(counts / n - analytic.probs)))
    return EmpiricalStats(
        n=n,
        counts=counts,
        order_ab_count=n_ab,
        labels=analytic.labels,
        max_abs_error_vs_analytic=err,
        seed=list(seed) if isinstance(seed, (tuple, list)) else seed,
    )


def compare(stats: EmpiricalStats, analytic: JointDistribution) -> tuple[float, np.ndarray]:
    """Max absolute frequency error and per-cell binomial z-scores.

    The probability in the z denominator is clamped into
    ``[1/(2n), 1 - 1/(2n)]`` so impossible or certain cells stay finite.
    """
    if tuple(stats.labels) != tuple(analytic.labels):
        raise LabelError(f"label mismatch: {stats.labels} vs {analytic.labels}")
    n = stats.n
    freq = stats.frequencies
    p = analytic.probs
    floor = 1.0 / (2 * n)
    pc = np.clip(p, floor, 1.0 - floor)
    z = (freq - p) / np.sqrt(pc * (1.0 - pc) / n)
    return float(np.max(np.abs(freq - p))), z


def stats_from_frequencies(freqs: np.ndarray, n: int, labels: tuple[str, str]) -> EmpiricalStats:
    """Stats object carrying given counts (used for exact-injection checks)."""
    counts = np.rint(np.asarray(freqs) * n).astype(np.int64)
    return EmpiricalStats(n=n, counts=counts, order_ab_count=n // 2, labels=labels, max_abs_error_vs_analytic=float("nan"))


@dataclass(frozen=True)
class EmpiricalCHSH:
    value: float
    standard_error: float
    correlations: tuple[float, float, float, float]
    stats: tuple[EmpiricalStats, ...]


def empirical_chsh(scenario, n: int, seed: int, *, workers: int | None = None) -> EmpiricalCHSH:
    """Simulate all four CHSH pairs; pair ``k`` uses seed entropy ``(seed, k)``."""
    from .chsh import CHSH_SIGNS

    stats = tuple(
        run(n, (seed, k), scenario.psi, x, y, workers=workers) for k, (x, y) in enumerate(scenario.pairs())
    )
    corr = tuple(s.correlation() for s in stats)
    value = float(sum(sg * e for sg, e in zip(CHSH_SIGNS, corr)))
    # each product outcome is +-1, so Var(E_hat) = (1 - E^2) / n
    se = math.sqrt(sum(max(1.0 - e * e, 0.0) / n for e in corr))
    return EmpiricalCHSH(value, se, corr, stats)

