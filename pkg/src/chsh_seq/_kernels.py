"""Hot inner loops with numba and pure-numpy implementations.

The backend is chosen once at import time. Set ``CHSH_SEQ_NUMBA=0`` to force
the numpy path; it is also used automatically when numba is not installed.
Both implementations are always importable under explicit names so they can
be benchmarked and cross-checked against each other.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("CHSH_SEQ_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"

COLLAPSE_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# Monte Carlo: one trajectory per row of ``u``.
#   u[t, 0] < 1/2 selects order A->B, otherwise B->A
#   u[t, 1] decides the first outcome, u[t, 2] the second
# Outcome +1 is drawn when the uniform falls below its Born probability.
# ---------------------------------------------------------------------------

def _sample_counts_loop(psi, proj_a, proj_b, u):
    d = psi.shape[0]
    counts = np.zeros((2, 2), dtype=np.int64)
    n_ab = 0
    bad = 0
    v = np.empty(d, dtype=np.complex128)
    w = np.empty(d, dtype=np.complex128)
    for t in range(u.shape[0]):
        ab = u[t, 0] < 0.5
        if ab:
            n_ab += 1
            p1 = proj_a
            p2 = proj_b
        else:
            p1 = proj_b
            p2 = proj_a
        # Born probability of the first +1 outcome
        prob = 0.0
        for r in range(d):
            acc = 0j
            for c in range(d):
                acc += p1[0, r, c] * psi[c]
            v[r] = acc
            prob += acc.real * acc.real + acc.imag * acc.imag
        k1 = 0 if u[t, 1] < prob else 1
        if k1 == 1:
            prob = 0.0
            for r in range(d):
                acc = 0j
                for c in range(d):
                    acc += p1[1, r, c] * psi[c]
                v[r] = acc
                prob += acc.real * acc.real + acc.imag * acc.imag
        if prob < COLLAPSE_FLOOR:
            bad += 1
            continue
        # collapse, then Born probability of the second +1 outcome
        scale = 1.0 / np.sqrt(prob)
        prob2 = 0.0
        for r in range(d):
            acc = 0j
            for c in range(d):
                acc += p2[0, r, c] * v[c]
            w[r] = acc * scale
            prob2 += w[r].real * w[r].real + w[r].imag * w[r].imag
        k2 = 0 if u[t, 2] < prob2 else 1
        if ab:
            counts[k1, k2] += 1
        else:
            counts[k2, k1] += 1
    return counts, n_ab, bad


def sample_counts_numpy(psi, proj_a, proj_b, u):
    """Vectorized over trajectories; each row still collapses its own state."""
    m = u.shape[0]
    ab = u[:, 0] < 0.5
    first = np.where(ab[:, None, None, None], proj_a[None], proj_b[None])
    second = np.where(ab[:, None, None, None], proj_b[None], proj_a[None])
    v_plus = np.einsum("trc,c->tr", first[:, 0], psi)
    prob_plus = np.sum(v_plus.real ** 2 + v_plus.imag ** 2, axis=1)
    k1 = (u[:, 1] >= prob_plus).astype(np.int64)
    v = np.where(k1[:, None] == 0, v_plus, np.einsum("trc,c->tr", first[:, 1], psi))
    prob = np.where(k1 == 0, prob_plus, np.sum(v.real ** 2 + v.imag ** 2, axis=1))
    ok = prob >= COLLAPSE_FLOOR
    bad = int(m - ok.sum())
    scale = 1.0 / np.sqrt(np.where(ok, prob, 1.0))
    w = np.einsum("trc,tc->tr", second[:, 0], v) * scale[:, None]
    prob2 = np.sum(w.real ** 2 + w.imag ** 2, axis=1)
    k2 = (u[:, 2] >= prob2).astype(np.int64)
    i = np.where(ab, k1, k2)[ok]
    j = np.where(ab, k2, k1)[ok]
    counts = np.bincount(2 * i + j, minlength=4).reshape(2, 2).astype(np.int64)
    return counts, int(ab.sum()), bad


# ---------------------------------------------------------------------------
# Optimizer objective: parameters -> four observables -> top eigenvalue of
# the symmetrized CHSH operator.
#
# ``layout`` has one row per observable (A, A', B, B'):
#   [kind, ref, offset, site_dim, n_plus, lift, other_dim]
#   kind 0: generated from params[offset : offset + site_dim**2]
#   kind 1: identity on the full space
#   kind 2: copy of observable ``ref``
#   lift 0: none, 1: obs (x) I_other, 2: I_other (x) obs
# ---------------------------------------------------------------------------

def _build_operators(params, layout, dim):
    ops = np.zeros((4, dim, dim), dtype=np.complex128)
    for s in range(4):
        kind = layout[s, 0]
        if kind == 1:
            for r in range(dim):
                ops[s, r, r] = 1.0
            continue
        if kind == 2:
            ops[s] = ops[layout[s, 1]]
            continue
        offset, d, n_plus = layout[s, 2], layout[s, 3], layout[s, 4]
        # Hermitian generator: diagonal, then upper-triangle real, then imaginary parts
        h = np.zeros((d, d), dtype=np.complex128)
        n_off = d * (d - 1) // 2
        k = offset + d
        for r in range(d):
            h[r, r] = params[offset + r]
            for c in range(r + 1, d):
                h[r, c] = params[k] + 1j * params[k + n_off]
                h[c, r] = params[k] - 1j * params[k + n_off]
                k += 1
        lam, vec = np.linalg.eigh(h)
        u = np.ascontiguousarray(vec * np.exp(1j * lam)) @ np.ascontiguousarray(vec.conj().T)
        up = np.ascontiguousarray(u[:, :n_plus])
        um = np.ascontiguousarray(u[:, n_plus:])
        op = up @ np.ascontiguousarray(up.conj().T) - um @ np.ascontiguousarray(um.conj().T)
        lift, other = layout[s, 5], layout[s, 6]
        if lift == 0:
            ops[s] = op
        elif lift == 1:
            for i in range(d):
                for j in range(d):
                    for e in range(other):
                        ops[s, i * other + e, j * other + e] = op[i, j]
        else:
            for e in range(other):
                ops[s, e * d:(e + 1) * d, e * d:(e + 1) * d] = op
    return ops


def _chsh_lambda_max(ops):
    a = np.ascontiguousarray(ops[0])
    ap = np.ascontiguousarray(ops[1])
    b = np.ascontiguousarray(ops[2])
    bp = np.ascontiguousarray(ops[3])
    c = 0.5 * ((a @ b + b @ a) - (a @ bp + bp @ a) + (ap @ bp + bp @ ap) + (ap @ b + b @ ap))
    c = 0.5 * (c + np.ascontiguousarray(c.conj().T))
    return np.linalg.eigvalsh(c)[-1]


sample_counts_loop = _sample_counts_loop
build_operators_numpy = _build_operators
chsh_lambda_max_numpy = _chsh_lambda_max

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    sample_counts_numba = _jit(_sample_counts_loop)
    build_operators_numba = _jit(_build_operators)
    chsh_lambda_max_numba = _jit(_chsh_lambda_max)
else:  # pragma: no cover
    sample_counts_numba = None
    build_operators_numba = None
    chsh_lambda_max_numba = None


if USE_NUMBA:
    sample_counts = sample_counts_numba
    build_operators = build_operators_numba
    chsh_lambda_max = chsh_lambda_max_numba
else:
    sample_counts = sample_counts_numpy
    build_operators = build_operators_numpy
    chsh_lambda_max = chsh_lambda_max_numpy


def objective_value(params, layout, dim):
    """Top eigenvalue of the symmetrized CHSH operator for packed parameters."""
    return float(chsh_lambda_max(build_operators(params, layout, dim)))
