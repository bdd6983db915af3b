"""Independent reference computations in plain Python (no numpy linear algebra).

These follow the measurement process literally: draw the first outcome with
the Born rule, apply the projection postulate, then measure again. They
share no code path with the library.
"""
import cmath
import math


def mat(rows):
    return [[complex(x) for x in r] for r in rows]


def matvec(m, v):
    return [sum(m[i][k] * v[k] for k in range(len(v))) for i in range(len(m))]


def matmul(a, b):
    n, p, q = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(p)) for j in range(q)] for i in range(n)]


def inner(u, v):
    return sum(x.conjugate() * y for x, y in zip(u, v))


def born(psi, p):
    return inner(psi, matvec(p, psi)).real


def collapse(psi, p):
    v = matvec(p, psi)
    n = math.sqrt(inner(v, v).real)
    return [x / n for x in v]


def branch_tree_joint(psi, proj_a, proj_b):
    """Order-averaged joint law by enumerating both orders and all branches.

    ``proj_a``/``proj_b`` map sign (+1/-1) to a projector (nested lists).
    """
    joint = {(i, j): 0.0 for i in (1, -1) for j in (1, -1)}
    for first, second, a_first in ((proj_a, proj_b, True), (proj_b, proj_a, False)):
        for s1 in (1, -1):
            p1 = born(psi, first[s1])
            if p1 <= 1e-300:
                continue
            phi = collapse(psi, first[s1])
            for s2 in (1, -1):
                p2 = born(phi, second[s2])
                key = (s1, s2) if a_first else (s2, s1)
                joint[key] += 0.5 * p1 * p2
    return joint


def spin_projectors(theta, phi=0.0):
    nx, ny, nz = math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)
    s = [[nz, nx - 1j * ny], [nx + 1j * ny, -nz]]
    return {
        1: [[0.5 * ((1 if i == j else 0) + s[i][j]) for j in range(2)] for i in range(2)],
        -1: [[0.5 * ((1 if i == j else 0) - s[i][j]) for j in range(2)] for i in range(2)],
    }


def kron(a, b):
    ra, rb = len(a), len(b)
    return [[a[i // rb][j // rb] * b[i % rb][j % rb] for j in range(ra * rb)] for i in range(ra * rb)]


def singlet_correlation(theta_a, theta_b):
    """Singlet correlation for spins in the x-z plane: -cos(theta_a - theta_b)."""
    return -math.cos(theta_a - theta_b)


def expm_series(h, t=1j, terms=60):
    """exp(t H) by scaling and squaring of a truncated Taylor series."""
    n = len(h)
    norm = max(sum(abs(x) for x in row) for row in h) * abs(t)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    a = [[t * x / (2 ** s) for x in row] for row in h]
    result = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    term = [row[:] for row in result]
    for k in range(1, terms):
        term = [[x / k for x in row] for row in matmul(term, a)]
        result = [[result[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    for _ in range(s):
        result = matmul(result, result)
    return result


def eig2_hermitian(m):
    """Eigenvalues of a 2x2 Hermitian matrix from its characteristic polynomial."""
    tr = (m[0][0] + m[1][1]).real
    det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).real
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return (tr / 2 - disc, tr / 2 + disc)
