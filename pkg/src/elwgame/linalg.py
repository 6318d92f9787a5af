"""Cyclic Jacobi eigensolver for small real symmetric matrices.

The matrices here are 4x4, where numpy's per-call overhead dwarfs the
arithmetic, so the sweeps run on nested Python lists.
"""

import math

import numpy as np

SYMMETRY_TOL = 1e-10


def _offdiag_mass(a, n):
    return math.sqrt(sum(a[i][j] * a[i][j] for i in range(n) for j in range(n) if i != j))


def _gram_schmidt(V):
    Q = np.array(V, dtype=float)
    for k in range(Q.shape[1]):
        for j in range(k):
            Q[:, k] -= (Q[:, j] @ Q[:, k]) * Q[:, j]
        Q[:, k] /= np.linalg.norm(Q[:, k])
    return Q


def symmetric_eigensolve(A, tol=1e-14, max_sweeps=100):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of ``A``.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius mass drops
    below ``tol * max(1, ||A||_F)``.  Inside a degenerate eigenspace the basis
    is whatever the rotations produced; no particular basis is implied.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got {A.shape}")
    if n and np.abs(A - A.T).max() > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    a = ((A + A.T) / 2).tolist()
    v = np.eye(n).tolist()
    threshold = tol * max(1.0, float(np.linalg.norm(A)))

    for _ in range(max_sweeps):
        if _offdiag_mass(a, n) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    t = -t if theta < 0 else t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # a <- J^T a J with J the (p, q) Givens rotation
                for row in a:
                    xp, xq = row[p], row[q]
                    row[p] = c * xp - s * xq
                    row[q] = s * xp + c * xq
                rp, rq = a[p], a[q]
                for k in range(n):
                    xp, xq = rp[k], rq[k]
                    rp[k] = c * xp - s * xq
                    rq[k] = s * xp + c * xq
                rp[q] = rq[p] = 0.0
                for row in v:
                    xp, xq = row[p], row[q]
                    row[p] = c * xp - s * xq
                    row[q] = s * xp + c * xq
    else:
        if _offdiag_mass(a, n) >= threshold:
            raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.array([a[k][k] for k in range(n)])
    order = np.argsort(-w, kind="stable")
    return w[order], _gram_schmidt(np.array(v)[:, order])
