"""Dense symmetric linear algebra with fixed, test-visible tolerances.

The matrices in this package are small (at most a few dozen rows), so the
routines favour clarity and explicit failure conditions over speed.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError, NoConvergence, SingularMatrix

SOLVE_SYMMETRY_RTOL = 1e-12
SINGULAR_PIVOT_RTOL = 1e-12
EIG_SYMMETRY_RTOL = 1e-10
EIG_OFFDIAG_RTOL = 1e-14
EIG_MAX_SWEEPS = 100


def _square_symmetric(A, rtol: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale and float(np.max(np.abs(A - A.T))) > rtol * scale:
        raise DimensionError("matrix is not symmetric within tolerance")
    return A


def solve_spd(A, b):
    """Solve A x = b for symmetric positive (semi)definite A.

    Gaussian elimination with partial pivoting; `b` may be a vector or a
    matrix of right-hand-side columns.  Raises SingularMatrix when a pivot
    falls to SINGULAR_PIVOT_RTOL times the largest initial diagonal entry.
    """
    A = _square_symmetric(A, SOLVE_SYMMETRY_RTOL)
    n = A.shape[0]
    b = np.asarray(b, dtype=float)
    single = b.ndim == 1
    B = b[:, None] if single else b
    if B.shape[0] != n:
        raise DimensionError(f"right-hand side has {B.shape[0]} rows, matrix has {n}")

    aug = np.hstack([A.copy(), B.copy()])
    pivot_floor = SINGULAR_PIVOT_RTOL * float(np.max(np.abs(np.diag(A)))) if n else 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        if abs(aug[p, k]) <= pivot_floor:
            raise SingularMatrix(f"pivot {aug[p, k]:.3e} at step {k} below floor {pivot_floor:.3e}")
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        factors = aug[k + 1 :, k] / aug[k, k]
        aug[k + 1 :, k:] -= np.outer(factors, aug[k, k:])

    X = np.empty_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (aug[k, n:] - aug[k, k + 1 : n] @ X[k + 1 :]) / aug[k, k]
    return X[:, 0] if single else X


def eig_sym(A):
    """Eigenvalues (descending) and orthonormal eigenvectors of symmetric A.

    Cyclic Jacobi rotations; converged when the off-diagonal Frobenius norm
    drops to EIG_OFFDIAG_RTOL times the Frobenius norm of the input.  Raises
    NoConvergence after EIG_MAX_SWEEPS sweeps.
    """
    A = _square_symmetric(A, EIG_SYMMETRY_RTOL)
    n = A.shape[0]
    a = A.copy()
    V = np.eye(n)
    threshold = EIG_OFFDIAG_RTOL * float(np.linalg.norm(A))

    def offdiag_norm() -> float:
        return float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))

    for _ in range(EIG_MAX_SWEEPS):
        if offdiag_norm() <= threshold:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_r = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * col_p - s * col_r
                a[:, r] = s * col_p + c * col_r
                row_p, row_r = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c * row_p - s * row_r
                a[r, :] = s * row_p + c * row_r
                a[p, r] = a[r, p] = 0.0
                vec_p, vec_r = V[:, p].copy(), V[:, r].copy()
                V[:, p] = c * vec_p - s * vec_r
                V[:, r] = s * vec_p + c * vec_r
    else:
        if offdiag_norm() > threshold:
            raise NoConvergence(f"Jacobi iteration did not converge in {EIG_MAX_SWEEPS} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def rank(A, tol: float) -> int:
    """Numerical rank by Gaussian elimination with complete pivoting.

    Pivots smaller than `tol` times the largest initial pivot count as zero.
    """
    if not tol > 0:
        raise DomainError(f"rank tolerance must be positive, got {tol}")
    M = np.asarray(A, dtype=float).copy()
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    m, n = M.shape
    first_pivot = None
    r = 0
    for step in range(min(m, n)):
        sub = np.abs(M[step:, step:])
        flat = int(np.argmax(sub))
        pr, pc = divmod(flat, n - step)
        pivot = sub[pr, pc]
        if first_pivot is None:
            first_pivot = pivot
        if first_pivot == 0.0 or pivot < tol * first_pivot:
            break
        if pr:
            M[[step, step + pr]] = M[[step + pr, step]]
        if pc:
            M[:, [step, step + pc]] = M[:, [step + pc, step]]
        factors = M[step + 1 :, step] / M[step, step]
        M[step + 1 :, step:] -= np.outer(factors, M[step, step:])
        r += 1
    return r
