"""Asymptotic covariance matrices of the sampling estimators.

The least-squares estimators disperse like a sandwich covariance built from
the design second moment and the residual-weighted second moment; the
permutation estimators disperse like the covariance of (paired) marginal-
contribution vectors.  Both are available exactly, by enumeration, and as
plug-in estimates from a sampled batch.  Reports carry the matrix, its
spectrum, and provenance, and feed the block detector and the
cost-adjusted spectrum comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exact, linalg, permutation
from .errors import DimensionError, DomainError, SizeGuard
from .streams import derive_rng

KERNEL_ENUM_LIMIT = 20
DEGENERATE_ATOL = 1e-13
NULLSPACE_RTOL = 1e-12

_EVAL_COST = {"kernel": 1, "kernel-paired": 2}


@dataclass(frozen=True)
class CovarianceReport:
    """A covariance matrix with its spectrum and origin.

    `method` names the estimator the matrix describes; `provenance` records
    whether it came from exact enumeration or a plug-in batch.  `degenerate`
    flags a numerically zero matrix, which for paired methods certifies that
    the game is exactly bilinear (the paired estimators are then exact and
    the matrix carries no information).
    """

    method: str
    provenance: str
    q: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    trace: float
    degenerate: bool


def _make_report(matrix: np.ndarray, method: str, provenance: str, q: int, scale: float) -> CovarianceReport:
    matrix = 0.5 * (matrix + matrix.T)
    eigenvalues, _ = linalg.eig_sym(matrix)
    degenerate = bool(np.max(np.abs(matrix)) <= DEGENERATE_ATOL * max(1.0, scale) ** 2)
    return CovarianceReport(
        method=method,
        provenance=provenance,
        q=q,
        matrix=matrix,
        eigenvalues=eigenvalues,
        trace=float(np.trace(matrix)),
        degenerate=degenerate,
    )


def _sandwich(hessian: np.ndarray, meat: np.ndarray) -> np.ndarray:
    inner = linalg.solve_spd(hessian, meat)
    return linalg.solve_spd(hessian, inner.T)


def kernel_matrices_exact(ev, paired: bool = False):
    """Population design moment, residual moment, and sandwich covariance.

    Enumerates the full kernel sampling distribution (q <= 20).  Unpaired,
    the meat weights squared residuals of the exact least-squares fit;
    paired, it weights the squared even parts of those residuals and the
    design moment doubles because each draw contributes its complement row
    as well.  Returns (meat, hessian, report).
    """
    q = ev.q
    if q > KERNEL_ENUM_LIMIT:
        raise SizeGuard(f"kernel moment enumeration supports q <= {KERNEL_ENUM_LIMIT}, got q = {q}")
    Z, p, x, y, values, grand = exact.kernel_population(ev)
    J = (x * p[:, None]).T @ x
    partial = linalg.solve_spd(J, x.T @ (p * y))
    if paired:
        comp_values = values[::-1]
        paired_residual = 0.5 * (values + grand - comp_values) - Z[:, -1] * grand - x @ partial
        meat = (x * (4.0 * p * paired_residual**2)[:, None]).T @ x
        Zc = 1.0 - Z
        xc = Zc[:, :-1] - Zc[:, -1:]
        hessian = J + (xc * p[:, None]).T @ xc
        # complement rows negate the design, so the paired moment is exactly 2J
        assert np.allclose(hessian, 2.0 * J, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(J)))))
        method = "kernel-paired"
    else:
        residual = y - x @ partial
        meat = (x * (p * residual**2)[:, None]).T @ x
        hessian = J
        method = "kernel"
    covariance = _sandwich(hessian, meat)
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    report = _make_report(covariance, method, "exact-enumeration", q, scale)
    return meat, hessian, report


def kernel_matrices_plugin(batch, phi):
    """Plug-in moments and sandwich covariance from an accepted batch.

    Uses the batch's own design rows and responses with the supplied
    attribution vector; pairing is read off the batch.  Returns
    (meat, hessian, report); the solve raises SingularMatrix when the
    sampled design moment is not invertible.
    """
    values = phi.phi if isinstance(phi, exact.ShapleyVector) else np.asarray(phi, dtype=float)
    partial = values[:-1]
    n = batch.draws.shape[0]
    q = batch.draws.shape[1]
    if batch.paired:
        x = batch.design[:n]
        draw_y = batch.response[:n]
        comp_y = batch.response[n:]
        paired_residual = 0.5 * (draw_y - comp_y) - x @ partial
        meat = (x * (4.0 * paired_residual**2)[:, None]).T @ x / n
        hessian = 2.0 * (x.T @ x) / n
        method = "kernel-paired"
    else:
        x = batch.design
        residual = batch.response - x @ partial
        meat = (x * (residual**2)[:, None]).T @ x / n
        hessian = x.T @ x / n
        method = "kernel"
    covariance = _sandwich(hessian, meat)
    scale = float(np.max(np.abs(batch.response))) if batch.response.size else 0.0
    provenance = f"plug-in(n={n}, seed={batch.seed})"
    report = _make_report(covariance, method, provenance, q, scale)
    return meat, hessian, report


def permutation_covariance_exact(ev, paired: bool = True) -> CovarianceReport:
    """Covariance of the (paired) marginal-contribution vector over all orders.

    Enumerates all q! permutations (q <= 9) from a value table and forms the
    covariance with the unbiased 1/(q! - 1) normalization.  Every row of the
    averaged matrix sums to the grand value, so the all-ones vector is always
    in the null space; for additively separated games the matrix is block
    diagonal, and for bilinear games it vanishes entirely.
    """
    q = ev.q
    perms = exact.all_permutations(q)
    table = exact.value_table(ev)
    B = exact.marginal_matrix_from_table(table, perms)
    if paired:
        W = 0.5 * (B + exact.marginal_matrix_from_table(table, perms[:, ::-1]))
        method = "permutation-paired"
    else:
        W = B
        method = "permutation"
    centered = W - W.mean(axis=0)
    covariance = centered.T @ centered / (perms.shape[0] - 1)
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    return _make_report(covariance, method, "exact-enumeration", q, scale)


def permutation_covariance_plugin(ev, n: int, seed=None, paired: bool = True) -> CovarianceReport:
    """Sample covariance of (paired) marginal vectors from n fresh orders.

    Draws with the same substream layout as `estimate_permutation`, so the
    same seed reproduces the estimator's own draws.  Uses the 1/(n - 1)
    normalization.
    """
    if n < 2:
        raise DomainError(f"need at least 2 sampled orders, got {n}")
    rng = derive_rng(seed, 0)
    perms = permutation.sample_permutations(ev.q, n, rng)
    B = permutation.marginal_vectors(ev, perms)
    if paired:
        W = 0.5 * (B + permutation.marginal_vectors(ev, perms[:, ::-1]))
        method = "permutation-paired"
    else:
        W = B
        method = "permutation"
    centered = W - W.mean(axis=0)
    covariance = centered.T @ centered / (n - 1)
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    return _make_report(covariance, method, f"plug-in(n={n}, seed={seed})", ev.q, scale)


def predicted_stderr(report: CovarianceReport, n: int) -> np.ndarray:
    """Per-player standard error sqrt(variance / n) implied by a report.

    Permutation covariances are q-by-q and read off directly.  Kernel
    covariances describe the q-1 solved components; the pivoted player's
    error is the negated sum of the others by the efficiency constraint, so
    its variance is the total of the matrix.
    """
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    M = report.matrix
    q = report.q
    if M.shape == (q, q):
        diag = np.diag(M)
    else:
        ones = np.ones(q - 1)
        diag = np.append(np.diag(M), ones @ M @ ones)
    # degenerate matrices can carry roundoff-negative variances
    return np.sqrt(np.maximum(diag, 0.0) / n)


def psd_gap(T, T2) -> float:
    """Smallest eigenvalue of T - T2; nonnegative when pairing only helps."""
    difference = np.asarray(T, dtype=float) - np.asarray(T2, dtype=float)
    eigenvalues, _ = linalg.eig_sym(difference)
    return float(eigenvalues[-1])


def evaluation_cost(method: str, q: int) -> int:
    """Value-function evaluations consumed per draw of the given estimator."""
    if method in _EVAL_COST:
        return _EVAL_COST[method]
    if method == "permutation":
        return q
    if method == "permutation-paired":
        return 2 * q
    raise DomainError(f"unknown method {method!r}")


def dimension_adjusted_eigs(report: CovarianceReport) -> np.ndarray:
    """Spectrum rescaled by evaluations per draw, for cross-method comparison."""
    return report.eigenvalues * evaluation_cost(report.method, report.q)


def positive_eigenvalues(report: CovarianceReport) -> np.ndarray:
    """Eigenvalues excluding the numerical null space (|w| <= rtol * trace)."""
    w = report.eigenvalues
    return w[np.abs(w) > NULLSPACE_RTOL * abs(report.trace)]


def detect_blocks(report: CovarianceReport, threshold: float) -> list[list[int]]:
    """Connected groups of players under |matrix entry| > threshold.

    Expects a q-by-q matrix (the permutation covariances qualify); returns
    0-based groups sorted within and ordered by smallest member.  Zero rows
    come out as singleton groups.
    """
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    M = report.matrix
    if M.shape != (report.q, report.q):
        raise DimensionError(
            f"block detection needs a {report.q}x{report.q} matrix, got {M.shape}"
        )
    adjacency = np.abs(M) > threshold
    unseen = set(range(report.q))
    blocks: list[list[int]] = []
    while unseen:
        start = min(unseen)
        frontier = [start]
        unseen.discard(start)
        component = {start}
        while frontier:
            node = frontier.pop()
            for neighbour in np.nonzero(adjacency[node])[0]:
                neighbour = int(neighbour)
                if neighbour in unseen:
                    unseen.discard(neighbour)
                    component.add(neighbour)
                    frontier.append(neighbour)
        blocks.append(sorted(component))
    return blocks


def report_to_dict(report: CovarianceReport) -> dict:
    """JSON-ready view of a report; lists for arrays, plain floats elsewhere."""
    return {
        "method": report.method,
        "provenance": report.provenance,
        "q": report.q,
        "matrix": [[float(v) for v in row] for row in report.matrix],
        "eigenvalues": [float(v) for v in report.eigenvalues],
        "trace": report.trace,
        "degenerate": report.degenerate,
    }
