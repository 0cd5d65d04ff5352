"""Sampling and paired-sampling permutation Shapley estimators.

Each sampled player order is walked front to back, evaluating the value
function on every prefix, so one order costs q evaluations.  Pairing walks
the reversed order as well and averages the two marginal-contribution
vectors, which cancels the odd part of the game.
"""
from __future__ import annotations

import numpy as np

from . import exact
from .errors import DomainError, PartitionError, SpecError
from .streams import derive_rng


def sample_permutations(q: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent uniform player orders, one per row."""
    base = np.tile(np.arange(q), (n, 1))
    return rng.permuted(base, axis=1)


def marginal_vectors(ev, perms) -> np.ndarray:
    """Marginal-contribution vector of each permutation, walked by prefixes.

    Row i, column j holds the payoff gain when player j joins the players
    preceding it in permutation i; the walk evaluates the q nonempty
    prefixes of each order (the empty prefix is worth zero by
    normalization), so the cost is exactly q evaluations per row.
    """
    perms = np.asarray(perms)
    n, q = perms.shape
    rows = np.arange(n)
    Z = np.zeros((n, q), dtype=np.uint8)
    gains = np.empty((n, q))
    previous = np.zeros(n)
    for t in range(q):
        Z[rows, perms[:, t]] = 1
        current = ev.evaluate_many(Z)
        gains[:, t] = current - previous
        previous = current
    B = np.empty_like(gains)
    np.put_along_axis(B, perms, gains, axis=1)
    return B


def marginal_vector(ev, perm) -> np.ndarray:
    """Marginal-contribution vector of a single permutation."""
    return marginal_vectors(ev, np.asarray(perm)[None, :])[0]


def estimate_permutation(ev, n: int, paired: bool = False, seed=None) -> exact.ShapleyVector:
    """Average marginal contributions over n sampled orders (n pairs if paired)."""
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    rng = derive_rng(seed, 0)
    perms = sample_permutations(ev.q, n, rng)
    B = marginal_vectors(ev, perms)
    if paired:
        B_rev = marginal_vectors(ev, perms[:, ::-1])
        phi = 0.5 * (B + B_rev).mean(axis=0)
        tag = "permutation-paired"
    else:
        phi = B.mean(axis=0)
        tag = "permutation"
    return exact.ShapleyVector(phi=phi, method_tag=tag)


def group_sums(phi, partition) -> np.ndarray:
    """Sum of attribution over each group of a partition of the players.

    `partition` lists 0-based index groups that must cover every player
    exactly once; PartitionError otherwise.
    """
    values = phi.phi if isinstance(phi, exact.ShapleyVector) else np.asarray(phi, dtype=float)
    q = values.shape[0]
    groups = [np.asarray(g, dtype=np.int64) for g in partition]
    if any(g.size == 0 for g in groups):
        raise PartitionError("partition groups must be non-empty")
    flat = np.concatenate(groups) if groups else np.empty(0, dtype=np.int64)
    if not np.array_equal(np.sort(flat), np.arange(q)):
        raise PartitionError(f"groups must cover each of the {q} players exactly once")
    return np.array([float(values[g].sum()) for g in groups])


def separated_exact_check(ev, d: int, perm) -> np.ndarray:
    """Group-free players' attributions from a single paired walk.

    Requires the wrapped game to expose terms and the first d players to
    enter only plain linear or bilinear terms confined to those players;
    for such games one paired permutation already gives their Shapley
    values exactly, and those d components are returned.
    """
    terms = getattr(ev.game, "terms", None)
    if terms is None:
        raise SpecError("game does not expose its terms; a declared spec is required")
    if not 1 <= d <= ev.q:
        raise DomainError(f"d must lie in 1..{ev.q}, got {d}")
    block = set(range(d))
    for pos, term in enumerate(terms):
        touched = set(int(i) for i in term.indices)
        if not touched & block:
            continue
        if not touched <= block:
            raise SpecError(f"terms[{pos}] couples the first {d} players to the rest")
        if term.kind not in ("linear", "bilinear"):
            raise SpecError(f"terms[{pos}] is {term.kind!r}; only plain forms stay exact")
    perm = np.asarray(perm)
    if perm.shape != (ev.q,) or not np.array_equal(np.sort(perm), np.arange(ev.q)):
        raise DomainError("perm must be a permutation of 0..q-1")
    paired = 0.5 * (marginal_vector(ev, perm) + marginal_vector(ev, perm[::-1]))
    return paired[:d]
