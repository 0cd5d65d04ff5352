"""Value functions on binary coalition vectors.

A game is declared in JSON as a sum of terms, each reading a subset of the q
players through a linear or bilinear form, optionally wrapped in an
exponential.  Evaluation always subtracts the raw value of the empty
coalition, so every game is normalized to worth exactly zero at the empty
set.  Player indices are 1-based in documents and 0-based everywhere in code.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, NonFiniteError, SchemaError

TERM_KINDS = ("linear", "bilinear", "exp_linear", "exp_bilinear")

_TERM_KEYS = {
    "linear": {"kind", "indices", "beta", "offset"},
    "exp_linear": {"kind", "indices", "beta", "offset"},
    "bilinear": {"kind", "indices", "A", "offset"},
    "exp_bilinear": {"kind", "indices", "A", "offset"},
}


@dataclass(frozen=True)
class Term:
    """One additive component of a value function.

    `indices` holds 0-based player positions.  `coeffs` is a vector (linear
    kinds) or a square matrix (bilinear kinds) acting on the selected
    sub-vector of the coalition indicator.
    """

    kind: str
    indices: np.ndarray
    coeffs: np.ndarray
    offset: float = 0.0

    def raw_values(self, Z: np.ndarray) -> np.ndarray:
        zsub = Z[:, self.indices].astype(float)
        if self.kind == "linear":
            core = zsub @ self.coeffs
        elif self.kind == "bilinear":
            core = np.einsum("ni,ij,nj->n", zsub, self.coeffs, zsub)
        elif self.kind == "exp_linear":
            with np.errstate(over="ignore"):
                core = np.exp(zsub @ self.coeffs)
        else:
            with np.errstate(over="ignore"):
                core = np.exp(np.einsum("ni,ij,nj->n", zsub, self.coeffs, zsub))
        return core + self.offset


@dataclass(frozen=True)
class ValueFunctionSpec:
    """A declared game: player count plus a tuple of terms.

    `values` returns normalized payoffs; the raw payoff of the empty
    coalition is cached at construction and subtracted on every call, so the
    empty coalition is worth 0.0 exactly.
    """

    q: int
    terms: tuple[Term, ...]
    _raw_empty: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        empty = np.zeros((1, self.q), dtype=np.uint8)
        raw = sum(t.raw_values(empty)[0] for t in self.terms)
        object.__setattr__(self, "_raw_empty", float(raw))

    def values(self, Z: np.ndarray) -> np.ndarray:
        Z = as_coalitions(Z, self.q)
        total = np.zeros(Z.shape[0])
        for term in self.terms:
            total += term.raw_values(Z)
        total -= self._raw_empty
        if not np.all(np.isfinite(total)):
            raise NonFiniteError("value function produced a non-finite payoff")
        return total


def as_coalitions(Z, q: int) -> np.ndarray:
    """Validate and return an (m, q) binary matrix of coalition indicators."""
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[1] != q:
        raise DimensionError(f"expected an (m, {q}) coalition matrix, got shape {Z.shape}")
    if not np.isin(Z, (0, 1)).all():
        raise DomainError("coalition entries must be 0 or 1")
    return Z


def parse_spec(doc) -> ValueFunctionSpec:
    """Build a ValueFunctionSpec from a JSON string or an already-parsed dict.

    Raises SchemaError for structural problems, DimensionError when
    coefficient shapes disagree with the index list, and DomainError for
    out-of-range values (q < 2, indices outside 1..q, duplicates).
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    extra = set(doc) - {"q", "terms"}
    if extra:
        raise SchemaError(f"unknown top-level keys: {sorted(extra)}")
    if "q" not in doc or "terms" not in doc:
        raise SchemaError("document requires 'q' and 'terms'")
    q = doc["q"]
    if not isinstance(q, int) or isinstance(q, bool):
        raise SchemaError("'q' must be an integer")
    if q < 2:
        raise DomainError(f"q must be at least 2, got {q}")
    if not isinstance(doc["terms"], list) or not doc["terms"]:
        raise SchemaError("'terms' must be a non-empty list")
    return ValueFunctionSpec(q=q, terms=tuple(_parse_term(t, q, i) for i, t in enumerate(doc["terms"])))


def _parse_term(raw, q: int, pos: int) -> Term:
    where = f"terms[{pos}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where} must be an object")
    kind = raw.get("kind")
    if kind not in TERM_KINDS:
        raise SchemaError(f"{where}: kind must be one of {TERM_KINDS}, got {kind!r}")
    extra = set(raw) - _TERM_KEYS[kind]
    if extra:
        raise SchemaError(f"{where}: unknown keys for kind {kind!r}: {sorted(extra)}")

    indices = raw.get("indices")
    if not isinstance(indices, list) or not indices:
        raise SchemaError(f"{where}: 'indices' must be a non-empty list")
    if not all(isinstance(i, int) and not isinstance(i, bool) for i in indices):
        raise SchemaError(f"{where}: indices must be integers")
    if any(i < 1 or i > q for i in indices):
        raise DomainError(f"{where}: indices must lie in 1..{q}")
    if len(set(indices)) != len(indices):
        raise DomainError(f"{where}: duplicate indices")
    k = len(indices)

    if kind in ("linear", "exp_linear"):
        beta = raw.get("beta")
        if beta is None:
            raise SchemaError(f"{where}: kind {kind!r} requires 'beta'")
        coeffs = _as_float_array(beta, where, "beta")
        if coeffs.shape != (k,):
            raise DimensionError(f"{where}: beta must have length {k}, got shape {coeffs.shape}")
    else:
        A = raw.get("A")
        if A is None:
            raise SchemaError(f"{where}: kind {kind!r} requires 'A'")
        coeffs = _as_float_array(A, where, "A")
        if coeffs.shape != (k, k):
            raise DimensionError(f"{where}: A must be {k}x{k}, got shape {coeffs.shape}")

    offset = raw.get("offset", 0.0)
    if not isinstance(offset, (int, float)) or isinstance(offset, bool):
        raise SchemaError(f"{where}: 'offset' must be a number")

    return Term(
        kind=kind,
        indices=np.asarray(indices, dtype=np.int64) - 1,
        coeffs=coeffs,
        offset=float(offset),
    )


def _as_float_array(values, where: str, name: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: '{name}' must be numeric") from exc
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{where}: '{name}' contains non-finite entries")
    return arr


def evaluate(spec: ValueFunctionSpec, z) -> float:
    """Normalized payoff of a single coalition."""
    z = np.asarray(z)
    if z.ndim != 1:
        raise DimensionError(f"expected a length-{spec.q} coalition vector, got shape {z.shape}")
    return float(spec.values(z[None, :])[0])


def evaluate_many(spec: ValueFunctionSpec, Z) -> np.ndarray:
    """Normalized payoffs for the rows of an (m, q) coalition matrix."""
    return spec.values(Z)


def complement(z) -> np.ndarray:
    """Indicator of the complementary coalition."""
    z = np.asarray(z)
    if not np.isin(z, (0, 1)).all():
        raise DomainError("coalition entries must be 0 or 1")
    return (1 - z).astype(z.dtype)


def reverse_permutation(perm) -> np.ndarray:
    """The same player order walked back to front."""
    return np.asarray(perm)[::-1].copy()


def inverse_positions(perm) -> np.ndarray:
    """Position of each player within a permutation: out[perm[t]] = t."""
    perm = np.asarray(perm)
    out = np.empty_like(perm)
    out[perm] = np.arange(len(perm))
    return out


def prefix_coalition(perm, j: int) -> np.ndarray:
    """Indicator of the players that precede player j in the permutation."""
    perm = np.asarray(perm)
    pos = int(np.nonzero(perm == j)[0][0])
    z = np.zeros(len(perm), dtype=np.uint8)
    z[perm[:pos]] = 1
    return z


class GameEvaluator:
    """Wraps a game and counts every value-function evaluation.

    Any object with an integer attribute `q` and a method `values(Z)` mapping
    an (m, q) binary matrix to m normalized payoffs can be wrapped;
    ValueFunctionSpec is the standard one.  The grand-coalition value is
    cached after its first (counted) evaluation because several estimators
    reuse it on every draw.
    """

    def __init__(self, game):
        self.game = game
        self.q = int(game.q)
        self.eval_count = 0
        self._grand: float | None = None

    def evaluate(self, z) -> float:
        z = np.asarray(z)
        if z.ndim != 1:
            raise DimensionError(f"expected a single coalition vector, got shape {z.shape}")
        self.eval_count += 1
        return float(self.game.values(z[None, :])[0])

    def evaluate_many(self, Z) -> np.ndarray:
        out = self.game.values(Z)
        self.eval_count += len(out)
        return out

    def grand_value(self) -> float:
        if self._grand is None:
            self._grand = self.evaluate(np.ones(self.q, dtype=np.uint8))
        return self._grand
