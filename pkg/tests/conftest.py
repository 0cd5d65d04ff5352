"""Shared fixtures: reference games, table games, and random game factories."""
from __future__ import annotations

import json

import numpy as np
import pytest

from pairshap.games import GameEvaluator, ValueFunctionSpec, parse_spec

# q=4 reference game: exp of a linear form minus one.  Its exact Shapley
# values and dispersion matrices below were frozen from an independent
# enumeration script before the package existed and act as golden values.
REFERENCE_DOC = {
    "q": 4,
    "terms": [
        {
            "kind": "exp_linear",
            "indices": [1, 2, 3, 4],
            "beta": [-0.5, 0.1, 0.8, -0.2],
            "offset": -1.0,
        }
    ],
}

REFERENCE_PHI = np.array([-0.6025740, 0.1194994, 0.9445458, -0.2400684])

# unpaired kernel sandwich: eigenvalues and trace
REFERENCE_T_EIGS = np.array([0.24481862, 0.07785224, 0.01591936])
REFERENCE_T_TRACE = 0.33859021917367077

# paired kernel sandwich
REFERENCE_T2_EIGS = np.array([0.00095503, 0.00039377, 0.00015574])
REFERENCE_T2_TRACE = 0.0015045473090849457

# paired walk covariance (unbiased normalization over all 4! orders)
REFERENCE_SIGMA_EIGS = np.array([7.50348695e-04, 6.99499611e-04, 2.02086819e-04])
REFERENCE_SIGMA_TRACE = 0.0016519351251335973

# q=3 hand-built table game: payoffs by coalition, used for walk tests.
# masks: {1}=1, {2}=5, {3}=7, {1,2}=3, {1,3}=11, {2,3}=13, {1,2,3}=17
HAND_TABLE_Q3 = np.array([0.0, 1.0, 5.0, 3.0, 7.0, 11.0, 13.0, 17.0])


@pytest.fixture
def reference_spec() -> ValueFunctionSpec:
    return parse_spec(json.dumps(REFERENCE_DOC))


@pytest.fixture
def reference_ev(reference_spec) -> GameEvaluator:
    return GameEvaluator(reference_spec)


class TableGame:
    """Game given by an explicit payoff per coalition bitmask.

    Provides the same `q`/`values` surface as a parsed spec; payoffs are
    normalized by subtracting the empty-coalition entry.
    """

    def __init__(self, q: int, table):
        self.q = q
        raw = np.asarray(table, dtype=float)
        assert raw.shape == (2**q,)
        self.table = raw - raw[0]

    def values(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.int64)
        masks = Z @ (np.int64(1) << np.arange(self.q, dtype=np.int64))
        return self.table[masks]


@pytest.fixture
def hand_game_q3() -> GameEvaluator:
    return GameEvaluator(TableGame(3, HAND_TABLE_Q3))


def random_game_doc(rng: np.random.Generator, q: int) -> dict:
    """A random game document mixing term kinds, with bounded coefficients."""
    kinds = ["linear", "bilinear", "exp_linear", "exp_bilinear"]
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        kind = kinds[int(rng.integers(0, len(kinds)))]
        k = int(rng.integers(1, min(q, 4) + 1))
        indices = sorted(int(i) + 1 for i in rng.choice(q, size=k, replace=False))
        term = {"kind": kind, "indices": indices, "offset": float(rng.uniform(-1, 1))}
        if kind in ("linear", "exp_linear"):
            term["beta"] = [float(b) for b in rng.uniform(-0.8, 0.8, size=k)]
        else:
            scale = 0.8 / k
            term["A"] = [[float(a) for a in row] for row in rng.uniform(-scale, scale, size=(k, k))]
        terms.append(term)
    return {"q": q, "terms": terms}


def random_bilinear_doc(rng: np.random.Generator, q: int) -> tuple[dict, np.ndarray]:
    """A full-support bilinear game document and its coefficient matrix."""
    A = rng.normal(0.0, 1.0, size=(q, q))
    doc = {
        "q": q,
        "terms": [
            {
                "kind": "bilinear",
                "indices": list(range(1, q + 1)),
                "A": [[float(a) for a in row] for row in A],
            }
        ],
    }
    return doc, A


def bilinear_shapley(A: np.ndarray) -> np.ndarray:
    """Closed-form Shapley values of the quadratic-form game with matrix A."""
    return 0.5 * (A + A.T).sum(axis=1)


def separated_doc(rng: np.random.Generator, d: int, exp_size: int = 4) -> dict:
    """Plain bilinear block on the first d players, exp block on the rest."""
    q = d + exp_size
    A1 = rng.normal(0.0, 0.8, size=(d, d))
    A2 = rng.normal(0.0, 0.3, size=(exp_size, exp_size))
    return {
        "q": q,
        "terms": [
            {
                "kind": "bilinear",
                "indices": list(range(1, d + 1)),
                "A": [[float(a) for a in row] for row in A1],
            },
            {
                "kind": "exp_bilinear",
                "indices": list(range(d + 1, q + 1)),
                "A": [[float(a) for a in row] for row in A2],
            },
        ],
    }


def three_block_doc(rng: np.random.Generator) -> dict:
    """q=9 game with three disjoint exp blocks of three players each."""
    terms = []
    for k in range(3):
        A = rng.normal(0.0, 0.35, size=(3, 3))
        terms.append(
            {
                "kind": "exp_bilinear",
                "indices": [3 * k + 1, 3 * k + 2, 3 * k + 3],
                "A": [[float(a) for a in row] for row in A],
            }
        )
    return {"q": 9, "terms": terms}


# Filled by tests/test_acceptance.py; one entry per numbered criterion.
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        word = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number:2d}: {word}{suffix}")
