"""Value-function parsing, normalization, and coalition/permutation helpers."""
import json

import numpy as np
import pytest

from pairshap.errors import (
    DimensionError,
    DomainError,
    NonFiniteError,
    SchemaError,
)
from pairshap.games import (
    GameEvaluator,
    complement,
    evaluate,
    evaluate_many,
    inverse_positions,
    parse_spec,
    prefix_coalition,
    reverse_permutation,
)

from conftest import REFERENCE_DOC, random_game_doc


def test_parse_reference_document():
    spec = parse_spec(json.dumps(REFERENCE_DOC))
    assert spec.q == 4
    assert len(spec.terms) == 1
    assert spec.terms[0].kind == "exp_linear"
    # indices are stored 0-based
    assert list(spec.terms[0].indices) == [0, 1, 2, 3]


def test_reference_game_values():
    spec = parse_spec(REFERENCE_DOC)
    full = evaluate(spec, np.ones(4, dtype=np.uint8))
    assert full == pytest.approx(np.exp(0.2) - 1.0, abs=1e-12)
    assert evaluate(spec, np.zeros(4, dtype=np.uint8)) == 0.0


def test_normalization_is_exact_zero_for_random_games():
    rng = np.random.default_rng(20)
    for trial in range(25):
        q = int(rng.integers(2, 8))
        spec = parse_spec(random_game_doc(rng, q))
        assert evaluate(spec, np.zeros(q, dtype=np.uint8)) == 0.0


def test_linear_game_evaluates_to_dot_product():
    beta = [0.3, -0.7, 0.2]
    spec = parse_spec({"q": 3, "terms": [{"kind": "linear", "indices": [1, 2, 3], "beta": beta}]})
    Z = np.array([[1, 0, 1], [0, 1, 0], [1, 1, 1]], dtype=np.uint8)
    np.testing.assert_allclose(evaluate_many(spec, Z), Z @ np.asarray(beta), atol=1e-15)


def test_zero_linear_game_is_identically_zero():
    spec = parse_spec({"q": 2, "terms": [{"kind": "linear", "indices": [1, 2], "beta": [0.0, 0.0]}]})
    Z = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.uint8)
    assert np.all(evaluate_many(spec, Z) == 0.0)


def test_multi_term_document_parses():
    doc = {
        "q": 5,
        "terms": [
            {"kind": "bilinear", "indices": [1, 2], "A": [[1.0, 0.5], [0.0, -1.0]]},
            {"kind": "exp_bilinear", "indices": [3, 4, 5], "A": [[0.1] * 3] * 3},
        ],
    }
    spec = parse_spec(doc)
    assert [t.kind for t in spec.terms] == ["bilinear", "exp_bilinear"]


@pytest.mark.parametrize(
    "mutate, expected",
    [
        (lambda d: d.update(q="4"), SchemaError),
        (lambda d: d.update(q=1), DomainError),
        (lambda d: d.update(terms=[]), SchemaError),
        (lambda d: d.update(bogus=1), SchemaError),
        (lambda d: d.pop("terms"), SchemaError),
        (lambda d: d["terms"][0].update(kind="cubic"), SchemaError),
        (lambda d: d["terms"][0].update(indices=[1, 1, 2, 3]), DomainError),
        (lambda d: d["terms"][0].update(indices=[0, 1, 2, 3]), DomainError),
        (lambda d: d["terms"][0].update(indices=[1, 2, 3, 5]), DomainError),
        (lambda d: d["terms"][0].update(beta=[1.0, 2.0]), DimensionError),
        (lambda d: d["terms"][0].pop("beta"), SchemaError),
        (lambda d: d["terms"][0].update(A=[[1.0]]), SchemaError),
        (lambda d: d["terms"][0].update(offset="x"), SchemaError),
    ],
)
def test_parse_rejections(mutate, expected):
    doc = json.loads(json.dumps(REFERENCE_DOC))
    mutate(doc)
    with pytest.raises(expected):
        parse_spec(doc)


def test_parse_rejects_invalid_json_text():
    with pytest.raises(SchemaError):
        parse_spec("{not json")


def test_bilinear_params_shape_checked():
    doc = {"q": 3, "terms": [{"kind": "bilinear", "indices": [1, 2], "A": [[1.0, 2.0]]}]}
    with pytest.raises(DimensionError):
        parse_spec(doc)


def test_overflowing_exponential_raises_non_finite():
    spec = parse_spec(
        {"q": 2, "terms": [{"kind": "exp_linear", "indices": [1, 2], "beta": [500.0, 500.0]}]}
    )
    with pytest.raises(NonFiniteError):
        evaluate(spec, np.ones(2, dtype=np.uint8))


def test_evaluate_rejects_wrong_length_and_non_binary():
    spec = parse_spec(REFERENCE_DOC)
    with pytest.raises(DimensionError):
        evaluate(spec, np.ones(3, dtype=np.uint8))
    with pytest.raises(DomainError):
        evaluate(spec, np.array([2, 0, 0, 0]))


def test_complement_involution_and_size():
    rng = np.random.default_rng(3)
    for _ in range(20):
        q = int(rng.integers(2, 12))
        z = rng.integers(0, 2, size=q).astype(np.uint8)
        zc = complement(z)
        np.testing.assert_array_equal(complement(zc), z)
        assert z.sum() + zc.sum() == q
    np.testing.assert_array_equal(complement(np.array([1, 0, 1, 0])), [0, 1, 0, 1])
    np.testing.assert_array_equal(complement(np.ones(4, dtype=np.uint8)), np.zeros(4))


def test_prefix_coalition_definition():
    # players are 0-based internally: order (2,0,1), target player 1
    perm = np.array([2, 0, 1])
    np.testing.assert_array_equal(prefix_coalition(perm, 1), [1, 0, 1])
    np.testing.assert_array_equal(prefix_coalition(perm, 2), [0, 0, 0])
    identity = np.arange(5)
    np.testing.assert_array_equal(prefix_coalition(identity, 0), np.zeros(5))


def test_prefix_chain_is_strictly_increasing():
    rng = np.random.default_rng(4)
    for _ in range(10):
        q = int(rng.integers(2, 9))
        perm = rng.permutation(q)
        previous = np.zeros(q, dtype=np.uint8)
        for t in range(q):
            current = prefix_coalition(perm, int(perm[t])).copy()
            current[perm[t]] = 1
            assert current.sum() == previous.sum() + 1
            assert np.all(current >= previous)
            previous = current
        assert previous.sum() == q


def test_reverse_and_inverse_positions():
    perm = np.array([2, 0, 3, 1])
    np.testing.assert_array_equal(reverse_permutation(reverse_permutation(perm)), perm)
    inv = inverse_positions(perm)
    for j in range(4):
        assert perm[inv[j]] == j


def test_reversal_identity_exhaustive_small_q():
    # prefix of j in the reversed order = complement of (prefix of j plus j)
    import itertools

    for q in range(2, 7):
        for perm in itertools.permutations(range(q)):
            perm = np.asarray(perm)
            rev = reverse_permutation(perm)
            for j in range(q):
                lhs = prefix_coalition(rev, j)
                joined = prefix_coalition(perm, j).copy()
                joined[j] = 1
                np.testing.assert_array_equal(lhs, complement(joined))


def test_evaluator_counts_and_caches_grand_value(reference_spec):
    ev = GameEvaluator(reference_spec)
    assert ev.eval_count == 0
    ev.evaluate(np.ones(4, dtype=np.uint8))
    assert ev.eval_count == 1
    ev.evaluate_many(np.zeros((5, 4), dtype=np.uint8))
    assert ev.eval_count == 6
    first = ev.grand_value()
    second = ev.grand_value()
    assert first == second
    assert ev.eval_count == 7  # cached after one counted call


def test_evaluator_wraps_table_games(hand_game_q3):
    assert hand_game_q3.q == 3
    assert hand_game_q3.evaluate(np.array([1, 0, 0])) == 1.0
    assert hand_game_q3.evaluate(np.array([1, 1, 1])) == 17.0
