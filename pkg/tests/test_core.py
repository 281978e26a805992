import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import kappas, random_tm_array, seeds
from pca_markov.core import (
    NegativeEntry,
    RowSumViolation,
    ShapeMismatch,
    TransitionMatrix,
    check_cond_tauxg,
    check_kernel,
    check_prob,
    is_positive_rate,
    load_tm,
    product_tm,
    rank_one,
    save_tm,
    tm_from_json,
    tm_to_json,
    uniform_tm,
    validate_tm,
)


def test_validate_accepts_stochastic_tensor():
    tm = validate_tm(random_tm_array(2, 0))
    assert isinstance(tm, TransitionMatrix)
    assert tm.kappa == 2 and tm.size == 3
    np.testing.assert_allclose(tm.t.sum(axis=2), 1.0, atol=1e-15)


def test_validated_tensor_is_read_only():
    tm = uniform_tm(1)
    with pytest.raises(ValueError):
        tm.t[0, 0, 0] = 0.3


def test_negative_entry_reports_index():
    t = random_tm_array(1, 1)
    t[1, 0, 1] = -0.1
    with pytest.raises(NegativeEntry) as err:
        validate_tm(t)
    assert err.value.index == (1, 0, 1)


def test_row_sum_violation_reports_pair():
    t = random_tm_array(2, 2)
    t[2, 1] *= 1.01
    with pytest.raises(RowSumViolation) as err:
        validate_tm(t)
    assert (err.value.a, err.value.b) == (2, 1)


def test_small_deviation_is_renormalised():
    t = random_tm_array(2, 3)
    t[0, 0] *= 1 + 1e-14
    tm = validate_tm(t)
    assert abs(tm.t[0, 0].sum() - 1.0) < 1e-15


@pytest.mark.parametrize("shape", [(2, 2), (2, 2, 3), (1, 1, 1), (3, 2, 3)])
def test_bad_shapes(shape):
    with pytest.raises(ShapeMismatch):
        validate_tm(np.full(shape, 0.5))


def test_kappa_must_match_shape():
    with pytest.raises(ShapeMismatch):
        validate_tm(random_tm_array(1, 0), kappa=2)


def test_nan_rejected():
    t = random_tm_array(1, 0)
    t[0, 1, 0] = np.nan
    with pytest.raises(ShapeMismatch):
        validate_tm(t)


@given(kappas, seeds)
def test_validate_is_idempotent(kappa, seed):
    t = random_tm_array(kappa, seed)
    once = validate_tm(t)
    twice = validate_tm(once)
    assert np.array_equal(once.t, twice.t)
    assert once == twice and hash(once) == hash(twice)


@given(kappas, seeds)
def test_json_round_trip(kappa, seed):
    tm = validate_tm(random_tm_array(kappa, seed))
    back = tm_from_json(tm_to_json(tm))
    assert back == tm


def test_json_extra_keys_and_file_round_trip(tmp_path):
    tm = product_tm([0.25, 0.75])
    path = tmp_path / "tm.json"
    save_tm(path, tm, note="x")
    assert json.loads(path.read_text())["note"] == "x"
    assert load_tm(path) == tm


@pytest.mark.parametrize(
    "text",
    [
        '{"kappa": 1, "t": [[[NaN, 1], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]}',
        '{"kappa": 1, "t": [[[Infinity, 0], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]}',
        '{"kappa": 2, "t": [[[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]}',
        '{"kappa": 1, "t": [[[0.5, 0.5], [0.5]], [[0.5, 0.5], [0.5, 0.5]]]}',
        '{"t": []}',
        "[1, 2]",
        '{"kappa": true, "t": [[[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]}',
    ],
)
def test_json_rejects_malformed(text):
    with pytest.raises(ValueError):
        tm_from_json(text)


def test_product_and_uniform():
    rho = np.array([0.2, 0.3, 0.5])
    tm = product_tm(rho)
    for a in range(3):
        for b in range(3):
            np.testing.assert_array_equal(tm.t[a, b], rho)
    assert is_positive_rate(uniform_tm(3))
    np.testing.assert_array_equal(rank_one(rho), np.tile(rho, (3, 1)))


def test_positive_rate_and_tauxg():
    t = random_tm_array(1, 5)
    t[1, 1] = [0.0, 1.0]
    tm = validate_tm(t)
    assert not is_positive_rate(tm)
    assert not check_cond_tauxg(tm)
    t = random_tm_array(1, 5)
    t[1, 1] = [1.0, 0.0]
    tm = validate_tm(t)
    assert not is_positive_rate(tm)
    assert check_cond_tauxg(tm)


def test_kernel_and_prob_checks():
    check_kernel(np.eye(3))
    with pytest.raises(RowSumViolation):
        check_kernel([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(NegativeEntry):
        check_kernel([[1.5, -0.5], [0.5, 0.5]])
    with pytest.raises(ShapeMismatch):
        check_kernel(np.eye(3), size=2)
    check_prob([0.1, 0.9])
    with pytest.raises(RowSumViolation):
        check_prob([0.1, 0.8])
    with pytest.raises(ShapeMismatch):
        check_prob([[1.0]])


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5))
def test_product_tm_rows_are_rho(weights):
    rho = np.array(weights) / sum(weights)
    tm = product_tm(rho)
    np.testing.assert_allclose(tm.t, np.broadcast_to(rho, tm.t.shape), atol=1e-15)
