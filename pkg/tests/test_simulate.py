import hashlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from reference import ca_step
from pca_markov.core import WindowTooLarge, product_tm, validate_tm
from pca_markov.generators import gen_commuting_pair
from pca_markov.hz import analyze_hz, kernel_pair_to_tm
from pca_markov.simulate import SpaceTimeDiagram, _uniforms, pattern_stats, simulate, thread_count


def _deterministic(rule, k):
    t = np.zeros((k, k, k))
    for a in range(k):
        for b in range(k):
            t[a, b, rule[a, b]] = 1.0
    return validate_tm(t)


def test_deterministic_rule_reproduces_cellular_automaton():
    rule = np.array([[0, 1], [1, 0]])  # xor of the two parents
    tm = _deterministic(rule, 2)
    init = np.random.default_rng(0).integers(0, 2, 37)
    dg = simulate(tm, 37, 25, seed=1, init=init)
    row = init
    for t in range(1, 26):
        row = ca_step(rule, row)
        np.testing.assert_array_equal(dg.rows[t], row)


@given(st.integers(2, 70), st.integers(0, 12), seeds)
def test_threads_do_not_change_output(width, steps, seed):
    tm = product_tm([0.2, 0.3, 0.5])
    ref = simulate(tm, width, steps, seed).to_bytes()
    for threads in (2, 3, 8):
        assert simulate(tm, width, steps, seed, threads=threads).to_bytes() == ref


def test_same_seed_same_diagram_other_seed_differs():
    d, u = gen_commuting_pair(2, 1)
    tm = kernel_pair_to_tm(d, u)
    a = simulate(tm, 64, 50, 7)
    b = simulate(tm, 64, 50, 7)
    c = simulate(tm, 64, 50, 8)
    assert hashlib.sha256(a.to_bytes()).digest() == hashlib.sha256(b.to_bytes()).digest()
    assert a.to_bytes() != c.to_bytes()


@pytest.mark.parametrize("start", [0, 4, 8, 12, 100])
def test_stream_chunks_are_slices_of_the_row_stream(start):
    full = _uniforms(42, 3, 0, 128)
    np.testing.assert_array_equal(_uniforms(42, 3, start, 128), full[start:])


def test_thread_cap_from_environment(monkeypatch):
    monkeypatch.setenv("PCA_MARKOV_THREADS", "2")
    assert thread_count(8) == 2
    assert thread_count(None) == 2
    monkeypatch.delenv("PCA_MARKOV_THREADS")
    assert thread_count(None) == 1
    assert thread_count(4) == 4


def test_values_stay_in_alphabet_and_shape():
    tm = product_tm([0.1, 0.2, 0.3, 0.4])
    dg = simulate(tm, 16, 30, 0)
    assert dg.rows.shape == (31, 16)
    assert dg.rows.max() <= 3
    with pytest.raises(ValueError):
        simulate(tm, 1, 10, 0)


def test_export_round_trips(tmp_path):
    tm = product_tm([0.4, 0.6])
    dg = simulate(tm, 10, 5, 99)
    back = SpaceTimeDiagram.from_bytes(dg.to_bytes())
    assert (back.width, back.steps, back.kappa, back.seed) == (10, 5, 1, 99)
    np.testing.assert_array_equal(back.rows, dg.rows)
    np.testing.assert_array_equal(SpaceTimeDiagram.rows_from_text(dg.to_text()), dg.rows)
    dg.save(tmp_path / "d.txt", "text")
    assert (tmp_path / "d.txt").read_text().splitlines()[0] == " ".join(map(str, dg.rows[0]))
    dg.save(tmp_path / "d.bin")
    assert (tmp_path / "d.bin").read_bytes() == dg.to_bytes()


def test_constant_diagram_puts_all_mass_on_zero_word():
    tm = product_tm([1.0, 0.0])
    dg = simulate(tm, 12, 20, 0)
    st_ = pattern_stats(dg, 3, 5)
    assert st_.counts[0] == 12 * 15
    assert st_.counts.sum() == st_.width * st_.rows_used
    assert st_.freq[0] == 1.0


def test_pattern_indices_are_lexicographic():
    tm = product_tm([0.5, 0.5])
    dg = simulate(tm, 8, 4, 3)
    st_ = pattern_stats(dg, 2, 1)
    manual = np.zeros(4, dtype=int)
    for row in dg.rows[2:]:
        for i in range(8):
            manual[2 * row[i] + row[(i + 1) % 8]] += 1
    np.testing.assert_array_equal(st_.counts, manual)
    assert st_.pattern(2) == (1, 0)


def test_window_and_burn_in_checks():
    dg = simulate(product_tm([0.5, 0.5]), 4, 10, 0)
    with pytest.raises(WindowTooLarge):
        pattern_stats(dg, 5, 2)
    with pytest.raises(ValueError):
        pattern_stats(dg, 2, 10)
    assert pattern_stats(dg, 2).burn_in == 5


def test_product_tm_rows_are_iid():
    rho = np.array([0.25, 0.75])
    dg = simulate(product_tm(rho), 256, 400, 11)
    one = pattern_stats(dg, 1, 100)
    assert one.agrees(rho, z=4.0)
    two = pattern_stats(dg, 2, 100)
    assert two.agrees(np.outer(rho, rho).ravel(), z=4.0, bonferroni=True)


def test_zigzag_instance_triple_frequencies():
    d, u = gen_commuting_pair(2, 3)
    tm = kernel_pair_to_tm(d, u)
    sol = analyze_hz(tm).solution
    m, rho = sol.m, sol.rho
    expected = np.einsum("a,ab,bc->abc", rho, m, m).ravel()
    st_ = pattern_stats(simulate(tm, 512, 1200, 5), 3, 600)
    assert st_.agrees(expected, z=4.0, bonferroni=True)


def test_bonferroni_raises_threshold():
    st_ = pattern_stats(simulate(product_tm([0.5, 0.5]), 8, 120, 0), 2, 10)
    exp = np.full(4, 0.25)
    z = st_.z_scores(exp)
    assert st_.agrees(exp, z=z.max() + 1e-9)
    assert st_.agrees(exp, z=z.max() - 1e-3, bonferroni=True) or z.max() < 1e-3
