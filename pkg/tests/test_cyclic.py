import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_tm_array, seeds
from pca_markov.core import validate_tm
from pca_markov.cyclic import analyze_hz_cyclic, check_diag_powers, cyclic_kmax, verify_theorem4
from pca_markov.generators import gen_commuting_pair, gen_cond3_tm
from pca_markov.hz import Verdict, analyze_hz, candidate_solution, kernel_pair_to_tm
from pca_markov.oracle import exact_hz_distribution, is_hzcmc


def test_kmax():
    assert cyclic_kmax(2) == 3
    assert cyclic_kmax(2, 2) == 2
    assert cyclic_kmax(4, 10) == 5


@given(st.integers(1, 3), seeds)
def test_first_diagonal_always_matches(kappa, seed):
    sol = candidate_solution(gen_cond3_tm(kappa, seed))
    r = check_diag_powers(sol.d, sol.u, 1)
    assert r.ok and r.residual <= 1e-9


@given(st.integers(1, 3), seeds)
def test_commuting_pairs_pass_every_circumference(kappa, seed):
    d, u = gen_commuting_pair(kappa, seed)
    tm = kernel_pair_to_tm(d, u)
    a = analyze_hz_cyclic(tm)
    assert a.verdict is Verdict.MARKOV_PROVEN
    for n in (1, 2, 3, 7):
        assert verify_theorem4(tm, d, u, n)


def test_diag_power_witness_is_worst_power():
    d = np.array([[0.1, 0.9, 0.0], [0.0, 0.2, 0.8], [0.7, 0.0, 0.3]])
    u = np.array([[0.5, 0.0, 0.5], [0.4, 0.6, 0.0], [0.0, 0.3, 0.7]])
    gaps = [
        np.max(np.abs(np.diag(np.linalg.matrix_power(d @ u, k) - np.linalg.matrix_power(u @ d, k))))
        for k in (1, 2, 3)
    ]
    r = check_diag_powers(d, u, 3, 1e-12)
    assert r.witness == (int(np.argmax(gaps)) + 1,)
    assert r.residual == pytest.approx(max(gaps))


def test_cycle_verdict_matches_exact_oracle():
    """Both sides decided independently: kernels from T versus the exact joint law."""
    for seed in range(12):
        tm = gen_cond3_tm(2, seed)
        for n in (3, 4):
            a = analyze_hz_cyclic(tm, n)
            fit = is_hzcmc(exact_hz_distribution(tm, n))
            assert a.ok == fit.ok
    for seed in range(6):
        d, u = gen_commuting_pair(2, seed)
        tm = kernel_pair_to_tm(d, u)
        assert analyze_hz_cyclic(tm, 3).ok
        assert is_hzcmc(exact_hz_distribution(tm, 3)).ok


def test_short_cycles_need_fewer_powers():
    # at n = 1 only the first diagonal matters, which always agrees
    for seed in range(10):
        tm = gen_cond3_tm(2, seed)
        assert analyze_hz_cyclic(tm, 1).ok
        assert not analyze_hz(tm).ok


def test_cycle_failure_details():
    tm = gen_cond3_tm(2, 0)
    a = analyze_hz_cyclic(tm, 3)
    assert a.verdict is Verdict.NOT_MARKOV_PROVEN
    assert a.failed == "cond_cyclic_diag"
    assert a.details["kmax"] == 3
    b = analyze_hz_cyclic(validate_tm(random_tm_array(2, 0)))
    assert b.failed == "cond_gibbs1"
