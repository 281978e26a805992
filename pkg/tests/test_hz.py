import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import kappas, random_tm_array, seeds
from reference import eig_left, gibbs1_residual, pair_tm
from pca_markov.core import (
    EtaNotFullSupport,
    ZeroDenominator,
    ZeroPairProbability,
    product_tm,
    validate_tm,
)
from pca_markov.generators import gen_commuting_pair, gen_cond3_tm
from pca_markov.hz import (
    Verdict,
    analyze_hz,
    build_kernels_eta,
    build_x,
    candidate_solution,
    check_cond_dut,
    check_cond_gibbs1,
    check_cond_gibbs_g,
    commutator_norm,
    kernel_pair_to_tm,
    time_reversal_tm,
    verify_theorem1,
    y_matrix,
)

# frozen from the loop-based reference on gen_cond3_tm(2, 0)
COND3_K2_S0 = {
    "nu": [0.14251179569180508, 0.6697748842025123, 0.18771332010568267],
    "gamma": [0.4961009601108943, 0.13933760075639942, 0.36456143913270617],
    "lam": 1.0304294102577292,
    "rho": [0.13847985794057657, 0.6641158889987897, 0.1974042530606338],
}
# stationary law of D U for gen_commuting_pair(2, 3)
COMMUTING_K2_S3_RHO = [0.30015193106554255, 0.16115967257712913, 0.5386883963573283]


def test_product_tm_passes_with_zero_residual():
    tm = product_tm([0.3, 0.7])
    r = check_cond_gibbs1(tm)
    assert r.ok and r.residual == 0.0 and r.witness is None
    a = analyze_hz(tm)
    assert a.verdict is Verdict.MARKOV_PROVEN
    np.testing.assert_allclose(a.solution.rho, [0.3, 0.7], atol=1e-12)


def test_gibbs1_matches_reference_loop():
    for seed in range(10):
        tm = validate_tm(random_tm_array(2, seed))
        r = check_cond_gibbs1(tm)
        assert not r.ok
        assert r.residual == pytest.approx(gibbs1_residual(tm.t), rel=1e-12)


def test_perturbed_entry_is_the_witness():
    tm = gen_cond3_tm(1, 11)
    t = tm.t.copy()
    t[1, 1, 1] += 0.05
    t[1, 1] /= t[1, 1].sum()
    r = check_cond_gibbs1(validate_tm(t))
    assert not r.ok
    assert r.witness == (1, 1, 1)


def test_gibbs1_requires_tauxg():
    t = random_tm_array(1, 0)
    t[1, 0] = [0.0, 1.0]
    with pytest.raises(ZeroDenominator):
        check_cond_gibbs1(validate_tm(t))


@given(kappas, seeds)
def test_pair_tm_satisfies_both_identities(kappa, seed):
    d, u = gen_commuting_pair(kappa, seed)
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.05, 1, u.shape)
    u /= u.sum(axis=1, keepdims=True)  # need not commute
    tm = kernel_pair_to_tm(d, u)
    np.testing.assert_allclose(tm.t, pair_tm(d, u), atol=1e-14)
    assert check_cond_gibbs1(tm).ok
    assert check_cond_gibbs_g(tm).ok


@given(st.integers(1, 2), seeds)
def test_gibbs1_and_gibbs_g_agree_on_positive_rate(kappa, seed):
    tm = validate_tm(random_tm_array(kappa, seed))
    assert check_cond_gibbs1(tm).ok == check_cond_gibbs_g(tm).ok
    tm = gen_cond3_tm(kappa, seed)
    assert check_cond_gibbs1(tm).ok == check_cond_gibbs_g(tm).ok


def test_gibbs_g_degenerate_indices_hold_for_any_tm():
    tm = validate_tm(random_tm_array(2, 4))
    r = check_cond_gibbs_g(tm)
    assert not r.ok
    a, ap, b, bp, c, cp = r.witness
    assert a != ap and b != bp and c != cp


@given(kappas, seeds)
def test_commuting_pair_is_recovered(kappa, seed):
    d, u = gen_commuting_pair(kappa, seed)
    a = analyze_hz(kernel_pair_to_tm(d, u))
    assert a.verdict is Verdict.MARKOV_PROVEN
    np.testing.assert_allclose(a.solution.d, d, atol=1e-9)
    np.testing.assert_allclose(a.solution.u, u, atol=1e-9)
    rho = a.solution.rho
    np.testing.assert_allclose(rho @ a.solution.m, rho, atol=1e-10)
    np.testing.assert_allclose(rho, eig_left(d @ u)[0], atol=1e-10)


def test_frozen_commuting_rho():
    d, u = gen_commuting_pair(2, 3)
    a = analyze_hz(kernel_pair_to_tm(d, u))
    np.testing.assert_allclose(a.solution.rho, COMMUTING_K2_S3_RHO, atol=1e-11)


def test_frozen_pipeline_values():
    sol = candidate_solution(gen_cond3_tm(2, 0))
    np.testing.assert_allclose(sol.nu, COND3_K2_S0["nu"], atol=1e-12)
    np.testing.assert_allclose(sol.gamma, COND3_K2_S0["gamma"], atol=1e-12)
    np.testing.assert_allclose(sol.lam, COND3_K2_S0["lam"], rtol=1e-12)
    np.testing.assert_allclose(sol.rho, COND3_K2_S0["rho"], atol=1e-12)


@given(st.integers(1, 3), seeds)
def test_rho_is_gamma_times_mu(kappa, seed):
    sol = candidate_solution(gen_cond3_tm(kappa, seed))
    r = sol.gamma * sol.mu
    np.testing.assert_allclose(sol.rho, r / r.sum(), atol=1e-15)
    np.testing.assert_allclose(sol.gamma @ sol.x, sol.lam * sol.gamma, atol=1e-11)
    np.testing.assert_allclose(sol.d.sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(sol.u.sum(axis=1), 1.0, atol=1e-14)
    assert sol.unreachable == ()


def test_x_and_y_matrices():
    tm = gen_cond3_tm(2, 0)
    t = tm.t
    y = y_matrix(tm)
    for i in range(3):
        np.testing.assert_array_equal(y[i], t[i, i])
    nu = np.array(COND3_K2_S0["nu"])
    x = build_x(tm, nu)
    for d in range(3):
        for a in range(3):
            assert x[d, a] == pytest.approx(t[a, a, 0] * nu[a] / t[a, d, 0], rel=1e-14)


def test_kernels_eta_errors():
    tm = gen_cond3_tm(1, 0)
    with pytest.raises(EtaNotFullSupport):
        build_kernels_eta(tm, [1.0, 0.0])
    d, u = build_kernels_eta(tm, [0.5, 0.5])
    np.testing.assert_allclose(d.sum(axis=1), 1.0)


def test_cond3_kappa2_generically_fails_commutation():
    fails = 0
    for seed in range(20):
        a = analyze_hz(gen_cond3_tm(2, seed))
        if a.verdict is Verdict.NOT_MARKOV_PROVEN:
            assert a.failed == "cond_commut"
            assert a.solution is not None
            assert a.solution.diag_residual <= 1e-9
            fails += 1
    assert fails == 20


@given(seeds)
def test_kappa1_gibbs1_implies_commutation(seed):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = analyze_hz(gen_cond3_tm(1, seed))
    assert a.verdict is Verdict.MARKOV_PROVEN


def test_gibbs1_failure_is_reported():
    a = analyze_hz(validate_tm(random_tm_array(2, 7)))
    assert a.verdict is Verdict.NOT_MARKOV_PROVEN
    assert a.failed == "cond_gibbs1"
    assert a.details["witness"] is not None


def test_inconclusive_without_tauxg():
    t = random_tm_array(1, 2)
    t[0, 1] = [0.0, 1.0]
    a = analyze_hz(validate_tm(t))
    assert a.verdict is Verdict.INCONCLUSIVE


def test_zero_rate_entries_allowed_with_tauxg():
    # D with a zero entry: T has zeros yet T(a,b,0) > 0 and T(0,0,c) > 0
    d = np.array([[0.6, 0.3, 0.1], [0.3, 0.7, 0.0], [0.2, 0.5, 0.3]])
    u = 0.5 * np.eye(3) + 0.5 * d
    tm = kernel_pair_to_tm(d, u)
    a = analyze_hz(tm)
    assert a.verdict is Verdict.MARKOV_PROVEN
    np.testing.assert_allclose(a.solution.d, d, atol=1e-9)
    np.testing.assert_allclose(a.solution.u, u, atol=1e-9)


@given(kappas, seeds)
def test_split_identity_and_time_reversal(kappa, seed):
    d, u = gen_commuting_pair(kappa, seed)
    tm = kernel_pair_to_tm(d, u)
    assert check_cond_dut(tm, d, u).ok
    assert verify_theorem1(tm, d, u)
    rev = time_reversal_tm(d, u)
    assert verify_theorem1(rev, u, d)
    a = analyze_hz(rev)
    np.testing.assert_allclose(a.solution.d, u, atol=1e-9)
    np.testing.assert_allclose(a.solution.u, d, atol=1e-9)


def test_dut_fails_for_wrong_pair():
    d, u = gen_commuting_pair(2, 1)
    tm = kernel_pair_to_tm(d, u)
    r = check_cond_dut(tm, u, d)
    assert not r.ok and r.witness is not None


def test_zero_pair_probability():
    d = np.array([[1.0, 0.0], [0.5, 0.5]])
    u = np.array([[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ZeroPairProbability):
        kernel_pair_to_tm(d, u)


def test_commutator_norm():
    d, u = gen_commuting_pair(3, 0)
    assert commutator_norm(d, u) <= 1e-14
    assert commutator_norm(d, np.eye(4)[[1, 0, 2, 3]]) > 1e-3
