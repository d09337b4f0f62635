"""Closed-form bound calculators against a high-precision arithmetic oracle."""

import math

import mpmath as mp
import numpy as np
import pytest
from numpy.testing import assert_allclose

from chrwalk import bounds, conductance, geometry, schemes
from chrwalk.bounds import (
    BoundParams,
    chr_conductance_lower_bound,
    chr_gaussian_flow_factor,
    composed_conductance_coefficient,
    gaussian_iterate_flow_bound,
    mixing_step_bound,
    multi_step_flow_factor,
    tv_bound_from_conductance,
)

mp.mp.dps = 50


def _oracle_mixing_steps(n, R, M, eps, C=1.0):
    val = (mp.mpf(C) * mp.mpf(M) ** 4 * mp.mpf(R) ** 4 * mp.mpf(n) ** 7
           * mp.log(n) ** 6 * mp.log(2 * mp.mpf(M) / mp.mpf(eps)) / mp.mpf(eps) ** 4)
    return int(mp.ceil(val)), val


def test_mixing_step_bound_reference_point():
    oracle_ceil, oracle_val = _oracle_mixing_steps(2, 1, 1, 0.25)
    assert oracle_ceil == 7557
    assert abs(float(oracle_val) - 7556.99990912646) < 1e-6
    assert mixing_step_bound(BoundParams(n=2, R=1, M=1, eps=0.25)) == 7557


def test_mixing_step_bound_random_params_vs_oracle():
    # float64 evaluation agrees with the arbitrary-precision product to
    # machine-relative accuracy (plus the ceil step)
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 50))
        R = float(rng.uniform(1, 10))
        M = float(rng.uniform(1, 10))
        eps = float(rng.uniform(0.01, 0.49))
        got = mixing_step_bound(BoundParams(n=n, R=R, M=M, eps=eps))
        _, oracle_val = _oracle_mixing_steps(n, R, M, eps)
        assert abs(got - float(oracle_val)) <= max(1.0, 1e-12 * float(oracle_val))


def test_mixing_step_bound_monotonicity():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        R = float(rng.uniform(1, 8))
        M = float(rng.uniform(1, 8))
        eps = float(rng.uniform(0.01, 0.45))
        base = mixing_step_bound(BoundParams(n=n, R=R, M=M, eps=eps))
        assert mixing_step_bound(BoundParams(n=n + 1, R=R, M=M, eps=eps)) >= base
        assert mixing_step_bound(BoundParams(n=n, R=R * 1.5, M=M, eps=eps)) >= base
        assert mixing_step_bound(BoundParams(n=n, R=R, M=M * 1.5, eps=eps)) >= base
        assert mixing_step_bound(BoundParams(n=n, R=R, M=M, eps=eps * 0.9)) >= base


def test_mixing_step_bound_power_law_in_n():
    # the n^7 factor alone contributes 128x when n doubles
    a = BoundParams(n=2, R=1, M=1, eps=0.25)
    b = BoundParams(n=4, R=1, M=1, eps=0.25)
    log_ratio_expected = 7 * math.log(2) + 6 * math.log(math.log(4) / math.log(2))
    got = math.log(mixing_step_bound(b) / mixing_step_bound(a))
    assert abs(got - log_ratio_expected) < 1e-3


def test_mixing_step_bound_rejects_bad_params():
    with pytest.raises(ValueError):
        BoundParams(n=1, R=1, M=1, eps=0.25)
    with pytest.raises(ValueError):
        BoundParams(n=2, R=1, M=1, eps=0.5)


def test_tv_bound_zero_steps():
    assert_allclose(tv_bound_from_conductance(0.3, 0.5, 0.1, 0), (1 + 10) * 0.3)


def test_tv_bound_geometric_decay_to_floor():
    h = 0.2
    val = tv_bound_from_conductance(h, 1.0, 0.1, 200)
    assert abs(val - h) < 1e-12
    ks = [0, 5, 10, 50]
    vals = [tv_bound_from_conductance(h, 0.4, 0.1, k) for k in ks]
    assert all(vals[i + 1] <= vals[i] for i in range(len(vals) - 1))


def test_tv_bound_warm_start_shape():
    # with h_s = M s the bound splits as M s + M (1 - phi^2/2)^k exactly
    M, s, phi, k = 3.0, 0.05, 0.3, 37
    lhs = tv_bound_from_conductance(M * s, phi, s, k)
    rhs = M * s + M * (1 - phi ** 2 / 2) ** k
    assert_allclose(lhs, rhs, rtol=1e-12)


def test_conductance_lower_bound_reference_point():
    val = chr_conductance_lower_bound(0.25, 1.0, 2)
    oracle = mp.mpf(1) / 16 / (mp.mpf(2) ** mp.mpf("3.5") * mp.log(2) ** 3)
    assert_allclose(val, float(oracle), rtol=1e-12)
    assert abs(val - 0.016594) < 1e-4  # quoted approximation
    assert chr_conductance_lower_bound(1e-6, 1.0, 2) < 1e-11
    assert_allclose(chr_conductance_lower_bound(0.25, 4.0, 2), val / 16, rtol=1e-12)


def test_flow_factor_identities():
    # the two closed forms agree: sigma sqrt(pi)/ (R sqrt 2) = sqrt(2 pi) sigma / (2 R)
    rng = np.random.default_rng(3)
    for _ in range(200):
        sigma = float(np.exp(rng.normal()))
        R = float(rng.uniform(1, 20))
        a = chr_gaussian_flow_factor(sigma, R)
        b = math.sqrt(2 * math.pi) * sigma / (2 * R)
        assert abs(a - b) <= 1e-14 * max(a, b)
    assert_allclose(chr_gaussian_flow_factor(math.sqrt(2) / math.sqrt(math.pi), 1.0),
                    1.0, rtol=1e-14)
    assert_allclose(chr_gaussian_flow_factor(0.1, 1.0), 0.12533141373155003, rtol=1e-12)


def test_multi_step_flow_factor():
    assert multi_step_flow_factor(1) == 1.0
    assert_allclose(multi_step_flow_factor(7), 1 / 7)
    with pytest.raises(ValueError):
        multi_step_flow_factor(0)


def test_multi_step_flow_inequality_on_small_chains():
    # single-step flow dominates (1/tau) of the tau-step flow, exactly
    rng = np.random.default_rng(4)
    P = np.array([[0.5, 0.5, 0.0], [0.5, 0.25, 0.25], [0.0, 0.25, 0.75]])
    chain = conductance.chain_from_matrix(P)
    for tau in range(2, 6):
        ptau = conductance.chain_power(chain, tau)
        for A in ([0], [1], [2], [0, 1], [0, 2]):
            assert (conductance.ergodic_flow(chain, A)
                    >= conductance.ergodic_flow(ptau, A) / tau - 1e-12)


def test_gaussian_flow_bound_values_and_clamp():
    assert gaussian_iterate_flow_bound(1e-3, 1.0, 2, 0.1, 0.05, 0.95) == 0.0
    val = gaussian_iterate_flow_bound(1e-3, 1.0, 2, 0.1, 0.5, 0.5, c_flow=1 / 32)
    oracle = mp.mpf("1e-3") / (32 * mp.sqrt(2)) * mp.mpf("0.4")
    assert_allclose(val, float(oracle), rtol=1e-12)
    assert abs(val - 8.84e-6) < 1e-8


def test_gaussian_flow_bound_regime_violation_raises():
    with pytest.raises(ValueError, match="regime"):
        gaussian_iterate_flow_bound(1e-3, 1.0, 2, 0.6, 0.5, 0.5)
    with pytest.raises(ValueError):
        gaussian_iterate_flow_bound(1e-3, 1.0, 2, 0.1, 0.7, 0.7)


def test_composed_coefficient_identity():
    # the assembled product of the three flow factors equals the closed-form
    # s-conductance bound with the composed constant, up to the ceil on tau
    rng = np.random.default_rng(5)
    c_star = composed_conductance_coefficient()
    assert_allclose(c_star, (1 / 32) * math.sqrt(math.pi / 2) / (20 * 100 ** 2),
                    rtol=1e-14)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        R = float(rng.uniform(1, 10))
        s = float(rng.uniform(0.01, 0.49))
        sigma = s / (100 * n * math.log(n))
        tau_raw = 20 * n * math.log(n)
        assembled = ((1.0 / tau_raw) * chr_gaussian_flow_factor(sigma, R)
                     * (1 / 32) * sigma / (R * math.sqrt(n)))
        closed = chr_conductance_lower_bound(s, R, n, c_cond=c_star)
        assert_allclose(assembled, closed, rtol=1e-12)


def test_tv_bound_dominates_exact_tv_on_chains():
    # finite-chain version of the conductance-to-mixing estimate
    rng = np.random.default_rng(6)
    body = geometry.random_sandwiched_polytope(2, 6, rng)
    chain = conductance.discretize_chr(body, 4)
    mu0 = np.zeros(chain.size)
    mu0[0] = 1.0
    tvs = conductance.tv_curve(chain, mu0, 150)
    for s in (0.05, 0.1):
        phi = conductance.s_conductance(chain, s, mode="exact").value
        h_s = conductance.warm_start_discrepancy(chain, mu0, s)
        for k in range(151):
            assert tv_bound_from_conductance(h_s, min(phi, 1.0), s, k) >= tvs[k] - 1e-12
