"""Discretized chains: reversibility, flow, s-conductance, isoperimetry, overlap."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chrwalk import conductance, diagnostics, geometry, schemes
from chrwalk.conductance import (
    DiscreteChain,
    PartitionDistanceError,
    chain_from_matrix,
    chain_power,
    discrete_overlap_nu,
    discretize_chr,
    discretize_gaussian,
    ergodic_flow,
    flow_vs_bound_check,
    isoperimetry_check,
    kernel_tv_exact,
    overlap_check,
    overlap_flow_bound,
    s_conductance,
    tv_curve,
    validate_chain,
    warm_start_discrepancy,
)
from chrwalk.geometry import make_polytope, unit_cube


def test_discretize_chr_two_by_two_hand_matrix():
    # states in index order (0,0),(0,1),(1,0),(1,1); along each axis the line
    # has two cells, so each (cell, axis) pair contributes weight 1/4
    chain = discretize_chr(unit_cube(2), 2)
    expected = np.array([
        [0.5, 0.25, 0.25, 0.0],
        [0.25, 0.5, 0.0, 0.25],
        [0.25, 0.0, 0.5, 0.25],
        [0.0, 0.25, 0.25, 0.5],
    ])
    assert_allclose(chain.P, expected)
    assert_allclose(chain.pi, 0.25)


def test_discretize_chr_collinear_cells():
    # triangle {y >= 0, y + |x| <= 1} at 2 cells/axis keeps only the bottom
    # row: the chain mixes in one step along it, the other axis self-loops
    triangle = make_polytope([[0.0, -1.0], [1.0, 1.0], [-1.0, 1.0]], [0.0, 1.0, 1.0])
    chain = discretize_chr(triangle, 2)
    assert chain.size == 2
    assert np.all(chain.states[:, 1] == chain.states[0, 1])
    assert_allclose(chain.P, [[0.75, 0.25], [0.25, 0.75]])


def test_discretize_chr_reversibility_random_polytopes():
    rng = np.random.default_rng(1)
    for _ in range(5):
        body = geometry.random_sandwiched_polytope(2, 6, rng)
        diag = validate_chain(discretize_chr(body, 8))
        assert diag.reversibility_dev <= 1e-12
        assert diag.row_sum_dev <= 1e-12
        assert diag.stationarity_dev <= 1e-10


def test_discretize_chr_three_dim():
    chain = discretize_chr(unit_cube(3), 3)
    assert chain.size == 27
    assert validate_chain(chain).reversibility_dev <= 1e-12


def test_discretize_gaussian_reversible():
    chain = discretize_gaussian(unit_cube(2), 6, sigma=0.3)
    diag = validate_chain(chain)
    assert diag.reversibility_dev <= 1e-12
    assert diag.row_sum_dev <= 1e-12


def test_body_without_cells_rejected():
    # grid centers of a skewed sliver miss the body entirely at 1 cell/axis is
    # impossible; instead check the minimum state count guard
    with pytest.raises(ValueError):
        discretize_chr(unit_cube(2), 1)


def test_ergodic_flow_empty_target():
    chain = discretize_chr(unit_cube(2), 2)
    assert ergodic_flow(chain, [0, 1, 2, 3], []) == 0.0


def test_ergodic_flow_reversibility_symmetry():
    rng = np.random.default_rng(2)
    body = geometry.random_sandwiched_polytope(2, 6, rng)
    chain = discretize_chr(body, 6)
    for _ in range(100):
        size = int(rng.integers(1, chain.size))
        A = rng.choice(chain.size, size=size, replace=False)
        comp = np.setdiff1d(np.arange(chain.size), A)
        assert abs(ergodic_flow(chain, A, comp) - ergodic_flow(chain, comp, A)) <= 1e-14
        assert abs(ergodic_flow(chain, A) - ergodic_flow(chain, comp)) <= 1e-10


def test_s_conductance_two_state_closed_form():
    for p in (0.1, 0.35):
        chain = chain_from_matrix([[1 - p, p], [p, 1 - p]])
        res = s_conductance(chain, 0.0, mode="exact")
        assert_allclose(res.value, p, rtol=1e-12)
        assert res.subset.size == 1


def test_s_conductance_monotone_in_s():
    chain = discretize_chr(unit_cube(2), 3)
    values = [s_conductance(chain, s, mode="exact").value
              for s in (0.0, 0.05, 0.1, 0.2)]
    assert all(values[i + 1] >= values[i] - 1e-12 for i in range(len(values) - 1))


def test_s_conductance_exact_below_sweep():
    rng = np.random.default_rng(3)
    for _ in range(5):
        body = geometry.random_sandwiched_polytope(2, 6, rng)
        chain = discretize_chr(body, 4)
        if chain.size > 16:
            continue
        exact = s_conductance(chain, 0.1, mode="exact")
        sweep = s_conductance(chain, 0.1, mode="sweep", seed=7)
        assert sweep.is_upper_bound
        assert exact.value <= sweep.value + 1e-12


def test_s_conductance_no_admissible_subsets():
    # with 3 states the largest subset measure not above 1/2 is 1/3
    chain = chain_from_matrix(np.full((3, 3), 1 / 3))
    with pytest.raises(ValueError, match="admissible"):
        s_conductance(chain, 0.4, mode="exact")


def test_s_conductance_state_cap():
    P = np.eye(23)
    chain = chain_from_matrix(P)
    with pytest.raises(ValueError, match="capped"):
        s_conductance(chain, 0.1, mode="exact")


def test_warm_start_discrepancy_point_mass():
    chain = discretize_chr(unit_cube(2), 3)  # 9 states
    k = chain.size
    mu0 = np.zeros(k)
    mu0[0] = 1.0
    s = 0.05
    # fractional knapsack puts budget s*k on the heavy atom: (k-1)/k per unit
    assert_allclose(warm_start_discrepancy(chain, mu0, s), s * k * (1 - 1 / k))
    uniform = np.full(k, 1 / k)
    assert warm_start_discrepancy(chain, uniform, s) == 0.0


def test_tv_curve_monotone_and_initial_value():
    rng = np.random.default_rng(4)
    body = geometry.random_sandwiched_polytope(2, 6, rng)
    chain = discretize_chr(body, 4)
    mu0 = np.zeros(chain.size)
    mu0[0] = 1.0
    tvs = tv_curve(chain, mu0, 100)
    assert_allclose(tvs[0], 0.5 * np.abs(mu0 - chain.pi).sum())
    assert np.all(np.diff(tvs) <= 1e-12)


def test_chain_power_preserves_reversibility():
    chain = discretize_chr(unit_cube(2), 3)
    diag = validate_chain(chain_power(chain, 5))
    assert diag.reversibility_dev <= 1e-12


# ---------------------------------------------------------------------------
# isoperimetry
# ---------------------------------------------------------------------------

def test_isoperimetry_box_slab_closed_form():
    body = unit_cube(2)
    delta = 0.2
    res = isoperimetry_check(body, lambda X: X[:, 0] <= -delta / 2,
                             lambda X: X[:, 0] >= delta / 2, delta,
                             norm="l2", samples=40_000, seed=5)
    # analytic values: gap = delta/2 of the area, sides (1 - delta/2)/2 each
    assert abs(res.lhs_estimate - delta / 2) <= 3 * res.lhs_se
    coeff = 2 * delta / (2 * math.sqrt(2) - delta)
    assert abs(res.rhs_estimate - coeff * (1 - delta / 2) / 2) <= 3 * res.rhs_se + 0.01
    assert res.passed and not res.vacuous


def test_isoperimetry_empty_side_vacuous():
    body = unit_cube(2)
    res = isoperimetry_check(body, lambda X: X[:, 0] <= -2.0,
                             lambda X: X[:, 0] >= 0.5, 0.1, samples=2000, seed=6)
    assert res.vacuous and res.passed
    assert res.rhs_estimate == 0.0


def test_isoperimetry_distance_violation_detected():
    body = unit_cube(2)
    with pytest.raises(PartitionDistanceError):
        isoperimetry_check(body, lambda X: X[:, 0] <= 0.0,
                           lambda X: X[:, 0] >= 0.0 + 1e-9, 0.5,
                           samples=4000, seed=7)


def test_isoperimetry_linf_norm():
    body = unit_cube(2)
    res = isoperimetry_check(body, lambda X: X[:, 0] <= -0.2,
                             lambda X: X[:, 0] >= 0.2, 0.4, norm="linf",
                             samples=20_000, seed=8)
    assert res.diameter == pytest.approx(2.0)
    assert res.passed


# ---------------------------------------------------------------------------
# overlap property
# ---------------------------------------------------------------------------

def test_overlap_identical_starts_tv_near_zero():
    body = unit_cube(2)
    sampler = schemes.make_chr_kernel_sampler(steps=3)
    rng = np.random.default_rng(9)
    xs = sampler(body, np.zeros(2), 4000, rng)
    ys = sampler(body, np.zeros(2), 4000, rng)
    grid = diagnostics.grid_for_body(body, 5)
    est = diagnostics.two_sample_binned_tv(xs, ys, grid)
    assert est.value <= est.noise_floor + 3 * est.ci_halfwidth


def test_one_step_chr_kernels_disjoint():
    # one-step kernels from starts differing in every coordinate live on
    # different axis lines; a fine grid resolves TV near 1
    body = unit_cube(2)
    sampler = schemes.make_chr_kernel_sampler(steps=1)
    rng = np.random.default_rng(10)
    xs = sampler(body, np.array([-0.45, -0.3]), 20_000, rng)
    ys = sampler(body, np.array([0.25, 0.4]), 20_000, rng)
    grid = diagnostics.grid_for_body(body, 64)
    est = diagnostics.two_sample_binned_tv(xs, ys, grid)
    assert est.value >= 1.0 - 3.0 / 64 - 3 * est.ci_halfwidth


def test_overlap_check_gaussian_iterate():
    body = unit_cube(2)
    sigma = 1e-3
    params = schemes.GaussianWalkParams(sigma=sigma, tau=28)
    sampler = schemes.make_gaussian_iterate_sampler(params)
    res = overlap_check(body, sampler, r=0.2, delta=sigma, pair_count=3,
                        samples_per_kernel=20_000, seed=11, nu_threshold=0.25,
                        grid_halfwidth=6 * math.sqrt(28) * sigma)
    assert res.passed
    assert res.max_tv_estimate <= 0.75


def test_overlap_check_empty_core_raises():
    body = unit_cube(2)
    sampler = schemes.make_chr_kernel_sampler()
    with pytest.raises(ValueError):
        overlap_check(body, sampler, r=1.5, delta=0.1, pair_count=2,
                      samples_per_kernel=100, seed=12, nu_threshold=0.1)


def test_overlap_flow_bound_values():
    nu, R, n = 0.25, 2.0, 4
    sigma = 0.05
    D = 2 * R * math.sqrt(n)
    assert_allclose(overlap_flow_bound(nu, sigma, D), sigma / (16 * (D - sigma)),
                    rtol=1e-12)
    assert_allclose(overlap_flow_bound(0.25, 1.0, 2.0), 1.0 / 16.0)
    assert overlap_flow_bound(0.25, 1e-9, 2.0) < 1e-9
    with pytest.raises(ValueError):
        overlap_flow_bound(0.25, 1.0, 1.5)  # diameter below 2 delta


def test_flow_vs_bound_requires_overlap_evidence():
    chain = discretize_chr(unit_cube(2), 3)
    with pytest.raises(ValueError, match="overlap"):
        flow_vs_bound_check(chain, [0, 1], 0.25, 0.5, 2.83, 0.1)


def test_flow_vs_bound_vacuous_when_eps_swallows_cut():
    chain = discretize_chr(unit_cube(2), 3)
    res = flow_vs_bound_check(chain, [0], 0.25, 0.5, 2.83, eps=0.5,
                              assume_overlap=True)
    assert res.vacuous and res.passed and res.bound == 0.0


def test_flow_vs_bound_gaussian_grid_chain():
    # exact matrix flow against the overlap-derived bound, with the overlap
    # level itself computed exactly from the tau-step rows
    body = unit_cube(2)
    chain = discretize_gaussian(body, 6, sigma=0.25)
    ptau = chain_power(chain, 8)
    core = geometry.robust_interior_contains_many(body, chain.states, 0.15)
    assert np.all(core)
    delta = 0.5
    nu = discrete_overlap_nu(ptau, core, delta)
    assert nu > 0.25
    D = geometry.diameter(body, "l2")
    half = np.nonzero(chain.states[:, 0] <= 0)[0]
    res = flow_vs_bound_check(ptau, half, nu, delta, D, eps=0.0, assume_overlap=True)
    assert not res.vacuous
    assert res.passed
    rng = np.random.default_rng(13)
    for _ in range(50):
        size = int(rng.integers(1, chain.size))
        A = rng.choice(chain.size, size=size, replace=False)
        assert flow_vs_bound_check(ptau, A, nu, delta, D, eps=0.0,
                                   assume_overlap=True).passed


def test_kernel_tv_exact_bounds():
    chain = discretize_chr(unit_cube(2), 3)
    assert kernel_tv_exact(chain, 0, 0) == 0.0
    assert 0.0 <= kernel_tv_exact(chain, 0, chain.size - 1) <= 1.0
