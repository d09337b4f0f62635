"""Brute-force ground truth on discretized chains, plus Monte Carlo checks of
the isoperimetric and overlap-to-flow inequalities.

Grid discretizations of the walks are exactly reversible with respect to the
uniform law on in-body cells, so ergodic flow, flow symmetry, s-conductance,
and TV-decay statements can be checked to floating-point accuracy on them.
These are consistency checks of the continuous statements, not proofs: no
claim is made that the discretization error is controlled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from . import diagnostics, geometry, schemes
from .geometry import ConvexBody

EXACT_ENUMERATION_MAX_STATES = 22
_ENUM_CHUNK = 1 << 16


class PartitionDistanceError(ValueError):
    """The claimed separation between partition classes is violated by samples."""


# ---------------------------------------------------------------------------
# discrete chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteChain:
    """Finite reversible chain on grid-cell centers with uniform stationary law."""

    states: np.ndarray   # (k, n) cell centers (synthetic coordinates allowed)
    P: np.ndarray        # (k, k) row-stochastic
    pi: np.ndarray       # (k,) stationary distribution

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def flow_matrix(self) -> np.ndarray:
        """S_ij = pi_i P_ij; symmetric iff the chain is reversible."""
        return self.pi[:, None] * self.P


@dataclass(frozen=True)
class ChainDiagnostics:
    row_sum_dev: float
    reversibility_dev: float
    stationarity_dev: float


def validate_chain(chain: DiscreteChain) -> ChainDiagnostics:
    P, pi = chain.P, chain.pi
    row_dev = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
    S = chain.flow_matrix()
    rev_dev = float(np.max(np.abs(S - S.T)))
    stat_dev = float(np.max(np.abs(pi @ P - pi)))
    return ChainDiagnostics(row_sum_dev=row_dev, reversibility_dev=rev_dev,
                            stationarity_dev=stat_dev)


def chain_from_matrix(P: np.ndarray, states: Optional[np.ndarray] = None) -> DiscreteChain:
    """Wrap a row-stochastic matrix (uniform stationary law) as a chain."""
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    if P.shape != (k, k):
        raise ValueError("P must be square")
    if np.any(P < -1e-15) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-10:
        raise ValueError("P must be row-stochastic")
    if states is None:
        states = np.arange(k, dtype=float)[:, None]
    return DiscreteChain(states=np.asarray(states, dtype=float), P=P,
                         pi=np.full(k, 1.0 / k))


def chain_power(chain: DiscreteChain, tau: int) -> DiscreteChain:
    """The tau-step chain; reversibility is preserved."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    return DiscreteChain(states=chain.states,
                         P=np.linalg.matrix_power(chain.P, tau), pi=chain.pi)


def discretize_chr(body: ConvexBody, cells_per_axis: int) -> DiscreteChain:
    """Grid surrogate of the coordinate walk.

    From a cell, pick an axis uniformly and move to a uniformly random in-body
    cell on the grid line through the current cell along that axis (the
    current cell included).  Every line move is uniform over a set shared by
    the whole line, which makes the chain doubly stochastic and exactly
    reversible with respect to the uniform law on cells.
    """
    if body.dim not in (2, 3):
        raise ValueError("grid discretization is supported in dimensions 2 and 3")
    grid = geometry.body_grid(body, cells_per_axis)
    k = grid.centers.shape[0]
    if k < 2:
        raise ValueError("discretization needs at least 2 in-body cells")
    n = body.dim
    P = np.zeros((k, k))
    idx = grid.index
    for axis in range(n):
        other = [j for j in range(n) if j != axis]
        keys = [tuple(row[other]) for row in idx]
        groups: dict[tuple, list[int]] = {}
        for state, key in enumerate(keys):
            groups.setdefault(key, []).append(state)
        for members in groups.values():
            w = 1.0 / (n * len(members))
            members = np.asarray(members)
            P[np.ix_(members, members)] += w
    return DiscreteChain(states=grid.centers, P=P, pi=np.full(k, 1.0 / k))


def discretize_gaussian(body: ConvexBody, cells_per_axis: int, sigma: float) -> DiscreteChain:
    """Grid surrogate of the Gaussian coordinate walk.

    Axis displacements are quantized to whole cells with the cell-integrated
    normal weights; proposals leaving the body (or the grid) are rejected in
    place.  The proposal is symmetric, so the chain is exactly reversible with
    respect to the uniform law on cells.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    grid = geometry.body_grid(body, cells_per_axis)
    k = grid.centers.shape[0]
    if k < 2:
        raise ValueError("discretization needs at least 2 in-body cells")
    n = body.dim
    lookup = {tuple(row): s for s, row in enumerate(grid.index)}
    P = np.zeros((k, k))
    for axis in range(n):
        h = grid.spacing[axis]
        max_jump = cells_per_axis - 1
        jumps = np.arange(-max_jump, max_jump + 1)
        weights = ndtr((jumps + 0.5) * h / sigma) - ndtr((jumps - 0.5) * h / sigma)
        for state, row in enumerate(grid.index):
            stay = 1.0 / n
            for jump, w in zip(jumps, weights):
                if jump == 0 or w == 0.0:
                    continue
                target_key = list(row)
                target_key[axis] += jump
                target = lookup.get(tuple(target_key))
                if target is None:
                    continue
                P[state, target] += w / n
                stay -= w / n
            P[state, state] += stay
    return DiscreteChain(states=grid.centers, P=P, pi=np.full(k, 1.0 / k))


# ---------------------------------------------------------------------------
# ergodic flow and s-conductance
# ---------------------------------------------------------------------------

def _as_index_array(chain: DiscreteChain, A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == bool:
        if A.shape != (chain.size,):
            raise ValueError("boolean subset mask has wrong length")
        return np.nonzero(A)[0]
    A = A.astype(int)
    if A.size and (A.min() < 0 or A.max() >= chain.size):
        raise ValueError("subset indices out of range")
    return A


def ergodic_flow(chain: DiscreteChain, A, B=None) -> float:
    """Stationary mass flowing from A into B (complement of A by default)."""
    A = _as_index_array(chain, A)
    if B is None:
        mask = np.ones(chain.size, dtype=bool)
        mask[A] = False
        B = np.nonzero(mask)[0]
    else:
        B = _as_index_array(chain, B)
    if A.size == 0 or B.size == 0:
        return 0.0
    S = chain.flow_matrix()
    return float(S[np.ix_(A, B)].sum())


@dataclass(frozen=True)
class SConductanceResult:
    value: float
    subset: np.ndarray
    s: float
    mode: str
    is_upper_bound: bool
    measure: float
    flow: float


def s_conductance(chain: DiscreteChain, s: float, mode: str = "exact",
                  seed=0, n_random: int = 200) -> SConductanceResult:
    """inf over subsets with s < pi(A) <= 1/2 of flow(A) / (pi(A) - s).

    ``exact`` enumerates all subsets (size capped at 22 states); ``sweep``
    returns an upper bound from spectral sweep cuts of the additively
    symmetrized matrix plus random subsets.
    """
    if not 0 <= s < 0.5:
        raise ValueError("s must lie in [0, 1/2)")
    k = chain.size
    sizes_admissible = [m for m in range(1, k + 1) if s < m / k <= 0.5]
    if not sizes_admissible:
        raise ValueError(f"no admissible subsets: s = {s} too large for {k} states")
    S = chain.flow_matrix()
    if mode == "exact":
        if k > EXACT_ENUMERATION_MAX_STATES:
            raise ValueError(
                f"exact enumeration capped at {EXACT_ENUMERATION_MAX_STATES} states")
        best_ratio = np.inf
        best_id = None
        row_totals = S.sum(axis=1)
        for start in range(1, 1 << k, _ENUM_CHUNK):
            ids = np.arange(start, min(start + _ENUM_CHUNK, 1 << k), dtype=np.int64)
            member = ((ids[:, None] >> np.arange(k)) & 1).astype(float)
            sizes = member.sum(axis=1)
            meas = sizes / k
            ok = (meas > s) & (meas <= 0.5)
            if not np.any(ok):
                continue
            member = member[ok]
            ids = ids[ok]
            meas = meas[ok]
            inner = np.einsum("si,ij,sj->s", member, S, member)
            flow = member @ row_totals - inner
            ratio = flow / (meas - s)
            j = int(np.argmin(ratio))
            if ratio[j] < best_ratio:
                best_ratio = float(ratio[j])
                best_id = int(ids[j])
        subset = np.nonzero([(best_id >> i) & 1 for i in range(k)])[0]
        return SConductanceResult(value=best_ratio, subset=subset, s=s, mode="exact",
                                  is_upper_bound=False,
                                  measure=subset.size / k,
                                  flow=ergodic_flow(chain, subset))
    if mode != "sweep":
        raise ValueError(f"unknown mode {mode!r}")

    sym = 0.5 * (chain.P + chain.P.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(eigvecs[:, -2])
    candidates = []
    for m in sizes_admissible:
        candidates.append(order[:m])
        candidates.append(order[::-1][:m])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        m = int(rng.choice(sizes_admissible))
        candidates.append(rng.choice(k, size=m, replace=False))
    best_ratio = np.inf
    best = None
    for A in candidates:
        meas = A.size / k
        ratio = ergodic_flow(chain, A) / (meas - s)
        if ratio < best_ratio:
            best_ratio = ratio
            best = np.sort(np.asarray(A))
    return SConductanceResult(value=float(best_ratio), subset=best, s=s, mode="sweep",
                              is_upper_bound=True, measure=best.size / k,
                              flow=ergodic_flow(chain, best))


def warm_start_discrepancy(chain: DiscreteChain, mu0: np.ndarray, s: float) -> float:
    """sup over fractional subsets g (0 <= g <= 1, pi(g) <= s) of |mu0(g) - pi(g)|.

    On atomic spaces the set version degenerates (no subset has measure below
    1/k except the empty one), so the warm-start discrepancy is taken in its
    fractional form, which is the quantity the mixing estimate propagates.
    """
    mu0 = np.asarray(mu0, dtype=float)
    pi = chain.pi
    if mu0.shape != pi.shape or abs(mu0.sum() - 1.0) > 1e-9 or np.any(mu0 < -1e-15):
        raise ValueError("mu0 must be a probability vector on the chain's states")

    def greedy(diff: np.ndarray) -> float:
        order = np.argsort(-diff / pi)
        budget = s
        total = 0.0
        for i in order:
            if diff[i] <= 0 or budget <= 0:
                break
            frac = min(1.0, budget / pi[i])
            total += frac * diff[i]
            budget -= frac * pi[i]
        return total

    return max(greedy(mu0 - pi), greedy(pi - mu0))


def tv_curve(chain: DiscreteChain, mu0: np.ndarray, k_max: int) -> np.ndarray:
    """Exact d_TV(mu_k, pi) for k = 0..k_max by matrix-vector powers."""
    mu = np.asarray(mu0, dtype=float).copy()
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        out[k] = 0.5 * np.abs(mu - chain.pi).sum()
        if k < k_max:
            mu = mu @ chain.P
    return out


# ---------------------------------------------------------------------------
# isoperimetry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsoperimetryResult:
    lhs_estimate: float
    lhs_se: float
    rhs_estimate: float
    rhs_se: float
    fraction_k1: float
    fraction_k2: float
    diameter: float
    passed: bool
    vacuous: bool


def isoperimetry_check(body: ConvexBody, k1_predicate: Callable[[np.ndarray], np.ndarray],
                       k2_predicate: Callable[[np.ndarray], np.ndarray], delta: float,
                       norm: str = "l2", samples: int = 20000, seed=0,
                       ci_mult: float = 3.0, distance_pairs: int = 10000) -> IsoperimetryResult:
    """Monte Carlo check of the separation inequality

        vol(K - (K1 u K2)) >= (2 delta / (D - delta)) min(vol(K1), vol(K2))

    for disjoint subsets at distance >= delta in the chosen norm, where D is a
    valid diameter upper bound of the body.  The distance precondition is
    falsified by sampling cross pairs; a violation raises
    :class:`PartitionDistanceError` (deciding it exactly is out of scope).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    D = geometry.diameter(body, norm=norm)
    if delta >= D:
        raise ValueError("delta must be below the body diameter")
    rng = np.random.default_rng(seed)
    pts = geometry.rejection_uniform_sample(body, samples, rng)
    in1 = np.asarray(k1_predicate(pts), dtype=bool)
    in2 = np.asarray(k2_predicate(pts), dtype=bool)
    if np.any(in1 & in2):
        raise PartitionDistanceError("partition classes overlap on sampled points")
    f1 = float(np.mean(in1))
    f2 = float(np.mean(in2))
    if f1 == 0.0 or f2 == 0.0:
        return IsoperimetryResult(lhs_estimate=float(np.mean(~(in1 | in2))), lhs_se=0.0,
                                  rhs_estimate=0.0, rhs_se=0.0, fraction_k1=f1,
                                  fraction_k2=f2, diameter=D, passed=True, vacuous=True)
    p1 = pts[in1]
    p2 = pts[in2]
    pairs = min(distance_pairs, p1.shape[0] * p2.shape[0])
    i1 = rng.integers(p1.shape[0], size=pairs)
    i2 = rng.integers(p2.shape[0], size=pairs)
    diffs = p1[i1] - p2[i2]
    dists = np.max(np.abs(diffs), axis=1) if norm == "linf" else np.linalg.norm(diffs, axis=1)
    if np.min(dists) < delta * (1 - 1e-9):
        raise PartitionDistanceError(
            f"sampled pair at distance {np.min(dists):.6g} violates the claimed "
            f"separation {delta}")
    gap = float(np.mean(~(in1 | in2)))
    gap_se = math.sqrt(max(gap * (1 - gap), 1e-12) / samples)
    fmin = min(f1, f2)
    fmin_se = math.sqrt(max(fmin * (1 - fmin), 1e-12) / samples)
    coeff = 2.0 * delta / (D - delta)
    rhs = coeff * fmin
    rhs_se = coeff * fmin_se
    passed = gap + ci_mult * gap_se >= rhs - ci_mult * rhs_se
    return IsoperimetryResult(lhs_estimate=gap, lhs_se=gap_se, rhs_estimate=rhs,
                              rhs_se=rhs_se, fraction_k1=f1, fraction_k2=f2,
                              diameter=D, passed=passed, vacuous=False)


# ---------------------------------------------------------------------------
# overlap property and the flow bound it buys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapResult:
    max_tv_estimate: float
    nu_estimate: float
    nu_threshold: float
    pair_count: int
    noise_floor: float
    passed: bool


def overlap_check(body: ConvexBody,
                  kernel_sampler: Callable[[ConvexBody, np.ndarray, int, np.random.Generator], np.ndarray],
                  r: float, delta: float, pair_count: int, samples_per_kernel: int,
                  seed, nu_threshold: float, bins_per_axis: Optional[int] = None,
                  grid_halfwidth: Optional[float] = None) -> OverlapResult:
    """Estimate the worst kernel TV over start pairs at distance delta inside
    the robust interior K_r, and test ``1 - max_tv >= nu_threshold``.

    Start points are exactly uniform on K_r (rejection against the robust
    interior); partners sit at Euclidean distance delta in a uniformly random
    direction, redrawn until they land in K_r.  Kernel TVs are binned
    two-sample estimates on a grid fixed per pair before sampling.
    """
    if r <= 0 or delta <= 0:
        raise ValueError("need r > 0 and delta > 0")
    rng = np.random.default_rng(seed)
    us: list[np.ndarray] = []
    for _ in range(200):
        cand = geometry.rejection_uniform_sample(body, max(4 * pair_count, 256), rng)
        keep = geometry.robust_interior_contains_many(body, cand, r)
        us.extend(cand[keep])
        if len(us) >= pair_count:
            break
    if len(us) < pair_count:
        raise ValueError("robust interior K_r is empty or too thin to sample")
    if bins_per_axis is None:
        bins_per_axis = diagnostics.default_bins_per_axis(samples_per_kernel, body.dim)
    max_tv = -np.inf
    worst_floor = 0.0
    done = 0
    for u in us:
        if done >= pair_count:
            break
        v = None
        for _ in range(1000):
            d = rng.normal(size=body.dim)
            d /= np.linalg.norm(d)
            cand = u + delta * d
            if geometry.robust_interior_contains(body, cand, r):
                v = cand
                break
        if v is None:
            continue
        if grid_halfwidth is None:
            lo, hi = geometry.bounding_box(body)
            grid = diagnostics.HistogramGrid(lo=lo, hi=hi, bins_per_axis=bins_per_axis)
        else:
            grid = diagnostics.grid_around(0.5 * (u + v), grid_halfwidth, bins_per_axis)
        xs = kernel_sampler(body, u, samples_per_kernel, rng)
        ys = kernel_sampler(body, v, samples_per_kernel, rng)
        est = diagnostics.two_sample_binned_tv(xs, ys, grid)
        if est.value > max_tv:
            max_tv = est.value
            worst_floor = est.noise_floor
        done += 1
    if done < pair_count:
        raise ValueError("insufficient accepted start pairs inside K_r")
    nu_est = 1.0 - max_tv
    return OverlapResult(max_tv_estimate=float(max_tv), nu_estimate=float(nu_est),
                         nu_threshold=nu_threshold, pair_count=done,
                         noise_floor=worst_floor, passed=nu_est >= nu_threshold)


def kernel_tv_exact(chain: DiscreteChain, i: int, j: int) -> float:
    """Exact TV between two transition rows of a finite chain."""
    return float(0.5 * np.abs(chain.P[i] - chain.P[j]).sum())


def discrete_overlap_nu(chain: DiscreteChain, core_mask: np.ndarray, delta: float) -> float:
    """Exact worst-pair overlap 1 - max TV over core states within distance delta."""
    core = np.nonzero(np.asarray(core_mask, dtype=bool))[0]
    worst = 0.0
    for a_pos, i in enumerate(core):
        for j in core[a_pos + 1:]:
            if np.linalg.norm(chain.states[i] - chain.states[j]) <= delta:
                worst = max(worst, kernel_tv_exact(chain, int(i), int(j)))
    return 1.0 - worst


def overlap_flow_bound(nu: float, delta: float, diameter: float) -> float:
    """Conductance coefficient ``nu delta / (4 (D - delta))`` guaranteed by the
    overlap property on a body of diameter at most D >= 2 delta."""
    if not 0 < nu < 0.5:
        raise ValueError("nu must lie in (0, 1/2)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if diameter < 2 * delta:
        raise ValueError("need diameter >= 2 delta")
    return nu * delta / (4.0 * (diameter - delta))


@dataclass(frozen=True)
class FlowBoundResult:
    flow: float
    bound: float
    passed: bool
    vacuous: bool


def flow_vs_bound_check(chain: DiscreteChain, subset, nu: float, delta: float,
                        diameter: float, eps: float,
                        overlap_result: Optional[OverlapResult] = None,
                        assume_overlap: bool = False) -> FlowBoundResult:
    """Exact partition flow against the overlap-derived lower bound
    ``(nu delta / 4(D - delta)) * (min measure - eps)``.

    The overlap property must be established first: pass the verifying
    :class:`OverlapResult`, or set ``assume_overlap`` for chains whose overlap
    was computed exactly elsewhere.
    """
    if overlap_result is None and not assume_overlap:
        raise ValueError("overlap precondition not established; run overlap_check first")
    if overlap_result is not None and not overlap_result.passed:
        raise ValueError("overlap precondition not established: overlap_check failed")
    A = _as_index_array(chain, subset)
    meas = float(chain.pi[A].sum())
    short = min(meas, 1.0 - meas) - eps
    if short <= 0:
        return FlowBoundResult(flow=ergodic_flow(chain, A), bound=0.0,
                               passed=True, vacuous=True)
    nu_eff = min(nu, 0.499999)  # the guarantee only strengthens for larger overlap
    bound = overlap_flow_bound(nu_eff, delta, diameter) * short
    flow = ergodic_flow(chain, A)
    return FlowBoundResult(flow=flow, bound=bound, passed=flow >= bound - 1e-12,
                           vacuous=False)
