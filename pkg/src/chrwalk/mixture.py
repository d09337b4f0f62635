"""Axis-count mixtures of the multi-step Gaussian walk.

Over ``tau`` proposals with uniformly random axes, the per-axis proposal
counts form a multi-index ``I`` with multinomial weight

    lambda_I = (tau choose I) * n^{-tau},

and conditional on ``I`` the walk-without-rejection lands at a Gaussian with
diagonal covariance ``diag(I) * sigma^2``.  This module enumerates and samples
multi-indices, evaluates the resulting mixture density, and provides the exact
total variation distance between equal-covariance Gaussians along with its
Pinsker-style upper bound.

All weights and densities are computed in log space; ``tau`` up to 1e4 stays
finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr

ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class MultiIndex:
    """Non-negative per-axis counts summing to tau."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("multi-index entries must be non-negative")

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def tau(self) -> int:
        return sum(self.counts)

    @property
    def full_rank(self) -> bool:
        return min(self.counts) >= 1


def log_lambda_weight(index: MultiIndex, n: int) -> float:
    """log of the multinomial weight (tau choose I) n^{-tau}."""
    if index.n != n:
        raise ValueError(f"multi-index has {index.n} entries, expected {n}")
    tau = index.tau
    out = gammaln(tau + 1) - tau * math.log(n)
    for c in index.counts:
        out -= gammaln(c + 1)
    return float(out)


def lambda_weight(index: MultiIndex, n: int) -> float:
    """Multinomial weight of a multi-index; the probability of its axis-count
    profile over tau uniform axis choices."""
    return math.exp(log_lambda_weight(index, n))


def count_multi_indices(n: int, tau: int, full_rank_only: bool = False) -> int:
    if full_rank_only:
        return math.comb(tau - 1, n - 1) if tau >= n else 0
    return math.comb(tau + n - 1, n - 1)


def enumerate_multi_indices(n: int, tau: int, full_rank_only: bool = False,
                            cap: int = ENUMERATION_CAP) -> Iterator[MultiIndex]:
    """All compositions of tau into n non-negative (or positive) parts.

    Raises ``ValueError`` when the count exceeds ``cap``; callers beyond the cap
    should fall back to :func:`sample_multi_index`.
    """
    if n < 1 or tau < 0:
        raise ValueError("need n >= 1 and tau >= 0")
    total = count_multi_indices(n, tau, full_rank_only)
    if total > cap:
        raise ValueError(
            f"{total} multi-indices exceed the enumeration cap {cap}; "
            "use sample_multi_index instead")

    lo = 1 if full_rank_only else 0

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 1:
            if remaining >= lo:
                yield MultiIndex(tuple(prefix + [remaining]))
            return
        for c in range(lo, remaining - lo * (slots - 1) + 1):
            yield from rec(prefix + [c], remaining - c, slots - 1)

    yield from rec([], tau, n)


def sample_multi_index(n: int, tau: int, rng: np.random.Generator) -> MultiIndex:
    """Tally of tau uniform axis choices; distributed exactly as the weights."""
    if n < 1 or tau < 0:
        raise ValueError("need n >= 1 and tau >= 0")
    draws = rng.integers(n, size=tau)
    return MultiIndex(tuple(int(c) for c in np.bincount(draws, minlength=n)))


def sample_multi_index_batch(n: int, tau: int, count: int,
                             rng: np.random.Generator) -> np.ndarray:
    """(count, n) array of axis-count profiles; same law as sample_multi_index."""
    return rng.multinomial(tau, np.full(n, 1.0 / n), size=count)


def non_full_rank_mass(n: int, tau: int) -> float:
    """Union bound ``n (1 - 1/n)^tau`` on the total weight of rank-deficient indices."""
    if n < 2:
        raise ValueError("need n >= 2")
    return n * (1.0 - 1.0 / n) ** tau


def non_full_rank_mass_exact(n: int, tau: int) -> float:
    """Inclusion-exclusion value of the rank-deficient weight, for small n."""
    if n < 2:
        raise ValueError("need n >= 2")
    total = 0.0
    for k in range(1, n + 1):
        base = 1.0 - k / n
        term = math.comb(n, k) * (base ** tau if (base > 0 or tau > 0) else 1.0)
        if base == 0.0 and tau == 0:
            term = math.comb(n, k)
        total += term if k % 2 == 1 else -term
    return total


# ---------------------------------------------------------------------------
# mixture density
# ---------------------------------------------------------------------------

def _log_component_density(v: np.ndarray, sigma: float, counts: np.ndarray,
                           x: np.ndarray) -> float:
    var = counts * sigma * sigma
    diff = x - v
    return float(-0.5 * np.sum(diff * diff / var)
                 - 0.5 * np.sum(np.log(2.0 * math.pi * var)))


def mixture_log_density(v, sigma: float, tau: int, x, cap: int = ENUMERATION_CAP) -> float:
    """log density at x of the full-rank part of the axis-count Gaussian mixture.

    Rank-deficient components are singular (a Dirac factor on the unmoved
    axes); they carry no absolutely continuous density and are excluded here,
    with their total weight accounted by :func:`non_full_rank_mass`.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = v.size
    if n == 1:
        # single full-rank index (tau,)
        return _log_component_density(v, sigma, np.array([tau], dtype=float), x)
    terms = []
    for index in enumerate_multi_indices(n, tau, full_rank_only=True, cap=cap):
        counts = np.asarray(index.counts, dtype=float)
        terms.append(log_lambda_weight(index, n)
                     + _log_component_density(v, sigma, counts, x))
    if not terms:
        return -math.inf
    return float(logsumexp(terms))


@dataclass(frozen=True)
class McLogDensity:
    value: float
    se_log: float
    effective_draws: int


def mixture_log_density_mc(v, sigma: float, tau: int, x, samples: int,
                           rng: np.random.Generator) -> McLogDensity:
    """Monte Carlo estimate of the full-rank mixture log density.

    Averages component densities over sampled axis-count profiles, zeroing the
    rank-deficient draws, which makes the linear-space mean unbiased for the
    full-rank mixture density.  ``se_log`` is the delta-method standard error
    of the log estimate.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = v.size
    profiles = sample_multi_index_batch(n, tau, samples, rng).astype(float)
    full = np.all(profiles >= 1, axis=1)
    if not np.any(full):
        return McLogDensity(value=-math.inf, se_log=math.inf, effective_draws=0)
    var = profiles[full] * sigma * sigma
    diff = x - v
    logs = (-0.5 * np.sum(diff * diff / var, axis=1)
            - 0.5 * np.sum(np.log(2.0 * math.pi * var), axis=1))
    # mean over *all* draws: rank-deficient ones contribute zero
    log_mean = float(logsumexp(logs) - math.log(samples))
    dens = np.zeros(samples)
    dens[: logs.size] = np.exp(logs - log_mean)  # values relative to the mean
    rel_se = float(np.std(dens, ddof=1) / math.sqrt(samples))
    return McLogDensity(value=log_mean, se_log=rel_se, effective_draws=int(full.sum()))


def sample_mixture(v, sigma: float, tau: int, count: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draws from the full-rank-conditioned axis-count mixture.

    Profiles are drawn from the multinomial law and rank-deficient ones
    redrawn; the conditioning mass is tiny in the regimes of interest.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n = v.size
    profiles = sample_multi_index_batch(n, tau, count, rng).astype(float)
    bad = ~np.all(profiles >= 1, axis=1)
    guard = 0
    while np.any(bad):
        profiles[bad] = sample_multi_index_batch(n, tau, int(bad.sum()), rng)
        bad = ~np.all(profiles >= 1, axis=1)
        guard += 1
        if guard > 10000:
            raise RuntimeError("full-rank conditioning failed; tau is too small for n")
    z = rng.standard_normal(size=(count, n))
    return v + sigma * np.sqrt(profiles) * z


# ---------------------------------------------------------------------------
# total variation between equal-covariance Gaussians
# ---------------------------------------------------------------------------

def gaussian_tv_equal_cov(v, u, index: MultiIndex, sigma: float) -> float:
    """Exact TV between Gaussians centered at v and u with shared covariance
    diag(I) sigma^2: equals ``2 Phi(Delta/2) - 1`` with
    ``Delta^2 = (v-u)^T Sigma^{-1} (v-u)``.

    For rank-deficient indices the two laws are mutually singular as soon as
    the centers differ on an unmoved axis (TV = 1); otherwise the unmoved axes
    contribute nothing.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    counts = np.asarray(index.counts, dtype=float)
    if v.shape != u.shape or v.size != counts.size:
        raise ValueError("centers and multi-index must share dimension")
    diff = v - u
    frozen = counts == 0
    if np.any(frozen & (diff != 0.0)):
        return 1.0
    active = ~frozen
    delta_sq = float(np.sum(diff[active] ** 2 / (counts[active] * sigma * sigma)))
    delta = math.sqrt(delta_sq)
    return float(2.0 * ndtr(delta / 2.0) - 1.0)


def pinsker_shift_bound(v, u, sigma: float) -> float:
    """Upper bound ``||v - u||_2 / (2 sigma)`` on the TV of any full-rank component.

    Follows from Pinsker's inequality and the closed-form KL of equal-covariance
    Gaussians, using that every full-rank covariance dominates sigma^2 I.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return float(np.linalg.norm(v - u) / (2.0 * sigma))


def mixture_tv_aggregate(v, u, n: int, tau: int, sigma: float,
                         cap: int = ENUMERATION_CAP) -> float:
    """Enumerated ``sum_I lambda_I TV(G_{v,I}, G_{u,I})`` over full-rank indices."""
    total = 0.0
    for index in enumerate_multi_indices(n, tau, full_rank_only=True, cap=cap):
        total += lambda_weight(index, n) * gaussian_tv_equal_cov(v, u, index, sigma)
    return total
