"""Statistical diagnostics: TV estimation, empirical mixing, tail bounds.

The underlying theory is analytic; every estimator here is an artifact
decision and reports its own resolution.  Binned TV estimates carry a
``noise_floor`` (an upper bound on the estimator's expected value when the two
laws coincide) and a jackknife ``ci_halfwidth``; checks against tiny analytic
bounds report ``inconclusive`` instead of failing whenever the floor exceeds
the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import geometry, mixture, schemes
from .geometry import ConvexBody
from .schemes import GaussianWalkParams


# ---------------------------------------------------------------------------
# histogram grids and binned TV
# ---------------------------------------------------------------------------

def default_bins_per_axis(samples: int, dim: int) -> int:
    """Bin count per axis ceil(samples^(1/(dim+2))): balances bias and noise."""
    return max(2, math.ceil(samples ** (1.0 / (dim + 2))))


@dataclass(frozen=True)
class HistogramGrid:
    """A rectangular bin grid fixed before seeing any sample set.

    Out-of-range points are clipped into the edge bins, so both sample sets
    are treated identically and total mass is preserved.
    """

    lo: np.ndarray
    hi: np.ndarray
    bins_per_axis: int

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def n_bins(self) -> int:
        return self.bins_per_axis ** self.dim

    def assign(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        width = (self.hi - self.lo) / self.bins_per_axis
        idx = np.floor((X - self.lo) / width).astype(int)
        np.clip(idx, 0, self.bins_per_axis - 1, out=idx)
        flat = np.zeros(X.shape[0], dtype=int)
        for j in range(self.dim):
            flat = flat * self.bins_per_axis + idx[:, j]
        return flat

    def counts(self, X: np.ndarray) -> np.ndarray:
        return np.bincount(self.assign(X), minlength=self.n_bins).astype(float)


def grid_for_body(body: ConvexBody, bins_per_axis: int) -> HistogramGrid:
    lo, hi = geometry.bounding_box(body)
    return HistogramGrid(lo=lo, hi=hi, bins_per_axis=bins_per_axis)


def grid_around(center: np.ndarray, halfwidth: float, bins_per_axis: int) -> HistogramGrid:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return HistogramGrid(lo=c - halfwidth, hi=c + halfwidth, bins_per_axis=bins_per_axis)


@dataclass(frozen=True)
class TvEstimate:
    """A binned (or proxy) total-variation estimate with its resolution."""

    value: float
    method: str
    bins_per_axis: int
    samples: int
    ci_halfwidth: float
    noise_floor: float


def _jackknife_tv(counts_x_blocks: np.ndarray, counts_y_blocks: np.ndarray) -> float:
    """Delete-one-block jackknife standard error of the binned TV."""
    B = counts_x_blocks.shape[0]
    tot_x = counts_x_blocks.sum(axis=0)
    tot_y = counts_y_blocks.sum(axis=0)
    n_x, n_y = tot_x.sum(), tot_y.sum()
    thetas = np.empty(B)
    for i in range(B):
        cx = tot_x - counts_x_blocks[i]
        cy = tot_y - counts_y_blocks[i]
        thetas[i] = 0.5 * np.abs(cx / max(cx.sum(), 1.0) - cy / max(cy.sum(), 1.0)).sum()
    return float(math.sqrt((B - 1) / B * np.sum((thetas - thetas.mean()) ** 2)))


def two_sample_binned_tv(x: np.ndarray, y: np.ndarray, grid: HistogramGrid,
                         jackknife_blocks: int = 20) -> TvEstimate:
    """Half L1 distance between the bin histograms of two sample sets.

    ``noise_floor`` bounds the expected estimate when both sets share one law:
    E|p_hat - q_hat| <= sqrt(p(1-p)(1/N + 1/M)) summed over bins (pooled p).
    """
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    n_x, n_y = x.shape[0], y.shape[0]
    bx = grid.assign(x)
    by = grid.assign(y)
    cx = np.bincount(bx, minlength=grid.n_bins).astype(float)
    cy = np.bincount(by, minlength=grid.n_bins).astype(float)
    value = float(0.5 * np.abs(cx / n_x - cy / n_y).sum())
    pooled = (cx + cy) / (n_x + n_y)
    floor = float(0.5 * np.sum(np.sqrt(pooled * (1 - pooled) * (1.0 / n_x + 1.0 / n_y))))
    B = min(jackknife_blocks, n_x, n_y)
    bl_x = np.stack([np.bincount(bx[i::B], minlength=grid.n_bins) for i in range(B)]).astype(float)
    bl_y = np.stack([np.bincount(by[i::B], minlength=grid.n_bins) for i in range(B)]).astype(float)
    se = _jackknife_tv(bl_x, bl_y)
    return TvEstimate(value=value, method="binned", bins_per_axis=grid.bins_per_axis,
                      samples=min(n_x, n_y), ci_halfwidth=se, noise_floor=floor)


def reference_bin_masses(body: ConvexBody, grid: HistogramGrid,
                         mc_samples: int = 200_000, seed=0) -> np.ndarray:
    """Uniform-law bin masses: exact for boxes on their own grid, Monte Carlo otherwise."""
    if body.kind == "box":
        lo, hi = geometry.bounding_box(body)
        if np.allclose(grid.lo, lo) and np.allclose(grid.hi, hi):
            return np.full(grid.n_bins, 1.0 / grid.n_bins)
    rng = np.random.default_rng(seed)
    pts = geometry.rejection_uniform_sample(body, mc_samples, rng)
    counts = grid.counts(pts)
    return counts / counts.sum()


def tv_to_uniform(samples: np.ndarray, body: ConvexBody, bins_per_axis: int,
                  ref_masses: Optional[np.ndarray] = None,
                  jackknife_blocks: int = 20) -> TvEstimate:
    """Binned TV between a sample set and the uniform law on the body."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if not np.all(geometry.contains_many(body, X)):
        raise ValueError("tv_to_uniform requires all samples inside the body")
    grid = grid_for_body(body, bins_per_axis)
    if ref_masses is None:
        ref_masses = reference_bin_masses(body, grid)
    if ref_masses.sum() <= 0:
        raise ValueError("reference masses vanish on the grid")
    n = X.shape[0]
    bx = grid.assign(X)
    counts = np.bincount(bx, minlength=grid.n_bins).astype(float)
    value = float(0.5 * np.abs(counts / n - ref_masses).sum())
    floor = float(0.5 * np.sum(np.sqrt(ref_masses * (1 - ref_masses) / n)))
    B = min(jackknife_blocks, n)
    thetas = np.empty(B)
    for i in range(B):
        c = counts - np.bincount(bx[i::B], minlength=grid.n_bins)
        thetas[i] = 0.5 * np.abs(c / max(c.sum(), 1.0) - ref_masses).sum()
    se = float(math.sqrt((B - 1) / B * np.sum((thetas - thetas.mean()) ** 2)))
    return TvEstimate(value=value, method="binned", bins_per_axis=bins_per_axis,
                      samples=n, ci_halfwidth=se, noise_floor=floor)


def ks_statistic_per_axis(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two-sample Kolmogorov-Smirnov statistic of each coordinate marginal."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    return np.array([stats.ks_2samp(x[:, j], y[:, j]).statistic
                     for j in range(x.shape[1])])


# ---------------------------------------------------------------------------
# empirical mixing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixingReport:
    checkpoints: tuple[int, ...]
    estimates: tuple[TvEstimate, ...]
    threshold: float
    first_step_below: Optional[int]

    def reached(self) -> bool:
        return self.first_step_below is not None


def _radial_tv(pooled: np.ndarray, reference: np.ndarray, bins: int = 24) -> TvEstimate:
    """1-D binned two-sample TV of the sup-norm radius statistic.

    For box bodies the warm start concentrates the radius below its uniform
    law, so this statistic resolves the start/uniform gap at every dimension
    with a dimension-independent bin budget.
    """
    rx = np.max(np.abs(pooled), axis=1)
    ry = np.max(np.abs(reference), axis=1)
    hi = max(rx.max(), ry.max()) * (1 + 1e-9)
    grid = HistogramGrid(lo=np.array([0.0]), hi=np.array([hi]), bins_per_axis=bins)
    est = two_sample_binned_tv(rx[:, None], ry[:, None], grid)
    return TvEstimate(value=est.value, method="infnorm_radial", bins_per_axis=bins,
                      samples=est.samples, ci_halfwidth=est.ci_halfwidth,
                      noise_floor=est.noise_floor)


def mixing_time_empirical(scheme: schemes.MarkovScheme, body: ConvexBody, M: float,
                          eps: float, checkpoints: Sequence[int], chains: int,
                          seed, bins_per_axis: Optional[int] = None,
                          statistic: str = "binned_joint") -> MixingReport:
    """Pool chain states at checkpoints and report the first TV dip below eps.

    All chains start from independent M-warm samples; the decision rule is the
    conservative one-sided ``estimate + ci < eps``.  No burn-in is subtracted:
    steps are counted from the warm start itself.
    """
    marks = sorted(set(int(c) for c in checkpoints))
    if not marks or marks[0] < 0:
        raise ValueError("checkpoints must be non-negative and non-empty")
    rng = schemes.derive_rng(seed, "mixing", scheme.name)
    starts = schemes.warm_start_sample(body, M, rng, size=chains)
    if scheme.name == "chr":
        snaps = schemes.run_chr_chains_batch(body, starts, marks[-1], rng, checkpoints=marks)
    else:
        snaps = {m: np.empty((chains, body.dim)) for m in marks}
        for c in range(chains):
            x = starts[c]
            step_idx = 0
            for m in marks:
                while step_idx < m:
                    x = scheme.step(body, x, rng)
                    step_idx += 1
                snaps[m][c] = x
    if bins_per_axis is None:
        bins_per_axis = default_bins_per_axis(chains, body.dim)
    ref_rng = schemes.derive_rng(seed, "mixing-reference")
    estimates = []
    first = None
    for m in marks:
        pooled = snaps[m]
        if statistic == "binned_joint":
            est = tv_to_uniform(pooled, body, bins_per_axis)
        elif statistic == "infnorm_radial":
            reference = geometry.sample_uniform(body, pooled.shape[0], ref_rng)
            est = _radial_tv(pooled, reference)
        else:
            raise ValueError(f"unknown statistic {statistic!r}")
        estimates.append(est)
        if first is None and est.value + est.ci_halfwidth < eps:
            first = m
    return MixingReport(checkpoints=tuple(marks), estimates=tuple(estimates),
                        threshold=eps, first_step_below=first)


# ---------------------------------------------------------------------------
# tail and information inequalities
# ---------------------------------------------------------------------------

def chernoff_bound(mu: float, delta: float) -> float:
    """Upper tail bound exp(-mu ((1+d) ln(1+d) - d)) for sums of Bernoullis."""
    if mu < 0 or delta <= 0:
        raise ValueError("need mu >= 0 and delta > 0")
    return math.exp(-mu * ((1 + delta) * math.log(1 + delta) - delta))


def gaussian_tail_bound(t: float, sigma: float) -> float:
    """Two-sided tail bound exp(-t^2 / (2 sigma^2)); valid only for t >= sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if t < sigma:
        raise ValueError("the tail bound requires t >= sigma")
    return math.exp(-t * t / (2.0 * sigma * sigma))


def pinsker_from_kl(d_kl: float) -> float:
    """TV upper bound sqrt(d_kl / 2)."""
    if d_kl < 0:
        raise ValueError("KL divergence must be non-negative")
    return math.sqrt(d_kl / 2.0)


# ---------------------------------------------------------------------------
# coupling checks for the multi-step Gaussian walk
# ---------------------------------------------------------------------------

class HypothesisError(ValueError):
    """The deep-interior hypothesis of a check cannot be met by the instance."""


@dataclass(frozen=True)
class CouplingCheckResult:
    tv_estimate: float
    tv_bound: float
    noise_floor: float
    ci_halfwidth: float
    rejection_rate: float
    rejection_bound: float
    rejection_se: float
    rejection_runs: int
    samples: int
    tau: int
    verdict: str  # pass | fail | inconclusive

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _tv_verdict(tv: float, bound: float, floor: float) -> str:
    if tv <= bound + floor:
        return "pass"
    if floor > bound:
        return "inconclusive"
    return "fail"


def iterate_mixture_check(n: int, sigma: float, half_width: float, samples: int,
                          seed, rejection_runs: Optional[int] = None,
                          tau: Optional[int] = None,
                          bins_per_axis: Optional[int] = None) -> CouplingCheckResult:
    """Multi-step Gaussian walk vs its axis-count mixture, from a deep start.

    Runs the walk from the center of the box ``[-h, h]^n`` and compares the
    final-state law against the full-rank mixture by binned TV; also estimates
    the per-run rejection frequency, whose coupling bound is ``1.5 n^{-5}``.
    The deep-interior hypothesis requires ``h > 100 sigma ln n``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    margin = 100.0 * sigma * math.log(n)
    if half_width <= margin:
        raise HypothesisError(
            f"deep-interior hypothesis vacuous: half_width {half_width} <= "
            f"100 sigma ln n = {margin}")
    tau = schemes.default_tau(n) if tau is None else tau
    runs = samples if rejection_runs is None else max(samples, rejection_runs)
    body = geometry.make_box(np.full(n, half_width), declared_R=max(1.0, half_width))
    params = GaussianWalkParams(sigma=sigma, tau=tau)
    rng = schemes.derive_rng(seed, "iterate-mixture", n, tau)
    v = np.zeros(n)
    finals, rejected = schemes.gaussian_iterate_batch(body, v, params, runs, rng)
    rate = float(np.mean(rejected))
    rej_se = math.sqrt(max(rate * (1 - rate), 1.0 / runs) / runs)
    mix = mixture.sample_mixture(v, sigma, tau, samples, rng)
    if bins_per_axis is None:
        bins_per_axis = default_bins_per_axis(samples, n)
    grid = grid_around(v, 5.0 * math.sqrt(tau) * sigma, bins_per_axis)
    est = two_sample_binned_tv(finals[:samples], mix, grid)
    bound = 2.0 * float(n) ** -5
    floor = est.noise_floor + 3.0 * est.ci_halfwidth
    verdict = _tv_verdict(est.value, bound, floor)
    rejection_bound = 1.5 * float(n) ** -5
    if rate > rejection_bound + 3.0 * rej_se:
        verdict = "fail"
    return CouplingCheckResult(tv_estimate=est.value, tv_bound=bound, noise_floor=floor,
                               ci_halfwidth=est.ci_halfwidth, rejection_rate=rate,
                               rejection_bound=rejection_bound, rejection_se=rej_se,
                               rejection_runs=runs, samples=samples, tau=tau,
                               verdict=verdict)


@dataclass(frozen=True)
class NearbyStartsResult:
    tv_estimate: float
    tv_bound: float
    ci_halfwidth: float
    noise_floor: float
    separation: float
    tau: int
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def nearby_starts_check(n: int, sigma: float, half_width: float, samples: int,
                        seed, separation: Optional[float] = None,
                        tau: Optional[int] = None,
                        bins_per_axis: Optional[int] = None) -> NearbyStartsResult:
    """TV between multi-step walks from two starts at distance <= sigma.

    Both starts must satisfy the same deep-interior hypothesis; the law-level
    bound is 3/4, tested as ``estimate <= 3/4 + 2 ci``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    sep = sigma if separation is None else separation
    if sep > sigma * (1 + 1e-12):
        raise HypothesisError("starts must be within Euclidean distance sigma")
    margin = 100.0 * sigma * math.log(n)
    if half_width <= margin + sep:
        raise HypothesisError("deep-interior hypothesis vacuous for these starts")
    tau = schemes.default_tau(n) if tau is None else tau
    body = geometry.make_box(np.full(n, half_width), declared_R=max(1.0, half_width))
    params = GaussianWalkParams(sigma=sigma, tau=tau)
    rng = schemes.derive_rng(seed, "nearby-starts", n, tau)
    direction = np.ones(n) / math.sqrt(n)
    u = -0.5 * sep * direction
    v = 0.5 * sep * direction
    xs, _ = schemes.gaussian_iterate_batch(body, u, params, samples, rng)
    ys, _ = schemes.gaussian_iterate_batch(body, v, params, samples, rng)
    if bins_per_axis is None:
        bins_per_axis = default_bins_per_axis(samples, n)
    grid = grid_around(np.zeros(n), 5.0 * math.sqrt(tau) * sigma + sep, bins_per_axis)
    est = two_sample_binned_tv(xs, ys, grid)
    bound = 0.75
    verdict = "pass" if est.value <= bound + 2.0 * est.ci_halfwidth else "fail"
    return NearbyStartsResult(tv_estimate=est.value, tv_bound=bound,
                              ci_halfwidth=est.ci_halfwidth, noise_floor=est.noise_floor,
                              separation=sep, tau=tau, verdict=verdict)
