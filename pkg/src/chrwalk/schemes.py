"""Random-walk schemes on convex bodies.

Three walks are provided:

* coordinate walk (``chr``): pick a coordinate axis uniformly, resample the
  point uniformly on the body's chord along that axis;
* full-sphere walk (``hnr``): same with a uniformly random direction;
* Gaussian coordinate walk (``gauss``): propose an axis-aligned ``N(0, sigma^2)``
  displacement, keep the current point if the proposal leaves the body.

All three leave the uniform distribution on the body invariant and are
reversible with respect to it (checked exactly on grid discretizations in
:mod:`chrwalk.conductance`).  Batched variants run many independent replicas
in lockstep with vectorized membership tests; they share the single-step
semantics but not the random stream layout of the scalar functions.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry
from .geometry import ConvexBody


def default_tau(n: int) -> int:
    """Default iterate count ceil(20 n ln n) for the multi-step Gaussian walk."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return math.ceil(20.0 * n * math.log(n))


@dataclass(frozen=True)
class GaussianWalkParams:
    """Step deviation and iterate count of the multi-step Gaussian walk."""

    sigma: float
    tau: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")

    @classmethod
    def for_dimension(cls, n: int, sigma: float) -> "GaussianWalkParams":
        return cls(sigma=sigma, tau=default_tau(n))


@dataclass(frozen=True)
class MarkovScheme:
    """A stochastic step function together with reversibility metadata."""

    name: str
    step: Callable[[ConvexBody, np.ndarray, np.random.Generator], np.ndarray]
    reversible_wrt_uniform: bool = True


def derive_rng(master_seed, *stream) -> np.random.Generator:
    """Deterministic substream derivation.

    The generator is seeded from ``SeedSequence([master_seed, *stream])`` where
    string stream components are mapped through crc32.  Distinct stream tuples
    give statistically independent generators; the same tuple always yields the
    same stream, on any platform.
    """
    keys = [int(master_seed)]
    for part in stream:
        if isinstance(part, str):
            keys.append(zlib.crc32(part.encode("utf8")))
        else:
            keys.append(int(part))
    return np.random.default_rng(np.random.SeedSequence(keys))


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def chr_step(body: ConvexBody, x: np.ndarray, rng: np.random.Generator,
             axis: Optional[int] = None) -> np.ndarray:
    """One coordinate-walk step: uniform point on the axis chord through x.

    ``axis=None`` draws the axis uniformly; a fixed axis is exposed for
    conditional-law tests.
    """
    x = np.asarray(x, dtype=float)
    i = int(rng.integers(body.dim)) if axis is None else int(axis)
    e = np.zeros(body.dim)
    e[i] = 1.0
    seg = geometry.chord(body, x, e)
    t = rng.uniform(seg.t_lo, seg.t_hi)
    out = x.copy()
    out[i] += t
    return out


def gaussian_step(body: ConvexBody, x: np.ndarray, sigma: float,
                  rng: np.random.Generator, axis: Optional[int] = None) -> np.ndarray:
    """One Gaussian coordinate step; rejected proposals leave the state unchanged."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    i = int(rng.integers(body.dim)) if axis is None else int(axis)
    kappa = sigma * rng.standard_normal()
    proposal = x.copy()
    proposal[i] += kappa
    return proposal if geometry.contains(body, proposal) else x.copy()


def hnr_step(body: ConvexBody, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One full-sphere step: uniform point on the chord along a random direction."""
    x = np.asarray(x, dtype=float)
    d = rng.normal(size=body.dim)
    d /= np.linalg.norm(d)
    seg = geometry.chord(body, x, d)
    t = rng.uniform(seg.t_lo, seg.t_hi)
    return x + t * d


@dataclass(frozen=True)
class IterateResult:
    point: np.ndarray
    any_rejected: bool
    rejections: int


def gaussian_iterate(body: ConvexBody, x: np.ndarray, params: GaussianWalkParams,
                     rng: np.random.Generator) -> IterateResult:
    """Apply ``params.tau`` Gaussian steps; records whether any proposal was rejected.

    The rejection flag feeds the coupling check between the iterate law and the
    Gaussian mixture: on runs without rejection the iterate equals the free sum
    of its proposals.
    """
    cur = np.asarray(x, dtype=float).copy()
    rejections = 0
    for _ in range(params.tau):
        i = int(rng.integers(body.dim))
        kappa = params.sigma * rng.standard_normal()
        proposal = cur.copy()
        proposal[i] += kappa
        if geometry.contains(body, proposal):
            cur = proposal
        else:
            rejections += 1
    return IterateResult(point=cur, any_rejected=rejections > 0, rejections=rejections)


# ---------------------------------------------------------------------------
# batched steps (many replicas in lockstep)
# ---------------------------------------------------------------------------

def chr_step_batch(body: ConvexBody, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One coordinate-walk step applied to every row of (m, n) states."""
    X = np.array(X, dtype=float, copy=True)
    m = X.shape[0]
    axes = rng.integers(body.dim, size=m)
    u = rng.random(m)
    for i in range(body.dim):
        rows = np.nonzero(axes == i)[0]
        if rows.size == 0:
            continue
        lo, hi = geometry.axis_chord_many(body, X[rows], i)
        X[rows, i] += lo + (hi - lo) * u[rows]
    return X


def gaussian_step_batch(body: ConvexBody, X: np.ndarray, sigma: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One Gaussian coordinate step on every row; returns (states, accepted mask)."""
    X = np.array(X, dtype=float, copy=True)
    m = X.shape[0]
    axes = rng.integers(body.dim, size=m)
    kappa = sigma * rng.standard_normal(m)
    proposal = X.copy()
    proposal[np.arange(m), axes] += kappa
    ok = geometry.contains_many(body, proposal)
    X[ok] = proposal[ok]
    return X, ok


def gaussian_iterate_batch(body: ConvexBody, start: np.ndarray, params: GaussianWalkParams,
                           count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``count`` independent tau-step Gaussian walks from a common start.

    Returns (final states, per-run any-rejection flags).
    """
    X = np.tile(np.asarray(start, dtype=float), (count, 1))
    rejected = np.zeros(count, dtype=bool)
    for _ in range(params.tau):
        X, ok = gaussian_step_batch(body, X, params.sigma, rng)
        rejected |= ~ok
    return X, rejected


def make_gaussian_iterate_sampler(params: GaussianWalkParams):
    """Batch kernel sampler for the tau-step Gaussian walk: (body, x, count, rng)
    -> (count, n) final states."""

    def sampler(body: ConvexBody, x: np.ndarray, count: int,
                rng: np.random.Generator) -> np.ndarray:
        return gaussian_iterate_batch(body, x, params, count, rng)[0]

    return sampler


def make_chr_kernel_sampler(steps: int = 1):
    """Batch kernel sampler for the k-step coordinate walk from a fixed start."""
    if steps < 1:
        raise ValueError("steps must be at least 1")

    def sampler(body: ConvexBody, x: np.ndarray, count: int,
                rng: np.random.Generator) -> np.ndarray:
        X = np.tile(np.asarray(x, dtype=float), (count, 1))
        for _ in range(steps):
            X = chr_step_batch(body, X, rng)
        return X

    return sampler


# ---------------------------------------------------------------------------
# schemes and chains
# ---------------------------------------------------------------------------

def chr_scheme() -> MarkovScheme:
    return MarkovScheme(name="chr", step=chr_step)


def hnr_scheme() -> MarkovScheme:
    return MarkovScheme(name="hnr", step=hnr_step)


def gaussian_scheme(sigma: float) -> MarkovScheme:
    def step(body, x, rng):
        return gaussian_step(body, x, sigma, rng)

    return MarkovScheme(name="gauss", step=step)


def gaussian_iterate_scheme(params: GaussianWalkParams) -> MarkovScheme:
    """The tau-step Gaussian walk as a single scheme step."""

    def step(body, x, rng):
        return gaussian_iterate(body, x, params, rng).point

    return MarkovScheme(name=f"gauss^{params.tau}", step=step)


def run_chain(scheme: MarkovScheme, body: ConvexBody, start: np.ndarray, steps: int,
              rng: np.random.Generator, thinning: int = 1) -> np.ndarray:
    """Trajectory of the scheme: rows are the states at steps 0, k, 2k, ...

    The start is always recorded, so the result has ``1 + steps // thinning``
    rows.  Deterministic given (rng seed, scheme, body, start).
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if thinning < 1:
        raise ValueError("thinning must be at least 1")
    x = np.asarray(start, dtype=float)
    if not geometry.contains(body, x):
        raise ValueError("chain start must lie in the body")
    out = [x.copy()]
    for step_idx in range(1, steps + 1):
        x = scheme.step(body, x, rng)
        if step_idx % thinning == 0:
            out.append(np.asarray(x, dtype=float).copy())
    return np.asarray(out)


def run_chr_chains_batch(body: ConvexBody, starts: np.ndarray, steps: int,
                         rng: np.random.Generator,
                         checkpoints: Optional[Sequence[int]] = None) -> dict[int, np.ndarray]:
    """Run many coordinate-walk chains in lockstep, snapshotting at checkpoints.

    Returns a dict step -> (m, n) array of states.  ``checkpoints=None`` keeps
    only the final step.
    """
    X = np.array(starts, dtype=float, copy=True)
    marks = sorted(set(checkpoints)) if checkpoints is not None else [steps]
    if any(c < 0 or c > steps for c in marks):
        raise ValueError("checkpoints must lie in [0, steps]")
    snaps: dict[int, np.ndarray] = {}
    if 0 in marks:
        snaps[0] = X.copy()
    for k in range(1, steps + 1):
        X = chr_step_batch(body, X, rng)
        if k in marks:
            snaps[k] = X.copy()
    return snaps


# ---------------------------------------------------------------------------
# warm starts and auxiliary sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarmStart:
    """Start distribution whose density against uniform-on-K is exactly M.

    Realized as the uniform distribution on the dilate ``M^{-1/n} K``: its
    density with respect to the uniform law on K equals M everywhere on the
    dilate and 0 outside, so the pointwise warmness bound is attained.
    """

    M: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("warmness M must be at least 1")

    def sample(self, body: ConvexBody, rng: np.random.Generator,
               size: Optional[int] = None) -> np.ndarray:
        return warm_start_sample(body, self.M, rng, size=size)


def warm_start_sample(body: ConvexBody, M: float, rng: np.random.Generator,
                      size: Optional[int] = None) -> np.ndarray:
    """Uniform sample from ``M^{-1/n} K``; exactly M-warm against uniform-on-K."""
    if M < 1:
        raise ValueError("warmness M must be at least 1")
    report = geometry.sandwich_validate(body)
    if not report.inner_ok:
        raise geometry.BodyValidationError(
            "warm starts need the unit sup-norm ball inside the body (origin interior)")
    scaled = geometry.scale_body(body, M ** (-1.0 / body.dim))
    if scaled.kind in ("box", "euclidean_ball") or scaled.simplex_scale is not None:
        return geometry.exact_uniform_sample(scaled, rng, size=size)
    count = 1 if size is None else int(size)
    pts = approx_uniform_sample(scaled, count, rng)
    return pts[0] if size is None else pts


def approx_uniform_sample(body: ConvexBody, count: int, rng: np.random.Generator,
                          burn_in: Optional[int] = None) -> np.ndarray:
    """Approximately uniform points from a long coordinate-walk run.

    ``count`` replicas start at the body's interior point and burn in together;
    the default burn-in is generous for the desk-scale bodies this package
    targets (sup-norm sandwiched with modest R).
    """
    if body.interior_point is None:
        raise ValueError("body has no interior point recorded; cannot start the walk")
    if burn_in is None:
        burn_in = 400 + 50 * body.dim
    starts = np.tile(body.interior_point, (count, 1))
    snaps = run_chr_chains_batch(body, starts, burn_in, rng)
    return snaps[burn_in]
