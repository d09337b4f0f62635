"""Convex bodies as membership oracles with exact structure where available.

Bodies are kept in the "sandwich" normalization used throughout the package:
the unit sup-norm ball ``B_inf = [-1, 1]^n`` should sit inside the body and
the body inside ``R * B_inf`` for a declared outer radius ``R >= 1``.  The
sandwich is a *declaration*; :func:`sandwich_validate` checks it.

Everything here is pure: bodies are frozen after construction and all
operations are free of shared mutable state, so they can be used from any
number of workers concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

# Closed membership: boundary points are members.  The tolerance guards the
# boundary against floating-point rounding and must stay well below the chord
# tolerance so endpoint checks remain meaningful.
MEMBERSHIP_ATOL = 1e-12

# Endpoint tolerance of bisection chords, relative to the declared outer radius.
CHORD_RTOL = 1e-9

# The corner-enumeration fallback for the robust interior is exact by convexity
# but enumerates 2^n points; refuse above this dimension.
CORNER_CHECK_MAX_DIM = 20


class BodyValidationError(ValueError):
    """Raised when a body is degenerate (empty interior, unbounded, bad data)."""


@dataclass(frozen=True)
class ChordSegment:
    """Parameter interval {t : x + t*direction in K} along a line through x.

    ``t = 0`` is the base point, so ``t_lo <= 0 <= t_hi`` whenever the base
    point lies in the body.  ``exact`` distinguishes closed-form halfspace /
    quadratic intersections from bisection against the membership oracle, in
    which case ``tol`` is the endpoint tolerance.
    """

    t_lo: float
    t_hi: float
    exact: bool = True
    tol: float = 0.0

    @property
    def length(self) -> float:
        return self.t_hi - self.t_lo


@dataclass(frozen=True)
class ConvexBody:
    """A convex body given by its kind-specific exact structure.

    kinds:
      * ``box``            -- center plus per-axis halfwidths
      * ``euclidean_ball`` -- center plus radius
      * ``h_polytope``     -- ``{x : A x <= b}``
      * ``intersection``   -- intersection of component bodies

    ``declared_R`` is the declared sup-norm outer radius (``>= 1``).  Use the
    ``make_*`` constructors rather than instantiating directly; they validate
    and reject degenerate (empty-interior or unbounded) inputs.
    """

    kind: str
    dim: int
    declared_R: float
    center: Optional[np.ndarray] = None
    halfwidths: Optional[np.ndarray] = None
    radius: Optional[float] = None
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    components: tuple["ConvexBody", ...] = ()
    interior_point: Optional[np.ndarray] = None
    simplex_scale: Optional[float] = None

    def contains(self, x: np.ndarray) -> bool:
        return contains(self, x)

    def chord(self, x: np.ndarray, direction: np.ndarray) -> ChordSegment:
        return chord(self, x, direction)


def _as_vector(x, dim: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"{name} must be a vector of length {dim}, got shape {v.shape}")
    return v


def _membership_tol(body: ConvexBody) -> float:
    return MEMBERSHIP_ATOL * max(1.0, body.declared_R)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def make_box(halfwidths, center=None, declared_R: Optional[float] = None) -> ConvexBody:
    """Axis-aligned box ``{x : |x_j - c_j| <= w_j}``."""
    w = np.atleast_1d(np.asarray(halfwidths, dtype=float))
    dim = w.size
    c = np.zeros(dim) if center is None else _as_vector(center, dim, "center")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise BodyValidationError("box halfwidths must be positive and finite")
    outer = float(np.max(np.abs(c) + w))
    R = max(1.0, outer) if declared_R is None else float(declared_R)
    if R < 1.0:
        raise BodyValidationError("declared_R must be >= 1")
    return ConvexBody(kind="box", dim=dim, declared_R=R, center=c, halfwidths=w,
                      interior_point=c)


def unit_cube(dim: int) -> ConvexBody:
    """The reference body ``[-1, 1]^dim`` with declared outer radius 1."""
    return make_box(np.ones(dim), declared_R=1.0)


def make_ball(radius: float, center=None, dim: Optional[int] = None,
              declared_R: Optional[float] = None) -> ConvexBody:
    """Euclidean ball ``{x : ||x - c||_2 <= radius}``."""
    if center is None:
        if dim is None:
            raise BodyValidationError("make_ball needs center or dim")
        c = np.zeros(dim)
    else:
        c = np.atleast_1d(np.asarray(center, dtype=float))
    r = float(radius)
    if not math.isfinite(r) or r <= 0:
        raise BodyValidationError("ball radius must be positive and finite")
    outer = float(np.max(np.abs(c)) + r)
    R = max(1.0, outer) if declared_R is None else float(declared_R)
    if R < 1.0:
        raise BodyValidationError("declared_R must be >= 1")
    return ConvexBody(kind="euclidean_ball", dim=c.size, declared_R=R, center=c,
                      radius=r, interior_point=c)


def _polytope_inf_ball_center(A: np.ndarray, b: np.ndarray):
    """Largest sup-norm ball inside {Ax <= b}: maximize r s.t. Ax + r*||a_i||_1 <= b.

    Returns (center, r).  r <= 0 means the interior is empty.
    """
    m, n = A.shape
    norms1 = np.sum(np.abs(A), axis=1)
    # variables (x, r); minimize -r
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, norms1[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(None, None)],
                  method="highs")
    if not res.success:
        return None, -np.inf
    return res.x[:n], float(res.x[-1])


def _polytope_support(A: np.ndarray, b: np.ndarray, direction: np.ndarray):
    """max d.x over {Ax <= b}; returns (value, argmax) or (inf, None) if unbounded."""
    res = linprog(-direction, A_ub=A, b_ub=b,
                  bounds=[(None, None)] * A.shape[1], method="highs")
    if res.status == 3:  # unbounded
        return np.inf, None
    if not res.success:
        raise BodyValidationError(f"support LP failed: {res.message}")
    return float(-res.fun), res.x


def make_polytope(A, b, declared_R: Optional[float] = None) -> ConvexBody:
    """H-polytope ``{x : A x <= b}``; rejects empty-interior and unbounded inputs."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise BodyValidationError(
            f"inconsistent polytope data: A has shape {A.shape}, b has shape {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise BodyValidationError("polytope data must be finite")
    dim = A.shape[1]
    center, inradius = _polytope_inf_ball_center(A, b)
    if center is None or inradius <= 0:
        raise BodyValidationError("polytope has empty interior")
    outer = 0.0
    for j in range(dim):
        for sign in (1.0, -1.0):
            d = np.zeros(dim)
            d[j] = sign
            val, _ = _polytope_support(A, b, d)
            if not math.isfinite(val):
                raise BodyValidationError(f"polytope is unbounded along axis {j}")
            outer = max(outer, val)
    R = max(1.0, outer) if declared_R is None else float(declared_R)
    if R < 1.0:
        raise BodyValidationError("declared_R must be >= 1")
    return ConvexBody(kind="h_polytope", dim=dim, declared_R=R, A=A, b=b,
                      interior_point=np.asarray(center))


def standard_simplex(dim: int, scale: float = 1.0) -> ConvexBody:
    """Simplex ``{x >= 0, sum x <= scale}`` as an h-polytope with an exact sampler."""
    if scale <= 0:
        raise BodyValidationError("simplex scale must be positive")
    A = np.vstack([-np.eye(dim), np.ones((1, dim))])
    b = np.concatenate([np.zeros(dim), [scale]])
    body = make_polytope(A, b)
    return replace(body, simplex_scale=float(scale))


def make_intersection(components: Sequence[ConvexBody],
                      declared_R: Optional[float] = None,
                      interior_point=None) -> ConvexBody:
    """Intersection of bodies; membership, chords and robust interior compose exactly."""
    comps = tuple(components)
    if not comps:
        raise BodyValidationError("intersection needs at least one component")
    dim = comps[0].dim
    if any(c.dim != dim for c in comps):
        raise BodyValidationError("intersection components must share dimension")
    R = min(c.declared_R for c in comps) if declared_R is None else float(declared_R)
    if R < 1.0:
        R = 1.0
    body = ConvexBody(kind="intersection", dim=dim, declared_R=R, components=comps)
    if interior_point is None:
        candidates = [np.zeros(dim)] + [c.interior_point for c in comps
                                        if c.interior_point is not None]
    else:
        candidates = [_as_vector(interior_point, dim, "interior_point")]
    for p in candidates:
        if robust_interior_contains(body, p, 1e-9):
            return replace(body, interior_point=np.asarray(p, dtype=float))
    raise BodyValidationError(
        "no interior point found for intersection; pass interior_point explicitly")


def random_sandwiched_polytope(dim: int, n_facets: int, rng: np.random.Generator,
                               slack: float = 1.5,
                               bounding_half_width: float = 3.0) -> ConvexBody:
    """Random h-polytope with ``B_inf`` inside it, bounded by a surrounding box.

    Facet normals are uniform on the sphere; offsets are ``||a||_1 * (1 + u*slack)``
    so every facet clears the unit sup-norm ball.
    """
    normals = rng.normal(size=(n_facets, dim))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.sum(np.abs(normals), axis=1) * (1.0 + slack * rng.random(n_facets))
    A = np.vstack([normals, np.eye(dim), -np.eye(dim)])
    b = np.concatenate([offsets,
                        np.full(dim, bounding_half_width),
                        np.full(dim, bounding_half_width)])
    return make_polytope(A, b)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def contains_many(body: ConvexBody, X: np.ndarray) -> np.ndarray:
    """Vectorized closed membership test for an (m, n) array of points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != body.dim:
        raise ValueError(f"points have dimension {X.shape[1]}, body has {body.dim}")
    tol = _membership_tol(body)
    if body.kind == "box":
        return np.all(np.abs(X - body.center) <= body.halfwidths + tol, axis=1)
    if body.kind == "euclidean_ball":
        return np.linalg.norm(X - body.center, axis=1) <= body.radius + tol
    if body.kind == "h_polytope":
        return np.all(X @ body.A.T <= body.b + tol, axis=1)
    if body.kind == "intersection":
        ok = np.ones(X.shape[0], dtype=bool)
        for comp in body.components:
            ok &= contains_many(comp, X)
        return ok
    raise ValueError(f"unknown body kind {body.kind!r}")


def contains(body: ConvexBody, x: np.ndarray) -> bool:
    """Closed membership: boundary points count as inside."""
    x = _as_vector(x, body.dim, "x")
    return bool(contains_many(body, x[None, :])[0])


# ---------------------------------------------------------------------------
# support and extents
# ---------------------------------------------------------------------------

def support(body: ConvexBody, direction: np.ndarray) -> tuple[float, bool]:
    """Support value ``max_{x in K} d.x`` and whether it is exact.

    Intersections that mix polyhedral and ball components only admit the upper
    bound ``min_i h_{K_i}(d)``; the flag is False in that case.
    """
    d = _as_vector(direction, body.dim, "direction")
    if body.kind == "box":
        return float(d @ body.center + np.abs(d) @ body.halfwidths), True
    if body.kind == "euclidean_ball":
        return float(d @ body.center + body.radius * np.linalg.norm(d)), True
    if body.kind == "h_polytope":
        val, _ = _polytope_support(body.A, body.b, d)
        return val, True
    if body.kind == "intersection":
        stacked = _stacked_halfspaces(body)
        if stacked is not None:
            val, _ = _polytope_support(stacked[0], stacked[1], d)
            return val, True
        vals = [support(c, d)[0] for c in body.components]
        return min(vals), False
    raise ValueError(f"unknown body kind {body.kind!r}")


def _stacked_halfspaces(body: ConvexBody):
    """(A, b) for the body if it is polyhedral (possibly nested), else None."""
    if body.kind == "box":
        eye = np.eye(body.dim)
        A = np.vstack([eye, -eye])
        b = np.concatenate([body.center + body.halfwidths,
                            -(body.center - body.halfwidths)])
        return A, b
    if body.kind == "h_polytope":
        return body.A, body.b
    if body.kind == "intersection":
        parts = [_stacked_halfspaces(c) for c in body.components]
        if any(p is None for p in parts):
            return None
        return np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    return None


def bounding_box(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis (lo, hi) cover of the body from support values."""
    lo = np.empty(body.dim)
    hi = np.empty(body.dim)
    for j in range(body.dim):
        e = np.zeros(body.dim)
        e[j] = 1.0
        hi[j] = support(body, e)[0]
        lo[j] = -support(body, -e)[0]
    return lo, hi


def diameter(body: ConvexBody, norm: str = "l2") -> float:
    """Diameter (norm in {'l2','linf'}); for polytopes an exact-cover upper bound.

    The bound comes from per-axis extents, which is all the isoperimetry and
    overlap inequalities need (they hold for any valid upper bound).
    """
    if body.kind == "euclidean_ball":
        return 2.0 * body.radius
    lo, hi = bounding_box(body)
    extents = hi - lo
    if norm == "linf":
        return float(np.max(extents))
    if norm == "l2":
        if body.kind == "box":
            return float(np.linalg.norm(extents))
        return float(np.linalg.norm(extents))
    raise ValueError(f"unknown norm {norm!r}")


# ---------------------------------------------------------------------------
# chords
# ---------------------------------------------------------------------------

def _chord_bounds(body: ConvexBody, x: np.ndarray, d: np.ndarray) -> tuple[float, float]:
    if body.kind in ("box", "h_polytope"):
        A, b = _stacked_halfspaces(body)
        slack = np.maximum(b - A @ x, 0.0)
        speed = A @ d
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = np.where(speed > 0, slack / speed, np.inf)
            lower = np.where(speed < 0, slack / speed, -np.inf)
        return float(np.max(lower)), float(np.min(upper))
    if body.kind == "euclidean_ball":
        rel = x - body.center
        beta = float(rel @ d)
        gamma = float(rel @ rel) - body.radius ** 2
        disc = max(beta * beta - gamma, 0.0)
        root = math.sqrt(disc)
        return -beta - root, -beta + root
    if body.kind == "intersection":
        lo, hi = -np.inf, np.inf
        for comp in body.components:
            clo, chi = _chord_bounds(comp, x, d)
            lo, hi = max(lo, clo), min(hi, chi)
        return lo, hi
    raise ValueError(f"unknown body kind {body.kind!r}")


def chord(body: ConvexBody, x: np.ndarray, direction: np.ndarray) -> ChordSegment:
    """Exact chord of the body along a unit direction through ``x`` in K."""
    x = _as_vector(x, body.dim, "x")
    d = _as_vector(direction, body.dim, "direction")
    nrm = np.linalg.norm(d)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("direction must have unit Euclidean norm")
    if not contains(body, x):
        raise ValueError("chord base point is not in the body")
    lo, hi = _chord_bounds(body, x, d)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise BodyValidationError("body is unbounded along the requested direction")
    # base point membership forces 0 into the interval, up to rounding
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    return ChordSegment(t_lo=lo, t_hi=hi, exact=True)


def chord_bisection(body: ConvexBody, x: np.ndarray, direction: np.ndarray,
                    tol: Optional[float] = None) -> ChordSegment:
    """Chord from the membership oracle alone (independent of exact structure)."""
    x = _as_vector(x, body.dim, "x")
    d = _as_vector(direction, body.dim, "direction")
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("direction must have unit Euclidean norm")
    if not contains(body, x):
        raise ValueError("chord base point is not in the body")
    if tol is None:
        tol = CHORD_RTOL * max(1.0, body.declared_R)
    t_max = 2.0 * body.declared_R * math.sqrt(body.dim)

    def endpoint(sign: float) -> float:
        t_in, t_out = 0.0, sign * t_max
        if contains(body, x + t_out * d):
            raise ValueError(
                "bisection bracket not found within 2 * declared_R * sqrt(n); "
                "body exceeds its declared outer radius")
        while abs(t_out - t_in) > tol:
            mid = 0.5 * (t_in + t_out)
            if contains(body, x + mid * d):
                t_in = mid
            else:
                t_out = mid
        return t_in

    return ChordSegment(t_lo=endpoint(-1.0), t_hi=endpoint(1.0), exact=False, tol=tol)


def axis_chord_many(body: ConvexBody, X: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized chord bounds along coordinate ``axis`` for points assumed in K."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if body.kind == "box":
        lo = (body.center[axis] - body.halfwidths[axis]) - X[:, axis]
        hi = (body.center[axis] + body.halfwidths[axis]) - X[:, axis]
        return lo, hi
    if body.kind == "h_polytope":
        slack = np.maximum(body.b - X @ body.A.T, 0.0)
        speed = body.A[:, axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = np.where(speed > 0, slack / speed, np.inf)
            lower = np.where(speed < 0, slack / speed, -np.inf)
        return np.max(lower, axis=1), np.min(upper, axis=1)
    if body.kind == "euclidean_ball":
        rel = X - body.center
        beta = rel[:, axis]
        gamma = np.sum(rel * rel, axis=1) - body.radius ** 2
        disc = np.sqrt(np.maximum(beta * beta - gamma, 0.0))
        return -beta - disc, -beta + disc
    if body.kind == "intersection":
        lo = np.full(X.shape[0], -np.inf)
        hi = np.full(X.shape[0], np.inf)
        for comp in body.components:
            clo, chi = axis_chord_many(comp, X, axis)
            lo, hi = np.maximum(lo, clo), np.minimum(hi, chi)
        return lo, hi
    raise ValueError(f"unknown body kind {body.kind!r}")


# ---------------------------------------------------------------------------
# robust interior
# ---------------------------------------------------------------------------

def robust_interior_contains(body: ConvexBody, x: np.ndarray, r: float,
                             method: str = "auto") -> bool:
    """Whether ``x + v`` stays in K for every sup-norm perturbation ``|v|_inf <= r``.

    ``method='exact'`` uses the kind-specific criterion (for halfspaces
    ``a.x + r*||a||_1 <= b``); ``method='corners'`` checks the 2^n vertices of
    the perturbation cube through the membership oracle, which is equivalent
    by convexity and serves as an independent cross-check.
    """
    x = _as_vector(x, body.dim, "x")
    if r <= 0:
        raise ValueError("robust interior radius r must be positive")
    if method == "corners":
        if body.dim > CORNER_CHECK_MAX_DIM:
            raise ValueError(f"corner check limited to dim <= {CORNER_CHECK_MAX_DIM}")
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=body.dim)))
        return bool(np.all(contains_many(body, x[None, :] + r * signs)))
    if method not in ("auto", "exact"):
        raise ValueError(f"unknown method {method!r}")
    return bool(robust_interior_contains_many(body, x[None, :], r)[0])


def robust_interior_contains_many(body: ConvexBody, X: np.ndarray, r: float) -> np.ndarray:
    """Vectorized exact robust-interior test."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if r <= 0:
        raise ValueError("robust interior radius r must be positive")
    tol = _membership_tol(body)
    if body.kind == "box":
        return np.all(np.abs(X - body.center) + r <= body.halfwidths + tol, axis=1)
    if body.kind == "euclidean_ball":
        shifted = np.abs(X - body.center) + r
        return np.linalg.norm(shifted, axis=1) <= body.radius + tol
    if body.kind == "h_polytope":
        margin = r * np.sum(np.abs(body.A), axis=1)
        return np.all(X @ body.A.T + margin <= body.b + tol, axis=1)
    if body.kind == "intersection":
        ok = np.ones(X.shape[0], dtype=bool)
        for comp in body.components:
            ok &= robust_interior_contains_many(comp, X, r)
        return ok
    raise ValueError(f"unknown body kind {body.kind!r}")


@dataclass(frozen=True)
class RobustInteriorVolume:
    ratio_estimate: float
    se: float
    bound: float
    ci_mult: float
    samples: int
    passed: bool


def check_robust_interior_volume(body: ConvexBody, eps: float, samples: int,
                                 seed, ci_mult: float = 3.0) -> RobustInteriorVolume:
    """Monte Carlo check that ``vol(K_eps)/vol(K) >= (1 - eps)^n``.

    Requires the unit sup-norm ball inside the body (the shrinkage bound is
    stated under that normalization).  ``se`` is one standard error of the
    ratio estimate; the verdict allows ``ci_mult`` standard errors of slack.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if samples < 100:
        raise ValueError("too few samples for a meaningful interval")
    report = sandwich_validate(body)
    if not report.inner_ok:
        raise BodyValidationError("volume bound needs the unit sup-norm ball inside the body")
    rng = np.random.default_rng(seed)
    pts = sample_uniform(body, samples, rng)
    inside = robust_interior_contains_many(body, pts, eps)
    ratio = float(np.mean(inside))
    se = math.sqrt(max(ratio * (1 - ratio), 1e-12) / samples)
    bound = (1.0 - eps) ** body.dim
    return RobustInteriorVolume(ratio_estimate=ratio, se=se, bound=bound,
                                ci_mult=ci_mult, samples=samples,
                                passed=ratio + ci_mult * se >= bound)


# ---------------------------------------------------------------------------
# sandwich validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichReport:
    inner_ok: bool
    outer_ok: bool
    witness: Optional[np.ndarray] = None
    failed_direction: Optional[tuple[int, int]] = None
    outer_method: str = "exact"


def _inner_ok(body: ConvexBody) -> bool:
    if body.kind == "box":
        return bool(np.all(body.halfwidths - np.abs(body.center) >= 1.0 - 1e-12))
    if body.kind == "euclidean_ball":
        far_corner = np.abs(body.center) + 1.0
        return bool(np.linalg.norm(far_corner) <= body.radius + 1e-12)
    if body.kind == "h_polytope":
        return bool(np.all(np.sum(np.abs(body.A), axis=1) <= body.b + 1e-12))
    if body.kind == "intersection":
        return all(_inner_ok(c) for c in body.components)
    raise ValueError(f"unknown body kind {body.kind!r}")


def _outer_witness(body: ConvexBody, axis: int, sign: int) -> np.ndarray:
    """A point of K achieving the support in direction sign*e_axis."""
    d = np.zeros(body.dim)
    d[axis] = sign
    if body.kind == "box":
        w = body.center.copy()
        w[axis] = body.center[axis] + sign * body.halfwidths[axis]
        return w
    if body.kind == "euclidean_ball":
        return body.center + body.radius * d
    A, b = _stacked_halfspaces(body)
    _, point = _polytope_support(A, b, d)
    return point


def sandwich_validate(body: ConvexBody,
                      mc_samples: int = 4096, seed=0) -> SandwichReport:
    """Check ``B_inf <= K <= declared_R * B_inf``.

    Inner containment is exact for every kind.  Outer containment is exact for
    boxes, balls and polyhedra; mixed intersections fall back to Monte Carlo
    falsification (a returned witness certifies failure, absence of one does
    not certify success).
    """
    R = body.declared_R
    inner = _inner_ok(body)

    exact_outer = body.kind in ("box", "euclidean_ball", "h_polytope") or \
        (body.kind == "intersection" and _stacked_halfspaces(body) is not None)
    if exact_outer:
        for j in range(body.dim):
            for sign in (1, -1):
                e = np.zeros(body.dim)
                e[j] = sign
                val, _ = support(body, e)
                if val > R + 1e-9 * max(1.0, R):
                    return SandwichReport(inner_ok=inner, outer_ok=False,
                                          witness=_outer_witness(body, j, sign),
                                          failed_direction=(j, sign))
        return SandwichReport(inner_ok=inner, outer_ok=True)

    # conservative shortcut: the intersection sits inside any one component
    vals = []
    for j in range(body.dim):
        for sign in (1, -1):
            e = np.zeros(body.dim)
            e[j] = sign
            vals.append(support(body, e)[0])
    if max(vals) <= R + 1e-9 * max(1.0, R):
        return SandwichReport(inner_ok=inner, outer_ok=True, outer_method="component_bound")

    rng = np.random.default_rng(seed)
    pts = rejection_uniform_sample(body, mc_samples, rng)
    norms = np.max(np.abs(pts), axis=1)
    worst = int(np.argmax(norms))
    if norms[worst] > R:
        j = int(np.argmax(np.abs(pts[worst])))
        return SandwichReport(inner_ok=inner, outer_ok=False, witness=pts[worst],
                              failed_direction=(j, int(np.sign(pts[worst][j]))),
                              outer_method="monte_carlo")
    return SandwichReport(inner_ok=inner, outer_ok=True, outer_method="monte_carlo")


# ---------------------------------------------------------------------------
# reference samplers
# ---------------------------------------------------------------------------

def exact_uniform_sample(body: ConvexBody, rng: np.random.Generator,
                         size: Optional[int] = None) -> np.ndarray:
    """Exactly uniform samples for reference bodies (box, ball, simplex).

    Boxes sample coordinate-wise; balls use a normalized Gaussian direction
    with a ``U^{1/n}`` radius; simplices use exponential spacings.
    """
    m = 1 if size is None else int(size)
    if body.kind == "box":
        lo = body.center - body.halfwidths
        hi = body.center + body.halfwidths
        out = rng.uniform(lo, hi, size=(m, body.dim))
    elif body.kind == "euclidean_ball":
        g = rng.normal(size=(m, body.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radii = body.radius * rng.random(m) ** (1.0 / body.dim)
        out = body.center + g * radii[:, None]
    elif body.simplex_scale is not None:
        e = rng.exponential(size=(m, body.dim + 1))
        out = body.simplex_scale * e[:, :-1] / np.sum(e, axis=1, keepdims=True)
    else:
        raise ValueError(f"no exact sampler for body kind {body.kind!r}")
    return out[0] if size is None else out


def rejection_uniform_sample(body: ConvexBody, count: int, rng: np.random.Generator,
                             max_batches: int = 10000) -> np.ndarray:
    """Exactly uniform samples for any bounded body via bounding-box rejection.

    Acceptance degrades exponentially with dimension; intended as a ground
    truth oracle at desk scale, not a production sampler.
    """
    lo, hi = bounding_box(body)
    got: list[np.ndarray] = []
    n_acc = 0
    batch = max(count, 1024)
    for _ in range(max_batches):
        cand = rng.uniform(lo, hi, size=(batch, body.dim))
        acc = cand[contains_many(body, cand)]
        if acc.size:
            got.append(acc)
            n_acc += acc.shape[0]
        if n_acc >= count:
            return np.vstack(got)[:count]
    raise RuntimeError("rejection sampling acceptance rate too low for this body")


def scale_body(body: ConvexBody, s: float) -> ConvexBody:
    """The dilate ``s * K`` (about the origin)."""
    if s <= 0:
        raise ValueError("scale must be positive")
    R = max(1.0, s * body.declared_R)
    ip = None if body.interior_point is None else s * body.interior_point
    if body.kind == "box":
        return replace(body, center=s * body.center, halfwidths=s * body.halfwidths,
                       declared_R=R, interior_point=ip)
    if body.kind == "euclidean_ball":
        return replace(body, center=s * body.center, radius=s * body.radius,
                       declared_R=R, interior_point=ip)
    if body.kind == "h_polytope":
        scale = None if body.simplex_scale is None else s * body.simplex_scale
        return replace(body, b=s * body.b, declared_R=R, interior_point=ip,
                       simplex_scale=scale)
    if body.kind == "intersection":
        comps = tuple(scale_body(c, s) for c in body.components)
        return replace(body, components=comps, declared_R=R, interior_point=ip)
    raise ValueError(f"unknown body kind {body.kind!r}")


def sample_uniform(body: ConvexBody, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples: exact for reference bodies, else a coordinate-walk run."""
    if body.kind in ("box", "euclidean_ball") or body.simplex_scale is not None:
        return exact_uniform_sample(body, rng, size=count)
    from .schemes import approx_uniform_sample  # deferred: schemes builds on geometry

    return approx_uniform_sample(body, count, rng)


# ---------------------------------------------------------------------------
# grids (shared by the discretized chains and binning diagnostics)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BodyGrid:
    """Cell centers of a regular grid over the body's bounding box, kept when
    the center lies inside the body."""

    centers: np.ndarray          # (k, n) in-body cell centers
    index: np.ndarray            # (k, n) integer grid coordinates
    spacing: np.ndarray          # (n,) cell widths
    origin: np.ndarray           # (n,) lower corner of the grid
    cells_per_axis: int


def body_grid(body: ConvexBody, cells_per_axis: int) -> BodyGrid:
    lo, hi = bounding_box(body)
    spacing = (hi - lo) / cells_per_axis
    axes = [lo[j] + spacing[j] * (np.arange(cells_per_axis) + 0.5)
            for j in range(body.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    idx_mesh = np.meshgrid(*[np.arange(cells_per_axis)] * body.dim, indexing="ij")
    index = np.stack([m.ravel() for m in idx_mesh], axis=1)
    keep = contains_many(body, centers)
    if not np.any(keep):
        raise BodyValidationError("no grid cell centers fall inside the body")
    return BodyGrid(centers=centers[keep], index=index[keep], spacing=spacing,
                    origin=lo, cells_per_axis=cells_per_axis)
