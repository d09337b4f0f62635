"""Experiment harness: body-spec files, verification presets, manifests.

Body specifications are JSON documents with a canonical field order (sorted
keys) so that configuration hashes are stable under reordering.  Each preset
reproduces one acceptance-style verification at desk scale, writes a CSV of
per-instance rows plus a human-readable report, and returns a manifest with
the hashes of everything it wrote.

Verdicts are a trichotomy: ``pass``, ``fail``, or ``inconclusive`` (Monte
Carlo resolution too coarse for the bound under test -- never reported as a
failure).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import bounds, conductance, diagnostics, geometry, mixture, schemes
from .geometry import ConvexBody

VERSION = "0.1.0"

PRESET_NAMES = (
    "uniformity", "reversibility", "flow-symmetry", "pinsker", "lemma11",
    "lemma12", "isoperimetry", "robust-interior", "s-conductance", "ls-mixing",
    "scaling", "bounds-table",
)


# ---------------------------------------------------------------------------
# body spec files
# ---------------------------------------------------------------------------

def body_to_dict(body: ConvexBody) -> dict:
    d: dict = {"dim": body.dim, "kind": body.kind, "declared_R": body.declared_R}
    if body.kind == "box":
        d["center"] = body.center.tolist()
        d["halfwidths"] = body.halfwidths.tolist()
    elif body.kind == "euclidean_ball":
        d["center"] = body.center.tolist()
        d["radius"] = body.radius
    elif body.kind == "h_polytope":
        d["A"] = body.A.tolist()
        d["b"] = body.b.tolist()
        if body.simplex_scale is not None:
            d["simplex_scale"] = body.simplex_scale
    elif body.kind == "intersection":
        d["components"] = [body_to_dict(c) for c in body.components]
    return d


def _require(d: dict, key: str, kind: str):
    if key not in d:
        raise ValueError(f"body spec of kind {kind!r} is missing field {key!r}")
    return d[key]


def body_from_dict(d: dict) -> ConvexBody:
    kind = _require(d, "kind", "?")
    dim = int(_require(d, "dim", kind))
    declared_R = d.get("declared_R")
    if kind == "box":
        body = geometry.make_box(_require(d, "halfwidths", kind),
                                 center=d.get("center"), declared_R=declared_R)
    elif kind == "euclidean_ball":
        body = geometry.make_ball(_require(d, "radius", kind),
                                  center=d.get("center"),
                                  dim=dim, declared_R=declared_R)
    elif kind == "h_polytope":
        body = geometry.make_polytope(_require(d, "A", kind), _require(d, "b", kind),
                                      declared_R=declared_R)
        if "simplex_scale" in d:
            from dataclasses import replace
            body = replace(body, simplex_scale=float(d["simplex_scale"]))
    elif kind == "intersection":
        comps = [body_from_dict(c) for c in _require(d, "components", kind)]
        body = geometry.make_intersection(comps, declared_R=declared_R)
    else:
        raise ValueError(f"unknown body kind {kind!r}")
    if body.dim != dim:
        raise ValueError(f"field 'dim' is {dim} but the body data has dimension {body.dim}")
    return body


def save_body_spec(body: ConvexBody, path) -> None:
    Path(path).write_text(canonical_json(body_to_dict(body)) + "\n")


@dataclass(frozen=True)
class LoadedBody:
    body: ConvexBody
    warnings: tuple[str, ...]


def load_body_spec(path, require_sandwich: bool = False) -> LoadedBody:
    """Parse and validate a body spec file; the sandwich check runs automatically.

    Sandwich failures are attached as warnings unless ``require_sandwich`` is
    set (theorem-facing presets require the declared sandwich to hold).
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: body spec is not valid JSON: {exc}") from exc
    body = body_from_dict(data)
    report = geometry.sandwich_validate(body)
    warnings = []
    if not report.inner_ok:
        warnings.append("inner_ok=false: the unit sup-norm ball is not inside the body")
    if not report.outer_ok:
        warnings.append(f"outer_ok=false: witness {report.witness} exceeds declared_R")
    if require_sandwich and warnings:
        raise geometry.BodyValidationError(
            f"{path}: sandwich validation failed: {'; '.join(warnings)}")
    return LoadedBody(body=body, warnings=tuple(warnings))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf8")).hexdigest()


# ---------------------------------------------------------------------------
# records, manifests, reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    """One verified quantity: measured value against its bound."""

    label: str
    measured: float
    bound: float
    verdict: str          # pass | fail | inconclusive
    note: str = ""


def aggregate_verdict(records: Sequence[CheckRecord]) -> str:
    if any(r.verdict == "fail" for r in records):
        return "fail"
    if any(r.verdict == "inconclusive" for r in records):
        return "inconclusive"
    return "pass"


@dataclass
class RunManifest:
    preset: str
    config: dict
    config_hash: str
    version: str
    seed: int
    started_at: float
    finished_at: float
    outputs: list[dict] = field(default_factory=list)
    verdict: str = "pass"

    def to_dict(self) -> dict:
        return {
            "preset": self.preset, "config": self.config,
            "config_hash": self.config_hash, "version": self.version,
            "seed": self.seed, "started_at": self.started_at,
            "finished_at": self.finished_at, "outputs": self.outputs,
            "verdict": self.verdict,
        }


@dataclass
class PresetRun:
    name: str
    manifest: RunManifest
    records: list[CheckRecord]
    out_dir: Path

    @property
    def verdict(self) -> str:
        return self.manifest.verdict


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_records_csv(path: Path, records: Sequence[CheckRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "measured", "bound", "verdict", "note"])
        for r in records:
            writer.writerow([r.label, repr(r.measured), repr(r.bound), r.verdict, r.note])


def write_trajectory_csv(path: Path, trajectories: Sequence[np.ndarray],
                         thinning: int = 1) -> None:
    """Trajectory CSV: chain_id, step, x_1..x_n (header row mandatory)."""
    dim = trajectories[0].shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain_id", "step"] + [f"x_{j + 1}" for j in range(dim)])
        for cid, traj in enumerate(trajectories):
            for row_idx, state in enumerate(traj):
                writer.writerow([cid, row_idx * thinning] + [repr(v) for v in state])


def emit_report(run: PresetRun, path: Optional[Path] = None) -> Path:
    """Human-readable summary: one line per check with its verdict."""
    path = run.out_dir / "report.txt" if path is None else Path(path)
    lines = [
        f"preset: {run.name}",
        f"verdict: {run.verdict}",
        f"seed: {run.manifest.seed}",
        f"config_hash: {run.manifest.config_hash}",
        "",
    ]
    for r in run.records:
        lines.append(f"{r.verdict.upper():12s} {r.label}: measured={r.measured:.6g} "
                     f"bound={r.bound:.6g}" + (f"  [{r.note}]" if r.note else ""))
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# preset implementations (each mirrors one acceptance criterion)
# ---------------------------------------------------------------------------

def _preset_uniformity(ov: dict, seed: int) -> list[CheckRecord]:
    """Coordinate walk on [-1,1]^3 from a 4-warm start against the exact sampler."""
    dim = int(ov.get("dim", 3))
    chains = int(ov.get("chains", 64))
    steps = int(ov.get("steps", 5000))
    M = float(ov.get("M", 4.0))
    bins = int(ov.get("bins", 4))
    body = geometry.unit_cube(dim)
    rng = schemes.derive_rng(seed, "uniformity")
    starts = schemes.warm_start_sample(body, M, rng, size=chains)
    keep_from = steps // 2 + 1
    marks = list(range(keep_from, steps + 1))
    snaps = schemes.run_chr_chains_batch(body, starts, steps, rng, checkpoints=marks)
    pooled = np.concatenate([snaps[m] for m in marks], axis=0)
    reference = geometry.exact_uniform_sample(body, rng, size=pooled.shape[0])
    grid = diagnostics.grid_for_body(body, bins)
    tv = diagnostics.two_sample_binned_tv(pooled, reference, grid)
    ks = diagnostics.ks_statistic_per_axis(pooled, reference)
    return [
        CheckRecord("pooled-two-sample-tv", tv.value, 0.05,
                    "pass" if tv.value <= 0.05 else "fail",
                    f"bins={bins} noise_floor={tv.noise_floor:.4f}"),
        CheckRecord("worst-axis-ks", float(ks.max()), 0.02,
                    "pass" if ks.max() <= 0.02 else "fail",
                    f"pooled={pooled.shape[0]} states/side"),
    ]


def _random_polytopes(seed, count: int, n_facets: int = 6) -> list[ConvexBody]:
    rng = schemes.derive_rng(seed, "polytopes")
    return [geometry.random_sandwiched_polytope(2, n_facets, rng) for _ in range(count)]


def _preset_reversibility(ov: dict, seed: int) -> list[CheckRecord]:
    count = int(ov.get("bodies", 20))
    cells = int(ov.get("cells", 8))
    records = []
    for i, body in enumerate(_random_polytopes(seed, count)):
        chain = conductance.discretize_chr(body, cells)
        diag = conductance.validate_chain(chain)
        records.append(CheckRecord(f"reversibility-{i}", diag.reversibility_dev, 1e-12,
                                   "pass" if diag.reversibility_dev <= 1e-12 else "fail",
                                   f"states={chain.size}"))
        records.append(CheckRecord(f"stationarity-{i}", diag.stationarity_dev, 1e-10,
                                   "pass" if diag.stationarity_dev <= 1e-10 else "fail"))
    return records


def _preset_flow_symmetry(ov: dict, seed: int) -> list[CheckRecord]:
    count = int(ov.get("bodies", 20))
    cells = int(ov.get("cells", 8))
    subsets = int(ov.get("subsets", 100))
    rng = schemes.derive_rng(seed, "flow-symmetry")
    records = []
    for i, body in enumerate(_random_polytopes(seed, count)):
        chain = conductance.discretize_chr(body, cells)
        worst = 0.0
        for _ in range(subsets):
            size = int(rng.integers(1, chain.size))
            A = rng.choice(chain.size, size=size, replace=False)
            comp = np.setdiff1d(np.arange(chain.size), A)
            worst = max(worst, abs(conductance.ergodic_flow(chain, A)
                                   - conductance.ergodic_flow(chain, comp)))
        records.append(CheckRecord(f"flow-symmetry-{i}", worst, 1e-10,
                                   "pass" if worst <= 1e-10 else "fail",
                                   f"subsets={subsets}"))
    return records


def _preset_pinsker(ov: dict, seed: int) -> list[CheckRecord]:
    trials = int(ov.get("trials", 1000))
    rng = schemes.derive_rng(seed, "pinsker")
    violations = 0
    worst_gap = -np.inf
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        tau = int(rng.integers(n, n + 12))
        counts = mixture.sample_multi_index_batch(n, tau - n, 1, rng)[0] + 1
        index = mixture.MultiIndex(tuple(int(c) for c in counts))
        sigma = float(np.exp(rng.normal(scale=1.0)))
        v = rng.normal(scale=2.0 * sigma, size=n)
        u = rng.normal(scale=2.0 * sigma, size=n)
        tv = mixture.gaussian_tv_equal_cov(v, u, index, sigma)
        cap = min(1.0, mixture.pinsker_shift_bound(v, u, sigma))
        if tv > cap + 1e-12:
            violations += 1
        worst_gap = max(worst_gap, tv - cap)
    return [CheckRecord("tv-pinsker-violations", float(violations), 0.0,
                        "pass" if violations == 0 else "fail",
                        f"trials={trials} worst tv-bound gap={worst_gap:.3e}")]


def _preset_lemma11(ov: dict, seed: int) -> list[CheckRecord]:
    n = int(ov.get("n", 2))
    sigma = float(ov.get("sigma", 1e-3))
    samples = int(ov.get("samples", 400_000))
    rejection_runs = int(ov.get("rejection_runs", 1_000_000))
    result = diagnostics.iterate_mixture_check(
        n=n, sigma=sigma, half_width=float(ov.get("half_width", 1.0)),
        samples=samples, seed=seed, rejection_runs=rejection_runs)
    rej_pass = result.rejection_rate <= result.rejection_bound + 3 * result.rejection_se
    return [
        CheckRecord("iterate-rejection-rate", result.rejection_rate,
                    result.rejection_bound, "pass" if rej_pass else "fail",
                    f"runs={result.rejection_runs} se={result.rejection_se:.2e}"),
        CheckRecord("iterate-mixture-tv", result.tv_estimate, result.tv_bound,
                    result.verdict,
                    f"noise_floor={result.noise_floor:.4f} tau={result.tau}"),
    ]


def _preset_lemma12(ov: dict, seed: int) -> list[CheckRecord]:
    n = int(ov.get("n", 2))
    sigma = float(ov.get("sigma", 1e-3))
    samples = int(ov.get("samples", 300_000))
    result = diagnostics.nearby_starts_check(
        n=n, sigma=sigma, half_width=float(ov.get("half_width", 1.0)),
        samples=samples, seed=seed)
    agg_tau = int(ov.get("aggregate_tau", 6))
    direction = np.ones(n) / math.sqrt(n)
    agg = mixture.mixture_tv_aggregate(0.5 * sigma * direction, -0.5 * sigma * direction,
                                       n, agg_tau, sigma)
    return [
        CheckRecord("nearby-starts-tv", result.tv_estimate, result.tv_bound,
                    result.verdict,
                    f"ci={result.ci_halfwidth:.4f} tau={result.tau}"),
        CheckRecord("mixture-weighted-tv", agg, 0.5,
                    "pass" if agg <= 0.5 else "fail", f"tau={agg_tau} enumerated"),
    ]


def _preset_robust_interior(ov: dict, seed: int) -> list[CheckRecord]:
    count = int(ov.get("bodies", 20))
    samples = int(ov.get("samples", 2000))
    scale_points = int(ov.get("scaled_points", 1000))
    records = []
    rng = schemes.derive_rng(seed, "robust-interior")
    for i, body in enumerate(_random_polytopes(seed, count)):
        for eps in (0.1, 0.3):
            res = geometry.check_robust_interior_volume(body, eps, samples,
                                                        seed=rng.integers(2 ** 63))
            records.append(CheckRecord(
                f"volume-ratio-{i}-eps{eps}", res.ratio_estimate, res.bound,
                "pass" if res.passed else "fail", f"se={res.se:.4f}"))
        eps = 0.1
        pts = geometry.rejection_uniform_sample(body, scale_points, rng) * (1 - eps)
        ok = geometry.robust_interior_contains_many(body, pts, eps)
        records.append(CheckRecord(
            f"shrunk-containment-{i}", float(np.mean(ok)), 1.0,
            "pass" if bool(np.all(ok)) else "fail", f"points={scale_points}"))
    return records


def _preset_isoperimetry(ov: dict, seed: int) -> list[CheckRecord]:
    samples = int(ov.get("samples", 20000))
    instances = int(ov.get("instances", 50))
    records = []

    # closed-form instance: central slab of the square, analytic gap = delta/2
    body = geometry.unit_cube(2)
    delta = 0.2
    res = conductance.isoperimetry_check(
        body, lambda X: X[:, 0] <= -delta / 2, lambda X: X[:, 0] >= delta / 2,
        delta, norm="l2", samples=samples, seed=seed)
    analytic = delta / 2
    close = abs(res.lhs_estimate - analytic) <= 3 * max(res.lhs_se, 1e-12)
    records.append(CheckRecord("slab-gap-vs-analytic", res.lhs_estimate, analytic,
                               "pass" if close else "fail", f"se={res.lhs_se:.4f}"))
    records.append(CheckRecord("slab-inequality", res.lhs_estimate, res.rhs_estimate,
                               "pass" if res.passed else "fail"))

    rng = schemes.derive_rng(seed, "isoperimetry")
    violations = 0
    for i in range(instances):
        if i % 2 == 0:
            hw = rng.uniform(1.0, 2.5, size=2)
            inst = geometry.make_box(hw)
        else:
            inst = geometry.random_sandwiched_polytope(2, 6, rng)
        lo, hi = geometry.bounding_box(inst)
        axis = int(rng.integers(2))
        width = hi[axis] - lo[axis]
        d = float(rng.uniform(0.05, 0.2) * width)
        cut = float(rng.uniform(lo[axis] + 0.3 * width, hi[axis] - 0.3 * width))
        res = conductance.isoperimetry_check(
            inst, lambda X, a=axis, c=cut, dd=d: X[:, a] <= c - dd / 2,
            lambda X, a=axis, c=cut, dd=d: X[:, a] >= c + dd / 2,
            d, norm="l2", samples=samples // 2, seed=rng.integers(2 ** 63))
        if not res.passed:
            violations += 1
    records.append(CheckRecord("random-instances-violations", float(violations), 0.0,
                               "pass" if violations == 0 else "fail",
                               f"instances={instances}"))
    return records


def _small_chains(seed, count: int, cells: int = 4, max_states: int = 16):
    """Grid coordinate-walk chains on random polytopes with <= max_states cells."""
    rng = schemes.derive_rng(seed, "small-chains")
    chains = []
    tries = 0
    while len(chains) < count and tries < 200:
        tries += 1
        body = geometry.random_sandwiched_polytope(2, 6, rng)
        chain = conductance.discretize_chr(body, cells)
        if 4 <= chain.size <= max_states:
            chains.append(chain)
    if len(chains) < count:
        raise RuntimeError("could not build enough small chains")
    return chains


def _warm_mu0(chain, rng, style: str) -> np.ndarray:
    k = chain.size
    if style == "point":
        mu = np.zeros(k)
        mu[int(rng.integers(k))] = 1.0
    elif style == "subset":
        size = max(1, k // 4)
        mu = np.zeros(k)
        mu[rng.choice(k, size=size, replace=False)] = 1.0 / size
    else:
        w = 1.0 + rng.random(k)
        mu = w / w.sum()
    return mu


def _preset_ls_mixing(ov: dict, seed: int) -> list[CheckRecord]:
    count = int(ov.get("chains", 10))
    k_max = int(ov.get("k_max", 200))
    rng = schemes.derive_rng(seed, "ls-mixing")
    records = []
    violations = 0
    worst_margin = np.inf
    for idx, chain in enumerate(_small_chains(seed, count)):
        mu0 = _warm_mu0(chain, rng, ("point", "subset", "random")[idx % 3])
        tvs = conductance.tv_curve(chain, mu0, k_max)
        for s in (0.05, 0.1):
            phi = conductance.s_conductance(chain, s, mode="exact").value
            h_s = conductance.warm_start_discrepancy(chain, mu0, s)
            for k in range(k_max + 1):
                bound = bounds.tv_bound_from_conductance(h_s, min(phi, 1.0), s, k)
                margin = bound - tvs[k]
                worst_margin = min(worst_margin, margin)
                if margin < -1e-12:
                    violations += 1
    records.append(CheckRecord("tv-bound-violations", float(violations), 0.0,
                               "pass" if violations == 0 else "fail",
                               f"chains={count} worst margin={worst_margin:.3e}"))
    return records


def _preset_s_conductance(ov: dict, seed: int) -> list[CheckRecord]:
    count = int(ov.get("chains", 10))
    cuts = int(ov.get("cuts", 50))
    rng = schemes.derive_rng(seed, "s-conductance")
    chains = _small_chains(seed, count)
    violations = 0
    checked = 0
    for chain in chains:
        powers = {tau: conductance.chain_power(chain, tau) for tau in range(2, 6)}
        for _ in range(cuts // count + 1):
            size = int(rng.integers(1, chain.size))
            A = rng.choice(chain.size, size=size, replace=False)
            base = conductance.ergodic_flow(chain, A)
            for tau, ptau in powers.items():
                checked += 1
                if base < conductance.ergodic_flow(ptau, A) / tau - 1e-12:
                    violations += 1
    records = [CheckRecord("multi-step-flow-violations", float(violations), 0.0,
                           "pass" if violations == 0 else "fail",
                           f"comparisons={checked}")]
    sandwich_bad = 0
    for chain in chains[:3]:
        exact = conductance.s_conductance(chain, 0.1, mode="exact").value
        sweep = conductance.s_conductance(chain, 0.1, mode="sweep",
                                          seed=int(rng.integers(2 ** 63))).value
        if exact > sweep + 1e-12:
            sandwich_bad += 1
    records.append(CheckRecord("exact-below-sweep-violations", float(sandwich_bad), 0.0,
                               "pass" if sandwich_bad == 0 else "fail"))
    return records


def _preset_scaling(ov: dict, seed: int) -> list[CheckRecord]:
    dims = tuple(ov.get("dims", (2, 3, 4, 5, 6)))
    chains = int(ov.get("chains", 2048))
    M = float(ov.get("M", 4.0))
    eps = float(ov.get("eps", 0.25))
    max_exp = int(ov.get("max_exponent", 10))
    checkpoints = [2 ** i for i in range(max_exp + 1)]
    records = []
    crossings = []
    for n in dims:
        body = geometry.unit_cube(n)
        report = diagnostics.mixing_time_empirical(
            schemes.chr_scheme(), body, M, eps, checkpoints, chains,
            seed=schemes.derive_rng(seed, "scaling", n).integers(2 ** 63),
            statistic="infnorm_radial")
        step = report.first_step_below
        if step is None:
            records.append(CheckRecord(f"mixing-checkpoint-n{n}", float("nan"),
                                       float(checkpoints[-1]), "fail",
                                       "threshold never reached"))
            continue
        crossings.append((n, step))
        theory = bounds.mixing_step_bound(bounds.BoundParams(n=n, R=1.0, M=M, eps=eps))
        records.append(CheckRecord(
            f"mixing-checkpoint-n{n}", float(step), float(theory),
            "pass" if step <= theory else "fail",
            f"empirical crossing vs shape-only bound (C_main=1)"))
    mono_ok = all(crossings[i + 1][1] >= crossings[i][1]
                  for i in range(len(crossings) - 1))
    records.append(CheckRecord(
        "crossing-monotone-in-dim",
        float(crossings[-1][1] if crossings else -1), float(crossings[0][1] if crossings else -1),
        "pass" if mono_ok and len(crossings) == len(dims) else "fail",
        " ".join(f"n{n}:{s}" for n, s in crossings)))
    return records


def _preset_bounds_table(ov: dict, seed: int) -> list[CheckRecord]:
    params = bounds.BoundParams(
        n=int(ov.get("n", 2)), R=float(ov.get("R", 1.0)), M=float(ov.get("M", 1.0)),
        eps=float(ov.get("eps", 0.25)), s=float(ov.get("s", 0.25)),
        sigma=float(ov.get("sigma", 1e-3)), C_main=float(ov.get("C_main", 1.0)),
        c_cond=float(ov.get("c_cond", 1.0)), c_flow=float(ov.get("c_flow", 1.0)))
    records = []
    for row in bounds.bound_table(params):
        records.append(CheckRecord(f"table-{row.label}", row.value, row.value,
                                   "pass", row.note))
    return records


_PRESETS: dict[str, Callable[[dict, int], list[CheckRecord]]] = {
    "uniformity": _preset_uniformity,
    "reversibility": _preset_reversibility,
    "flow-symmetry": _preset_flow_symmetry,
    "pinsker": _preset_pinsker,
    "lemma11": _preset_lemma11,
    "lemma12": _preset_lemma12,
    "isoperimetry": _preset_isoperimetry,
    "robust-interior": _preset_robust_interior,
    "s-conductance": _preset_s_conductance,
    "ls-mixing": _preset_ls_mixing,
    "scaling": _preset_scaling,
    "bounds-table": _preset_bounds_table,
}


def run_preset(name: str, overrides: Optional[dict] = None, seed: int = 0,
               out_dir=None) -> PresetRun:
    """Execute one verification preset; writes CSV, report and manifest.

    Identical (name, overrides, seed) yield byte-identical CSV and report
    files; manifest timestamps vary but output hashes are recorded for
    comparison.
    """
    if name not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    overrides = dict(overrides or {})
    out_dir = Path(out_dir) if out_dir is not None else Path("chrwalk_runs") / name
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {"preset": name, "overrides": overrides, "seed": seed}
    started = time.time()
    records = _PRESETS[name](overrides, seed)
    finished = time.time()
    manifest = RunManifest(preset=name, config=config, config_hash=config_hash(config),
                           version=VERSION, seed=seed, started_at=started,
                           finished_at=finished, verdict=aggregate_verdict(records))
    run = PresetRun(name=name, manifest=manifest, records=records, out_dir=out_dir)
    csv_path = out_dir / f"{name}.csv"
    write_records_csv(csv_path, records)
    report_path = emit_report(run)
    for p in (csv_path, report_path):
        manifest.outputs.append({"path": p.name, "sha256": _file_sha256(p)})
    (out_dir / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    return run
