"""Command line interface.

Subcommands: ``sample`` (trajectories to CSV), ``diagnose`` (empirical mixing
report), ``conductance`` (grid-chain s-conductance), ``bound`` (calculator
table), ``verify`` (run a verification preset).  ``--seed`` is mandatory for
every stochastic command.  Exit codes: 0 all checks passed, 1 any failed,
2 inconclusive results with no failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import bounds, conductance, diagnostics, geometry, harness, schemes

_EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}


def _parse_checkpoints(text: str) -> list[int]:
    return [int(float(tok)) for tok in text.split(",") if tok.strip()]


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def _scheme_from_args(args) -> schemes.MarkovScheme:
    if args.scheme == "chr":
        return schemes.chr_scheme()
    if args.scheme == "hnr":
        return schemes.hnr_scheme()
    if args.scheme == "gauss":
        return schemes.gaussian_scheme(args.sigma)
    raise SystemExit(f"unknown scheme {args.scheme!r}")


def cmd_sample(args) -> int:
    loaded = harness.load_body_spec(args.body)
    for w in loaded.warnings:
        print(f"warning: {w}", file=sys.stderr)
    body = loaded.body
    scheme = _scheme_from_args(args)
    trajectories = []
    for chain_id in range(args.chains):
        rng = schemes.derive_rng(args.seed, "sample", chain_id)
        if args.M is not None:
            start = schemes.warm_start_sample(body, args.M, rng)
        else:
            start = body.interior_point
        trajectories.append(schemes.run_chain(scheme, body, start, args.steps, rng,
                                              thinning=args.thin))
    harness.write_trajectory_csv(Path(args.out), trajectories, thinning=args.thin)
    print(f"wrote {args.chains} chains x {args.steps} steps to {args.out}")
    return 0


def cmd_diagnose(args) -> int:
    loaded = harness.load_body_spec(args.body)
    for w in loaded.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report = diagnostics.mixing_time_empirical(
        _scheme_from_args(args), loaded.body, args.M, args.eps,
        _parse_checkpoints(args.checkpoints), args.chains, args.seed,
        bins_per_axis=args.bins)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["checkpoint", "tv_estimate", "ci", "pass"])
        for step, est in zip(report.checkpoints, report.estimates):
            ok = est.value + est.ci_halfwidth < args.eps
            writer.writerow([step, repr(est.value), repr(est.ci_halfwidth),
                             str(ok).lower()])
    if report.first_step_below is None:
        print(f"threshold {args.eps} not reached by step {report.checkpoints[-1]}")
        return 2
    print(f"threshold {args.eps} reached at checkpoint {report.first_step_below}; "
          f"report in {out}")
    return 0


def cmd_conductance(args) -> int:
    loaded = harness.load_body_spec(args.body)
    chain = conductance.discretize_chr(loaded.body, args.cells)
    result = conductance.s_conductance(chain, args.s, mode=args.mode, seed=args.seed)
    out = Path(args.out)
    bits = sum(1 << int(i) for i in result.subset)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subset_bits", "measure", "flow", "ratio"])
        writer.writerow([bits, repr(result.measure), repr(result.flow),
                         repr(result.value)])
    tag = "upper bound" if result.is_upper_bound else "exact"
    print(f"s-conductance ({tag}) at s={args.s}: {result.value:.6g} "
          f"(states={chain.size}, minimizer in {out})")
    return 0


def cmd_bound(args) -> int:
    params = bounds.BoundParams(n=args.n, R=args.R, M=args.M, eps=args.eps,
                                s=args.s, sigma=args.sigma, C_main=args.C_main,
                                c_cond=args.c_cond, c_flow=args.c_flow)
    rows = bounds.bound_table(params)
    width = max(len(r.label) for r in rows)
    print(f"{'quantity':<{width}}  value         note")
    for r in rows:
        print(f"{r.label:<{width}}  {r.value:<12.6g}  {r.note}")
    return 0


def cmd_verify(args) -> int:
    run = harness.run_preset(args.preset, _parse_overrides(args.set), seed=args.seed,
                             out_dir=args.out)
    for r in run.records:
        print(f"{r.verdict.upper():12s} {r.label}: measured={r.measured:.6g} "
              f"bound={r.bound:.6g}")
    print(f"verdict: {run.verdict} (outputs in {run.out_dir})")
    return _EXIT[run.verdict]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chrwalk",
                                     description="Coordinate hit-and-run toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run walks and write trajectory CSVs")
    p.add_argument("--body", required=True)
    p.add_argument("--scheme", default="chr", choices=("chr", "hnr", "gauss"))
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--M", type=float, default=None, help="warm start level")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="trajectories.csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("diagnose", help="empirical mixing report")
    p.add_argument("--body", required=True)
    p.add_argument("--scheme", default="chr", choices=("chr", "hnr", "gauss"))
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--tau", type=int, default=None)
    p.add_argument("--M", type=float, default=4.0)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--chains", type=int, default=256)
    p.add_argument("--checkpoints", default="1e2,1e3,1e4")
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="diagnose.csv")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("conductance", help="grid-chain s-conductance")
    p.add_argument("--body", required=True)
    p.add_argument("--cells", type=int, default=8)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--mode", default="exact", choices=("exact", "sweep"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="conductance.csv")
    p.set_defaults(func=cmd_conductance)

    p = sub.add_parser("bound", help="closed-form bound table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--s", type=float, default=0.125)
    p.add_argument("--sigma", type=float, default=1e-3)
    p.add_argument("--C-main", dest="C_main", type=float, default=1.0)
    p.add_argument("--c-cond", dest="c_cond", type=float, default=1.0)
    p.add_argument("--c-flow", dest="c_flow", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="run a verification preset")
    p.add_argument("preset", choices=harness.PRESET_NAMES)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a preset parameter")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
