"""Command-line front end.

Subcommands: simulate (stopping-time and validity experiments), confseq
(single-stream confidence sequences), growth (rate analytics tables),
replay (recorded-stream ingestion), bench (runtime benchmark). Every
subcommand is deterministic given its config and seed, writes delimited
text with 10-significant-digit floats, and can render a matplotlib
figure next to the table with --figure.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
error. Flags override config-file values. The environment variable
BETSTREAM_OUTDIR selects the directory that relative output paths are
resolved against (default: current directory).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from betstream.capital import StreamConfig
from betstream.confseq import (
    EmpBernState,
    HedgedGridTracker,
    PeakIntervalTracker,
    PrPlHState,
    empbern_update,
    prplh_update,
)
from betstream.growth import emit_growth_grid, GROWTH_GRID_HEADER
from betstream.harness.bench import bench_runtime
from betstream.harness.config import (
    ConfigError,
    ExperimentConfig,
    config_from_file,
)
from betstream.harness.distributions import parse_distribution
from betstream.harness.experiments import run_bai, run_thr
from betstream.harness.montecarlo import power1_check, type1_mc
from betstream.harness.replay import ReplayParseError, replay_ingest
from betstream.harness.results import fmt, summary_lines, write_results
from betstream.regions import FeasibilityError, parse_region_spec

__all__ = ["main"]

OUTDIR_ENV = "BETSTREAM_OUTDIR"


def _resolve_out(path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), path)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    overrides = {
        "seed": args.seed,
        "n_paths": args.paths,
        "horizon": args.horizon,
        "method": args.method,
    }
    if args.config:
        config = config_from_file(args.config, overrides)
    else:
        raise ConfigError("config: --config file is required for simulate")
    out = _resolve_out(args.out)
    if config.problem == "thr":
        results, summary = run_thr(config, threads=args.threads)
        n_taus = config.w
    elif config.problem == "bai":
        results, summary = run_bai(config, threads=args.threads)
        n_taus = max(config.w - 1, 1)
    elif config.problem in ("type1", "power1"):
        return _simulate_mc(config, out, args)
    else:
        raise ConfigError(f"problem: unknown value {config.problem!r}")
    write_results(out, results, n_taus, summary, include_timing=args.timing)
    for line in summary_lines(summary):
        print(line.lstrip("# "))
    print(f"wrote {len(results)} paths to {out}")
    if args.figure:
        from betstream.plots import plot_stopping_times

        plot_stopping_times(results, _resolve_out(args.figure))
        print(f"wrote figure to {_resolve_out(args.figure)}")
    return 0


def _simulate_mc(config: ExperimentConfig, out: str, args) -> int:
    report = type1_mc(config) if config.problem == "type1" else power1_check(config)
    with open(out, "w") as fh:
        fh.write("path_id,seed,tau_1,complete,correct,wall_ms\n")
        for path_id, tau in enumerate(_mc_row_taus(report)):
            correct = (tau is None) if config.problem == "type1" else (tau is not None)
            fields = [
                str(path_id),
                str(config.seed),
                fmt(tau),
                "1",
                "1" if correct else "0",
                "0",
            ]
            fh.write(",".join(fields) + "\n")
        fh.write(
            f"# rate={fmt(report.rate)} se={fmt(report.se)} "
            f"n_rejected={report.n_rejected} horizon={report.horizon}\n"
        )
    print(
        f"{config.problem}: rejection rate {report.rate:.4f} "
        f"(se {report.se:.4f}) over {report.n_paths} paths"
    )
    print(f"wrote {report.n_paths} paths to {out}")
    return 0


def _mc_row_taus(report):
    taus = list(report.rejection_times)
    n_rejected = len(taus)
    i = 0
    for _ in range(report.n_paths):
        if i < n_rejected:
            yield taus[i]
            i += 1
        else:
            yield None


# ---------------------------------------------------------------------------
# confseq


def cmd_confseq(args) -> int:
    if args.infile:
        with open(args.infile) as fh:
            xs = [float(line.strip()) for line in fh if line.strip()]
    else:
        if not args.dist:
            raise ConfigError("dist: either --in or --dist is required")
        dist = parse_distribution(args.dist)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
        xs = list(dist.sample(rng, args.length))
    method, _, grid_text = args.method.partition(":")
    cfg = StreamConfig(c=args.c)
    rows = []
    if method == "peak":
        tracker = PeakIntervalTracker(cfg, args.alpha)
        for t, x in enumerate(xs, start=1):
            lo, hi = tracker.observe(x)
            rows.append((t, x, lo, hi))
    elif method == "prplh":
        state = PrPlHState()
        for t, x in enumerate(xs, start=1):
            state = prplh_update(state, x, t, args.alpha)
            rows.append((t, x, state.lo, state.hi))
    elif method == "empbern":
        state = EmpBernState()
        for t, x in enumerate(xs, start=1):
            state = empbern_update(state, x, t, args.alpha)
            rows.append((t, x, state.lo, state.hi))
    elif method == "hedged":
        grid = int(grid_text) if grid_text else 100
        tracker = HedgedGridTracker(grid, theta=0.5, alpha=args.alpha)
        for t, x in enumerate(xs, start=1):
            tracker.observe(x)
            lo, hi = tracker.interval()
            rows.append((t, x, lo, hi))
    else:
        raise ConfigError(f"method: unknown confidence-sequence method {args.method!r}")
    out = _resolve_out(args.out)
    with open(out, "w") as fh:
        fh.write("t,x,lo,hi,width\n")
        for t, x, lo, hi in rows:
            width = hi - lo if not (math.isnan(lo) or math.isnan(hi)) else math.nan
            fh.write(
                f"{t},{fmt(x)},{fmt(lo)},{fmt(hi)},{fmt(width)}\n"
            )
    print(f"wrote {len(rows)} interval rows to {out}")
    if args.figure:
        from betstream.plots import plot_confseq_widths

        plot_confseq_widths([(t, x, lo, hi) for t, x, lo, hi in rows], _resolve_out(args.figure))
        print(f"wrote figure to {_resolve_out(args.figure)}")
    return 0


# ---------------------------------------------------------------------------
# growth


def cmd_growth(args) -> int:
    rows = emit_growth_grid(args.c, args.resolution)
    out = _resolve_out(args.out)
    with open(out, "w") as fh:
        fh.write(GROWTH_GRID_HEADER + "\n")
        for m, mu, g, f in rows:
            f_text = "" if f is None else f"{f:.10g}"
            fh.write(f"{m:.10g},{mu:.10g},{g:.10g},{f_text}\n")
    print(f"wrote {len(rows)} grid rows to {out}")
    if args.figure:
        from betstream.plots import plot_growth_grid

        plot_growth_grid(rows, _resolve_out(args.figure))
        print(f"wrote figure to {_resolve_out(args.figure)}")
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    regions = [parse_region_spec(spec) for spec in args.region]
    with open(args.infile) as fh:
        decisions = replay_ingest(fh, args.alpha, regions, c=args.c, w=args.w)
    out = _resolve_out(args.out) if args.out else None
    lines = ["region,decided_at"]
    for d in decisions:
        lines.append(f"{d.region},{'' if d.decided_at is None else d.decided_at}")
    if out:
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {len(decisions)} decisions to {out}")
    for d in decisions:
        when = "never" if d.decided_at is None else f"t={d.decided_at}"
        print(f"{d.region}: rejected {when}")
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    arms = tuple(parse_distribution(part) for part in args.arms.split("|"))
    config = ExperimentConfig(
        problem="bai",
        w=len(arms),
        arms=arms,
        alpha=args.alpha,
        c=args.c,
        policy="lucb",
        method="peak",
        horizon=args.horizon,
        n_paths=args.paths,
        seed=args.seed,
    )
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = bench_runtime(config, methods)
    out = _resolve_out(args.out) if args.out else None
    if out:
        with open(out, "w") as fh:
            fh.write("method,mean_s,se_s,n_paths\n")
            for r in rows:
                fh.write(f"{r.method},{fmt(r.mean_s)},{fmt(r.se_s)},{r.n_paths}\n")
        print(f"wrote {len(rows)} timing rows to {out}")
    for r in rows:
        print(f"{r.method}: {r.mean_s:.4f} s/path (se {r.se_s:.4f}, n={r.n_paths})")
    if args.figure and rows:
        from betstream.plots import plot_bench

        plot_bench(rows, _resolve_out(args.figure))
        print(f"wrote figure to {_resolve_out(args.figure)}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betstream",
        description="Anytime-valid sequential tests for bounded data streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured experiment")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record real per-path wall times")
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("confseq", help="single-stream confidence sequence")
    p.add_argument("--method", default="peak", help="peak | prplh | empbern | hedged[:N]")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.26)
    p.add_argument("--in", dest="infile", default=None, help="file of x values, one per line")
    p.add_argument("--dist", default=None, help="arm spec to simulate from")
    p.add_argument("--length", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="confseq.csv")
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_confseq)

    p = sub.add_parser("growth", help="growth-rate analytics grid")
    p.add_argument("--c", type=float, default=0.26)
    p.add_argument("--resolution", type=int, default=99)
    p.add_argument("--out", default="growth.csv")
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("replay", help="replay a recorded stream through region tests")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--region", action="append", required=True,
                   help="region spec; may repeat (bai:A, thr-below:A:XI, thr-above:A:XI, point:..)")
    p.add_argument("--c", type=float, default=0.26)
    p.add_argument("--w", type=int, default=None, help="arm count (inferred when omitted)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench", help="fixed-horizon runtime benchmark")
    p.add_argument("--methods", default="peak,hedged:100",
                   help="comma list of peak | hedged:N")
    p.add_argument("--arms", default="bern:0.29|bern:0.43|bern:0.57|bern:0.71")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--c", type=float, default=0.26)
    p.add_argument("--horizon", type=int, default=2000)
    p.add_argument("--paths", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--figure", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ReplayParseError, FeasibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
