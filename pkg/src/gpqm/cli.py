"""Command-line front end.

Subcommands: generate (scenario files), plan (plan series JSON), simulate
(metrics directories), benchmark (planner vs PSO CSV), analyze (two-sphere
capacity study, CDF/CCDF tables). Exit codes: 0 success, 2 bad input,
3 infeasible instance, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .channel import (
    ChannelParams,
    calibrated_mcs_table,
    fit_rate_model,
    friis_snr_db,
    max_distance_m,
    shannon_capacity_bps,
)
from .errors import PlanningError
from .placement import SphereConstraint, Venue, sphere_pair_analysis
from .planner import (
    PlannerConfig,
    plan_series,
    plan_series_from_json,
    plan_series_to_json,
)
from .scenario import (
    MobilityParams,
    generate_rwm,
    load_scenario,
    save_scenario,
    save_waypoints,
)
from .simulator import SimConfig, merge_metrics, simulate, summarize
from .solver import PsoParams, run_benchmark

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpqm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random-waypoint scenario")
    g.add_argument("--faps", type=int, default=3)
    g.add_argument("--duration", type=float, default=100.0, help="trace length in s")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--planning-period", type=float, default=5.0)
    g.add_argument("--demand-fraction", type=float, action="append", default=None,
                   help="fraction of the reference fair share; repeat to cycle")
    g.add_argument("--demand", type=float, action="append", default=None,
                   help="explicit per-FAP demand in bit/s; repeat per FAP")
    g.add_argument("--planar-z", type=float, default=None,
                   help="fix all FAP altitudes to this height")
    g.add_argument("--out", required=True, help="scenario JSON path")
    g.add_argument("--waypoints-out", default=None, help="optional waypoint text export")

    p = sub.add_parser("plan", help="plan a scenario into a plan-series JSON")
    p.add_argument("--scenario", required=True)
    p.add_argument("--delay-threshold", type=float, default=0.010, help="seconds")
    p.add_argument("--power-step", type=float, default=1.0, help="dB")
    p.add_argument("--out", required=True, help="plan JSON path")

    s = sub.add_parser("simulate", help="simulate a scenario under a policy")
    s.add_argument("--scenario", required=True)
    s.add_argument("--plan", default=None, help="plan JSON (required for gpqm policy)")
    s.add_argument("--policy", choices=("gpqm", "centroid", "venue-center"), default="gpqm")
    s.add_argument("--queue", choices=("scheduled", "droptail", "red", "codel"), default=None,
                   help="default: scheduled for gpqm, droptail otherwise")
    s.add_argument("--queue-size", type=int, default=100)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--channel-mode", choices=("independent", "shared"), default="independent")
    s.add_argument("--fading", choices=("on", "off"), default="on")
    s.add_argument("--traffic", choices=("poisson", "onoff", "aimd"), default="poisson")
    s.add_argument("--bootstrap", type=float, default=30.0)
    s.add_argument("--measure", type=float, default=70.0)
    s.add_argument("--baseline-power", type=float, default=20.0)
    s.add_argument("--service-mode", choices=("deterministic", "exponential"),
                   default="deterministic")
    s.add_argument("--packets-csv", action="store_true", help="also write per-packet rows")

    b = sub.add_parser("benchmark", help="planner vs PSO on static instances")
    b.add_argument("--faps", type=int, default=3)
    b.add_argument("--instances", type=int, default=5)
    b.add_argument("--seed", type=int, default=7)
    b.add_argument("--capacity-model", choices=("regression", "shannon"), default="regression")
    b.add_argument("--pso-iterations", type=int, default=2000)
    b.add_argument("--pso-swarm", type=int, default=50)
    b.add_argument("--sim-runs", type=int, default=3)
    b.add_argument("--out", required=True, help="CSV path")

    a = sub.add_parser("analyze", help="analysis utilities")
    asub = a.add_subparsers(dest="analysis", required=True)

    ap = asub.add_parser("pair", help="two-sphere overlap and capacity extremes")
    ap.add_argument("--fap", action="append", required=True, metavar="X,Y,Z",
                    help="FAP position; give exactly twice")
    ap.add_argument("--snr", type=float, action="append", required=True,
                    help="target SNR in dB; give exactly twice")
    ap.add_argument("--power", type=float, default=20.0, help="transmit power in dBm")
    ap.add_argument("--capacity-model", choices=("shannon", "regression"), default="shannon")
    ap.add_argument("--out", required=True, help="result JSON path")

    ac = asub.add_parser("cdf", help="CDF/CCDF tables and percentiles from run dirs")
    ac.add_argument("--metrics", action="append", required=True,
                    help="run directory written by simulate; repeat to pool")
    ac.add_argument("--percentile", type=float, default=90.0)
    ac.add_argument("--out", required=True, help="result JSON path")

    return parser


def _parse_point(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected X,Y,Z, got {text!r}")
    return tuple(float(v) for v in parts)


def _cmd_generate(args) -> int:
    mobility = MobilityParams(planar_z_m=args.planar_z)
    kwargs = {}
    if args.demand is not None:
        kwargs["demands_bps"] = args.demand
    if args.demand_fraction:
        kwargs["demand_fractions"] = tuple(args.demand_fraction)
    trace = generate_rwm(
        n_faps=args.faps,
        duration_s=args.duration,
        seed=args.seed,
        mobility=mobility,
        planning_period_s=args.planning_period,
        **kwargs,
    )
    save_scenario(trace, args.out)
    if args.waypoints_out:
        save_waypoints(trace, args.waypoints_out)
    print(f"wrote scenario with {args.faps} FAPs, {args.duration} s, seed {args.seed} -> {args.out}")
    return EXIT_OK


def _cmd_plan(args) -> int:
    trace = load_scenario(args.scenario)
    config = PlannerConfig(
        delay_threshold_s=args.delay_threshold,
        power_step_db=args.power_step,
        update_period_s=trace.planning_period_s,
    )
    series = plan_series(trace, config)
    Path(args.out).write_text(
        json.dumps(plan_series_to_json(series, trace.duration_s), indent=2)
    )
    for plan in series.plans:
        fgw = ", ".join(f"{v:.1f}" for v in plan.fgw_position)
        print(f"t={plan.t_s:7.1f} s  p_tx={plan.tx_power_dbm:4.1f} dBm  fgw=({fgw})")
    print(f"wrote {len(series.plans)} plans -> {args.out}")
    return EXIT_OK


def _write_metrics(out_dir: Path, metrics, write_packets: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "throughput.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "throughput_bps"])
        for i, v in enumerate(metrics.throughput_samples_bps):
            w.writerow([metrics.bootstrap_s + i, v])
    with (out_dir / "delays.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delay_s"])
        for v in metrics.delay_samples_s:
            w.writerow([v])
    if write_packets:
        with (out_dir / "packets.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source_id", "created_s", "delay_s", "dropped"])
            for p in metrics.packets:
                w.writerow([p.fap_id, p.created_s, "" if p.delay_s is None else p.delay_s,
                            int(p.dropped)])
    summary = {
        "label": metrics.label,
        "p90_throughput_bps": summarize(metrics.throughput_samples_bps).percentile(10.0),
        "p90_delay_s": (
            summarize(metrics.delay_samples_s).percentile(90.0)
            if metrics.delay_samples_s
            else None
        ),
        "plr": metrics.plr,
        "window_delivered": metrics.window_delivered,
        "window_dropped": metrics.window_dropped,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))


def _cmd_simulate(args) -> int:
    trace = load_scenario(args.scenario)
    plan = None
    if args.plan is not None:
        plan = plan_series_from_json(json.loads(Path(args.plan).read_text()))
    queue = args.queue
    if queue is None:
        queue = "scheduled" if args.policy == "gpqm" else "droptail"
    base = SimConfig(
        bootstrap_s=args.bootstrap,
        measure_s=args.measure,
        seed=args.seed,
        placement=args.policy,
        queue=queue,
        queue_size=args.queue_size,
        traffic=args.traffic,
        channel_mode=args.channel_mode,
        fading=args.fading == "on",
        service_mode=args.service_mode,
        baseline_tx_power_dbm=args.baseline_power,
        record_packets=args.packets_csv,
    )
    out_root = Path(args.out)
    runs = []
    for k in range(args.runs):
        config = replace(base, seed=args.seed + k)
        metrics = simulate(trace, config, plan=plan)
        runs.append(metrics)
        run_dir = out_root / f"seed{config.seed}"
        _write_metrics(run_dir, metrics, args.packets_csv)
        print(
            f"seed {config.seed}: delivered {metrics.window_delivered} pkts, "
            f"plr {metrics.plr:.4f}"
        )
    if len(runs) > 1:
        _write_metrics(out_root / "pooled", merge_metrics(runs), False)
    print(f"wrote metrics -> {out_root}")
    return EXIT_OK


def _cmd_benchmark(args) -> int:
    rows = run_benchmark(
        n_instances=args.instances,
        n_faps=args.faps,
        base_seed=args.seed,
        capacity_model=args.capacity_model,
        pso_params=PsoParams(swarm=args.pso_swarm, iterations=args.pso_iterations),
        sim_runs=args.sim_runs,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["instance", "seed", "method", "objective_bps", "feasible",
             "p90_delay_s", "p90_throughput_bps"]
        )
        for r in rows:
            w.writerow(
                [r.instance, r.seed, r.method, f"{r.objective_bps:.1f}", int(r.feasible),
                 f"{r.p_delay_s:.6g}", f"{r.p_throughput_bps:.1f}"]
            )
    for r in rows:
        print(
            f"instance {r.instance} {r.method:>4}: objective "
            f"{r.objective_bps / 1e6:8.1f} Mbit/s feasible={int(r.feasible)} "
            f"p90_delay={r.p_delay_s * 1e3:.3f} ms"
        )
    print(f"wrote benchmark CSV -> {out}")
    return EXIT_OK


def _cmd_analyze_pair(args) -> int:
    if len(args.fap) != 2 or len(args.snr) != 2:
        raise ValueError("pair analysis needs exactly two --fap and two --snr")
    channel = ChannelParams()
    venue = Venue()
    spheres = [
        SphereConstraint(_parse_point(f), max_distance_m(channel, args.power, snr))
        for f, snr in zip(args.fap, args.snr)
    ]
    if args.capacity_model == "shannon":
        def capacity(d: float) -> float:
            return shannon_capacity_bps(channel.bandwidth_hz, friis_snr_db(channel, args.power, d))
    else:
        model = fit_rate_model(calibrated_mcs_table())

        def capacity(d: float) -> float:
            return model.capacity_bps(friis_snr_db(channel, args.power, d))

    result = sphere_pair_analysis(spheres[0], spheres[1], venue, capacity)
    payload = {
        "overlap": result.overlap,
        "radii_m": [s.radius_m for s in spheres],
        "min_point": list(result.min_point) if result.min_point else None,
        "min_value_bps": result.min_value_bps,
        "max_point": list(result.max_point) if result.max_point else None,
        "max_value_bps": result.max_value_bps,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"overlap: {result.overlap} -> {args.out}")
    return EXIT_OK


def _resolve_run_dir(run: Path) -> Path:
    # simulate writes per-seed leaves under --out; accept the parent too
    if (run / "throughput.csv").exists():
        return run
    if (run / "pooled" / "throughput.csv").exists():
        return run / "pooled"
    seeds = sorted(p for p in run.glob("seed*") if (p / "throughput.csv").exists())
    if len(seeds) == 1:
        return seeds[0]
    return run


def _cmd_analyze_cdf(args) -> int:
    delays: list[float] = []
    throughputs: list[float] = []
    for d in args.metrics:
        run = _resolve_run_dir(Path(d))
        thr_file = run / "throughput.csv"
        delay_file = run / "delays.csv"
        if not thr_file.exists():
            raise FileNotFoundError(f"{thr_file} not found")
        with thr_file.open() as fh:
            for row in csv.DictReader(fh):
                throughputs.append(float(row["throughput_bps"]))
        if delay_file.exists():
            with delay_file.open() as fh:
                for row in csv.DictReader(fh):
                    delays.append(float(row["delay_s"]))
    p = args.percentile
    thr = summarize(throughputs)
    payload = {
        "percentile": p,
        "throughput": {
            "p_exceeded_bps": thr.percentile(100.0 - p),
            "ccdf": [[x, thr.ccdf(x)] for x in _grid(throughputs)],
        },
    }
    if delays:
        dl = summarize(delays)
        payload["delay"] = {
            "p_value_s": dl.percentile(p),
            "cdf": [[x, dl.cdf(x)] for x in _grid(delays)],
        }
    Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"wrote analysis -> {args.out}")
    return EXIT_OK


def _grid(samples: list[float], points: int = 50) -> list[float]:
    lo = min(samples)
    hi = max(samples)
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (points - 1) for i in range(points)]


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "benchmark":
            return _cmd_benchmark(args)
        if args.command == "analyze":
            if args.analysis == "pair":
                return _cmd_analyze_pair(args)
            return _cmd_analyze_cdf(args)
        parser.error(f"unknown command {args.command!r}")
    except PlanningError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
