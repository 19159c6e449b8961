"""Command-line interface.

Subcommands:
  simulate    run one model and dump its trajectory (and network)
  experiment  run the full replicated sweep and write report + plot data
  stats       re-analyze a dumped interval CSV

Exit codes: 0 success, 2 config error, 3 runtime/statistics error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import __version__, dynamics, experiment, network, phase, stats
from .errors import ConfigError, SpinMarketError
from .experiment import (ExperimentConfig, ModelSpec, build_model_network,
                         config_from_dict, load_config)
from .rng import derive_seed


def _load_or_default_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return config_from_dict({})
    return load_config(path)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    doc = experiment.config_to_dict(cfg)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        doc["output_dir"] = args.out
    return config_from_dict(doc)


def _parse_label(label: str) -> ModelSpec:
    base, _, rest = label.partition("-minus")
    k = int(rest) if rest else 0
    spec = ModelSpec(topology=base, k=k)
    spec.validate()
    return spec


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(_load_or_default_config(args.config), args)
    spec = ModelSpec(topology=args.topology, k=args.k)
    spec.validate()
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    net_seed = derive_seed(cfg.seed, 0)
    dyn_seed = derive_seed(cfg.seed, 1)
    net = build_model_network(spec, net_seed)
    traj = dynamics.run(net, cfg.params, dyn_seed)
    intervals = phase.extract_ordered_intervals(traj.h, cfg.params.threshold)
    pstats = phase.phase_stats(intervals, total_transitions=len(traj.h) - 1)

    trace_path = os.path.join(out_dir, f"trace_{spec.label}.csv")
    experiment._atomic_write(trace_path,
                             dynamics.trajectory_csv(traj, cfg.params.burn_in))
    net_path = os.path.join(out_dir, f"network_{spec.label}.txt")
    experiment._atomic_write(net_path, network.dump_text(net))

    durations = phase.duration_sample(intervals)
    rate_txt = "n/a"
    if durations:
        try:
            fit = stats.fit_exponential_rate(stats.survival_function(durations),
                                             cfg.min_count)
            rate_txt = f"{fit.rate:.9g}"
        except SpinMarketError:
            pass
    print(f"model={spec.label} seed={cfg.seed} steps={cfg.params.steps} "
          f"ratio={pstats.ratio:.9g} intervals={len(intervals)} rate={rate_txt}")
    print(f"wrote {trace_path}")
    print(f"wrote {net_path}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _apply_overrides(_load_or_default_config(args.config), args)
    report = experiment.run_experiment(cfg, jobs=args.jobs)
    os.makedirs(cfg.output_dir, exist_ok=True)
    written = experiment.emit_plot_data(report, cfg.output_dir)
    written.append(experiment.write_report_json(report, cfg.output_dir))
    if not args.no_plots:
        from . import plots
        written.extend(plots.render_all(report, cfg.output_dir))
    for m in report.models:
        rate = f"{m.mean_rate:.6g}" if m.mean_rate is not None else "n/a"
        print(f"{m.label:16s} mean_ratio={m.mean_ratio:.6g} mean_rate={rate} "
              f"rate_fits={len(m.fitted_rates)}/{len(m.replicates)}")
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    return 0


def _read_intervals(path: str):
    """Parse an interval dump into {label: {replicate: [OrderedInterval]}},
    preserving first-appearance order of models."""
    by_model: dict[str, dict[int, list[phase.OrderedInterval]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["replicate", "model", "start", "duration", "censored"]
        if reader.fieldnames != expected:
            raise ConfigError(f"{path}: expected header {','.join(expected)}")
        for row in reader:
            iv = phase.OrderedInterval(start=int(row["start"]),
                                       duration=int(row["duration"]),
                                       censored=bool(int(row["censored"])))
            reps = by_model.setdefault(row["model"], {})
            reps.setdefault(int(row["replicate"]), []).append(iv)
    if not by_model:
        raise ConfigError(f"{path}: no interval rows")
    return by_model


def cmd_stats(args) -> int:
    cfg = _apply_overrides(_load_or_default_config(args.config), args)
    transitions = args.transitions
    if transitions is None:
        transitions = cfg.params.steps - cfg.params.burn_in - 1
    if transitions < 1:
        raise ConfigError("total transitions must be >= 1")
    by_model = _read_intervals(args.infile)

    models = []
    for label, reps in by_model.items():
        spec = _parse_label(label)
        rep_results = []
        for rep_idx in sorted(reps):
            intervals = tuple(sorted(reps[rep_idx], key=lambda iv: iv.start))
            pstats = phase.phase_stats(intervals, total_transitions=transitions)
            durations = tuple(phase.duration_sample(intervals))
            rate = r2 = None
            if durations:
                try:
                    fit = stats.fit_exponential_rate(
                        stats.survival_function(durations), cfg.min_count)
                    rate, r2 = fit.rate, fit.r_squared
                except SpinMarketError:
                    pass
            rep_results.append(experiment.ReplicateResult(
                replicate=rep_idx, seed=0, ratio=pstats.ratio, rate=rate,
                rate_r_squared=r2, intervals=intervals, durations=durations,
                trajectory=None))
        pooled: list[int] = []
        for rep in rep_results:
            pooled.extend(rep.durations)
        curve = fit = None
        fit_error = None
        if pooled:
            curve = stats.survival_function(pooled)
            try:
                fit = stats.fit_exponential_rate(curve, cfg.min_count)
            except SpinMarketError as exc:
                fit_error = str(exc)
        else:
            fit_error = "insufficient-data"
        models.append(experiment.ModelResult(
            spec=spec, replicates=tuple(rep_results), pooled_curve=curve,
            pooled_fit=fit, pooled_fit_error=fit_error))

    models = tuple(models)
    report = experiment.ExperimentReport(
        config=cfg, models=models,
        ratio_analysis=experiment._analyze_groups(models, "ratio"),
        rate_analysis=experiment._analyze_groups(models, "rate"),
        power_laws=experiment._power_laws(models))
    os.makedirs(cfg.output_dir, exist_ok=True)
    written = experiment.emit_plot_data(report, cfg.output_dir)
    written.append(experiment.write_report_json(report, cfg.output_dir))
    if not args.no_plots:
        from . import plots
        written.extend(plots.render_all(report, cfg.output_dir))
    print(f"re-analyzed {sum(len(m.replicates) for m in models)} replicates "
          f"across {len(models)} models ({transitions} transitions each)")
    print(f"wrote {len(written)} files to {cfg.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmarket",
        description="Spin market model simulator and phase statistics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False, plots=False):
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override the master seed")
        p.add_argument("--out", metavar="DIR", help="override the output directory")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, metavar="N",
                           help="worker threads (output is identical for any N)")
        if plots:
            p.add_argument("--no-plots", action="store_true",
                           help="skip figure rendering")

    p = sub.add_parser("simulate", help="run one model and dump its trajectory")
    p.add_argument("--topology", choices=experiment.TOPOLOGIES, default="moore8")
    p.add_argument("--k", type=int, default=0,
                   help="random in-links removed per vertex")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run the replicated sweep")
    common(p, jobs=True, plots=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="re-analyze a dumped interval CSV")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH",
                   help="intervals.csv produced by the experiment command")
    p.add_argument("--transitions", type=int, metavar="N",
                   help="total transitions per replicate "
                        "(default: from config steps)")
    common(p, plots=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except SpinMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
