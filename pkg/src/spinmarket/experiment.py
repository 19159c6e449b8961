"""Experiment orchestration: replicated simulations across model variants,
phase extraction, cross-model statistics, and deterministic output files.

Replicate seeds are derived from the master seed as
derive_seed(seed, model_index, replicate_index); each replicate then splits
that into a network sub-stream (depletion redraw) and a dynamics sub-stream.
Replicates may run on a worker pool; results are aggregated in (model,
replicate) order so the output bytes never depend on the worker count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import dynamics, network, phase, stats
from .errors import (ConfigError, DegenerateFitError, InsufficientDataError,
                     SpinMarketError)
from .rng import Xoshiro256, derive_seed

TOPOLOGIES = ("ring2", "vn4", "moore8")
LATTICE_DEGREE = {"ring2": 2, "vn4": 4, "moore8": 8}

DEFAULT_SEED = 1
DEFAULT_REPLICATES = 30
DEFAULT_MIN_COUNT = 5


@dataclass(frozen=True)
class ModelSpec:
    """One model variant: a lattice topology plus k randomly removed in-links."""

    topology: str
    k: int = 0

    @property
    def label(self) -> str:
        if self.k == 0:
            return self.topology
        return f"{self.topology}-minus{self.k}"

    @property
    def degree(self) -> int:
        return LATTICE_DEGREE[self.topology] - self.k

    @property
    def is_lattice(self) -> bool:
        return self.k == 0

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.k < 0:
            raise ConfigError("depletion k must be >= 0")
        if self.k > 0 and self.topology != "moore8":
            raise ConfigError("depletion is only supported on moore8")
        if self.k >= LATTICE_DEGREE[self.topology]:
            raise ConfigError(f"cannot remove {self.k} of "
                              f"{LATTICE_DEGREE[self.topology]} in-links")


def default_models() -> list[ModelSpec]:
    """The full sweep: three lattices plus the depleted moore8 family."""
    return [ModelSpec("ring2"), ModelSpec("vn4"), ModelSpec("moore8"),
            ModelSpec("moore8", 1), ModelSpec("moore8", 2), ModelSpec("moore8", 3)]


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[ModelSpec, ...]
    params: dynamics.ModelParams
    replicates: int = DEFAULT_REPLICATES
    seed: int = DEFAULT_SEED
    min_count: int = DEFAULT_MIN_COUNT
    output_dir: str = "out"

    def validate(self) -> None:
        if not self.models:
            raise ConfigError("config lists no models")
        for spec in self.models:
            spec.validate()
        labels = [spec.label for spec in self.models]
        if len(set(labels)) != len(labels):
            raise ConfigError("every model may appear only once")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        try:
            self.params.validate(16)
        except SpinMarketError as exc:
            raise ConfigError(f"bad params: {exc}") from exc


_PARAM_KEYS = {"alpha", "beta", "steps", "tracked_site", "threshold", "burn_in"}
_CONFIG_KEYS = {"models", "params", "replicates", "seed", "min_count", "output_dir"}


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a config from parsed JSON; omitted fields take the defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    raw_models = doc.get("models")
    if raw_models is None:
        models = tuple(default_models())
    else:
        if not isinstance(raw_models, list) or not raw_models:
            raise ConfigError("models must be a non-empty list")
        models = []
        for entry in raw_models:
            if not isinstance(entry, dict) or "topology" not in entry:
                raise ConfigError("each model needs a topology")
            bad = set(entry) - {"topology", "k"}
            if bad:
                raise ConfigError(f"unknown model keys: {sorted(bad)}")
            models.append(ModelSpec(topology=entry["topology"],
                                    k=int(entry.get("k", 0))))
        models = tuple(models)
    raw_params = doc.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError("params must be an object")
    bad = set(raw_params) - _PARAM_KEYS
    if bad:
        raise ConfigError(f"unknown param keys: {sorted(bad)}")
    params = dynamics.ModelParams(
        alpha=float(raw_params.get("alpha", 4.0)),
        beta=float(raw_params.get("beta", 0.5)),
        steps=int(raw_params.get("steps", 8192)),
        tracked_site=int(raw_params.get("tracked_site", 0)),
        threshold=float(raw_params.get("threshold", 0.5)),
        burn_in=int(raw_params.get("burn_in", 0)),
    )
    cfg = ExperimentConfig(
        models=models,
        params=params,
        replicates=int(doc.get("replicates", DEFAULT_REPLICATES)),
        seed=int(doc.get("seed", DEFAULT_SEED)),
        min_count=int(doc.get("min_count", DEFAULT_MIN_COUNT)),
        output_dir=str(doc.get("output_dir", "out")),
    )
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "models": [{"topology": m.topology, "k": m.k} for m in cfg.models],
        "params": {
            "alpha": cfg.params.alpha,
            "beta": cfg.params.beta,
            "steps": cfg.params.steps,
            "tracked_site": cfg.params.tracked_site,
            "threshold": cfg.params.threshold,
            "burn_in": cfg.params.burn_in,
        },
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "min_count": cfg.min_count,
        "output_dir": cfg.output_dir,
    }


def build_model_network(spec: ModelSpec, net_seed: int) -> network.Network:
    """Construct the replicate's network; depletion is redrawn per call."""
    if spec.topology == "ring2":
        net = network.build_ring(16)
    elif spec.topology == "vn4":
        net = network.build_von_neumann_torus(4, 4)
    else:
        net = network.build_moore_torus(4, 4)
    if spec.k > 0:
        net = network.eliminate_random_in_links(net, spec.k, Xoshiro256(net_seed))
    return net


@dataclass(frozen=True)
class ReplicateResult:
    replicate: int
    seed: int
    ratio: float
    rate: float | None
    rate_r_squared: float | None
    intervals: tuple[phase.OrderedInterval, ...]
    durations: tuple[int, ...]   # censored intervals excluded
    trajectory: dynamics.Trajectory | None   # kept for replicate 0 only


@dataclass(frozen=True)
class ModelResult:
    spec: ModelSpec
    replicates: tuple[ReplicateResult, ...]
    pooled_curve: stats.SurvivalCurve | None
    pooled_fit: stats.ExponentialFit | None
    pooled_fit_error: str | None

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def ratio_samples(self) -> list[float]:
        return [r.ratio for r in self.replicates]

    @property
    def rate_samples(self) -> list[float | None]:
        return [r.rate for r in self.replicates]

    @property
    def fitted_rates(self) -> list[float]:
        return [r.rate for r in self.replicates if r.rate is not None]

    @property
    def mean_ratio(self) -> float:
        samples = self.ratio_samples
        return sum(samples) / len(samples)

    @property
    def mean_rate(self) -> float | None:
        rates = self.fitted_rates
        return sum(rates) / len(rates) if rates else None

    @property
    def pooled_durations(self) -> list[int]:
        out: list[int] = []
        for rep in self.replicates:
            out.extend(rep.durations)
        return out


@dataclass(frozen=True)
class GroupAnalysis:
    """ANOVA + Tukey over per-replicate samples, models as factor levels."""

    labels: tuple[str, ...]
    anova: stats.AnovaResult | None
    tukey: stats.TukeyResult | None
    error: str | None


@dataclass(frozen=True)
class PowerLawBranch:
    branch: str
    degrees: tuple[int, ...]
    values: tuple[float, ...]
    fit: stats.PowerLawFit | None
    error: str | None


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    models: tuple[ModelResult, ...]
    ratio_analysis: GroupAnalysis
    rate_analysis: GroupAnalysis
    power_laws: tuple[PowerLawBranch, ...]


def _run_replicate(spec: ModelSpec, params: dynamics.ModelParams,
                   min_count: int, master_seed: int, model_idx: int,
                   rep_idx: int) -> ReplicateResult:
    rep_seed = derive_seed(master_seed, model_idx, rep_idx)
    net_seed = derive_seed(rep_seed, 0)
    dyn_seed = derive_seed(rep_seed, 1)
    net = build_model_network(spec, net_seed)
    traj = dynamics.run(net, params, dyn_seed)
    intervals = phase.extract_ordered_intervals(traj.h, params.threshold)
    pstats = phase.phase_stats(intervals, total_transitions=len(traj.h) - 1)
    durations = tuple(phase.duration_sample(intervals))
    rate = r2 = None
    if durations:
        try:
            fit = stats.fit_exponential_rate(stats.survival_function(durations),
                                             min_count)
            rate, r2 = fit.rate, fit.r_squared
        except (InsufficientDataError, DegenerateFitError):
            pass
    return ReplicateResult(
        replicate=rep_idx, seed=dyn_seed, ratio=pstats.ratio, rate=rate,
        rate_r_squared=r2, intervals=tuple(intervals), durations=durations,
        trajectory=traj if rep_idx == 0 else None)


def _analyze_groups(models: tuple[ModelResult, ...], kind: str) -> GroupAnalysis:
    labels, groups = [], []
    for m in models:
        sample = m.ratio_samples if kind == "ratio" else m.fitted_rates
        if len(sample) >= 2:
            labels.append(m.label)
            groups.append(sample)
    if len(groups) < 2:
        return GroupAnalysis(labels=tuple(labels), anova=None, tukey=None,
                             error="insufficient-data")
    try:
        anova = stats.anova_one_way(groups)
        tukey = stats.tukey_kramer(groups)
    except (InsufficientDataError, DegenerateFitError) as exc:
        return GroupAnalysis(labels=tuple(labels), anova=None, tukey=None,
                             error=str(exc))
    return GroupAnalysis(labels=tuple(labels), anova=anova, tukey=tukey,
                         error=None)


def _fit_branch(branch: str, points: list[tuple[int, float]]) -> PowerLawBranch:
    degrees = tuple(d for d, _ in points)
    values = tuple(v for _, v in points)
    if len(set(degrees)) < 2:
        return PowerLawBranch(branch, degrees, values, None, "insufficient-data")
    try:
        fit = stats.fit_power_law(degrees, values)
    except SpinMarketError as exc:
        return PowerLawBranch(branch, degrees, values, None, str(exc))
    return PowerLawBranch(branch, degrees, values, fit, None)


def _power_laws(models: tuple[ModelResult, ...]) -> tuple[PowerLawBranch, ...]:
    """Lattice branch over pure lattices; depleted branch over depleted
    variants anchored by the unperturbed degree-8 point when present."""
    lattice = [m for m in models if m.spec.is_lattice]
    depleted = [m for m in models if not m.spec.is_lattice]
    anchor = [m for m in lattice if m.spec.topology == "moore8"]
    branches = []

    def points(ms, value):
        pts = []
        for m in sorted(ms, key=lambda m: m.spec.degree):
            v = value(m)
            if v is not None and v > 0:
                pts.append((m.spec.degree, v))
        return pts

    branches.append(_fit_branch("ratio_lattice",
                                points(lattice, lambda m: m.mean_ratio)))
    branches.append(_fit_branch("ratio_depleted",
                                points(depleted + anchor, lambda m: m.mean_ratio)))
    branches.append(_fit_branch("rate_lattice",
                                points(lattice, lambda m: m.mean_rate)))
    branches.append(_fit_branch("rate_depleted",
                                points(depleted + anchor, lambda m: m.mean_rate)))
    return tuple(branches)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run every (model, replicate) pair and aggregate the report.

    The report is a pure function of the config; jobs only sets the worker
    pool width.
    """
    cfg.validate()
    tasks = [(mi, ri) for mi in range(len(cfg.models))
             for ri in range(cfg.replicates)]

    def work(task):
        mi, ri = task
        return _run_replicate(cfg.models[mi], cfg.params, cfg.min_count,
                              cfg.seed, mi, ri)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(work, tasks))
    else:
        flat = [work(t) for t in tasks]

    models = []
    for mi, spec in enumerate(cfg.models):
        reps = tuple(flat[mi * cfg.replicates:(mi + 1) * cfg.replicates])
        pooled: list[int] = []
        for rep in reps:
            pooled.extend(rep.durations)
        curve = fit = None
        fit_error = None
        if pooled:
            curve = stats.survival_function(pooled)
            try:
                fit = stats.fit_exponential_rate(curve, cfg.min_count)
            except (InsufficientDataError, DegenerateFitError) as exc:
                fit_error = str(exc)
        else:
            fit_error = "insufficient-data"
        models.append(ModelResult(spec=spec, replicates=reps,
                                  pooled_curve=curve, pooled_fit=fit,
                                  pooled_fit_error=fit_error))
    models = tuple(models)
    return ExperimentReport(
        config=cfg,
        models=models,
        ratio_analysis=_analyze_groups(models, "ratio"),
        rate_analysis=_analyze_groups(models, "rate"),
        power_laws=_power_laws(models),
    )


# --- serialization -----------------------------------------------------------

def _g9(x: float) -> float | str:
    """Round to 9 significant digits; non-finite values become strings."""
    if x is None:
        return None
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(f"{x:.9g}")


def _anova_doc(analysis: GroupAnalysis) -> dict:
    doc: dict = {"groups": list(analysis.labels)}
    if analysis.error is not None:
        doc["error"] = analysis.error
        return doc
    a, t = analysis.anova, analysis.tukey
    doc["anova"] = {
        "f_stat": _g9(a.f_stat),
        "p_value": _g9(a.p_value),
        "p_label": a.p_label,
        "df_between": a.df_between,
        "df_within": a.df_within,
        "group_means": [_g9(m) for m in a.group_means],
    }
    doc["tukey"] = {
        "q_critical": _g9(t.q_critical),
        "level": _g9(t.level),
        "pairs": [
            {
                "group_a": analysis.labels[p.group_a],
                "group_b": analysis.labels[p.group_b],
                "mean_diff": _g9(p.mean_diff),
                "critical_span": _g9(p.critical_span),
                "significant": p.significant,
            }
            for p in t.pairs
        ],
    }
    return doc


def report_to_dict(report: ExperimentReport) -> dict:
    config_doc = config_to_dict(report.config)
    # the landing directory is not part of the report's identity
    del config_doc["output_dir"]
    models = []
    for m in report.models:
        fit_doc: dict | None
        if m.pooled_fit is not None:
            fit_doc = {
                "rate": _g9(m.pooled_fit.rate),
                "intercept": _g9(m.pooled_fit.intercept),
                "r_squared": _g9(m.pooled_fit.r_squared),
                "n_points": m.pooled_fit.n_points,
            }
        else:
            fit_doc = {"error": m.pooled_fit_error}
        models.append({
            "name": m.label,
            "topology": m.spec.topology,
            "k": m.spec.k,
            "degree": m.spec.degree,
            "replicates": len(m.replicates),
            "mean_ratio": _g9(m.mean_ratio),
            "mean_rate": _g9(m.mean_rate) if m.mean_rate is not None else None,
            "n_rate_fits": len(m.fitted_rates),
            "n_durations": len(m.pooled_durations),
            "ratio_samples": [_g9(r) for r in m.ratio_samples],
            "rate_samples": [_g9(r) if r is not None else None
                             for r in m.rate_samples],
            "pooled_fit": fit_doc,
        })
    return {
        "config": config_doc,
        "models": models,
        "ratio_analysis": _anova_doc(report.ratio_analysis),
        "rate_analysis": _anova_doc(report.rate_analysis),
        "power_laws": [
            {
                "branch": b.branch,
                "degrees": list(b.degrees),
                "values": [_g9(v) for v in b.values],
                **({"exponent": _g9(b.fit.exponent),
                    "prefactor": _g9(b.fit.prefactor),
                    "r_squared": _g9(b.fit.r_squared)}
                   if b.fit is not None else {"error": b.error}),
            }
            for b in report.power_laws
        ],
    }


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_report_json(report: ExperimentReport, output_dir: str) -> str:
    path = os.path.join(output_dir, "report.json")
    _atomic_write(path, json.dumps(report_to_dict(report), indent=2) + "\n")
    return path


def emit_plot_data(report: ExperimentReport, output_dir: str) -> list[str]:
    """Write the delimited plot-data files; returns the paths written."""
    os.makedirs(output_dir, exist_ok=True)
    written = []

    def emit(name: str, lines: list[str]) -> None:
        path = os.path.join(output_dir, name)
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)

    for m in report.models:
        lines = ["t,log_survival"]
        if m.pooled_curve is not None:
            for t, s in m.pooled_curve.points:
                if s > 0.0:
                    lines.append(f"{t},{math.log(s):.9g}")
        emit(f"survival_{m.label}.csv", lines)

    lines = ["replicate,model,start,duration,censored"]
    for m in report.models:
        for rep in m.replicates:
            lines.extend(phase.intervals_csv_rows(rep.intervals, rep.replicate,
                                                  m.label))
    emit("intervals.csv", lines)

    lines = ["model,degree,replicate,ratio"]
    for m in report.models:
        for rep in m.replicates:
            lines.append(f"{m.label},{m.spec.degree},{rep.replicate},"
                         f"{rep.ratio:.9g}")
    emit("ratios.csv", lines)

    lines = ["model,degree,replicate,rate"]
    for m in report.models:
        for rep in m.replicates:
            if rep.rate is not None:
                lines.append(f"{m.label},{m.spec.degree},{rep.replicate},"
                             f"{rep.rate:.9g}")
    emit("rates.csv", lines)

    lines = ["branch,exponent,prefactor,r_squared"]
    for b in report.power_laws:
        if b.fit is not None:
            lines.append(f"{b.branch},{b.fit.exponent:.9g},"
                         f"{b.fit.prefactor:.9g},{b.fit.r_squared:.9g}")
    emit("powerlaw.csv", lines)

    for m in report.models:
        rep0 = m.replicates[0]
        if rep0.trajectory is not None:
            emit(f"trace_{m.label}.csv",
                 dynamics.trajectory_csv(rep0.trajectory,
                                         report.config.params.burn_in).splitlines())
    return written
