"""Matplotlib renderings of the experiment report.

Figures are written next to the delimited output: pooled log-survival
curves per model family, occupancy ratio and decay rate against network
degree (log-log, with the fitted power laws), and a sample tracked-field
trace per model with its ordered intervals shaded.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiment import ExperimentReport, ModelResult

_DPI = 120


def _save(fig, path: str) -> str:
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def _survival_series(m: ModelResult):
    ts, logs = [], []
    if m.pooled_curve is not None:
        for t, s in m.pooled_curve.points:
            if s > 0.0:
                ts.append(t)
                logs.append(math.log(s))
    return ts, logs


def render_survival(models: list[ModelResult], path: str, title: str) -> str | None:
    """Pooled log-survival of ordered durations, one curve per model."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    plotted = False
    for m in models:
        ts, logs = _survival_series(m)
        if not ts:
            continue
        plotted = True
        ax.plot(ts, logs, marker=".", lw=1.0, ms=4, label=m.label)
        if m.pooled_fit is not None:
            xs = np.array([ts[0], ts[-1]], dtype=float)
            ax.plot(xs, m.pooled_fit.intercept - m.pooled_fit.rate * xs,
                    ls="--", lw=0.8, color="gray")
    if not plotted:
        plt.close(fig)
        return None
    ax.set_xlabel("duration t")
    ax.set_ylabel("log Pr(T > t)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def _branch_figure(report: ExperimentReport, kind: str, path: str,
                   ylabel: str, title: str) -> str | None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    plotted = False
    styles = {f"{kind}_lattice": ("o", "tab:blue", "lattice"),
              f"{kind}_depleted": ("s", "tab:red", "depleted")}
    for b in report.power_laws:
        if b.branch not in styles or not b.degrees:
            continue
        marker, color, label = styles[b.branch]
        ax.loglog(b.degrees, b.values, marker=marker, ls="none",
                  color=color, label=label)
        if b.fit is not None:
            xs = np.linspace(min(b.degrees), max(b.degrees), 50)
            ax.loglog(xs, b.fit.prefactor * xs ** b.fit.exponent, color=color,
                      lw=0.9, ls="--",
                      label=f"{label} fit: exp {b.fit.exponent:.2f}")
        plotted = True
    if not plotted:
        plt.close(fig)
        return None
    ax.set_xlabel("in-degree")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def render_trace(m: ModelResult, threshold: float, path: str) -> str | None:
    """Tracked-site field over time with ordered intervals shaded."""
    rep0 = m.replicates[0]
    if rep0.trajectory is None:
        return None
    h = rep0.trajectory.h
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    ax.plot(np.arange(1, len(h) + 1), h, lw=0.4, color="black")
    ylo, yhi = ax.get_ylim()
    for iv in rep0.intervals:
        ax.axvspan(iv.start + 1, iv.start + 1 + iv.duration, color="tab:green",
                   alpha=0.25, lw=0)
    ax.set_ylim(ylo, yhi)
    ax.set_xlabel("step")
    ax.set_ylabel("tracked field h")
    ax.set_title(f"{m.label}: sample trace (ordered intervals shaded, "
                 f"|dh| < {threshold:g})")
    return _save(fig, path)


def render_all(report: ExperimentReport, output_dir: str) -> list[str]:
    """Render every figure for the report; returns the paths written."""
    os.makedirs(output_dir, exist_ok=True)
    written = []
    lattice = [m for m in report.models if m.spec.is_lattice]
    depleted = [m for m in report.models if not m.spec.is_lattice]
    if lattice:
        p = render_survival(lattice, os.path.join(output_dir, "fig_survival_lattice.png"),
                            "Ordered-phase survival: lattice models")
        if p:
            written.append(p)
    if depleted:
        p = render_survival(depleted, os.path.join(output_dir, "fig_survival_depleted.png"),
                            "Ordered-phase survival: depleted models")
        if p:
            written.append(p)
    p = _branch_figure(report, "ratio", os.path.join(output_dir, "fig_ratio_vs_degree.png"),
                       "mean ordered-time ratio", "Ordered-time ratio vs degree")
    if p:
        written.append(p)
    p = _branch_figure(report, "rate", os.path.join(output_dir, "fig_rate_vs_degree.png"),
                       "mean decay rate", "Ordered-phase exit rate vs degree")
    if p:
        written.append(p)
    for m in report.models:
        p = render_trace(m, report.config.params.threshold,
                         os.path.join(output_dir, f"fig_trace_{m.label}.png"))
        if p:
            written.append(p)
    return written
