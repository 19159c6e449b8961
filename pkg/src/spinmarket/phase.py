"""Ordered-regime extraction from a tracked-site field trajectory.

A transition t -> t+1 is "ordered" when the field moves by strictly less
than the threshold. Ordered intervals are maximal runs of consecutive
ordered transitions; an interval whose last transition is the final one in
the record is flagged censored (its true duration is cut off by the end of
the run). Censored intervals count toward occupancy ratios but are dropped
from duration samples used for survival fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError


@dataclass(frozen=True)
class OrderedInterval:
    start: int        # index of the first ordered transition
    duration: int     # number of consecutive ordered transitions
    censored: bool    # interval runs into the end of the record


@dataclass(frozen=True)
class PhaseStats:
    intervals: tuple[OrderedInterval, ...]
    ordered_transitions: int
    total_transitions: int

    @property
    def ratio(self) -> float:
        return self.ordered_transitions / self.total_transitions


def extract_ordered_intervals(h, threshold: float) -> list[OrderedInterval]:
    """Maximal runs of transitions with |h(t+1) - h(t)| < threshold (strict)."""
    h = np.asarray(h, dtype=np.float64)
    if len(h) < 2:
        raise InsufficientDataError("need at least 2 field values")
    if threshold <= 0:
        raise InsufficientDataError("threshold must be > 0")
    ordered = np.abs(np.diff(h)) < threshold
    intervals: list[OrderedInterval] = []
    start = None
    for t, ok in enumerate(ordered):
        if ok and start is None:
            start = t
        elif not ok and start is not None:
            intervals.append(OrderedInterval(start=start, duration=t - start,
                                             censored=False))
            start = None
    if start is not None:
        intervals.append(OrderedInterval(start=start,
                                         duration=len(ordered) - start,
                                         censored=True))
    return intervals


def phase_stats(intervals, total_transitions: int) -> PhaseStats:
    """Occupancy statistics over all intervals, censored ones included."""
    if total_transitions < 1:
        raise InsufficientDataError("total_transitions must be >= 1")
    ordered = sum(iv.duration for iv in intervals)
    return PhaseStats(intervals=tuple(intervals),
                      ordered_transitions=ordered,
                      total_transitions=total_transitions)


def duration_sample(intervals) -> list[int]:
    """Durations eligible for survival fitting: censored intervals excluded."""
    return [iv.duration for iv in intervals if not iv.censored]


def intervals_csv_rows(intervals, replicate: int, model: str) -> list[str]:
    """Rows for the interval dump format `replicate,model,start,duration,censored`."""
    return [f"{replicate},{model},{iv.start},{iv.duration},{int(iv.censored)}"
            for iv in intervals]
