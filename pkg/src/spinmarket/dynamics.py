"""Synchronous heat-bath spin dynamics with a local-majority/global-minority field.

Each agent i carries a spin S_i in {-1, +1}. Its decision field is

    h_i = sum of in-neighbor spins - alpha * S_i * |M|,   M = mean spin,

where the mean runs over all agents including i. One synchronous step
computes every h_i from the current configuration, then all agents redraw
simultaneously: +1 with probability 1/(1 + exp(-2*beta*h_i)), else -1.

Runs are bit-reproducible: a run consumes its xoshiro256** stream in a
fixed order (n draws for the initial spins, then n draws per step, always
in ascending vertex order). The per-step trajectory records the tracked
site's field and the magnetization evaluated after each update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError
from .network import Network
from .rng import next_uniform, seed_state


@dataclass(frozen=True)
class ModelParams:
    """Simulation parameters; defaults are the reference operating point."""

    alpha: float = 4.0
    beta: float = 0.5
    steps: int = 8192
    tracked_site: int = 0
    threshold: float = 0.5
    burn_in: int = 0

    def validate(self, n: int | None = None) -> None:
        if self.alpha < 0:
            raise DomainError("alpha must be >= 0")
        if self.beta < 0:
            raise DomainError("beta must be >= 0")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.threshold <= 0:
            raise DomainError("threshold must be > 0")
        if not 0 <= self.burn_in < self.steps:
            raise DomainError("burn_in must be in [0, steps)")
        if n is not None and not 0 <= self.tracked_site < n:
            raise DomainError(f"tracked_site {self.tracked_site} outside [0, {n})")


@dataclass(frozen=True)
class Trajectory:
    """Per-step record of the tracked site's field and the magnetization."""

    h: np.ndarray
    m: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.h)


def magnetization(spins: np.ndarray) -> float:
    """Mean spin over all agents."""
    return float(np.sum(spins)) / len(spins)


def local_field(spins, net: Network, i: int, alpha: float) -> float:
    """Decision field of agent i under the current configuration.

    The global term uses the magnetization of the full population,
    agent i included.
    """
    spins = np.asarray(spins)
    if len(spins) != net.n:
        raise DomainError(f"state length {len(spins)} != network size {net.n}")
    if not 0 <= i < net.n:
        raise DomainError(f"vertex {i} outside [0, {net.n})")
    nbr_sum = int(sum(int(spins[j]) for j in net.in_neighbors[i]))
    abs_m = abs(int(np.sum(spins))) / net.n
    return nbr_sum - alpha * int(spins[i]) * abs_m


def flip_probability(h: float, beta: float) -> float:
    """Heat-bath probability of drawing +1 given field h.

    Logistic in 2*beta*h; evaluated on the stable branch so large |h|
    saturates to 0 or 1 without overflow.
    """
    if beta < 0:
        raise DomainError("beta must be >= 0")
    x = 2.0 * beta * h
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def _step_kernel(cur, nxt, neighbors, alpha, beta, rng_state):
    """One synchronous update; fields from cur, new spins into nxt.

    Consumes exactly n uniforms in ascending vertex order.
    """
    n, d = neighbors.shape
    tot = 0
    for j in range(n):
        tot += cur[j]
    abs_m = abs(tot) / n
    for i in range(n):
        nbr_sum = 0
        for j in range(d):
            nbr_sum += cur[neighbors[i, j]]
        h = nbr_sum - alpha * cur[i] * abs_m
        x = 2.0 * beta * h
        if x >= 0.0:
            p = 1.0 / (1.0 + math.exp(-x))
        else:
            e = math.exp(x)
            p = e / (1.0 + e)
        if next_uniform(rng_state) < p:
            nxt[i] = 1
        else:
            nxt[i] = -1


@njit(cache=True, nogil=True)
def _tracked_field(cur, neighbors, alpha, tracked):
    tot = 0
    for j in range(len(cur)):
        tot += cur[j]
    abs_m = abs(tot) / len(cur)
    nbr_sum = 0
    for j in range(neighbors.shape[1]):
        nbr_sum += cur[neighbors[tracked, j]]
    return nbr_sum - alpha * cur[tracked] * abs_m


@njit(cache=True, nogil=True)
def _run_kernel(neighbors, alpha, beta, steps, tracked, rng_state, h_out, m_out):
    """Full run: i.i.d. +/-1 init, `steps` synchronous updates, h and M
    recorded after each update."""
    n = neighbors.shape[0]
    cur = np.empty(n, dtype=np.int8)
    nxt = np.empty(n, dtype=np.int8)
    for i in range(n):
        if next_uniform(rng_state) < 0.5:
            cur[i] = 1
        else:
            cur[i] = -1
    for t in range(steps):
        _step_kernel(cur, nxt, neighbors, alpha, beta, rng_state)
        tmp = cur
        cur = nxt
        nxt = tmp
        h_out[t] = _tracked_field(cur, neighbors, alpha, tracked)
        tot = 0
        for j in range(n):
            tot += cur[j]
        m_out[t] = tot / n


def step_synchronous(spins, net: Network, params: ModelParams, rng) -> np.ndarray:
    """One synchronous update of the whole population.

    All fields are computed from the pre-update state; exactly net.n
    uniforms are consumed in ascending vertex order, so stepping here and
    stepping inside a run agree bit for bit.
    """
    spins = np.asarray(spins, dtype=np.int8)
    if len(spins) != net.n:
        raise DomainError(f"state length {len(spins)} != network size {net.n}")
    params.validate(net.n)
    nxt = np.empty(net.n, dtype=np.int8)
    _step_kernel(spins, nxt, net.adjacency_array(), params.alpha, params.beta,
                 rng.state())
    return nxt


def initial_spins(n: int, rng) -> np.ndarray:
    """i.i.d. uniform +/-1 spins, one uniform per vertex in ascending order."""
    spins = np.empty(n, dtype=np.int8)
    for i in range(n):
        spins[i] = 1 if rng.random() < 0.5 else -1
    return spins


def run(net: Network, params: ModelParams, seed: int) -> Trajectory:
    """Simulate one replicate; fully deterministic given (net, params, seed)."""
    params.validate(net.n)
    h = np.empty(params.steps, dtype=np.float64)
    m = np.empty(params.steps, dtype=np.float64)
    _run_kernel(net.adjacency_array(), params.alpha, params.beta, params.steps,
                params.tracked_site, seed_state(seed), h, m)
    if params.burn_in:
        h = h[params.burn_in:]
        m = m[params.burn_in:]
    return Trajectory(h=h, m=m, seed=seed)


def trajectory_csv(traj: Trajectory, burn_in: int = 0) -> str:
    """Debug dump: `t,h,m` rows, reals at 9 significant digits.

    t is the update index (1-based, offset by any burn-in).
    """
    lines = ["t,h,m"]
    for i in range(len(traj.h)):
        t = burn_in + i + 1
        lines.append(f"{t},{traj.h[i]:.9g},{traj.m[i]:.9g}")
    return "\n".join(lines) + "\n"
