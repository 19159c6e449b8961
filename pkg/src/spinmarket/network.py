"""Lattice topologies on small agent networks and their random depletions.

Three constant-degree lattices (ring, von Neumann torus, Moore torus) plus
directed variants obtained by deleting random in-links independently at
each vertex. Vertices of the torus lattices are flattened row-major to
indices 0..n-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DepletionError, TopologyError
from .rng import Xoshiro256


@dataclass(frozen=True)
class Network:
    """Directed in-neighbor adjacency: agent i reads the spins listed in
    in_neighbors[i]. Immutable, safe to share across replicates."""

    n: int
    in_neighbors: tuple[tuple[int, ...], ...]
    label: str

    def degree(self, i: int) -> int:
        return len(self.in_neighbors[i])

    def constant_degree(self) -> int | None:
        """The common in-degree, or None if degrees differ."""
        degrees = {len(nbrs) for nbrs in self.in_neighbors}
        return degrees.pop() if len(degrees) == 1 else None

    def is_symmetric(self) -> bool:
        """True when j in in_neighbors(i) iff i in in_neighbors(j)."""
        sets = [set(nbrs) for nbrs in self.in_neighbors]
        return all(i in sets[j] for i in range(self.n) for j in sets[i])

    @cached_property
    def _adjacency(self) -> np.ndarray:
        d = self.constant_degree()
        if d is None:
            raise TopologyError(f"{self.label}: kernel needs constant in-degree")
        return np.array(self.in_neighbors, dtype=np.int64)

    def adjacency_array(self) -> np.ndarray:
        """(n, d) int64 array for the simulation kernel; requires constant
        degree. Cached and shared: callers must not mutate it."""
        return self._adjacency


def _validate(net: Network) -> Network:
    for i, nbrs in enumerate(net.in_neighbors):
        if len(set(nbrs)) != len(nbrs):
            raise TopologyError(f"{net.label}: duplicate in-neighbor at vertex {i}")
        for j in nbrs:
            if not 0 <= j < net.n:
                raise TopologyError(f"{net.label}: neighbor {j} out of range at vertex {i}")
            if j == i:
                raise TopologyError(f"{net.label}: self-loop at vertex {i}")
    return net


def build_ring(n: int) -> Network:
    """Ring of n vertices, each reading its two lattice neighbors."""
    if n < 3:
        raise TopologyError(f"ring needs n >= 3, got {n}")
    nbrs = tuple(tuple(sorted(((i - 1) % n, (i + 1) % n))) for i in range(n))
    return _validate(Network(n=n, in_neighbors=nbrs, label="ring2"))


def build_von_neumann_torus(rows: int, cols: int) -> Network:
    """rows x cols torus with 4-cell axis-only neighborhoods."""
    if rows < 3 or cols < 3:
        raise TopologyError(f"von Neumann torus needs dims >= 3, got {rows}x{cols}")
    nbrs = []
    for r in range(rows):
        for c in range(cols):
            cell = (
                ((r - 1) % rows) * cols + c,
                ((r + 1) % rows) * cols + c,
                r * cols + (c - 1) % cols,
                r * cols + (c + 1) % cols,
            )
            nbrs.append(tuple(sorted(cell)))
    return _validate(Network(n=rows * cols, in_neighbors=tuple(nbrs), label="vn4"))


def build_moore_torus(rows: int, cols: int) -> Network:
    """rows x cols torus with 8-cell diagonal-inclusive neighborhoods."""
    if rows < 3 or cols < 3:
        raise TopologyError(f"Moore torus needs dims >= 3, got {rows}x{cols}")
    nbrs = []
    for r in range(rows):
        for c in range(cols):
            cell = []
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    cell.append(((r + dr) % rows) * cols + (c + dc) % cols)
            nbrs.append(tuple(sorted(cell)))
    return _validate(Network(n=rows * cols, in_neighbors=tuple(nbrs), label="moore8"))


def eliminate_random_in_links(net: Network, k: int, rng: Xoshiro256) -> Network:
    """Remove k in-links per vertex, chosen uniformly without replacement.

    Each vertex draws independently, so the result is a directed network of
    constant in-degree d-k; the counterpart direction of a removed link is
    left intact. Deterministic given the rng state.
    """
    d = net.constant_degree()
    if d is None:
        raise DepletionError(f"{net.label}: depletion needs constant in-degree")
    if not 0 <= k < d:
        raise DepletionError(f"cannot remove {k} of {d} in-links")
    if k == 0:
        return net
    new_nbrs = []
    for i in range(net.n):
        keep = list(net.in_neighbors[i])
        for _ in range(k):
            keep.pop(rng.randbelow(len(keep)))
        new_nbrs.append(tuple(sorted(keep)))
    label = f"{net.label}-minus{k}"
    return _validate(Network(n=net.n, in_neighbors=tuple(new_nbrs), label=label))


def dump_text(net: Network) -> str:
    """Debug/repro dump: one line `i: j1 j2 ... jd` per vertex, ascending."""
    lines = []
    for i in range(net.n):
        nbrs = " ".join(str(j) for j in sorted(net.in_neighbors[i]))
        lines.append(f"{i}: {nbrs}")
    return "\n".join(lines) + "\n"
