"""Sparse bipartite SBM graphs: sampling, degree truncation and a text format."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DenseRegime, InvalidParams
from .model import ModelSpec

TYPE_STREAM = 0
# block (x, y) uses stream 1 + 2x + y


def substream(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Generator for (master seed, trial, stream); independent of execution order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(stream)))))


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """CSR adjacency from supply nodes to demand nodes; types are 1 or 2."""

    n: int
    supply_types: np.ndarray
    demand_types: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, supply_types, demand_types, edges) -> BipartiteGraph:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise InvalidParams("edge endpoint out of range")
        keys = np.unique(edges[:, 0] * n + edges[:, 1]) if edges.size else np.zeros(0, np.int64)
        src, dst = np.divmod(keys, n) if n else (keys, keys)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(int(n), np.asarray(supply_types, np.int8), np.asarray(demand_types, np.int8),
                   indptr, dst.astype(np.int64))

    @classmethod
    def empty(cls, n: int) -> BipartiteGraph:
        ones = np.ones(n, np.int8)
        return cls.from_edges(n, ones, ones, np.zeros((0, 2), np.int64))

    @property
    def edge_count(self) -> int:
        return int(self.indices.size)

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.indices[self.indptr[i]:self.indptr[i + 1]].tolist() for i in range(self.n)]

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        return np.column_stack([src, self.indices])

    def supply_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def demand_degrees(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.n)

    def validate(self) -> None:
        if self.indptr.shape != (self.n + 1,) or self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise ValueError("malformed indptr")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise ValueError("demand index out of range")
        for i in range(self.n):
            row = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if np.any(np.diff(row) <= 0):
                raise ValueError(f"row {i} is not strictly increasing (duplicate or unsorted edge)")
        for t in (self.supply_types, self.demand_types):
            if t.shape != (self.n,) or not np.isin(t, (1, 2)).all():
                raise ValueError("types must be 1 or 2, one per node")

    def same_as(self, other: BipartiteGraph) -> bool:
        return (self.n == other.n
                and np.array_equal(self.supply_types, other.supply_types)
                and np.array_equal(self.demand_types, other.demand_types)
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def to_text(self) -> str:
        lines = [f"n {self.n}"]
        lines += [f"s {i} {t}" for i, t in enumerate(self.supply_types.tolist())]
        lines += [f"d {j} {t}" for j, t in enumerate(self.demand_types.tolist())]
        lines += [f"e {i} {j}" for i, j in self.edges().tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> BipartiteGraph:
        n = None
        s_types = d_types = None
        edges = []
        for raw in text.splitlines():
            parts = raw.split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "n":
                n = int(parts[1])
                s_types = np.ones(n, np.int8)
                d_types = np.ones(n, np.int8)
            elif n is None:
                raise ValueError("graph text must start with an 'n <n>' line")
            elif tag == "s":
                s_types[int(parts[1])] = int(parts[2])
            elif tag == "d":
                d_types[int(parts[1])] = int(parts[2])
            elif tag == "e":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"unknown line tag {tag!r}")
        if n is None:
            raise ValueError("missing 'n <n>' header")
        g = cls.from_edges(n, s_types, d_types, np.array(edges, np.int64).reshape(-1, 2))
        g.validate()
        return g

    def dump(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> BipartiteGraph:
        return cls.from_text(Path(path).read_text())


def _distinct_pairs(rng: np.random.Generator, total: int, k: int) -> np.ndarray:
    """k distinct pair indices in [0, total), uniform over k-subsets.

    Draws with replacement and redraws the shortfall until k distinct values
    are collected; the collected set is exchangeable, hence uniform.
    """
    if k == 0:
        return np.zeros(0, np.int64)
    have = np.unique(rng.integers(0, total, size=k))
    while have.size < k:
        extra = rng.integers(0, total, size=k - have.size)
        have = np.union1d(have, extra)
    return have


def sample_graph(model: ModelSpec, n: int, seed: int, trial: int = 0) -> BipartiteGraph:
    """Draw a graph with n nodes per side; a type-(x, y) pair is an edge w.p. c_xy / n."""
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    if np.any(model.c > n):
        raise DenseRegime(f"c/n exceeds 1 for n={n} (max rate {model.c.max()})")
    rng = substream(seed, trial, TYPE_STREAM)
    s_types = np.where(rng.random(n) < model.p[1], 2, 1).astype(np.int8)
    d_types = np.where(rng.random(n) < model.q[1], 2, 1).astype(np.int8)
    s_ids = [np.flatnonzero(s_types == x + 1) for x in range(2)]
    d_ids = [np.flatnonzero(d_types == y + 1) for y in range(2)]
    chunks = []
    for x in range(2):
        for y in range(2):
            brng = substream(seed, trial, 1 + 2 * x + y)
            nx, ny = s_ids[x].size, d_ids[y].size
            prob = model.c[x, y] / n
            total = nx * ny
            if total == 0 or prob == 0.0:
                continue
            k = int(brng.binomial(total, prob))
            pairs = _distinct_pairs(brng, total, k)
            li, lj = np.divmod(pairs, ny)
            chunks.append(np.column_stack([s_ids[x][li], d_ids[y][lj]]))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), np.int64)
    return BipartiteGraph.from_edges(n, s_types, d_types, edges)


def truncate(g: BipartiteGraph, d: int) -> tuple[BipartiteGraph, int]:
    """Drop every edge touching a vertex (either side) of degree > d."""
    if d < 0:
        raise InvalidParams("d must be >= 0")
    bad_s = g.supply_degrees() > d
    bad_d = g.demand_degrees() > d
    e = g.edges()
    keep = ~(bad_s[e[:, 0]] | bad_d[e[:, 1]]) if e.size else np.zeros(0, bool)
    g_d = BipartiteGraph.from_edges(g.n, g.supply_types, g.demand_types, e[keep])
    return g_d, int(bad_s.sum() + bad_d.sum())
