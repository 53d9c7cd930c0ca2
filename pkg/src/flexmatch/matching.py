"""Maximum-cardinality bipartite matching (Hopcroft-Karp) plus a brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit
from .errors import TooLarge
from .graphs import BipartiteGraph

BRUTE_FORCE_MAX_N = 12


@dataclass(frozen=True, eq=False)
class MatchingResult:
    size: int
    fraction: float
    matched_supply: np.ndarray  # partner demand index or -1
    matched_demand: np.ndarray  # partner supply index or -1

    def validate(self, g: BipartiteGraph) -> None:
        ms, md = self.matched_supply, self.matched_demand
        used = ms[ms >= 0]
        if used.size != np.unique(used).size:
            raise ValueError("a demand node is matched twice")
        for i in np.flatnonzero(ms >= 0):
            j = ms[i]
            if md[j] != i:
                raise ValueError(f"partner maps disagree at supply {i}")
            row = g.indices[g.indptr[i]:g.indptr[i + 1]]
            if not np.any(row == j):
                raise ValueError(f"matched pair ({i}, {j}) is not an edge")
        if int((md >= 0).sum()) != used.size or used.size != self.size:
            raise ValueError("size does not match the partner maps")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction out of range")


@jit
def _hopcroft_karp(n, indptr, indices):
    inf = n + 2
    match_l = np.full(n, -1, np.int64)
    match_r = np.full(n, -1, np.int64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    stack = np.empty(n + 1, np.int64)
    via = np.empty(n + 1, np.int64)
    arc = np.empty(n, np.int64)
    size = 0
    # greedy start
    for u in range(n):
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                size += 1
                break
    while True:
        head = 0
        tail = 0
        for u in range(n):
            if match_l[u] == -1:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = inf
        found = inf
        while head < tail:
            u = queue[head]
            head += 1
            if dist[u] + 1 >= found:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[k]]
                if w == -1:
                    found = dist[u] + 1
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if found == inf:
            break
        for u in range(n):
            arc[u] = indptr[u]
        for s in range(n):
            if match_l[s] != -1:
                continue
            top = 0
            stack[0] = s
            while top >= 0:
                u = stack[top]
                pushed = False
                while arc[u] < indptr[u + 1]:
                    v = indices[arc[u]]
                    arc[u] += 1
                    w = match_r[v]
                    if w == -1:
                        if dist[u] + 1 == found:
                            via[top] = v
                            for i in range(top + 1):
                                match_l[stack[i]] = via[i]
                                match_r[via[i]] = stack[i]
                            size += 1
                            top = -1
                            pushed = True
                            break
                    elif dist[w] == dist[u] + 1:
                        via[top] = v
                        top += 1
                        stack[top] = w
                        pushed = True
                        break
                if not pushed:
                    dist[u] = inf
                    top -= 1
    return size, match_l, match_r


def max_matching(g: BipartiteGraph) -> MatchingResult:
    if g.n == 0:
        z = np.zeros(0, np.int64)
        return MatchingResult(0, 0.0, z, z)
    size, ml, mr = _hopcroft_karp(np.int64(g.n), g.indptr.astype(np.int64), g.indices.astype(np.int64))
    return MatchingResult(int(size), size / g.n, ml, mr)


def brute_force_matching(g: BipartiteGraph) -> int:
    """Exact maximum matching size by DP over subsets of used demand nodes."""
    if g.n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {g.n}")
    best = {0: 0}
    for row in g.adjacency:
        nxt = dict(best)
        for mask, val in best.items():
            for j in row:
                bit = 1 << j
                if not mask & bit and nxt.get(mask | bit, -1) < val + 1:
                    nxt[mask | bit] = val + 1
        best = nxt
    return max(best.values())
