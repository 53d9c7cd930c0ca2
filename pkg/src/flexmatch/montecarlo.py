"""Seeded Monte-Carlo estimates of the matched fraction and degree tails."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .errors import InvalidParams
from .graphs import BipartiteGraph, sample_graph
from .matching import max_matching
from .model import ModelSpec


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    std_err: float
    fractions: tuple[float, ...]

    def __iter__(self):  # allows ``mean, se = monte_carlo_rate(...)``
        return iter((self.mean, self.std_err))


def _trial(args) -> float:
    model, n, seed, trial = args
    return max_matching(sample_graph(model, n, seed, trial)).fraction


def _summarize(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def monte_carlo_rate(model: ModelSpec, n: int, trials: int, seed: int, jobs: int = 1) -> MonteCarloResult:
    """Mean and standard error of M(G)/n; trial i always uses sub-seed (seed, i)."""
    if n < 1 or trials < 1:
        raise InvalidParams("need n >= 1 and trials >= 1")
    tasks = [(model, n, seed, i) for i in range(trials)]
    if jobs > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fracs = list(pool.map(_trial, tasks))
    else:
        fracs = [_trial(t) for t in tasks]
    mean, se = _summarize(fracs)
    return MonteCarloResult(mean, se, tuple(fracs))


def tau_d(model: ModelSpec, d: int) -> float:
    """Expected fraction (per side, summed) of nodes with Poisson degree above d."""
    return float(model.p @ poisson.sf(d, model.lam) + model.q @ poisson.sf(d, model.big_m))


def high_degree_fraction(g: BipartiteGraph, d: int) -> float:
    """Count of vertices of degree > d on both sides, divided by n."""
    return float(((g.supply_degrees() > d).sum() + (g.demand_degrees() > d).sum()) / g.n)


def high_degree_estimate(model: ModelSpec, n: int, d: int, trials: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of ``high_degree_fraction`` over seeded graphs."""
    vals = [high_degree_fraction(sample_graph(model, n, seed, i), d) for i in range(trials)]
    return _summarize(vals)
