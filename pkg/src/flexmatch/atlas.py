"""Dominance classification of one-sided vs two-sided allocation over parameter grids."""
from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import fmz_thresholds
from .variational import DEFAULT_GRID_N, allocation_results

DEFAULT_TIE_TOL = 1e-6
CROSSOVER_SCAN = 64
CROSSOVER_TOL = 1e-6
CSV_HEADER = ["budget", "alpha", "alpha_f", "eta_os", "eta_ts", "adv_os", "verdict", "fmz_admissible"]


class Verdict(enum.Enum):
    ONE_SIDED = "OS"
    TWO_SIDED = "TS"
    TIE = "TIE"


@dataclass(frozen=True)
class DominanceCell:
    budget: float
    alpha: float
    alpha_f: float
    eta_os: float
    eta_ts: float
    adv_os: float  # nan when eta_ts == 0
    verdict: Verdict
    fmz_admissible: bool

    def row(self) -> list[str]:
        return [_fmt(self.budget), _fmt(self.alpha), _fmt(self.alpha_f), _fmt(self.eta_os),
                _fmt(self.eta_ts), _fmt(self.adv_os), self.verdict.value, str(self.fmz_admissible).lower()]


def _fmt(v: float) -> str:
    return "%.12g" % v


def verdict_of(eta_os: float, eta_ts: float, tie_tol: float = DEFAULT_TIE_TOL) -> Verdict:
    if abs(eta_os - eta_ts) <= tie_tol:
        return Verdict.TIE
    return Verdict.ONE_SIDED if eta_os > eta_ts else Verdict.TWO_SIDED


def fmz_admissible(budget: float, alpha: float, alpha_f: float) -> bool:
    """True when (alpha, alpha_f) lies in the regime covered by the closed-form thresholds."""
    if not 0.0 < budget <= 1.0:
        return False
    th = fmz_thresholds(budget, alpha)
    return bool(th.admissible and alpha_f > th.alpha_f_star)


def classify(budget: float, alpha: float, alpha_f: float, tie_tol: float = DEFAULT_TIE_TOL,
             grid_n: int = DEFAULT_GRID_N) -> DominanceCell:
    if tie_tol <= 0:
        raise ValueError("tie_tol must be positive")
    os_res, ts_res = allocation_results(budget, alpha, alpha_f, grid_n)
    adv = os_res.eta / ts_res.eta if ts_res.eta > 0 else math.nan
    return DominanceCell(float(budget), float(alpha), float(alpha_f), os_res.eta, ts_res.eta, adv,
                         verdict_of(os_res.eta, ts_res.eta, tie_tol), fmz_admissible(budget, alpha, alpha_f))


@dataclass(frozen=True)
class GridSpec:
    """``num`` evenly spaced values from ``start`` to ``stop`` inclusive."""

    start: float
    stop: float
    num: int

    def values(self) -> np.ndarray:
        if self.num < 1:
            raise ValueError("grid needs at least one point")
        return np.linspace(self.start, self.stop, self.num)

    @classmethod
    def parse(cls, text: str) -> GridSpec:
        start, stop, num = text.split(":")
        return cls(float(start), float(stop), int(num))


def grid_values(spec) -> list[float]:
    """Accepts a GridSpec, a ``start:stop:num`` string, or an explicit sequence."""
    if isinstance(spec, str):
        spec = GridSpec.parse(spec)
    vals = spec.values() if isinstance(spec, GridSpec) else np.asarray(list(spec), dtype=float)
    if vals.size == 0:
        raise ValueError("empty grid")
    return [float(v) for v in vals]


def _classify_task(args):
    return classify(*args)


def sweep(budgets: Iterable[float], alpha_grid, alpha_f_grid, tie_tol: float = DEFAULT_TIE_TOL,
          grid_n: int = DEFAULT_GRID_N, jobs: int = 1) -> list[DominanceCell]:
    """Cells in row-major (budget, alpha, alpha_f) order; pairs with alpha_f < alpha are skipped."""
    budgets = [float(b) for b in budgets]
    if not budgets:
        raise ValueError("empty budget list")
    alphas = grid_values(alpha_grid)
    alpha_fs = grid_values(alpha_f_grid)
    tasks = [(b, a, af, tie_tol, grid_n) for b in budgets for a in alphas for af in alpha_fs if af >= a]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_classify_task(t) for t in tasks]


def verdict_fractions(cells: Sequence[DominanceCell]) -> dict[str, float]:
    n = len(cells)
    return {v.value: (sum(c.verdict is v for c in cells) / n if n else 0.0) for v in Verdict}


@dataclass(frozen=True)
class Crossover:
    alpha_f: float | None
    other_sign_changes: list[float] = field(default_factory=list)


def crossover_alpha_f(budget: float, alpha: float, search_max: float,
                      grid_n: int = DEFAULT_GRID_N) -> Crossover:
    """First alpha_f in (alpha, search_max] where eta_ts - eta_os turns positive.

    A 64-point scan locates sign changes; the first one from <= 0 to > 0 is
    bisected to 1e-6. Any further sign changes seen by the scan are listed.
    """
    if search_max <= alpha:
        raise ValueError("search_max must exceed alpha")

    def diff(af: float) -> float:
        os_res, ts_res = allocation_results(budget, alpha, af, grid_n)
        return ts_res.eta - os_res.eta

    xs = np.linspace(alpha, search_max, CROSSOVER_SCAN + 1)
    ds = [0.0] + [diff(float(x)) for x in xs[1:]]  # identical laws at alpha_f == alpha
    first = None
    others = []
    for i in range(1, len(xs)):
        up = ds[i - 1] <= 0.0 < ds[i]
        down = ds[i - 1] > 0.0 >= ds[i]
        if up and first is None:
            first = i
        elif up or down:
            others.append(float(0.5 * (xs[i - 1] + xs[i])))
    if first is None:
        return Crossover(None, others)
    lo, hi = float(xs[first - 1]), float(xs[first])
    while hi - lo > CROSSOVER_TOL:
        mid = 0.5 * (lo + hi)
        if diff(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return Crossover(hi, others)


def write_csv(cells: Iterable[DominanceCell], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in cells:
        w.writerow(c.row())


def read_csv(fh) -> list[DominanceCell]:
    r = csv.DictReader(fh)
    if r.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {r.fieldnames}")
    return [DominanceCell(float(row["budget"]), float(row["alpha"]), float(row["alpha_f"]),
                          float(row["eta_os"]), float(row["eta_ts"]), float(row["adv_os"]),
                          Verdict(row["verdict"]), row["fmz_admissible"] == "true") for row in r]


def heatmap(cells: Sequence[DominanceCell], budget: float):
    """Adv_OS on axes x = alpha_f - alpha, y = alpha for one budget.

    Returns ``(x_values, y_values, matrix)`` with NaN where no cell exists.
    """
    sel = [c for c in cells if c.budget == budget]
    xs = sorted({round(c.alpha_f - c.alpha, 12) for c in sel})
    ys = sorted({c.alpha for c in sel})
    mat = np.full((len(ys), len(xs)), np.nan)
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    for c in sel:
        mat[yi[c.alpha], xi[round(c.alpha_f - c.alpha, 12)]] = c.adv_os
    return np.array(xs), np.array(ys), mat
