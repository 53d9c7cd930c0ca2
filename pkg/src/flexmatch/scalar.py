"""Scalar maximization and root finding used by the closed-form modules."""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import bisect

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
               max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for the max of a unimodal ``f`` on [lo, hi]."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = max(((a, f(a)), (b, f(b)), (c, fc), (d, fd)), key=lambda z: z[1])
    return float(best[0]), float(best[1])


def grid_golden_max(f: Callable, grid: np.ndarray, tol: float = 1e-12) -> tuple[float, float]:
    """Max of ``f`` over the hull of ``grid``: coarse scan, then golden search
    on the bracket around the best grid point.

    ``f`` must accept arrays (for the scan) and scalars.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(f(grid), dtype=float)
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    x, fx = golden_max(lambda s: float(f(s)), lo, hi, tol)
    if vals[k] > fx:
        return float(grid[k]), float(vals[k])
    return x, fx


def bisect_root(g: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15) -> float:
    """Root of ``g`` on a sign-changing bracket."""
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    return float(bisect(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))
