"""Variational objective for the asymptotic matching rate.

The matching rate is ``1 - max F`` over the unit square, with

    F(t) = sum_x p_x exp(-sum_y c_xy q_y e_y) + sum_y q_y e_y (1 + M_y t_y) - 1,
    e_y = exp(-M_y t_y).

Maximizers of F are fixed points of the monotone map ``H``; the maximizer
combines fixed-point iteration of ``H`` with a dense grid scan and a Newton
polish on ``H(t) - t``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateRatio, NoConvergence
from .model import Allocation, ModelSpec, scenario_model

DEFAULT_GRID_N = 401
DEFAULT_FP_TOL = 1e-10
DEFAULT_FP_MAX_ITER = 5000
# Candidates whose F values differ by less than this are treated as ties.
TIE_F_TOL = 1e-13


class Method(enum.Enum):
    GRID_ONLY = "GridOnly"
    FIXED_POINT_REFINED = "FixedPointRefined"


@dataclass(frozen=True)
class MaximizerResult:
    t_star: tuple[float, float]
    f_star: float
    eta: float
    method: Method
    iterations: int
    residual: float

    def as_dict(self) -> dict:
        return {
            "t_star": list(self.t_star),
            "f_star": self.f_star,
            "eta": self.eta,
            "method": self.method.value,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _exps(model: ModelSpec, t1, t2):
    e1 = np.exp(-model.big_m[0] * np.asarray(t1, dtype=float))
    e2 = np.exp(-model.big_m[1] * np.asarray(t2, dtype=float))
    return e1, e2


def _inner(model: ModelSpec, e1, e2):
    """exp(-sum_y c_xy q_y e_y) for x = 0, 1."""
    w = model.c * model.q[None, :]
    return (np.exp(-(w[0, 0] * e1 + w[0, 1] * e2)),
            np.exp(-(w[1, 0] * e1 + w[1, 1] * e2)))


def eval_F(model: ModelSpec, t1, t2):
    """Objective value; broadcasts over array arguments."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    e1, e2 = _exps(model, t1, t2)
    g1, g2 = _inner(model, e1, e2)
    m = model.big_m
    out = (model.p[0] * g1 + model.p[1] * g2
           + model.q[0] * e1 * (1.0 + m[0] * t1)
           + model.q[1] * e2 * (1.0 + m[1] * t2) - 1.0)
    return out if out.ndim else float(out)


def H_map(model: ModelSpec, t1, t2):
    """``H_y(t) = sum_x a^R_yx exp(-sum_y' c_xy' q_y' e_y')``; zero on degenerate rows."""
    e1, e2 = _exps(model, t1, t2)
    g1, g2 = _inner(model, e1, e2)
    ar = model.a_right
    h1 = ar[0, 0] * g1 + ar[0, 1] * g2
    h2 = ar[1, 0] * g1 + ar[1, 1] * g2
    if np.ndim(h1) == 0:
        return float(h1), float(h2)
    return h1, h2


def grad_F(model: ModelSpec, t1, t2):
    """Analytic gradient, ``q_y M_y^2 e_y (H_y - t_y)`` per coordinate."""
    e1, e2 = _exps(model, t1, t2)
    h1, h2 = H_map(model, t1, t2)
    m = model.big_m
    d1 = model.q[0] * m[0] ** 2 * e1 * (h1 - np.asarray(t1, dtype=float))
    d2 = model.q[1] * m[1] ** 2 * e2 * (h2 - np.asarray(t2, dtype=float))
    if np.ndim(d1) == 0:
        return float(d1), float(d2)
    return d1, d2


def _h_jacobian(model: ModelSpec, t: np.ndarray) -> np.ndarray:
    e = np.exp(-model.big_m * t)
    g = np.array(_inner(model, e[0], e[1]))
    # dg_x/dt_z = g_x * c_xz q_z M_z e_z
    dg = g[:, None] * model.c * (model.q * model.big_m * e)[None, :]
    return model.a_right @ dg


def active_coordinates(model: ModelSpec) -> np.ndarray:
    """Coordinates F actually depends on (``q_y M_y > 0``)."""
    return (model.q * model.big_m) > 0.0


def fixed_point_residual(model: ModelSpec, t) -> float:
    """Sup-norm of ``H(t) - t`` over the active coordinates."""
    active = active_coordinates(model)
    if not active.any():
        return 0.0
    h = np.array(H_map(model, t[0], t[1]))
    return float(np.abs(h - np.asarray(t))[active].max())


def iterate_H(model: ModelSpec, start, tol: float = DEFAULT_FP_TOL,
              max_iter: int = DEFAULT_FP_MAX_ITER):
    """Iterate ``t <- H(t)`` from ``start`` on the active coordinates.

    Switches to 0.5 damping once the residual has grown twice in a row.
    Returns ``(t, iterations, residual)``.
    """
    active = active_coordinates(model)
    t = np.array(start, dtype=float)
    if not active.any():
        return t, 0, 0.0
    damping = 1.0
    prev = np.inf
    rises = 0
    res = np.inf
    for it in range(1, max_iter + 1):
        h = np.array(H_map(model, t[0], t[1]))
        step = np.where(active, h - t, 0.0)
        res = float(np.abs(step).max())
        if res <= tol:
            return t, it - 1, res
        rises = rises + 1 if res > prev else 0
        if rises >= 2:
            damping = 0.5
        prev = res
        t = np.clip(t + damping * step, 0.0, 1.0)
    return t, max_iter, fixed_point_residual(model, t)


def _newton_polish(model: ModelSpec, t0, tol: float, max_iter: int = 60):
    """Newton on ``H(t) - t`` restricted to active coordinates, kept in the box."""
    active = active_coordinates(model)
    idx = np.flatnonzero(active)
    t = np.array(t0, dtype=float)
    f_best = eval_F(model, *t)
    for _ in range(max_iter):
        h = np.array(H_map(model, *t))
        g = (h - t)[idx]
        if np.abs(g).max() <= tol:
            break
        jac = _h_jacobian(model, t)[np.ix_(idx, idx)] - np.eye(idx.size)
        try:
            delta = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        moved = False
        while step > 1e-6:
            cand = t.copy()
            cand[idx] = np.clip(t[idx] + step * delta, 0.0, 1.0)
            f_cand = eval_F(model, *cand)
            r_cand = np.abs((np.array(H_map(model, *cand)) - cand)[idx]).max()
            if f_cand >= f_best - 1e-14 and r_cand < np.abs(g).max():
                t, f_best, moved = cand, max(f_best, f_cand), True
                break
            step *= 0.5
        if not moved:
            break
    return t


def _axis(m: float, grid_n: int) -> np.ndarray:
    """Uniform grid in t merged with a grid uniform in exp(-m t)."""
    base = np.linspace(0.0, 1.0, grid_n)
    if m > 0:
        u = np.linspace(np.exp(-m), 1.0, grid_n)
        base = np.concatenate([base, -np.log(u) / m])
    return np.unique(np.clip(base, 0.0, 1.0))


def _pick(cands):
    """Largest F; ties within TIE_F_TOL go to the componentwise-largest t."""
    best_f = max(c[1] for c in cands)
    tied = [c for c in cands if c[1] >= best_f - TIE_F_TOL]
    return max(tied, key=lambda c: (c[0][0] + c[0][1], c[0][0], c[0][1], c[1]))


def maximize_F(model: ModelSpec, grid_n: int = DEFAULT_GRID_N, fp_tol: float = DEFAULT_FP_TOL,
               fp_max_iter: int = DEFAULT_FP_MAX_ITER, grid_fallback: bool = True) -> MaximizerResult:
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    active = active_coordinates(model)
    if not active.any():
        f = eval_F(model, 1.0, 1.0)
        return MaximizerResult((1.0, 1.0), f, 1.0 - f, Method.FIXED_POINT_REFINED, 0, 0.0)

    cands = []  # (t, F, iterations, residual)
    for start in ((1.0, 1.0), (0.0, 0.0)):
        t, its, res = iterate_H(model, start, fp_tol, fp_max_iter)
        if res > fp_tol:
            t = _newton_polish(model, t, fp_tol)
            res = fixed_point_residual(model, t)
        cands.append((t, eval_F(model, *t), its, res))

    if grid_fallback:
        axes = [_axis(model.big_m[y], grid_n) if active[y] else np.array([1.0]) for y in (0, 1)]
        T1, T2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        vals = eval_F(model, T1, T2)
        top = vals.max()
        tied = np.argwhere(vals >= top - TIE_F_TOL)
        i, j = max(tied, key=lambda ij: (axes[0][ij[0]] + axes[1][ij[1]], ij[0], ij[1]))
        t_grid = np.array([axes[0][i], axes[1][j]])
        t_pol = _newton_polish(model, t_grid, fp_tol)
        for t in (t_grid, t_pol):
            cands.append((t, eval_F(model, *t), 0, fixed_point_residual(model, t)))
    elif all(c[3] > fp_tol for c in cands):
        raise NoConvergence("fixed-point iteration did not converge and the grid fallback is disabled")

    t, f, its, res = _pick(cands)
    t = np.where(active, t, 1.0)
    method = Method.FIXED_POINT_REFINED if res <= fp_tol else Method.GRID_ONLY
    f = float(f)
    return MaximizerResult((float(t[0]), float(t[1])), f, float(min(max(1.0 - f, 0.0), 1.0)),
                           method, int(its), float(res))


class EtaPair(NamedTuple):
    eta_os: float
    eta_ts: float
    adv_os: float


def allocation_results(budget: float, alpha: float, alpha_f: float,
                       grid_n: int = DEFAULT_GRID_N) -> tuple[MaximizerResult, MaximizerResult]:
    """Maximizer results for the one-sided and the two-sided allocation."""
    os_res = maximize_F(scenario_model(budget, alpha, alpha_f, Allocation.ONE_SIDED), grid_n=grid_n)
    ts_res = maximize_F(scenario_model(budget, alpha, alpha_f, Allocation.TWO_SIDED), grid_n=grid_n)
    return os_res, ts_res


def eta_pair(budget: float, alpha: float, alpha_f: float, grid_n: int = DEFAULT_GRID_N) -> EtaPair:
    """One-sided and two-sided matching rates and their ratio.

    Raises ``DegenerateRatio`` when the two-sided rate is zero.
    """
    os_res, ts_res = allocation_results(budget, alpha, alpha_f, grid_n)
    if ts_res.eta <= 0.0:
        raise DegenerateRatio(f"two-sided matching rate is zero at B={budget}, alpha={alpha}, alpha_f={alpha_f}")
    return EtaPair(os_res.eta, ts_res.eta, os_res.eta / ts_res.eta)
