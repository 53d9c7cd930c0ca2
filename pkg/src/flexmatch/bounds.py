"""Closed-form comparison bounds: a lower bound on the two-sided rate, an
upper bound on the one-sided rate, and the thresholds that make the first
exceed the second."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import COARSE_N, _xlogx_term
from .errors import InvalidParams
from .scalar import grid_golden_max


@dataclass(frozen=True)
class FmzThresholds:
    alpha_star: float
    alpha_f_star: float | None
    admissible: bool


@dataclass(frozen=True)
class FmzBounds:
    alpha_star: float
    alpha_f_star: float | None
    admissible: bool
    m_reg: float
    c_fmz: float
    l_fmz: float
    u_fmz: float
    gamma: float
    lam: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def alpha_star(budget: float) -> float:
    h = 1.0 - budget / 2.0
    first = budget ** 2 / (8.0 * h ** 3)
    second = math.log((2.0 - budget) / budget) / (2.0 * h)
    return min(first, second)


def alpha_f_star(budget: float, alpha: float) -> float | None:
    """Threshold premium; ``None`` where its log argument or denominator is not positive."""
    h = 1.0 - budget / 2.0
    arg = 2.0 * alpha * ((budget / 2.0) ** 2 - 2.0 * alpha * h ** 3)
    den = h * math.exp(-2.0 * alpha * h) - budget / 2.0
    if arg <= 0.0 or den <= 0.0:
        return None
    return (math.log(budget) - math.log(arg)) / den


def fmz_thresholds(budget: float, alpha: float) -> FmzThresholds:
    if not 0.0 < budget <= 1.0:
        raise InvalidParams(f"budget must lie in (0, 1], got {budget}")
    if alpha < 0:
        raise InvalidParams(f"alpha must be >= 0, got {alpha}")
    a_star = alpha_star(budget)
    af_star = alpha_f_star(budget, alpha) if alpha > 0 else None
    return FmzThresholds(a_star, af_star, bool(alpha < a_star and af_star is not None))


def m_reg(budget: float, alpha: float) -> float:
    h = 1.0 - budget / 2.0
    return 2.0 * h * (1.0 - h * alpha - math.exp(-2.0 * alpha * h))


def c_fmz(budget: float, alpha: float, alpha_f: float) -> float:
    """(2/af) (e^{af B/2} - 1) exp(-af (1-B/2) e^{-2 alpha (1-B/2)}), computed in log space."""
    h = 1.0 - budget / 2.0
    a = alpha_f * budget / 2.0
    if a == 0.0:
        return 0.0
    log_em1 = a + math.log1p(-math.exp(-a)) if a > 1.0 else math.log(math.expm1(a))
    expo = log_em1 - alpha_f * h * math.exp(-2.0 * alpha * h)
    try:
        return 2.0 / alpha_f * math.exp(expo)
    except OverflowError:
        return math.inf


def u_fmz(budget: float, alpha: float) -> float:
    return 1.0 - (1.0 - budget) * math.exp(-2.0 * alpha)


def gamma_value(budget: float, alpha: float) -> float:
    h = 1.0 - budget / 2.0
    f = lambda y: np.exp(-2.0 * alpha * h * np.asarray(y, float)) + _xlogx_term(y) - 1.0
    return h * grid_golden_max(f, np.linspace(0.0, 1.0, COARSE_N + 1))[1]


def lambda_value(budget: float, alpha: float, alpha_f: float, gamma: float | None = None) -> float:
    """Max over v in (0, Gamma] of (B/2) e^{-(alpha+af) v} + v (1 - ln(v/Gamma)) - Gamma."""
    if gamma is None:
        gamma = gamma_value(budget, alpha)
    rate = alpha + alpha_f

    def f(s):  # s = v / Gamma
        s = np.asarray(s, float)
        return budget / 2.0 * np.exp(-rate * gamma * s) + gamma * _xlogx_term(s) - gamma

    grid = np.unique(np.concatenate([[0.0], np.logspace(-14, 0, 2000), np.linspace(0.0, 1.0, COARSE_N + 1)]))
    return grid_golden_max(f, grid)[1]


def fmz_bounds(budget: float, alpha: float, alpha_f: float) -> FmzBounds:
    if not 0.0 < budget < 1.0:
        raise InvalidParams(f"budget must lie in (0, 1), got {budget}")
    if alpha < 0 or alpha_f <= 0:
        raise InvalidParams("need alpha >= 0 and alpha_f > 0")
    th = fmz_thresholds(budget, alpha)
    mr = m_reg(budget, alpha)
    cf = c_fmz(budget, alpha, alpha_f)
    g = gamma_value(budget, alpha)
    return FmzBounds(
        alpha_star=th.alpha_star,
        alpha_f_star=th.alpha_f_star,
        admissible=th.admissible,
        m_reg=mr,
        c_fmz=cf,
        l_fmz=mr + budget - cf,
        u_fmz=u_fmz(budget, alpha),
        gamma=g,
        lam=lambda_value(budget, alpha, alpha_f, g),
    )
