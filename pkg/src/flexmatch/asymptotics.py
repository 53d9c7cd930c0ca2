"""Limits of the unmatched fraction as the flexibility premium grows, and the
scalar thresholds that go with them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisViolated, InvalidParams
from .scalar import bisect_root, grid_golden_max

COARSE_N = 10_000


def _xlogx_term(y):
    """y (1 - ln y) with the continuous value 0 at y = 0."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(y > 0, y * (1.0 - np.log(np.where(y > 0, y, 1.0))), 0.0)
    return out if out.ndim else float(out)


def _phi_os(y, budget, alpha):
    return (1.0 - budget) * np.exp(-2.0 * alpha * np.asarray(y, float)) + _xlogx_term(y) - 1.0


def _phi_ts(y, budget, alpha):
    h = 1.0 - budget / 2.0
    return h * (np.exp(-2.0 * alpha * h * np.asarray(y, float)) + _xlogx_term(y)) - 1.0


def phi_limits(budget: float, alpha: float, y: float) -> tuple[float, float]:
    """Values of the one-sided and two-sided limit objectives at ``y``."""
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}")
    if y > 1:
        raise DomainError(f"y must be <= 1, got {y}")
    return float(_phi_os(y, budget, alpha)), float(_phi_ts(y, budget, alpha))


def _check(budget: float, alpha: float):
    if not 0.0 < budget < 1.0:
        raise InvalidParams(f"budget must lie in (0, 1), got {budget}")
    if alpha < 0:
        raise InvalidParams(f"alpha must be >= 0, got {alpha}")


def _max_on_unit(f) -> tuple[float, float]:
    # the value at 0 is the right limit, so the sup over (0, 1] is attained on [0, 1]
    return grid_golden_max(f, np.linspace(0.0, 1.0, COARSE_N + 1))


def max_phi_os(budget: float, alpha: float) -> tuple[float, float]:
    return _max_on_unit(lambda y: _phi_os(y, budget, alpha))


def max_phi_ts(budget: float, alpha: float) -> tuple[float, float]:
    return _max_on_unit(lambda y: _phi_ts(y, budget, alpha))


@dataclass(frozen=True)
class LimitReport:
    u_os: float
    u_ts: float
    y_os_star: float
    y_ts_star: float | None

    def as_dict(self) -> dict:
        return {"u_os": self.u_os, "u_ts": self.u_ts, "y_os_star": self.y_os_star, "y_ts_star": self.y_ts_star}


def limit_unmatched(budget: float, alpha: float) -> LimitReport:
    _check(budget, alpha)
    y_os, u_os = max_phi_os(budget, alpha)
    y_ts, m_ts = max_phi_ts(budget, alpha)
    if m_ts > 0:
        return LimitReport(u_os, m_ts, y_os, y_ts)
    return LimitReport(u_os, 0.0, y_os, None)


def b_star() -> float:
    return 2.0 - 2.0 * math.e / 3.0


def solve_c_B(budget: float) -> float:
    """The x in (0, 1) with x (1 - ln x) = 1 - B."""
    if not 0.0 < budget < 1.0:
        raise InvalidParams(f"budget must lie in (0, 1), got {budget}")
    return bisect_root(lambda x: x * (1.0 - math.log(x)) - (1.0 - budget), 1e-300, 1.0)


def psi(budget: float, alpha: float) -> float:
    """Max over y of the two-sided limit objective, as a function of alpha."""
    return max_phi_ts(budget, alpha)[1]


def solve_alpha_bar(budget: float, tol: float = 1e-10) -> float:
    """Root of ``psi``: beyond it the two-sided limit leaves nothing unmatched."""
    _check(budget, 0.0)
    hi = 1.0
    while psi(budget, hi) >= 0.0:
        hi *= 2.0
    return bisect_root(lambda a: psi(budget, a), 0.0, hi, xtol=tol)


def alpha_low(budget: float) -> float:
    """e / (2 - B): below this the limit one-sided unmatched fraction exceeds
    the two-sided one (value obtained from the small-alpha argument)."""
    return math.e / (2.0 - budget)


def solve_phiTS_maximizer(budget: float, alpha: float) -> float:
    """Interior maximizer of the two-sided limit objective, y = exp(-2 alpha (1 - B/2) y)."""
    _check(budget, alpha)
    k = 2.0 * alpha * (1.0 - budget / 2.0)
    if k >= math.e:
        raise HypothesisViolated(f"needs 2 alpha (1 - B/2) < e, got {k}")
    if k == 0.0:
        return 1.0
    return bisect_root(lambda y: y - math.exp(-k * y), 0.0, 1.0)


def solve_z(budget: float, alpha: float) -> tuple[float, float]:
    """The z with z e^z = (2 - B) alpha, returned with ``y2* = exp(-z)``."""
    target = (2.0 - budget) * alpha
    if not 0.0 < target <= math.e:
        raise HypothesisViolated(f"(2 - B) alpha must lie in (0, e], got {target}")
    if target == math.e:
        return 1.0, math.exp(-1.0)
    z = bisect_root(lambda s: s * math.exp(s) - target, 0.0, 1.0)
    return z, math.exp(-z)


def small_alpha_gap_bound(budget: float, alpha: float) -> float:
    """Lower bound y* (-B^2 / (2 (2 - B))) ln y* on the limit gap u_os - u_ts."""
    y = solve_phiTS_maximizer(budget, alpha)
    return -y * budget ** 2 / (2.0 * (2.0 - budget)) * math.log(y)
