"""Model parametrization for the 2-type bipartite stochastic block model.

Supply nodes carry type x in {1, 2} with probabilities ``p``, demand nodes
type y with probabilities ``q``; a (x, y) pair is connected with probability
``c[x, y] / n``. Type 2 is the flexible type. Arrays are 0-indexed, so
``c[0, 0]`` is the regular-regular rate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams

ALGEBRA_TOL = 1e-12


class Allocation(enum.Enum):
    ONE_SIDED = "one"
    TWO_SIDED = "two"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FlexScenario:
    """Baseline rate, flexibility premium and budget, plus how the budget is split.

    ``split`` is only read for ``Allocation.CUSTOM`` and must then hold
    ``(b_L, b_R)`` with ``b_L + b_R == budget``.
    """

    alpha: float
    alpha_f: float
    budget: float
    allocation: Allocation = Allocation.ONE_SIDED
    split: tuple[float, float] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.alpha_f)):
            raise InvalidParams("rates must be finite")
        if self.alpha < 0:
            raise InvalidParams(f"alpha must be >= 0, got {self.alpha}")
        if self.alpha_f < self.alpha:
            raise InvalidParams(f"alpha_f must be >= alpha, got alpha={self.alpha}, alpha_f={self.alpha_f}")
        if not 0.0 <= self.budget <= 1.0:
            raise InvalidParams(f"budget must lie in [0, 1], got {self.budget}")
        if self.allocation is Allocation.CUSTOM:
            if self.split is None:
                raise InvalidParams("custom allocation needs split=(b_L, b_R)")
            b_l, b_r = self.split
            if not (0.0 <= b_l <= 1.0 and 0.0 <= b_r <= 1.0):
                raise InvalidParams(f"split entries must lie in [0, 1], got {self.split}")
            if abs(b_l + b_r - self.budget) > ALGEBRA_TOL:
                raise InvalidParams(f"split {self.split} does not sum to budget {self.budget}")


def build_connection_matrix(alpha: float, alpha_f: float, *, strict: bool = True) -> np.ndarray:
    """Return the read-only 2x2 rate matrix ``[[2a, a+af], [a+af, 2af]]``.

    ``strict=False`` drops the ``alpha_f >= alpha`` ordering check (the
    full-budget dominance result holds for any pair of nonnegative rates).
    """
    if alpha < 0 or alpha_f < 0:
        raise InvalidParams("rates must be nonnegative")
    if strict and alpha_f < alpha:
        raise InvalidParams(f"alpha_f must be >= alpha, got alpha={alpha}, alpha_f={alpha_f}")
    c = np.array([[2.0 * alpha, alpha + alpha_f], [alpha + alpha_f, 2.0 * alpha_f]])
    c.flags.writeable = False
    return c


def resolve_allocation(scenario: FlexScenario) -> tuple[float, float]:
    b = scenario.budget
    if scenario.allocation is Allocation.ONE_SIDED:
        return b, 0.0
    if scenario.allocation is Allocation.TWO_SIDED:
        return b / 2.0, b / 2.0
    b_l, b_r = scenario.split
    if abs(b_l + b_r - b) > ALGEBRA_TOL:
        raise InvalidParams(f"split {scenario.split} does not sum to budget {b}")
    return float(b_l), float(b_r)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _mixing(weights: np.ndarray, rates: np.ndarray):
    """Row-normalize ``weights`` by ``rates``; rows with zero rate become all-zero."""
    degenerate = rates <= 0.0
    safe = np.where(degenerate, 1.0, rates)
    mix = np.where(degenerate[:, None], 0.0, weights / safe[:, None])
    return mix, degenerate


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A fully specified 2-type instance with its derived rates and mixings.

    ``lam[x]`` is the mean degree of a type-x supply node, ``big_m[y]`` that
    of a type-y demand node. ``a_left[x, y]`` is the probability that a
    neighbour of a type-x supply node has demand type y; ``a_right[y, x]`` is
    the mirror quantity.
    """

    p: np.ndarray
    q: np.ndarray
    c: np.ndarray
    lam: np.ndarray = field(init=False)
    big_m: np.ndarray = field(init=False)
    a_left: np.ndarray = field(init=False)
    a_right: np.ndarray = field(init=False)
    left_degenerate: np.ndarray = field(init=False)
    right_degenerate: np.ndarray = field(init=False)

    def __post_init__(self):
        p, q, c = (np.array(v, dtype=float) for v in (self.p, self.q, self.c))
        if p.shape != (2,) or q.shape != (2,) or c.shape != (2, 2):
            raise InvalidParams("expected p, q of shape (2,) and c of shape (2, 2)")
        for name, v in (("p", p), ("q", q)):
            if np.any(v < 0) or np.any(v > 1) or abs(v.sum() - 1.0) > ALGEBRA_TOL:
                raise InvalidParams(f"{name} must be a probability pair, got {v}")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise InvalidParams("connection rates must be finite and nonnegative")
        lam = c @ q
        big_m = c.T @ p
        a_left, left_deg = _mixing(c * q[None, :], lam)
        a_right, right_deg = _mixing(c.T * p[None, :], big_m)
        for name, v in (("p", p), ("q", q), ("c", c), ("lam", lam), ("big_m", big_m),
                        ("a_left", a_left), ("a_right", a_right),
                        ("left_degenerate", left_deg), ("right_degenerate", right_deg)):
            object.__setattr__(self, name, _frozen(v) if v.dtype != bool else v)

    @classmethod
    def from_split(cls, b_left: float, b_right: float, c) -> ModelSpec:
        return cls(p=(1.0 - b_left, b_left), q=(1.0 - b_right, b_right), c=c)

    def swapped(self) -> ModelSpec:
        """The same graph law seen from the demand side."""
        return ModelSpec(p=self.q, q=self.p, c=self.c.T)

    def edge_density(self) -> float:
        """Expected edges per node, sum over (x, y) of p_x q_y c_xy."""
        return float(self.p @ self.c @ self.q)

    def unimodularity_gap(self) -> float:
        left = self.p[:, None] * self.a_left * self.lam[:, None]
        right = (self.q[:, None] * self.a_right * self.big_m[:, None]).T
        joint = self.p[:, None] * self.q[None, :] * self.c
        return float(max(np.abs(left - joint).max(), np.abs(right - joint).max()))

    def as_dict(self) -> dict:
        return {"p": self.p.tolist(), "q": self.q.tolist(), "c": self.c.tolist()}


def derive_model(scenario: FlexScenario) -> ModelSpec:
    b_l, b_r = resolve_allocation(scenario)
    c = build_connection_matrix(scenario.alpha, scenario.alpha_f)
    return ModelSpec.from_split(b_l, b_r, c)


def scenario_model(budget: float, alpha: float, alpha_f: float, allocation: Allocation | str = "one",
                   split: tuple[float, float] | None = None) -> ModelSpec:
    """Shorthand for ``derive_model(FlexScenario(...))``."""
    return derive_model(FlexScenario(alpha, alpha_f, budget, Allocation(allocation), split))
