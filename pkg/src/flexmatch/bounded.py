"""Objective for finitely supported degree laws and its truncated-Poisson instance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.stats import poisson

from .errors import InvalidLaw, UnimodularityViolation
from .model import ALGEBRA_TOL, ModelSpec


@dataclass(frozen=True, eq=False)
class FiniteDegreeLaw:
    """Degree law on {0, ..., d_max} given by its probability vector."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidLaw("weights must be a nonempty vector of nonnegative numbers")
        if abs(w.sum() - 1.0) > ALGEBRA_TOL:
            raise InvalidLaw(f"weights sum to {w.sum()!r}, expected 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def point_mass(cls, k: int) -> FiniteDegreeLaw:
        w = np.zeros(k + 1)
        w[k] = 1.0
        return cls(w)

    @property
    def d_max(self) -> int:
        return self.weights.size - 1

    def pgf(self, s):
        return P.polyval(s, self.weights)

    def pgf_prime(self, s):
        return P.polyval(s, P.polyder(self.weights)) if self.d_max else np.zeros_like(np.asarray(s, float))

    def pgf_second(self, s):
        return P.polyval(s, P.polyder(self.weights, 2)) if self.d_max > 1 else np.zeros_like(np.asarray(s, float))

    def mean(self) -> float:
        return float(np.arange(self.weights.size) @ self.weights)

    def excess(self) -> FiniteDegreeLaw:
        """Size-biased law shifted down by one; a law with zero mean maps to itself."""
        m = self.mean()
        if m <= 0.0:
            return FiniteDegreeLaw.point_mass(0)
        k = np.arange(1, self.weights.size)
        w = k * self.weights[1:] / m
        if w.size == 0:
            return FiniteDegreeLaw.point_mass(0)
        return FiniteDegreeLaw(w / w.sum())


def truncated_poisson_law(rate: float, d: int) -> FiniteDegreeLaw:
    """Poisson(rate) with the mass above ``d`` moved to degree 0."""
    if d < 0:
        raise ValueError("d must be >= 0")
    w = poisson.pmf(np.arange(d + 1), rate)
    w[0] += poisson.sf(d, rate)
    return FiniteDegreeLaw(w / w.sum())


def unimodularity_gap(p, q, laws_l, laws_r, a_left, a_right) -> float:
    m_l = np.array([law.mean() for law in laws_l])
    m_r = np.array([law.mean() for law in laws_r])
    left = np.asarray(p)[:, None] * np.asarray(a_left) * m_l[:, None]
    right = (np.asarray(q)[:, None] * np.asarray(a_right) * m_r[:, None]).T
    return float(np.abs(left - right).max())


def eval_F_bounded(p, q, laws_l, laws_r, a_left, a_right, t1, t2, *, unimod_tol: float = ALGEBRA_TOL):
    """Objective for finite-support laws; broadcasts over ``t1, t2``.

    Demand types whose law has zero mean use the convention that the ratio
    ``psi'(1 - t) / psi'(1)`` is 0 and ``t_y`` is taken as 0.
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    a_left = np.asarray(a_left, float)
    gap = unimodularity_gap(p, q, laws_l, laws_r, a_left, a_right)
    if gap > unimod_tol:
        raise UnimodularityViolation(f"unimodularity fails by {gap:.3e}")
    ts = [np.asarray(t1, float), np.asarray(t2, float)]
    ratios = []
    tail = 0.0
    for y, law in enumerate(laws_r):
        d1 = float(law.pgf_prime(1.0))
        if d1 <= 0.0:
            ratios.append(np.zeros_like(ts[y]))
            ty = np.zeros_like(ts[y])
        else:
            ratios.append(law.pgf_prime(1.0 - ts[y]) / d1)
            ty = ts[y]
        tail = tail + q[y] * (law.pgf(1.0 - ty) + ty * law.pgf_prime(1.0 - ty))
    head = 0.0
    for x, law in enumerate(laws_l):
        arg = a_left[x, 0] * (1.0 - ratios[0]) + a_left[x, 1] * (1.0 - ratios[1])
        head = head + p[x] * law.pgf(arg)
    out = np.asarray(head + tail - 1.0)
    return out if out.ndim else float(out)


def truncation_mean_deficit(model: ModelSpec, d: int) -> float:
    """Largest mean lost by truncating any of the four Poisson laws at ``d``."""
    rates = np.concatenate([model.lam, model.big_m])
    # E[K; K > d] for K ~ Pois(r) equals r * P(Pois(r) >= d)
    return float(np.max(rates * poisson.sf(d - 1, rates)))


def truncated_poisson_objective(model: ModelSpec, d: int, t1, t2):
    """``F`` for the model with all degree laws truncated at ``d``.

    The mixings are those of the Poisson model; truncation breaks the
    balance of edge ends by at most the truncated tail mean, so the check
    uses that deficit as its tolerance.
    """
    laws_l = [truncated_poisson_law(r, d) for r in model.lam]
    laws_r = [truncated_poisson_law(r, d) for r in model.big_m]
    tol = truncation_mean_deficit(model, d) + ALGEBRA_TOL
    return eval_F_bounded(model.p, model.q, laws_l, laws_r, model.a_left, model.a_right,
                          t1, t2, unimod_tol=tol)
