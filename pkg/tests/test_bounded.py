import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from flexmatch.bounded import (FiniteDegreeLaw, eval_F_bounded, truncated_poisson_law,
                               truncated_poisson_objective, truncation_mean_deficit)
from flexmatch.errors import InvalidLaw, UnimodularityViolation
from flexmatch.model import scenario_model
from flexmatch.variational import eval_F

GRID = np.linspace(0.0, 1.0, 101)
T1, T2 = np.meshgrid(GRID, GRID, indexing="ij")
MODERATE = [(0.6, 1.0, 3.0, "two"), (0.5, 0.5, 2.0, "one"), (1.0, 0.0, 2.5, "one"), (0.3, 1.0, 3.5, "two")]


def sup_gap(model, d):
    return float(np.abs(truncated_poisson_objective(model, d, T1, T2) - eval_F(model, T1, T2)).max())


def test_law_validation():
    with pytest.raises(InvalidLaw):
        FiniteDegreeLaw([0.5, 0.6])
    with pytest.raises(InvalidLaw):
        FiniteDegreeLaw([-0.1, 1.1])
    with pytest.raises(InvalidLaw):
        FiniteDegreeLaw([])


def test_law_basics():
    law = FiniteDegreeLaw([0.2, 0.3, 0.5])
    assert law.d_max == 2 and law.mean() == pytest.approx(1.3)
    assert law.pgf(1.0) == pytest.approx(1.0) and law.pgf_prime(1.0) == pytest.approx(1.3)
    assert law.pgf_second(1.0) == pytest.approx(1.0)
    ex = law.excess()
    assert np.allclose(ex.weights, [0.3 / 1.3, 1.0 / 1.3])
    assert np.array_equal(FiniteDegreeLaw.point_mass(0).excess().weights, [1.0])


def test_point_mass_zero_gives_constant_one():
    z = FiniteDegreeLaw.point_mass(0)
    vals = eval_F_bounded((0.4, 0.6), (0.7, 0.3), [z, z], [z, z], np.zeros((2, 2)), np.zeros((2, 2)), T1, T2)
    assert np.all(vals == 1.0)


def test_degree_two_symbolic():
    t = sp.symbols("t")
    s = sp.symbols("s")
    phi = s ** 2
    dphi = sp.diff(phi, s)
    ratio = dphi.subs(s, 1 - t) / dphi.subs(s, 1)
    expr = phi.subs(s, 1 - ratio) + phi.subs(s, 1 - t) + t * dphi.subs(s, 1 - t) - 1
    two, zero = FiniteDegreeLaw.point_mass(2), FiniteDegreeLaw.point_mass(0)
    mix = np.array([[1.0, 0.0], [0.0, 0.0]])
    for tv in np.linspace(0, 1, 11):
        got = eval_F_bounded((1, 0), (1, 0), [two, zero], [two, zero], mix, mix, tv, tv)
        assert got == pytest.approx(float(expr.subs(t, tv)), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=6).filter(lambda w: sum(w[1:]) > 1e-3),
       st.floats(0, 1), st.floats(0, 1))
def test_single_type_symbolic(w, t1, t2):
    w = np.asarray(w) / sum(w)
    law = FiniteDegreeLaw(w)
    s = sp.symbols("s")
    phi = sum(sp.Rational(0) + float(wk) * s ** k for k, wk in enumerate(w))
    dphi = sp.diff(phi, s)
    ratio = dphi.subs(s, 1 - t1) / dphi.subs(s, 1)
    ref = float(phi.subs(s, 1 - ratio) + phi.subs(s, 1 - t1) + t1 * dphi.subs(s, 1 - t1) - 1)
    zero = FiniteDegreeLaw.point_mass(0)
    mix = np.array([[1.0, 0.0], [0.0, 0.0]])
    got = eval_F_bounded((1, 0), (1, 0), [law, zero], [law, zero], mix, mix, t1, t2)
    assert got == pytest.approx(ref, abs=1e-12)


def test_unimodularity_violation():
    two, one = FiniteDegreeLaw.point_mass(2), FiniteDegreeLaw.point_mass(1)
    mix = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(UnimodularityViolation):
        eval_F_bounded((1, 0), (1, 0), [two, one], [one, one], mix, mix, 0.5, 0.5)


def test_truncated_law():
    law = truncated_poisson_law(3.0, 5)
    assert law.d_max == 5 and law.weights.sum() == pytest.approx(1.0)
    assert law.weights[0] > np.exp(-3.0)
    assert np.array_equal(truncated_poisson_law(2.0, 0).weights, [1.0])
    with pytest.raises(ValueError):
        truncated_poisson_law(1.0, -1)


@pytest.mark.parametrize("args", MODERATE)
def test_truncation_zero_is_constant(args):
    assert np.all(truncated_poisson_objective(scenario_model(*args), 0, T1, T2) == 1.0)


@pytest.mark.parametrize("args", MODERATE)
def test_truncation_thirty_matches_poisson(args):
    m = scenario_model(*args)
    assert max(m.lam.max(), m.big_m.max()) <= 8
    assert sup_gap(m, 30) <= 1e-6


@pytest.mark.parametrize("args", MODERATE)
def test_truncation_gap_trend(args):
    m = scenario_model(*args)
    gaps = [sup_gap(m, d) for d in (2, 5, 10, 20)]
    if any(b > a + 1e-9 for a, b in zip(gaps, gaps[1:])):
        warnings.warn(f"truncation gap not monotone for {args}: {gaps}")
    assert gaps[-1] < gaps[0]


def test_mean_deficit_shrinks():
    m = scenario_model(0.6, 1.0, 3.0, "two")
    vals = [truncation_mean_deficit(m, d) for d in (0, 5, 10, 30)]
    assert vals[0] == pytest.approx(max(m.lam.max(), m.big_m.max()))
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-12
