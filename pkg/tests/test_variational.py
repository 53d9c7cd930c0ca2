import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flexmatch.errors import DegenerateRatio, NoConvergence
from flexmatch.model import ModelSpec, scenario_model
from flexmatch.validation import random_model
from flexmatch.variational import (Method, active_coordinates, eta_pair, eval_F, fixed_point_residual, grad_F,
                                   H_map, iterate_H, maximize_F)


def mp_F(p, q, c, t):
    """Independent high-precision evaluation of the objective."""
    with mp.workdps(50):
        M = [sum(mp.mpf(c[x][y]) * p[x] for x in range(2)) for y in range(2)]
        e = [mp.exp(-M[y] * t[y]) for y in range(2)]
        head = sum(p[x] * mp.exp(-sum(mp.mpf(c[x][y]) * q[y] * e[y] for y in range(2))) for x in range(2))
        tail = sum(q[y] * e[y] * (1 + M[y] * t[y]) for y in range(2))
        return head + tail - 1


@st.composite
def models(draw):
    b = draw(st.floats(0.0, 1.0))
    a = draw(st.floats(0.0, 3.0))
    af = a + draw(st.floats(0.0, 5.0))
    bl = draw(st.floats(0.0, 1.0)) * b
    return scenario_model(b, a, af, "custom", (bl, b - bl))


def test_zero_rates_objective_is_constant():
    m = scenario_model(0.5, 0.0, 0.0, "two")
    g = np.linspace(0, 1, 11)
    assert np.all(eval_F(m, *np.meshgrid(g, g)) == 1.0)
    assert grad_F(m, 0.3, 0.7) == (0.0, 0.0)
    assert H_map(m, 0.3, 0.7) == (0.0, 0.0)
    res = maximize_F(m)
    assert res.f_star == 1.0 and res.eta == 0.0 and res.t_star == (1.0, 1.0)


def test_value_at_origin():
    m = scenario_model(1.0, 0.5, 0.5, "one")
    assert eval_F(m, 0.0, 0.0) == pytest.approx(math.exp(-1), abs=1e-12)
    for args in [(0.3, 1, 4, "two"), (0.7, 0.2, 3, "one")]:
        m = scenario_model(*args)
        assert eval_F(m, 0, 0) == pytest.approx(float(m.p @ np.exp(-m.lam)), abs=1e-14)


def test_matches_high_precision_oracle():
    m = scenario_model(1.0, 1.0, 2.0, "one")
    assert eval_F(m, 0.5, 0.5) == pytest.approx(float(mp_F([0, 1], [1, 0], m.c.tolist(), [0.5, 0.5])), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(models(), st.floats(0, 1), st.floats(0, 1))
def test_objective_matches_oracle_random(m, t1, t2):
    ref = mp_F(m.p.tolist(), m.q.tolist(), m.c.tolist(), [t1, t2])
    assert eval_F(m, t1, t2) == pytest.approx(float(ref), abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(models(), st.floats(1e-3, 1 - 1e-3), st.floats(1e-3, 1 - 1e-3))
def test_gradient_matches_finite_differences(m, t1, t2):
    h = 1e-6
    g = grad_F(m, t1, t2)
    fd1 = (eval_F(m, t1 + h, t2) - eval_F(m, t1 - h, t2)) / (2 * h)
    fd2 = (eval_F(m, t1, t2 + h) - eval_F(m, t1, t2 - h)) / (2 * h)
    assert abs(g[0] - fd1) <= 1e-5 and abs(g[1] - fd2) <= 1e-5


@settings(max_examples=60, deadline=None)
@given(models())
def test_maximizer_properties(m):
    res = maximize_F(m)
    assert 0.0 <= res.t_star[0] <= 1.0 and 0.0 <= res.t_star[1] <= 1.0
    assert 0.0 <= res.eta <= 1.0 and 0.0 <= res.f_star <= 1.0
    assert res.f_star >= eval_F(m, 0.0, 0.0) - 1e-15
    assert res.eta == pytest.approx(1.0 - res.f_star, abs=1e-15)
    if res.method is Method.FIXED_POINT_REFINED:
        assert res.residual <= 1e-10
    t = np.array(res.t_star)
    act = active_coordinates(m)
    if np.all((t[act] > 1e-6) & (t[act] < 1 - 1e-6)):
        assert fixed_point_residual(m, t) <= 1e-6
        assert max(abs(v) for v in grad_F(m, *t)) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(models())
def test_side_symmetry(m):
    assert maximize_F(m).f_star == pytest.approx(maximize_F(m.swapped()).f_star, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(models(), st.integers(0, 3))
def test_more_edges_never_raise_the_max(m, k):
    c = np.array(m.c)
    c[k // 2, k % 2] += 0.05
    bumped = ModelSpec(m.p, m.q, c)
    assert maximize_F(bumped).f_star <= maximize_F(m).f_star + 1e-8


def test_one_sided_against_dense_grid():
    m = scenario_model(0.5, 0.5, 2.0, "one")
    grid = np.linspace(0, 1, 10001)
    assert maximize_F(m).f_star == pytest.approx(eval_F(m, grid, 1.0).max(), abs=1e-6)


def test_two_sided_against_dense_grid():
    m = scenario_model(0.6, 1.0, 5.0, "two")
    g = np.linspace(0, 1, 2001)
    t1, t2 = np.meshgrid(g, g)
    res = maximize_F(m)
    assert res.f_star >= eval_F(m, t1, t2).max() - 1e-12
    assert res.f_star - eval_F(m, t1, t2).max() <= 1e-5


def test_type_blind_model_is_allocation_free():
    for b in (0.0, 0.3, 1.0):
        o = maximize_F(scenario_model(b, 1.5, 1.5, "one"))
        t = maximize_F(scenario_model(b, 1.5, 1.5, "two"))
        assert o.f_star == pytest.approx(t.f_star, abs=1e-12)


def test_h_iteration_increases_objective():
    rng = np.random.default_rng(0)
    for _ in range(40):
        m = random_model(rng)
        t = np.ones(2)
        act = active_coordinates(m)
        vals = []
        for _ in range(400):
            vals.append(eval_F(m, *t))
            t = np.where(act, np.array(H_map(m, *t)), t)
        assert np.diff(vals).min() >= -1e-12
        g = np.linspace(0, 1, 401)
        assert vals[-1] <= eval_F(m, *np.meshgrid(g, g)).max() + 1e-9 or vals[-1] <= maximize_F(m).f_star + 1e-12


def test_h_fixed_point_at_maximizer():
    m = scenario_model(0.6, 1.0, 5.0, "two")
    res = maximize_F(m)
    h = H_map(m, *res.t_star)
    assert np.allclose(h, res.t_star, atol=1e-8)


def test_iterate_h_returns_fixed_point():
    m = scenario_model(0.5, 0.5, 2.0, "two")
    t, its, res = iterate_H(m, (1.0, 1.0))
    assert res <= 1e-10 and its > 0
    assert fixed_point_residual(m, t) <= 1e-10


def test_frozen_rates():
    # values confirmed independently by the dense-grid test above and the mpmath oracle
    e = eta_pair(0.6, 1.0, 5.0)
    assert e.eta_os == pytest.approx(0.9351067920115574, abs=1e-10)
    assert e.eta_ts == pytest.approx(0.9615013240710222, abs=1e-10)


def test_eta_pair_examples():
    assert eta_pair(0.4, 1.0, 1.0).adv_os == pytest.approx(1.0, abs=1e-9)
    assert eta_pair(1.0, 0.0, 2.5).adv_os > 1.0
    assert eta_pair(0.6, 1.0, 5.0).adv_os < 1.0
    with pytest.raises(DegenerateRatio):
        eta_pair(0.5, 0.0, 0.0)


def test_large_rates_stay_finite():
    res = maximize_F(scenario_model(0.5, 0.1, 500.0, "two"))
    assert np.isfinite(res.f_star) and 0 <= res.eta <= 1


def test_grid_fallback_disabled_raises(monkeypatch):
    import flexmatch.variational as var
    monkeypatch.setattr(var, "_newton_polish", lambda model, t, tol: np.asarray(t, dtype=float))
    m = scenario_model(0.6, 1.0, 5.0, "two")
    with pytest.raises(NoConvergence):
        maximize_F(m, fp_tol=0.0, fp_max_iter=1, grid_fallback=False)


def test_grid_n_validation():
    with pytest.raises(ValueError):
        maximize_F(scenario_model(0.5, 1, 2, "one"), grid_n=1)
