"""Runs every acceptance criterion at its stated scale and tolerance.

Each criterion prints one PASS/FAIL line (collected in the terminal summary).
Criterion 2 has a strict clause that the exact formulas do not meet; it is
kept at its stated tolerance and marked as an expected failure. See the
README section "Known deviations".
"""
import mpmath as mp
import pytest

from conftest import ACCEPTANCE_LINES
from flexmatch.model import scenario_model
from flexmatch.validation import CRITERIA, _gap_grid, run_criterion
from flexmatch.variational import maximize_F

STRICT_GAP_REASON = ("strict budget-1 margin: the two-sided advantage at a=4.8333, af=5 is 1.87e-7, "
                     "below the required 1e-6 (confirmed at 40 digits)")

PARAMS = [pytest.param(k, marks=[pytest.mark.xfail(strict=True, reason=STRICT_GAP_REASON)]) if k == 2
          else pytest.param(k, marks=[pytest.mark.slow]) if k in (1, 7) else k
          for k in sorted(CRITERIA)]


@pytest.mark.parametrize("number", PARAMS)
def test_criterion(number):
    res = run_criterion(number)
    line = res.line() + f" ({res.seconds:.1f}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


def test_budget_one_weak_clause():
    grid = _gap_grid()
    assert len(grid) == 900
    assert min(g for _, _, g in grid) >= -1e-9


def _mp_F(m, t):
    p = [mp.mpf(v) for v in m.p]
    q = [mp.mpf(v) for v in m.q]
    c = [[mp.mpf(v) for v in row] for row in m.c]
    big_m = [sum(c[x][y] * p[x] for x in range(2)) for y in range(2)]
    e = [mp.exp(-big_m[y] * t[y]) for y in range(2)]
    head = sum(p[x] * mp.exp(-sum(c[x][y] * q[y] * e[y] for y in range(2))) for x in range(2))
    return head + sum(q[y] * e[y] * (1 + big_m[y] * t[y]) for y in range(2)) - 1


def _mp_max(m):
    """Polish the float maximizer at 50 digits and return the objective there."""
    res = maximize_F(m)
    t0 = [mp.mpf(v) for v in res.t_star]
    idx = [y for y in range(2) if m.q[y] * m.big_m[y] > 0]

    def full(s):
        t = list(t0)
        for k, y in enumerate(idx):
            t[y] = s[k]
        return t

    def grad(*s):
        t = full(s)
        return [mp.diff(lambda u, y=y: _mp_F(m, [u if j == y else t[j] for j in range(2)]), t[y]) for y in idx]

    sol = mp.findroot(grad, [t0[y] for y in idx])
    sol = list(sol) if hasattr(sol, "__len__") else [sol]
    return _mp_F(m, full(sol)), res.f_star


@pytest.mark.parametrize("budget", [0.3, 0.6, 0.9])
def test_zero_baseline_margin_high_precision(budget):
    # criterion 3 margins are between 1e-12 and 1e-7; recheck their sign and size at 50 digits
    with mp.workdps(50):
        f_os, f_os64 = _mp_max(scenario_model(budget, 0.0, 30.0, "one"))
        f_ts, f_ts64 = _mp_max(scenario_model(budget, 0.0, 30.0, "two"))
        gap = f_ts - f_os
        assert gap > 0
        assert abs(float(gap) - (f_ts64 - f_os64)) <= 1e-12 + 1e-3 * float(gap)
