"""
Tests for the closed-form kin-selection analysis.

This script tests:
1. Single-locus fitnesses, thresholds, bounds and the mixed equilibrium
2. Role-separated inclusive fitnesses, thresholds, bounds and equilibrium
3. The equilibrium contract against an independent bisection oracle
4. The cost/benefit/synergy rewrite of the role-separated fitness difference
5. Threshold sign, interval and monotonicity properties on random matrices
6. Hamilton's rule and the additive limit
7. Equilibria of games whose threshold curve diverges inside [0, 1]
"""
import sys

import numpy as np
import pytest
from scipy.optimize import bisect

from core.errors import InvalidInputError
from games.analytics import (
    KinContext,
    Mode,
    appendix_a_fitness,
    equilibrium_roles,
    equilibrium_single,
    fitness_single,
    hamilton_comparison,
    hamiltons_rule,
    inclusive_fitness_roles,
    threshold_bounds_roles,
    threshold_bounds_single,
    threshold_curve,
    threshold_roles,
    threshold_single,
)
from games.dynamics import fixed_points_single
from games.game_core import PayoffMatrix, decompose, preset

CANONICAL = PayoffMatrix.of(5, 3, 1, 0)
ADDITIVE = PayoffMatrix.of(6, 4, 2, 0)
POSITIVE = PayoffMatrix.of(6, 5, 2, 0)
TOL = 1e-12


def random_pd(rng: np.random.Generator) -> PayoffMatrix:
    t, r, p, s = np.sort(rng.uniform(-10, 10, size=4))[::-1]
    return PayoffMatrix.of(float(t), float(r), float(p), float(s))


def test_fitness_single_examples():
    for f in (0.0, 0.3, 1.0):
        assert fitness_single(CANONICAL, KinContext(r=1, f_c=f)) == (3.0, 1.0)
    assert fitness_single(CANONICAL, KinContext(r=0, f_c=1)) == (3.0, 5.0)
    w_c, w_d = fitness_single(CANONICAL, KinContext(r=5 / 12, f_c=3 / 7))
    assert w_c == pytest.approx(w_d, abs=TOL)


def test_threshold_single_examples():
    assert threshold_single(CANONICAL, 0).value == pytest.approx(1 / 3, abs=TOL)
    assert threshold_single(CANONICAL, 1).value == pytest.approx(1 / 2, abs=TOL)
    for f in np.linspace(0, 1, 11):
        assert threshold_single(ADDITIVE, f).value == pytest.approx(0.5, abs=TOL)


def test_threshold_undefined_and_out_of_range():
    # S = R makes the f_c = 0 denominator vanish
    degenerate = PayoffMatrix.of(2, 1, 0, 1)
    result = threshold_single(degenerate, 0)
    assert not result.defined and result.value is None
    # a matrix where cooperation never pays at any relatedness
    hopeless = threshold_single(PayoffMatrix.of(5, 0, 1, -3), 0.5)
    assert hopeless.defined and hopeless.out_of_range
    with pytest.raises(InvalidInputError):
        threshold_single(CANONICAL, 1.5)


def test_threshold_bounds_single():
    bounds = threshold_bounds_single(CANONICAL)
    assert (bounds.lo, bounds.hi) == pytest.approx((1 / 3, 1 / 2), abs=TOL)
    assert bounds.at_one > bounds.at_zero  # d < 0
    positive = threshold_bounds_single(POSITIVE)
    assert (positive.lo, positive.hi) == pytest.approx((1 / 4, 2 / 5), abs=TOL)
    assert positive.at_zero > positive.at_one  # d > 0
    additive = threshold_bounds_single(ADDITIVE)
    assert additive.lo == additive.hi == pytest.approx(0.5, abs=TOL)


def test_equilibrium_single_examples():
    report = equilibrium_single(CANONICAL, 5 / 12)
    assert report.f_star == pytest.approx(3 / 7, abs=TOL)
    assert report.stable and report.outcome == "mixed"
    assert report.existence_interval == pytest.approx((1 / 3, 1 / 2), abs=TOL)

    above = equilibrium_single(CANONICAL, 0.6)
    assert above.f_star is None and above.outcome == "cooperation_fixes"
    below = equilibrium_single(CANONICAL, 0.2)
    assert below.f_star is None and below.outcome == "defection_fixes"

    unstable = equilibrium_single(POSITIVE, 0.35)
    assert unstable.f_star == pytest.approx(0.25 / 0.65, abs=TOL)
    assert not unstable.stable
    # the fitness difference grows through the equilibrium when d > 0
    lo = fitness_single(POSITIVE, KinContext(r=0.35, f_c=unstable.f_star - 1e-3))
    hi = fitness_single(POSITIVE, KinContext(r=0.35, f_c=unstable.f_star + 1e-3))
    assert lo[0] - lo[1] < 0 < hi[0] - hi[1]


def test_equilibrium_single_degenerate_cases():
    additive = equilibrium_single(ADDITIVE, 0.6)
    assert additive.f_star is None and additive.outcome == "cooperation_fixes"
    assert equilibrium_single(ADDITIVE, 0.4).outcome == "defection_fixes"
    assert equilibrium_single(ADDITIVE, 0.5).outcome == "neutral"
    full = equilibrium_single(CANONICAL, 1.0)
    assert full.f_star is None and full.outcome == "undefined"


def test_single_equilibrium_is_a_fitness_tie():
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(500):
        m = random_pd(rng)
        r = float(rng.uniform(0, 1))
        report = equilibrium_single(m, r)
        if report.f_star is None:
            continue
        w_c, w_d = fitness_single(m, KinContext(r=r, f_c=report.f_star))
        assert abs(w_c - w_d) < 1e-10 * max(1.0, m.max_abs())
        assert report.stable == (decompose(m).d < 0)
        checked += 1
    assert checked > 20


def test_inclusive_fitness_roles_examples():
    assert inclusive_fitness_roles(CANONICAL, 0, 0) == (0.0, 1.0)
    i_c, i_d = inclusive_fitness_roles(CANONICAL, 1 / 4, 0)
    assert i_c == pytest.approx(1.25, abs=TOL) and i_d == pytest.approx(1.25, abs=TOL)
    i_c, i_d = inclusive_fitness_roles(CANONICAL, 2 / 3, 1)
    assert i_c == pytest.approx(i_d, abs=TOL)


def test_threshold_roles_examples():
    assert threshold_roles(CANONICAL, 0).value == pytest.approx(1 / 4, abs=TOL)
    assert threshold_roles(CANONICAL, 1).value == pytest.approx(2 / 3, abs=TOL)
    for f in np.linspace(0, 1, 11):
        assert threshold_roles(ADDITIVE, f).value == pytest.approx(0.5, abs=TOL)
    bounds = threshold_bounds_roles(CANONICAL)
    assert (bounds.lo, bounds.hi) == pytest.approx((1 / 4, 2 / 3), abs=TOL)
    positive = threshold_bounds_roles(POSITIVE)
    assert (positive.lo, positive.hi) == pytest.approx((0.2, 0.5), abs=TOL)


def test_equilibrium_roles_examples():
    report = equilibrium_roles(CANONICAL, 5 / 12)
    assert report.f_star == pytest.approx(8 / 17, abs=TOL)
    assert not report.stable
    assert equilibrium_roles(POSITIVE, 0.3).f_star == pytest.approx(8 / 13, abs=TOL)
    above = equilibrium_roles(CANONICAL, 0.8)
    assert above.f_star is None and above.outcome == "cooperation_fixes"
    assert equilibrium_roles(ADDITIVE, 0.3).f_star is None


def test_equilibrium_roles_matches_bisection():
    """The interior point is where i_c = i_d; an independent root finder must land on it."""
    cases = [(CANONICAL, 5 / 12), (POSITIVE, 0.3), (CANONICAL, 0.3), (CANONICAL, 0.6), (POSITIVE, 0.45)]
    for m, r in cases:
        report = equilibrium_roles(m, r)
        assert report.f_star is not None

        def gap(f: float) -> float:
            i_c, i_d = inclusive_fitness_roles(m, r, f)
            return i_c - i_d

        root = bisect(gap, 0.0, 1.0, xtol=1e-14)
        assert report.f_star == pytest.approx(root, abs=1e-10)
        assert abs(gap(report.f_star)) < 1e-10


def test_equilibrium_roles_random_cases_match_bisection():
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 50:
        m = random_pd(rng)
        if abs(decompose(m).d) < 1e-3:
            continue
        bounds = threshold_bounds_roles(m)
        if bounds.lo >= 1:
            continue
        r = float(rng.uniform(bounds.lo, min(bounds.hi, 1.0)))
        if not bounds.lo < r < bounds.hi:
            continue
        report = equilibrium_roles(m, r)
        assert report.f_star is not None and report.outcome == "mixed"

        def gap(f: float) -> float:
            i_c, i_d = inclusive_fitness_roles(m, r, f)
            return i_c - i_d

        assert abs(gap(report.f_star)) < 1e-10
        assert report.f_star == pytest.approx(bisect(gap, 0.0, 1.0, xtol=1e-14), abs=1e-9)
        checked += 1


def random_matrix(rng: np.random.Generator) -> PayoffMatrix:
    t, r, p, s = rng.uniform(-10, 10, size=4)
    return PayoffMatrix.of(float(t), float(r), float(p), float(s))


def _check_report(m: PayoffMatrix, r: float, report, difference) -> None:
    if report.f_star is not None:
        assert 0 < report.f_star < 1
        assert report.outcome == "mixed"
        assert abs(difference(report.f_star)) < 1e-9 * max(1.0, m.max_abs())
        return
    ends = (difference(0.0), difference(1.0))
    if report.outcome == "cooperation_fixes":
        assert min(ends) >= -1e-12
    elif report.outcome == "defection_fixes":
        assert max(ends) <= 1e-12


def test_equilibria_stay_in_unit_interval_when_threshold_has_pole():
    """In Battle of the Sexes and Apology the threshold curve diverges inside [0, 1]."""
    for name in ("battle_of_sexes", "apology"):
        m = preset(name)
        for r in (0.8, 0.9):
            single = equilibrium_single(m, r)
            assert single.f_star is None or 0 < single.f_star < 1
            roles = equilibrium_roles(m, r)
            assert roles.f_star is None or 0 < roles.f_star < 1
            for point in fixed_points_single(m, r):
                assert 0 <= point.location[0] <= 1
    battle = equilibrium_single(preset("battle_of_sexes"), 0.8)
    assert battle.f_star is None and battle.outcome != "mixed"


def test_equilibria_of_random_matrices():
    rng = np.random.default_rng(37)
    for _ in range(1000):
        m = random_matrix(rng)
        r = float(rng.uniform(0, 0.99))
        _check_report(m, r, equilibrium_single(m, r), lambda f: _gap_single(m, r, f))
        _check_report(m, r, equilibrium_roles(m, r), lambda f: _gap_roles(m, r, f))


def _gap_single(m: PayoffMatrix, r: float, f: float) -> float:
    w_c, w_d = fitness_single(m, KinContext(r=r, f_c=f))
    return w_c - w_d


def _gap_roles(m: PayoffMatrix, r: float, f: float) -> float:
    i_c, i_d = inclusive_fitness_roles(m, r, f)
    return i_c - i_d


def test_printed_roles_equilibrium_sign_is_wrong():
    """Writing r(P - T) in the numerator puts the point outside [0, 1] for the canonical matrix at r = 1/2."""
    m, r = CANONICAL, 0.5
    d = decompose(m).d
    misprinted = (m.p - m.s - r * (m.p - m.t)) / ((1 + r) * d)
    assert misprinted == pytest.approx(-2.0, abs=TOL)
    assert 0 < equilibrium_roles(m, r).f_star < 1


def test_small_game_fitness_examples():
    assert appendix_a_fitness(4, 1, -1, 0, 0) == (-1.0, 0.0)
    i_c, i_d = appendix_a_fitness(4, 1, -1, 3 / 7, 5 / 12)
    roles_c, roles_d = inclusive_fitness_roles(CANONICAL, 5 / 12, 3 / 7)
    assert i_c - i_d == pytest.approx(roles_c - roles_d, abs=TOL)
    for q in np.linspace(0, 1, 9):
        i_c, i_d = appendix_a_fitness(4, 2, 0, q, 0.5)
        assert i_c == pytest.approx(i_d, abs=TOL)


def test_small_game_identity_on_random_grid():
    rng = np.random.default_rng(17)
    for _ in range(200):
        m = PayoffMatrix.of(*(float(v) for v in rng.uniform(-10, 10, size=4)))
        dec = decompose(m)
        for q in np.linspace(0, 1, 5):
            for r in np.linspace(0, 1, 5):
                a_c, a_d = appendix_a_fitness(dec.b, dec.c, dec.d, q, r)
                i_c, i_d = inclusive_fitness_roles(m, r, q)
                assert (a_c - a_d) == pytest.approx(i_c - i_d, abs=1e-12 * 40)


def test_threshold_sign_consistency():
    """w_c - w_d changes sign exactly where r crosses the threshold."""
    rng = np.random.default_rng(19)
    for _ in range(2000):
        m = PayoffMatrix.of(*(float(v) for v in rng.uniform(-10, 10, size=4)))
        f = float(rng.uniform(0, 1))
        r = float(rng.uniform(0, 1))
        d = decompose(m).d

        single = threshold_single(m, f)
        denominator = f * d + m.s - m.r
        if abs(denominator) > 1e-3 and abs(r - single.value) > 1e-6:
            w_c, w_d = fitness_single(m, KinContext(r=r, f_c=f))
            assert np.sign(w_c - w_d) == -np.sign(denominator) * np.sign(r - single.value)

        roles = threshold_roles(m, f)
        denominator = f * d + m.t - m.p
        if abs(denominator) > 1e-3 and abs(r - roles.value) > 1e-6:
            i_c, i_d = inclusive_fitness_roles(m, r, f)
            assert np.sign(i_c - i_d) == np.sign(denominator) * np.sign(r - roles.value)


def test_threshold_interval_and_monotonicity():
    rng = np.random.default_rng(23)
    for _ in range(300):
        m = random_pd(rng)
        d = decompose(m).d
        for mode in (Mode.SINGLE, Mode.ROLES):
            curve = threshold_curve(m, mode, samples=41)
            values = [r for _, r in curve.points]
            assert all(curve.lo - 1e-12 <= v <= curve.hi + 1e-12 for v in values)
            steps = np.diff(values)
            if d < 0:
                assert np.all(steps >= -1e-12)
            elif d > 0:
                assert np.all(steps <= 1e-12)


def test_threshold_curve_shape():
    curve = threshold_curve(CANONICAL, Mode.SINGLE, samples=101)
    assert len(curve.points) == 101
    assert curve.points[0] == (0.0, pytest.approx(1 / 3))
    assert curve.points[-1] == (1.0, pytest.approx(1 / 2))
    with pytest.raises(InvalidInputError):
        threshold_curve(CANONICAL, Mode.ROLES, samples=1)


def test_hamiltons_rule():
    assert hamiltons_rule(4, 2, 0.6)
    assert not hamiltons_rule(4, 2, 0.5)
    assert hamiltons_rule(4, 1, 1 / 3)
    assert threshold_single(CANONICAL, 0).value == pytest.approx(1 / 3)
    with pytest.raises(InvalidInputError):
        hamiltons_rule(0, 1, 0.5)


def test_hamilton_comparison():
    canonical = hamilton_comparison(CANONICAL)
    assert canonical.c_over_b == 0.25 and canonical.direction == "harder"
    assert hamilton_comparison(POSITIVE).direction == "easier"
    assert hamilton_comparison(ADDITIVE).direction == "exact"


if __name__ == "__main__":
    print("Running analytics tests...")
    sys.exit(pytest.main([__file__, "-q"]))
