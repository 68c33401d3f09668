from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BIG_QUOTIENT, GOLDEN, LINEAR30, SILVER, brute_convergents, form_mp, theta_mp
from schmidt import contfrac as cf
from schmidt.errors import ScanCapExceeded
from schmidt.theta import CircleInterval, LinearForm, ThetaSpec, ball, circle_distance, orbit_point, sign_of

FIB = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144]


def test_fibonacci_denominators():
    th = ThetaSpec.parse(GOLDEN)
    assert [cf.convergent(th, i).q for i in range(12)] == FIB
    assert cf.convergent(th, 4) == cf.Convergent(4, 3, 5)
    assert th.convergent(5) == (5, 8)


@pytest.mark.parametrize("text", [GOLDEN, SILVER, LINEAR30, BIG_QUOTIENT])
def test_convergents_match_brute_force(text):
    th = ThetaSpec.parse(text)
    quotients = [th.quotient(i) for i in range(1, 25)]
    for i, (p, q) in enumerate(brute_convergents(quotients, 24)):
        assert th.convergent(i) == (p, q)


def test_delta_values_and_bounds(theta):
    t = theta_mp(theta)
    for i in range(0, 20):
        d = cf.delta(theta, i)
        p, q = theta.convergent(i)
        v = form_mp(d.value, t)
        # a finite stream's oracle is a rational truncation, good to ~1e-60
        assert abs(v - abs(q * t - p)) < 1e-50
        assert frac_mp(d.lo) < v < frac_mp(d.hi)
        lo, hi = d.rational_bounds
        assert lo == Fraction(1, theta.convergent(i + 1)[1] + q)


def frac_mp(x):
    return form_mp(LinearForm.const(x), 0)


def test_delta_strictly_decreasing_and_halving(theta):
    for i in range(1, 20):
        a, b, c = (cf.delta(theta, j).value for j in (i - 1, i, i + 1))
        assert sign_of(a - b, theta) > 0
        assert sign_of(c * 2 - a, theta) < 0


def test_delta_ge_agrees_with_exact():
    th = ThetaSpec.parse(SILVER)
    t = theta_mp(th)
    for i in range(1, 12):
        v = form_mp(cf.delta(th, i).value, t)
        for x in (Fraction(1, 3 ** k) for k in range(1, 20)):
            assert cf.delta_ge(th, i, x) == (v >= form_mp(LinearForm.const(x), 0))


def test_last_index_with_delta_ge():
    th = ThetaSpec.parse(GOLDEN)
    x = Fraction(1, 100)
    j = cf.last_index_with_delta_ge(th, x)
    assert cf.delta_ge(th, j, x) and not cf.delta_ge(th, j + 1, x)
    with pytest.raises(ValueError):
        cf.last_index_with_delta_ge(th, Fraction(1, 2), start=5)


def test_generations():
    th = ThetaSpec.parse(GOLDEN)
    assert cf.generation_of(th, 1) == 1  # q_1 = 1 for a_1 = 1
    assert cf.generation_of(th, 4) == 3 and cf.generation_of(th, 7) == 4
    th2 = ThetaSpec.parse(SILVER)
    assert cf.generation_of(th2, 1) == 0  # q_1 = 2
    assert cf.generation_start(th2, 0) == 1 and cf.generation_end(th2, 0) == 2
    with pytest.raises(ValueError):
        cf.generation_of(th, 0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([GOLDEN, SILVER, BIG_QUOTIENT]), st.integers(1, 15), st.sampled_from([Fraction(1, 16), Fraction(1, 40), Fraction(4, 45)]))
def test_find_drop_definition(text, N, s):
    th = ThetaSpec.parse(text)
    m = cf.find_drop(th, N, s)
    d = lambda i: cf.delta(th, i).value  # noqa: E731
    if m == 0:
        assert sign_of(d(N) * s - d(N + 1), th) > 0
    else:
        assert sign_of(d(N + m + 1) - d(N) * s, th) < 0 <= sign_of(d(N + m) - d(N) * s, th)
        for k in range(1, m):
            assert sign_of(d(N + k + 1) - d(N) * s, th) >= 0


def test_find_drop_golden():
    th = ThetaSpec.parse(GOLDEN)
    # Delta ratios are 1/phi, so dropping by 1/16 takes 5 or 6 steps
    assert cf.find_drop(th, 5, Fraction(1, 16)) == 5


def _brute_window(th, window, q_lo, q_hi):
    return [q for q in range(q_lo, q_hi) if sign_of(circle_distance(orbit_point(q, th), window.center, th) - window.radius, th) <= 0]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([GOLDEN, SILVER, LINEAR30]), st.fractions(0, 1, max_denominator=997), st.integers(2, 12))
def test_orbit_scan_matches_brute_force(text, c, k):
    th = ThetaSpec.parse(text)
    win = ball(c, Fraction(1, 2**k), th)
    got = [q for q, _ in cf.orbit_points_in_range(th, win, 0, 600)]
    assert got == _brute_window(th, win, 0, 600)


def test_orbit_scan_exact_boundary():
    th = ThetaSpec.parse(GOLDEN)
    # window edge exactly on theta * 3: included (closed)
    p3 = orbit_point(3, th)
    win = CircleInterval(p3, Fraction(1, 1000))
    edge = ball(p3.rep + Fraction(1, 1000), Fraction(1, 1000), th)
    assert 3 in [q for q, _ in cf.orbit_points_in_range(th, edge, 1, 50)]
    assert [q for q, _ in cf.orbit_points_in_range(th, win, 1, 50)] == [3]


def test_scan_cap_enforced():
    th = ThetaSpec.parse(GOLDEN)
    win = ball(Fraction(1, 2), Fraction(1, 4), th)
    with pytest.raises(ScanCapExceeded):
        cf.orbit_points_in_range(th, win, 0, 2000, scan_cap=1000)
    with pytest.raises(ScanCapExceeded):
        cf.orbit_points_near(th, win, 20, scan_cap=1000)


def test_orbit_points_near_generations():
    th = ThetaSpec.parse(SILVER)
    win = ball(Fraction(1, 2), Fraction(1, 2), th)
    pts = cf.orbit_points_near(th, win, 2, min_generation=1)
    assert [q for q, _ in pts] == list(range(cf.generation_start(th, 1), cf.generation_end(th, 2)))
    with_zero = cf.orbit_points_near(th, win, 0, include_zero=True)
    assert [q for q, _ in with_zero] == [0, 1]


def test_max_generation_within():
    th = ThetaSpec.parse(GOLDEN)
    g = cf.max_generation_within(th, 100)
    assert th.convergent(g + 1)[1] <= 100 < th.convergent(g + 2)[1]
    # a finite stream stops where its quotients end
    assert cf.max_generation_within(ThetaSpec.parse("cf:[1,1,1]"), 10**9) == 2


def test_facts_table():
    rows = cf.facts_table(ThetaSpec.parse(GOLDEN), 10)
    assert [r["q"] for r in rows] == FIB[:11]
    assert rows[1]["delta"].startswith("0.38196601125")
