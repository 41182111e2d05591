import math

import pytest
from hypothesis import given, strategies as st

from dupkit import curves as cv
from dupkit.errors import ConcavityViolation, DomainError

triangle_params = st.tuples(
    st.floats(min_value=0.01, max_value=1.0),
    st.floats(min_value=0.01, max_value=5.0),
)


def test_triangle_geometry():
    t = cv.make_triangle(0.5, 0.5)
    assert cv.rev(t, 0.0) == 0.0
    assert cv.rev(t, 0.5) == 0.5
    assert cv.rev(t, 1.0) == 0.0
    assert cv.rev(t, 0.25) == pytest.approx(0.25)
    # rising leg is an atom at the peak value, falling leg a continuum
    assert cv.value(t, 0.25) == 1.0
    assert cv.value(t, 0.75) == pytest.approx(1.0 / 3.0)
    assert cv.monopoly(t) == (0.5, 0.5)
    assert cv.monopoly_reserve(t) == 1.0


def test_triangle_point_mass_encoding():
    pm = cv.make_triangle(1.0, 2.0)
    assert cv.rev(pm, 1.0) == 2.0
    assert cv.value(pm, 0.3) == 2.0
    assert cv.monopoly(pm) == (1.0, 2.0)


def test_point_mass_curve():
    pm = cv.make_point_mass(3.0)
    assert cv.rev(pm, 0.5) == 1.5
    assert cv.monopoly(pm) == (1.0, 3.0)
    # whole unit of quantile mass sits on the atom
    assert cv.quantile_of_value(pm, 3.0) == 1.0
    assert cv.quantile_lower_of_value(pm, 3.0) == 0.0
    assert cv.quantile_of_value(pm, 3.1) == 0.0


def test_equal_revenue_curve():
    er = cv.make_equal_revenue(2.0)
    assert cv.rev(er, 0.0) == 0.0  # jump at 0: sup is a limit, not a value
    assert cv.rev(er, 0.25) == 1.5
    assert cv.rev(er, 1.0) == 0.0
    assert cv.value(er, 0.5) == 2.0
    assert cv.quantile_of_value(er, 2.0) == 0.5
    assert cv.quantile_of_value(er, 0.0) == 1.0
    assert cv.virtual_value(er, 0.3) == -2.0
    assert cv.is_unbounded(er)
    q, r = cv.monopoly(er)
    assert q == cv.EPS_MIN and r == pytest.approx(2.0)


def test_make_piecewise_validation():
    with pytest.raises(ConcavityViolation):
        cv.make_piecewise([(0, 0), (0.5, 0.1), (1, 0.5)])  # convex
    with pytest.raises(DomainError):
        cv.make_piecewise([(0.1, 0), (1, 0)])  # must start at q=0
    with pytest.raises(DomainError):
        cv.make_piecewise([(0, 0.2), (1, 0)])  # Rev(0) != 0
    ok = cv.make_piecewise([(0, 0), (0.25, 0.5), (0.75, 0.6), (1, 0.2)])
    assert cv.rev(ok, 0.5) == pytest.approx(0.55)


def test_triangle_atom_quantile_interval():
    t = cv.make_triangle(0.5, 0.5)
    v_atom = 1.0
    hi = cv.quantile_of_value(t, v_atom)
    lo = cv.quantile_lower_of_value(t, v_atom)
    assert (lo, hi) == (0.0, 0.5)  # atom of mass 1/2 at the peak value
    # no atom strictly inside the falling leg
    assert cv.quantile_of_value(t, 0.5) == pytest.approx(
        cv.quantile_lower_of_value(t, 0.5)
    )


@given(triangle_params, st.floats(min_value=cv.EPS_MIN, max_value=1.0))
def test_quantile_value_galois(params, q):
    # quantiles below EPS_MIN are outside the supported domain: rev(q)
    # underflows there and the value ratio turns to noise
    q_peak, r_peak = params
    c = cv.make_triangle(q_peak, r_peak)
    v = cv.value(c, q)
    # quantile_of_value returns the largest quantile still worth at least v;
    # v is padded down a hair because value() itself rounds
    q_back = cv.quantile_of_value(c, v * (1.0 - 1e-12))
    assert q_back >= q - 1e-9
    assert cv.value(c, q_back) >= v - 1e-9 or q_back == 1.0


@given(triangle_params, st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=0.0, max_value=1.0))
def test_rev_concavity_midpoint(params, q1, q2):
    c = cv.make_triangle(*params)
    mid = 0.5 * (q1 + q2)
    assert cv.rev(c, mid) >= 0.5 * (cv.rev(c, q1) + cv.rev(c, q2)) - 1e-12


@given(triangle_params)
def test_sample_value_matches_quantiles(params):
    c = cv.make_triangle(*params)
    for u in (0.0, 0.3, 0.7, 0.999):
        v = cv.sample_value(c, u)
        # u lies inside the drawn value's quantile interval, up to the
        # rounding the value itself picked up on the way out
        assert cv.quantile_of_value(c, v * (1.0 - 1e-12)) >= u - 1e-9
        assert cv.quantile_lower_of_value(c, v * (1.0 + 1e-12)) <= max(u, cv.EPS_MIN) + 1e-9


def test_sample_value_er_median():
    er = cv.make_equal_revenue(1.5)
    assert cv.sample_value(er, 0.5) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        cv.sample_value(er, 1.0)


def test_rev_dominates():
    outer = cv.make_piecewise([(0, 0), (0.25, 0.5), (0.75, 0.6), (1, 0.2)])
    inner = cv.make_triangle(0.25, 0.5)
    assert cv.rev_dominates(outer, inner)
    assert not cv.rev_dominates(inner, outer)


def test_constructor_validation():
    with pytest.raises(DomainError):
        cv.make_triangle(0.0, 1.0)
    with pytest.raises(DomainError):
        cv.make_triangle(0.5, 0.0)
    with pytest.raises(DomainError):
        cv.make_equal_revenue(0.0)
    with pytest.raises(DomainError):
        cv.make_point_mass(-1.0)
    with pytest.raises(DomainError):
        cv.make_profile([])


def test_virtual_value_monotone_nonincreasing():
    c = cv.make_piecewise([(0, 0), (0.2, 0.4), (0.6, 0.7), (1, 0.1)])
    qs = [0.1, 0.2, 0.4, 0.6, 0.8, 0.99]
    vv = [cv.virtual_value(c, q) for q in qs]
    assert all(a >= b - 1e-12 for a, b in zip(vv, vv[1:]))


def test_kink_values():
    assert cv.kink_values(cv.make_triangle(0.5, 0.5)) == (1.0,)
    assert cv.kink_values(cv.make_equal_revenue(2.0)) == (2.0,)
    assert cv.kink_values(cv.make_point_mass(3.0)) == (3.0,)
