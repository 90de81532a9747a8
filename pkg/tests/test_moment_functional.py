import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeaw.errors import ConstraintError, DomainError
from freeaw.moment_functional import (
    AwParams,
    ChebPoly,
    aw_poly_coeffs,
    closed_moment_aaa,
    closed_moment_ab,
    closed_moment_abb,
    closed_moment_abc,
    closed_moment_abcd,
    closed_moment_auto,
    derivative_form_abb,
    elementary_symmetric,
    moment_generating,
    moment_poly,
    moment_table,
    moment_u,
    partial_fraction_abc,
    reduce_parameter,
    reduction_residual,
)

par = st.floats(-1.5, 1.5, allow_nan=False)
cpar = st.builds(complex, par, par)


def test_params_padding_and_radius():
    p = AwParams(0.5, 2.0)
    assert p.params == (0.5, 2.0, 0j, 0j)
    assert p.radius_R == 2.0
    assert AwParams(0.1).radius_R == 1.0
    with pytest.raises(ConstraintError):
        AwParams(1, 1, 1, 1)
    with pytest.raises(ValueError):
        AwParams(1, 2, 3, 4, 5)


def test_elementary_symmetric():
    assert elementary_symmetric((0, 0, 0, 0)) == (0, 0, 0, 0)
    assert elementary_symmetric((0.3, 0.7)) == pytest.approx((1.0, 0.21, 0, 0))
    assert elementary_symmetric((1, 2, 3, 4)) == (10, 35, 50, 24)


def test_aw_poly_low_orders():
    assert aw_poly_coeffs((0.3, 0.2), 0).coeffs == (1,)
    assert aw_poly_coeffs((0.7,), 1).coeffs == pytest.approx((-0.7, 1))


def test_aw_poly_generic_order():
    p = (0.2, -0.4, 0.5, 0.3)
    s1, s2, s3, s4 = elementary_symmetric(p)
    assert aw_poly_coeffs(p, 5).coeffs == pytest.approx((0, s4, -s3, s2, -s1, 1))


def test_moment_closed_forms():
    for n in range(10):
        assert moment_u((0.7,), n) == pytest.approx(0.7**n)
        assert moment_u((0.7, -0.4), n) == pytest.approx(closed_moment_ab(0.7, -0.4, n))
        assert moment_u((0.6, 0.6, 0.6), n) == pytest.approx(closed_moment_aaa(0.6, n))


def test_moment_poly_examples():
    p = (0.3, 0.4, 0.5, 0.1)
    assert moment_poly(p, ChebPoly([1])) == pytest.approx(1)
    for n in range(1, 8):
        assert abs(moment_poly(p, aw_poly_coeffs(p, n))) < 1e-13
    assert moment_poly((0.5,), ChebPoly([1, 0, 1])) == pytest.approx(1.25)


def test_generating_function():
    assert moment_generating((0.3, 0.4), 0) == pytest.approx(1)
    a, b, c, z = 0.3, 0.4, 0.5, 0.2
    closed = (1 - a * b * c * z) / ((1 - a * z) * (1 - b * z) * (1 - c * z))
    assert moment_generating((a, b, c), z) == pytest.approx(closed, rel=1e-14)
    partial = np.sum(moment_table((a, b, c), 50) * z ** np.arange(51))
    assert abs(partial - closed) < 1e-12
    with pytest.raises(DomainError):
        moment_generating((2.0,), 0.6)


def test_reduction_examples():
    q1 = ChebPoly([0, 1])
    reduced, q = reduce_parameter((0.2, 0.3, 0.0), q1)
    assert q.coeffs == q1.coeffs
    a, b, c = 0.2, 0.3, 0.4
    assert moment_poly((a, b, c), ChebPoly.h_kernel(c)) == pytest.approx((1 - a * c) * (1 - b * c))
    assert reduction_residual((a, b, c), q1) < 1e-13


@given(st.tuples(cpar, cpar, cpar, cpar), st.integers(0, 20))
def test_permutation_invariance(p, n):
    if abs(1 - p[0] * p[1] * p[2] * p[3]) < 1e-3:
        return
    ref = moment_u(p, n)
    for perm in itertools.permutations(p):
        assert abs(moment_u(perm, n) - ref) <= 1e-9 * max(1.0, abs(ref))


@given(st.tuples(par, par, par, par), st.integers(1, 30))
def test_annihilates_aw_polys(p, n):
    if abs(1 - p[0] * p[1] * p[2] * p[3]) < 1e-3:
        return
    q = aw_poly_coeffs(p, n)
    lam = moment_table(p, n)
    scale = np.sum(np.abs(np.asarray(q.coeffs) * lam))
    assert abs(moment_poly(p, q)) <= 1e-11 * max(1.0, scale)


@given(st.tuples(par, par, par), st.integers(0, 30))
def test_partial_fractions(p, n):
    a, b, c = p
    if min(abs(a - b), abs(a - c), abs(b - c)) < 0.1:
        return
    ref = moment_u(p, n)
    assert abs(partial_fraction_abc(a, b, c, n) - ref) <= 1e-10 * max(1.0, abs(ref)) * 1e2
    assert abs(closed_moment_abc(a, b, c, n) - ref) <= 1e-8 * max(1.0, abs(ref))


def test_four_distinct_closed_form():
    p = (0.3, -0.5, 0.7, 0.2)
    for n in range(15):
        assert moment_u(p, n) == pytest.approx(closed_moment_abcd(p, n), rel=1e-10, abs=1e-14)


def test_repeated_parameter_forms():
    for n in range(15):
        assert moment_u((0.3, 0.8, 0.8), n) == pytest.approx(closed_moment_abb(0.3, 0.8, n), rel=1e-10, abs=1e-14)
        assert closed_moment_auto(0.3, 0.8, 0.8 + 1e-9, n) == pytest.approx(closed_moment_abb(0.3, 0.8, n), rel=1e-7)
        assert closed_moment_auto(0.5, 0.5, 0.5, n) == pytest.approx(closed_moment_aaa(0.5, n))


def test_derivative_identity():
    a, b, h = 0.3, 0.8, 1e-5
    for n in range(12):
        db = (moment_u((b + h,), n) - moment_u((b - h,), n)) / (2 * h)
        assert derivative_form_abb(a, b, n, db) == pytest.approx(moment_u((a, b, b), n), rel=1e-6, abs=1e-10)


def test_chebpoly_algebra():
    q = ChebPoly([1, 2, 0, 0])
    assert q.coeffs == (1, 2)
    assert q.degree == 1
    assert ChebPoly([]).degree == -1
    y = 0.37 - 0.2j
    assert q.mul_y()(y) == pytest.approx(y * q(y))
    assert q.mul_h(0.4)(y) == pytest.approx((1 + 0.16 - 0.4 * y) * q(y))
    assert (q + ChebPoly.basis(3))(y) == pytest.approx(q(y) + ChebPoly.basis(3)(y))
