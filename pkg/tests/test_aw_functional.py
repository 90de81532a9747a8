import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeaw.aw_functional import (
    ChebPolyKernel,
    ConstantKernel,
    ContourSpec,
    Evaluation,
    GenericKernel,
    PowerKernel,
    ProductKernel,
    auto_rho,
    contour_eval,
    evaluate,
    multiply_kernels,
    power_kernel_closed_form,
    power_kernel_eval,
    representation_eval,
    representation_parts,
    representation_plan,
)
from freeaw.errors import DomainError, QuadratureError, UnsupportedConfiguration
from freeaw.lpp_gibbs import LppConfig, partition_truncated
from freeaw.moment_functional import ChebPoly, moment_poly, moment_u
from freeaw.poly_core import kernel_h

# L^{c1,c2}[h_v^{-2}] = (v F'(v) + F(v)) / (1 - v^2) with F = L[1/h_v], evaluated in mpmath
Z2_03_05_05 = 2.057783454078996517


def test_constant_is_one():
    for p in [(0.3, 0.4, 0.5), (2.0, 0.5, -0.3), (0.2, 0.5 + 0.5j, 0.5 - 0.5j), (1.7, 1.3 + 0.2j, 0.1)]:
        assert contour_eval(p, ConstantKernel(1.0)).value == pytest.approx(1.0, abs=1e-12)


def test_cheb_moments_complex():
    p = (0.3, 0.4 + 0.2j, 0.4 - 0.2j)
    for n in range(16):
        got = contour_eval(p, ChebPolyKernel(ChebPoly.basis(n))).value
        assert abs(got - moment_u(p, n)) < 1e-10


@pytest.mark.parametrize("p", [(0.3, 0.4, 0.5), (2.0, 0.5, 0.3), (-1.5, 0.2, 0.9), (0.5 + 1.1j, 0.5 - 1.1j, 0.2), (3.0, 2.0, 0.1)])
def test_power_kernel_closed_form(p):
    R = max(1, *(abs(x) for x in p))
    for v in (0.2 / R, -0.7 / R, 0.5j / R):
        assert contour_eval(p, PowerKernel(v, 1)).value == pytest.approx(power_kernel_closed_form(p, v), rel=1e-11)


def test_rho_independence():
    p = (1.6, 0.3 + 0.4j, 0.3 - 0.4j)
    f = PowerKernel(0.3, 4)
    values = [contour_eval(p, f, ContourSpec(rho=r)).value for r in (0.35, 0.45, 0.55, 0.6)]
    for v in values[1:]:
        assert v == pytest.approx(values[0], rel=1e-10)


def test_empty_band_rejected():
    with pytest.raises(DomainError):
        contour_eval((2.0,), PowerKernel(0.6, 1))
    with pytest.raises(DomainError):
        power_kernel_eval((2.0,), 0.6, 1)
    with pytest.raises(DomainError):
        auto_rho(0.6, 2.0)


def test_quadrature_failure_reports_estimate():
    spec = ContourSpec(nodes_M=8, nodes_max=16, rel_tol=1e-15)
    with pytest.raises(QuadratureError) as info:
        contour_eval((0.9,), PowerKernel(0.85, 40), spec)
    assert info.value.best_estimate is not None


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.integers(1, 6))
def test_reduction_lift_power_kernel(a, b, c, n):
    f = PowerKernel(0.3, n)
    hc = ChebPolyKernel(ChebPoly.h_kernel(c))
    lhs = contour_eval((a, b, c), ProductKernel([hc, f])).value
    rhs = (1 - a * c) * (1 - b * c) * contour_eval((a, b), f).value
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@given(st.floats(0.1, 0.9), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_parameter_continuity(a, b, c):
    f = PowerKernel(0.3, 2)
    eps = 1e-8
    v0 = contour_eval((a, b, c), f).value
    v1 = contour_eval((a + eps, b, c), f).value
    assert abs(v1 - v0) / eps < 1e3


def test_representation_reciprocal_pair():
    f = PowerKernel(0.2, 3)
    got = representation_eval((2.0, 0.5, 0.3), f).value
    assert got == pytest.approx(complex(f(2.5)), rel=1e-14)


def test_representation_single_atom_mass():
    a, b, c = 2.0, 0.4, -0.3
    plan = representation_plan((a, b, c))
    assert plan.case == "distinct"
    (atom,) = plan.atoms
    assert atom.point == pytest.approx(2.5)
    assert atom.mass == pytest.approx((a * a - 1) * (1 - b * c) / ((a - b) * (a - c)))
    for n in range(8):
        got = representation_eval((a, b, c), ChebPolyKernel(ChebPoly.basis(n))).value
        assert got == pytest.approx(moment_u((a, b, c), n), rel=1e-10, abs=1e-12)


def test_representation_matches_contour_inside():
    p = (0.3, 0.4, 0.5)
    f = PowerKernel(0.2, 1)
    assert representation_eval(p, f).value == pytest.approx(contour_eval(p, f).value, rel=1e-9)


@pytest.mark.parametrize("p", [(1.5, 1.5, 0.3), (1.8, 1.8, -0.4), (2.0, 2.0 + 1e-7, 0.3), (2.0, 2.0 + 3e-5, 0.3)])
def test_repeated_and_near_repeated_atoms(p):
    for n in (1, 5, 30):
        f = PowerKernel(0.3, n)
        assert representation_eval(p, f).value == pytest.approx(contour_eval(p, f).value, rel=1e-8)


def test_atom_bookkeeping():
    parts = representation_parts((2.5, 1.5, 0.2), PowerKernel(0.3, 6))
    assert len(parts.atom_terms) == 2
    total = parts.total
    bare = Evaluation(parts.density, parts.shift)
    assert total.value == pytest.approx(bare.value + sum(parts.atom_terms) * math.exp(parts.shift), rel=1e-14)


def test_unsupported_configurations():
    with pytest.raises(UnsupportedConfiguration):
        representation_plan((1.0, 0.3, 0.2))
    with pytest.raises(UnsupportedConfiguration):
        representation_plan((2.0, 2.0, 2.0))
    with pytest.raises(UnsupportedConfiguration):
        representation_plan((0.3 + 0.2j, 0.1j, 0.2))


def test_evaluate_falls_back_to_contour_on_unit_circle():
    ev = evaluate((1.0, 0.3, 0.4), PowerKernel(0.5, 3))
    assert ev.method == "contour"
    # same value from a slightly displaced parameter by the representation route
    near = evaluate((1.0 + 1e-7, 0.3, 0.4), PowerKernel(0.5, 3))
    assert ev.value == pytest.approx(near.value, rel=1e-5)


def test_power_kernel_partition_function():
    assert power_kernel_eval((0.5, 0.5), 0.3, 2).value.real == pytest.approx(Z2_03_05_05, rel=1e-13)
    z = partition_truncated(LppConfig(0.3, 0.5, 0.5, 2), cap=40)
    assert power_kernel_eval((0.5, 0.5), 0.3, 2).value.real == pytest.approx(z.value, abs=1e-12 + z.tail_bound)
    # N = 2 at a = c1 = c2 = 1/2: the same derivative formula gives 320/81
    assert power_kernel_eval((0.5, 0.5), 0.5, 2).value.real == pytest.approx(320 / 81, rel=1e-13)


def test_large_power_log_scale():
    ev = power_kernel_eval((0.3, 0.4, 0.5), 0.5, 3000)
    assert math.isfinite(ev.log_abs())
    assert ev.log_abs() > 1000


def test_kernel_helpers():
    k = multiply_kernels([PowerKernel(0.2, 1), PowerKernel(0.2, 2), ConstantKernel(1.0)])
    assert isinstance(k, PowerKernel) and k.n == 3
    y = np.array([0.3, -1.1])
    np.testing.assert_allclose(PowerKernel(0.2, 3).derivative(y), GenericKernel(lambda x: kernel_h(0.2, x) ** -3, 0.2).derivative(y), rtol=1e-6)
    with pytest.raises(DomainError):
        GenericKernel(lambda x: x, 1.5)


def test_generic_kernel_matches_power():
    p = (0.6, -0.2, 0.4)
    g = GenericKernel(lambda y: 1 / kernel_h(0.3, y) ** 2, 0.3)
    assert contour_eval(p, g).value == pytest.approx(contour_eval(p, PowerKernel(0.3, 2)).value, rel=1e-11)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=8))
def test_polynomial_linearity(coeffs):
    p = (0.5, -0.3, 1.4)
    q = ChebPoly(coeffs)
    got = contour_eval(p, q).value
    ref = moment_poly(p, q)
    scale = sum(abs(c) for c in coeffs) * max(1.0, 1.4) ** len(coeffs)
    assert abs(got - ref) <= 1e-10 * max(1.0, scale)


@pytest.mark.parametrize("p", [(0.6, 0.6, -0.3), (0.5, 0.5, 0.5), (1.7, 1.7, 0.4)])
def test_repeated_parameter_moments(p):
    for n in range(10):
        got = representation_eval(p, ChebPolyKernel(ChebPoly.basis(n))).value
        assert got == pytest.approx(moment_u(p, n), rel=1e-9, abs=1e-11)
