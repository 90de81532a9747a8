import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeaw.aw_functional import ChebPolyKernel, PowerKernel, evaluate
from freeaw.composition import (
    check_hypotheses,
    collapse_times,
    compose,
    compose_power,
    measure_compose_oracle,
    p_step,
    pi_t,
    radii_plan,
    single_step_sides,
    swap_identity_sides,
)
from freeaw.errors import ConstraintError, DomainError, UnsupportedConfiguration
from freeaw.lpp_gibbs import LppConfig, gen_fn_dp
from freeaw.moment_functional import ChebPoly

# Generating function at a=0.25, c1=0.5, c2=0.4, t=(0.9, 1, 1.1), from an
# mpmath explicit lattice sum with K = 120
G3_FROZEN = 2.3324496831389567


def test_compose_matches_frozen_lattice_sum():
    ts = (0.9, 1.0, 1.1)
    got = compose_power(ts, [1, 1, 1], 0.5, 0.4, 0.25)
    assert got.value.real == pytest.approx(G3_FROZEN, rel=1e-10)
    oracle = measure_compose_oracle(ts, [1, 1, 1], 0.5, 0.4, 0.25)
    assert oracle.value.real == pytest.approx(G3_FROZEN, rel=1e-9)


def test_single_time_is_pi():
    f = PowerKernel(0.3 * 1.1, 3)
    assert compose([1.1], [f], 0.5, 0.6, 0.3).value == pytest.approx(pi_t(0.5, 0.6, 1.1, f).value, rel=1e-14)


def test_pi_is_point_evaluation_when_c1c2_is_one():
    f = ChebPolyKernel([0.3, -1.0, 0.5, 0.2])
    c1, c2, t = 2.0, 0.5, 0.8
    # the measure collapses to the point c2 t + t/(c2 t) ... = u(c2 t) = c2 t + 1/(c2 t)
    x = c2 * t + 1 / (c2 * t)
    assert pi_t(c1, c2, t, f).value == pytest.approx(complex(f(x)), rel=1e-10)


def test_p_step_identity_at_equal_times():
    f = PowerKernel(0.2, 2)
    assert p_step(0.7, 1.0, 1.0, 0.5, f).value == pytest.approx(complex(f(0.7)))
    with pytest.raises(DomainError):
        p_step(0.7, 1.2, 1.0, 0.5, f)


def test_collapse_times_multiplies_kernels():
    ts, fs = collapse_times([0.9, 0.9, 1.2], [PowerKernel(0.27, 1), PowerKernel(0.27, 2), PowerKernel(0.36, 1)])
    assert ts == [0.9, 1.2]
    assert fs[0].n == 3
    with pytest.raises(DomainError):
        collapse_times([1.2, 0.9], [1, 1])


def test_collapsed_compose_equals_distinct_form():
    a, c1, c2 = 0.3, 0.5, 0.6
    v1 = compose_power((1.0, 1.0, 1.2), [1, 1, 1], c1, c2, a).value
    v2 = compose_power((1.0, 1.2), [2, 1], c1, c2, a).value
    assert v1 == pytest.approx(v2, rel=1e-13)
    g = gen_fn_dp(LppConfig(a, c1, c2, 3), np.array([1.0, 1.0, 1.2]), cap=60)
    assert v1.real == pytest.approx(g, rel=1e-8)


def test_radii_plan_is_valid_and_second_plan_agrees():
    ts, a, c1, c2 = (0.9, 1.0, 1.1), 0.25, 0.5, 0.4
    p1 = radii_plan(ts, a, c1, c2)
    p2 = radii_plan(ts, a, c1, c2, shrink=0.8)
    assert p1.violations(a, c1, c2) == [] and p2.violations(a, c1, c2) == []
    assert all(x > y for x, y in zip(p1.ladder, p1.ladder[1:]))
    assert p1.radii != p2.radii
    fs = [PowerKernel(a * t, 1) for t in ts]
    v1 = compose(ts, fs, c1, c2, a, plan=p1).value
    v2 = compose(ts, fs, c1, c2, a, plan=p2).value
    assert v1 == pytest.approx(v2, rel=1e-10)


def test_hypothesis_violations():
    with pytest.raises(ConstraintError):
        check_hypotheses([1.0], 0.5, 2.5, 0.5)
    with pytest.raises(ConstraintError):
        check_hypotheses([1.5], 0.5, 0.5, 1.0)
    with pytest.raises(ConstraintError):
        radii_plan((1.0, 1.0), 0.3, 0.5, 0.5)
    with pytest.raises(DomainError):
        compose([1.0], [PowerKernel(0.5, 1)], 0.5, 0.5, 0.3)


def test_depth_guard():
    ts = (0.9, 0.95, 1.0, 1.05)
    with pytest.raises(UnsupportedConfiguration):
        compose_power(ts, [1] * 4, 0.5, 0.4, 0.2)


@settings(max_examples=15)
@given(
    st.floats(0.15, 0.45),
    st.floats(0.2, 1.2),
    st.floats(0.2, 1.2),
    st.floats(0.85, 1.0),
    st.floats(1.02, 1.2),
)
def test_swap_identity(a, c1, c2, t1, t2):
    if a * c2 * t2 * t2 >= 0.95 or a * c1 >= 0.95:
        return
    fs = [PowerKernel(a * t1, 1), PowerKernel(a * t2, 2)]
    lhs, rhs = swap_identity_sides((t1, t2), fs, c1, c2, a)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


@pytest.mark.parametrize("kind", ["pi", "step"])
def test_single_step_swap(kind):
    lhs, rhs = single_step_sides(kind, 0.4, 0.9, 1.1, 0.6, 0.7, 0.3, PowerKernel(0.3 * 1.1, 2))
    assert lhs == pytest.approx(rhs, rel=1e-9)


@pytest.mark.parametrize(
    "a,c1,c2,ts,ns",
    [
        (0.3, 0.5, 0.6, (0.9, 1.1), (2, 1)),
        (0.3, 1.8, 0.5, (0.95, 1.05), (1, 3)),  # c1 > 1 puts an atom in pi
        (0.2, 0.5, 2.5, (0.9, 1.1), (1, 1)),  # c2 t > 1 puts atoms in the steps
    ],
)
def test_measure_oracle_matches_contour(a, c1, c2, ts, ns):
    c = compose_power(ts, ns, c1, c2, a).value
    m = measure_compose_oracle(ts, ns, c1, c2, a).value
    assert m == pytest.approx(c, rel=1e-8)


def test_measure_oracle_large_powers_log_scale():
    ev = measure_compose_oracle((0.6, 1.0), (400, 400), 0.5, 0.5, 0.05)
    assert math.isfinite(ev.log_abs())
