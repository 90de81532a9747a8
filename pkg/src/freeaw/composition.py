"""Composition of the functionals pi^t and P_x^{s,t} over a time sequence.

    pi^t       = L^{c2 t, c1/t}
    P_x^{s,t}  = L^{c2 t, s u(x)/t, s/(t u(x))}

pi^{t_1..t_d}[f_1 (x) ... (x) f_d] is defined recursively by folding
f_{j-1}(x) P_x^{t_{j-1}, t_j}[...] from the last time inward. Equal
consecutive times collapse because P^{t,t} is a point evaluation.

Two evaluators are provided:

* ``compose``: the nested contour integral, evaluated as a chain of dense
  kernel-matrix products over circles |w_j| = rho_j.
* ``measure_compose_oracle``: iterated real integrals over [-2, 2] against
  explicit densities, plus point masses. It needs real parameters and stays
  accurate where the contour band is too thin for quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .aw_functional import (
    AnalyticKernel,
    ChebPolyKernel,
    Evaluation,
    PowerKernel,
    ProductKernel,
    as_kernel,
    evaluate,
    multiply_kernels,
)
from .config import DEFAULTS, Tolerances
from .errors import ConstraintError, DomainError, QuadratureError, UnsupportedConfiguration
from .moment_functional import ChebPoly
from .poly_core import kernel_h, u_inverse

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Single functionals


def pi_t(c1: float, c2: float, t: float, f, tol: Tolerances = DEFAULTS, method: str = "auto") -> Evaluation:
    """pi^t[f] = L^{c2 t, c1/t}[f]; a point evaluation when c1 c2 = 1."""
    f = as_kernel(f)
    if t <= 0:
        raise DomainError("t must be positive")
    return evaluate((c2 * t, c1 / t), f, method=method, tol=tol)


def p_step_params(x: complex, s: float, t: float, c2: float) -> tuple:
    u = complex(u_inverse(complex(x)))
    return (c2 * t, s * u / t, s / (t * u))


def p_step(x: complex, s: float, t: float, c2: float, f, tol: Tolerances = DEFAULTS, method: str = "auto") -> Evaluation:
    """P_x^{s,t}[f]; exactly f(x) when s = t."""
    if s > t:
        raise DomainError(f"p_step needs s <= t, got s={s}, t={t}")
    f = as_kernel(f)
    if s == t:
        return Evaluation(complex(np.asarray(f(complex(x)))), 0.0, "point", 0.0, 0, None)
    return evaluate(p_step_params(x, s, t, c2), f, method=method, tol=tol)


# ---------------------------------------------------------------------------
# Time sequences and radii


def collapse_times(ts: Sequence[float], fs: Sequence, rel: float = 1e-12):
    """Merge runs of equal times, multiplying their kernels."""
    ts = [float(t) for t in ts]
    if len(ts) != len(fs):
        raise ValueError("one kernel per time is required")
    if not ts:
        raise ValueError("empty time sequence")
    if any(t <= 0 for t in ts):
        raise DomainError("times must be positive")
    for t0, t1 in zip(ts, ts[1:]):
        if t1 < t0 * (1 - rel):
            raise DomainError("times must be nondecreasing")
    out_t, groups = [ts[0]], [[as_kernel(fs[0])]]
    for t, f in zip(ts[1:], fs[1:]):
        if abs(t - out_t[-1]) <= rel * out_t[-1]:
            groups[-1].append(as_kernel(f))
        else:
            out_t.append(t)
            groups.append([as_kernel(f)])
    return out_t, [multiply_kernels(g) for g in groups]


def check_hypotheses(ts: Sequence[float], a: float, c1: float, c2: float):
    td = max(ts)
    if not (0 < a < 1):
        raise ConstraintError("a must lie in (0, 1)")
    if not a * c1 < 1:
        raise ConstraintError("a*c1 must be below 1")
    if not a * td < 1:
        raise ConstraintError("a*t_d must be below 1")
    if not a * c2 * td**2 < 1:
        raise ConstraintError("a*c2*t_d^2 must be below 1")


@dataclass(frozen=True)
class RadiiPlan:
    times: tuple
    ladder: tuple  # a_1 > a_2 > ... > a_d > a
    radii: tuple  # rho_j = a_j t_j

    def violations(self, a: float, c1: float, c2: float) -> List[str]:
        ts, rs = self.times, self.radii
        bad = []
        for j, (t, r) in enumerate(zip(ts, rs)):
            if not r > a * t:
                bad.append(f"rho_{j + 1} <= a t_{j + 1}")
            if not c2 * t * r < 1:
                bad.append(f"c2 t_{j + 1} rho_{j + 1} >= 1")
            if not r < 1:
                bad.append(f"rho_{j + 1} >= 1")
            if j > 0 and not ts[j - 1] * r < t * rs[j - 1]:
                bad.append(f"t_{j} rho_{j + 1} >= t_{j + 1} rho_{j}")
        if not c1 * rs[0] / ts[0] < 1:
            bad.append("c1 rho_1 / t_1 >= 1")
        return bad


def radii_plan(ts: Sequence[float], a: float, c1: float, c2: float, shrink: float = 1.0) -> RadiiPlan:
    """Radii for the nested contour integral.

    The ladder a < a_d < ... < a_1 < bound = min(1/c1, 1/t_d, 1/(c2 t_d^2)) is
    geometric with d + 1 equal steps, so every singular ring sits the same
    ratio q = (bound/a)^{1/(d+1)} away from its neighboring circle. ``shrink``
    in (0, 1] lowers the top of the ladder to shrink * bound, which yields a
    second valid plan for invariance checks.
    """
    ts = tuple(float(t) for t in ts)
    if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
        raise ConstraintError("radii_plan needs strictly increasing times")
    check_hypotheses(ts, a, c1, c2)
    if not (0 < shrink <= 1):
        raise ValueError("shrink must lie in (0, 1]")
    d = len(ts)
    td = ts[-1]
    bound = min(1 / c1 if c1 > 0 else math.inf, 1 / td, 1 / (c2 * td**2) if c2 > 0 else math.inf)
    top = shrink * bound
    if not top > a:
        raise ConstraintError("no admissible radii: the band above a is empty")
    q = (top / a) ** (1.0 / (d + 1))
    ladder = tuple(a * q ** (d + 1 - j) for j in range(1, d + 1))
    radii = tuple(aj * t for aj, t in zip(ladder, ts))
    plan = RadiiPlan(ts, ladder, radii)
    bad = plan.violations(a, c1, c2)
    if bad:
        raise ConstraintError("radii plan infeasible: " + "; ".join(bad))
    return plan


# ---------------------------------------------------------------------------
# Nested contour evaluation


def _scaled_log(kernel: AnalyticKernel, y):
    return np.asarray(kernel.log(y), dtype=complex)


def _nested_once(ts, fs, c1, c2, plan: RadiiPlan, M: int, chunk: int = 512):
    """One trapezoid evaluation with M nodes per circle; returns (mantissa, log_scale, max_term)."""
    d = len(ts)
    theta = 2 * np.pi * np.arange(M) / M
    e = np.exp(1j * theta)
    ws = [r * e for r in plan.radii]
    ys = [w + 1 / w for w in ws]

    def level_factor(j):
        w, t = ws[j], ts[j]
        tprev = ts[j - 1] if j > 0 else 0.0
        rest = (1 - w * w) * (1 - c2 * w * tprev**2 / t) / (1 - c2 * w * t)
        logs = _scaled_log(fs[j], ys[j]) + np.log(rest)
        s = float(np.max(logs.real))
        return np.exp(logs - s), s

    vec, scale = level_factor(d - 1)
    biggest = float(np.max(np.abs(vec)))
    for j in range(d - 1, 0, -1):
        r = ts[j - 1] / ts[j]
        wl = ws[j]
        wk = ws[j - 1]
        inner = np.empty(M, dtype=complex)
        for s0 in range(0, M, chunk):
            wk_c = wk[s0 : s0 + chunk, None]
            K = 1.0 / ((1 - r * wl[None, :] * wk_c) * (1 - r * wl[None, :] / wk_c))
            inner[s0 : s0 + chunk] = K @ vec / M
        A, sA = level_factor(j - 1)
        vec = A * inner
        scale += sA
        m = float(np.max(np.abs(vec)))
        biggest = m
        if m > 0:
            vec = vec / m
            scale += math.log(m)
    w1 = ws[0]
    terms = vec / (1 - c1 * w1 / ts[0])
    return complex(np.sum(terms) / M), scale, max(biggest, float(np.max(np.abs(terms))))


def compose(
    ts: Sequence[float],
    fs: Sequence,
    c1: float,
    c2: float,
    a: float,
    tol: Tolerances = DEFAULTS,
    plan: Optional[RadiiPlan] = None,
    rel_tol: Optional[float] = None,
) -> Evaluation:
    """pi^{t_1,...,t_d}[f_1 (x) ... (x) f_d] for nondecreasing times.

    Kernels f_j must be analytic on D_{a t_j}. Repeated times are collapsed
    first; a single remaining time is a plain pi^t evaluation.
    """
    times, kernels = collapse_times(ts, fs)
    check_hypotheses(times, a, c1, c2)
    for t, f in zip(times, kernels):
        if f.rho > a * t * (1 + 1e-12):
            raise DomainError(f"kernel radius {f.rho:g} exceeds a t = {a * t:g}")
    d = len(times)
    if d == 1:
        return pi_t(c1, c2, times[0], kernels[0], tol)
    if d > tol.max_depth:
        raise UnsupportedConfiguration(
            f"nesting depth {d} exceeds the configured maximum {tol.max_depth}; the cost grows like M^d"
        )
    plan = plan or radii_plan(times, a, c1, c2)
    if tuple(plan.times) != tuple(times):
        raise ValueError("radii plan was built for different times")
    bad = plan.violations(a, c1, c2)
    if bad:
        raise ConstraintError("radii plan invalid: " + "; ".join(bad))
    rel_tol = tol.rel_tol if rel_tol is None else rel_tol

    M = tol.nodes_min
    prev_m, prev_s, _ = _nested_once(times, kernels, c1, c2, plan, M)
    while True:
        M *= 2
        if M > tol.nested_nodes_max:
            raise QuadratureError(
                f"nested contour did not converge with {M // 2} nodes per circle",
                prev_m * math.exp(prev_s),
                float("nan"),
            )
        m, s, big = _nested_once(times, kernels, c1, c2, plan, M)
        old = prev_m * math.exp(prev_s - s)
        delta = abs(m - old)
        if delta <= rel_tol * abs(m) or delta <= 64 * d * _EPS * big:
            return Evaluation(m, s, "nested-contour", delta, M, None)
        prev_m, prev_s = m, s


def compose_power(ts, ns, c1, c2, a, tol: Tolerances = DEFAULTS, **kw) -> Evaluation:
    """compose with f_j = h_{a t_j}^{-n_j}."""
    fs = [PowerKernel(a * t, n) for t, n in zip(ts, ns)]
    return compose(ts, fs, c1, c2, a, tol, **kw)


def swap_identity_sides(ts, fs, c1, c2, a, tol: Tolerances = DEFAULTS) -> tuple:
    """Both sides of the parameter-swap identity.

    Multiplying the last kernel by h_{c2 t_d}/h_{a t_d} equals the factor
    (1 - c1 c2)/(1 - a c1) times the composition with c2 replaced by a.
    """
    td = ts[-1]
    last = ProductKernel([as_kernel(fs[-1]), ChebPolyKernel(ChebPoly.h_kernel(c2 * td)), PowerKernel(a * td, 1)])
    lhs = compose(ts, list(fs[:-1]) + [last], c1, c2, a, tol)
    rhs = compose(ts, fs, c1, a, a, tol)
    factor = (1 - c1 * c2) / (1 - a * c1)
    return lhs.value, factor * rhs.value


def single_step_sides(kind: str, x: complex, s: float, t: float, c1: float, c2: float, a: float, f, tol=DEFAULTS):
    """Both sides of the one-step swap forms.

    kind "pi":   pi^{s;c2}[f h_{c2 s}/h_{a s}] vs (1-c1c2)/(1-a c1) pi^{s;a}[f]
    kind "step": P_x^{s,t;c2}[f h_{c2 t}/h_{a t}] vs h_{c2 s}(x)/h_{a s}(x) P_x^{s,t;a}[f]
    """
    f = as_kernel(f)
    if kind == "pi":
        g = ProductKernel([f, ChebPolyKernel(ChebPoly.h_kernel(c2 * s)), PowerKernel(a * s, 1)])
        lhs = pi_t(c1, c2, s, g, tol).value
        rhs = (1 - c1 * c2) / (1 - a * c1) * pi_t(c1, a, s, f, tol).value
        return lhs, rhs
    if kind == "step":
        g = ProductKernel([f, ChebPolyKernel(ChebPoly.h_kernel(c2 * t)), PowerKernel(a * t, 1)])
        lhs = p_step(x, s, t, c2, g, tol).value
        ratio = complex(kernel_h(c2 * s, x)) / complex(kernel_h(a * s, x))
        rhs = ratio * p_step(x, s, t, a, f, tol).value
        return lhs, rhs
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Measure oracle


class _Scaled:
    """Complex values stored as mantissa * exp(scale) with a shared real scale."""

    __slots__ = ("m", "s")

    def __init__(self, m, s: float):
        self.m = np.asarray(m, dtype=complex)
        self.s = float(s)

    @classmethod
    def from_log(cls, logv):
        logv = np.asarray(logv, dtype=complex)
        s = float(np.max(logv.real)) if logv.size else 0.0
        if not np.isfinite(s):
            s = 0.0
        return cls(np.exp(logv - s), s)

    def value(self):
        return self.m * math.exp(self.s)


def _add_scaled(parts):
    parts = [p for p in parts if p is not None and np.any(p.m != 0)]
    if not parts:
        return _Scaled(0j, 0.0)
    s = max(p.s for p in parts)
    total = sum(p.m * math.exp(p.s - s) for p in parts)
    return _Scaled(total, s)


def _near(x, y, tol):
    return abs(x - y) < tol * max(1.0, abs(y))


class _MeasureChain:
    def __init__(self, ts, kernels, c1, c2, M, tol: Tolerances):
        self.ts, self.fs, self.c1, self.c2, self.M, self.tol = ts, kernels, c1, c2, M, tol
        self.d = len(ts)
        theta = np.pi * np.arange(1, M) / M
        self.y = 2 * np.cos(theta)
        self.wq = (np.pi / M) * 4 * np.sin(theta) ** 2  # sqrt(4-y^2) dy in theta
        self.grid_cache = {}

    # density of P_{s^2,t^2}(x, dy) without sqrt(4-y^2)
    def _p_density(self, x, s, t, y):
        c2 = self.c2
        num = (1 + c2 * c2 * s * s - c2 * s * x) * t * t * (t * t - s * s)
        den = 2 * np.pi * (1 + c2 * c2 * t * t - c2 * t * y) * (
            (t * t - s * s) ** 2 + s * s * t * t * (x * x + y * y) - s * t * x * y * (s * s + t * t)
        )
        return num / den

    def _p_atoms(self, x: complex, s: float, t: float):
        c2, g = self.c2, self.tol.unit_circle_guard
        if _near(c2 * t, 1.0, g):
            raise UnsupportedConfiguration("c2 t = 1 is excluded")
        if _near(x, s / t + t / s, g) or _near(x, -(s / t + t / s), g):
            raise UnsupportedConfiguration("x = +-(s/t + t/s) is excluded")
        if _near(x, s / (t * t * c2) + t * t * c2 / s, g):
            raise UnsupportedConfiguration("x = s/(t^2 c2) + t^2 c2/s is excluded")
        atoms = []
        if c2 * t > 1:
            mass = (c2 * c2 * t * t - 1) * (t * t - s * s) / (c2 * c2 * t**4 + s * s - c2 * s * t * t * x)
            atoms.append((c2 * t + 1 / (c2 * t), mass))
        u = complex(u_inverse(complex(x)))
        if t * abs(u) < s:
            mass = (s * s - t * t * u * u) * (c2 * s * u - 1) / (s * (u * u - 1) * (s - c2 * t * t * u))
            atoms.append((s / (t * u) + t * u / s, mass))
        return atoms

    def _pi_atoms(self):
        c1, c2, t, g = self.c1, self.c2, self.ts[0], self.tol.unit_circle_guard
        if _near(c1, c2 * t * t, g) or _near(c2 * t, 1.0, g) or _near(c1, t, g):
            raise UnsupportedConfiguration("pi^t representation excludes c1 = c2 t^2, c2 t = 1, c1 = t")
        atoms = []
        pre = 1 / (c1 - t * t * c2)
        if c1 > t:
            atoms.append((c1 / t + t / c1, pre * (c1 * c1 - t * t) / c1))
        if c2 * t > 1:
            atoms.append((c2 * t + 1 / (c2 * t), -pre * (c2 * c2 * t * t - 1) / c2))
        return atoms

    def H_grid(self, j: int) -> _Scaled:
        """H_j on the shared grid y_k."""
        if j in self.grid_cache:
            return self.grid_cache[j]
        logf = np.asarray(self.fs[j].log(self.y), dtype=complex)
        if j == self.d - 1:
            out = _Scaled.from_log(logf)
        else:
            inner = self.integral_on_grid(j)
            lf = _Scaled.from_log(logf)
            out = _Scaled(lf.m * inner.m, lf.s + inner.s)
        self.grid_cache[j] = out
        return out

    def integral_on_grid(self, j: int) -> _Scaled:
        """x -> int H_{j+1}(y) P^{t_j, t_{j+1}}(x, dy) for x on the grid."""
        s, t = self.ts[j], self.ts[j + 1]
        Hn = self.H_grid(j + 1)
        x = self.y[:, None]
        K = self._p_density(x, s, t, self.y[None, :]) * self.wq[None, :]
        dens = _Scaled(K @ Hn.m, Hn.s)
        parts = [dens]
        # for x in [-2, 2] only the c2 t atom can appear; it does not depend on x's u-atom
        if self.c2 * t > 1:
            pt = self.c2 * t + 1 / (self.c2 * t)
            hv = self.H_point(j + 1, pt)
            mass = (self.c2**2 * t * t - 1) * (t * t - s * s) / (self.c2**2 * t**4 + s * s - self.c2 * s * t * t * self.y)
            parts.append(_Scaled(mass * hv.m, hv.s))
        for gx in self.y:
            if _near(gx, s / (t * t * self.c2) + t * t * self.c2 / s, self.tol.unit_circle_guard):
                raise UnsupportedConfiguration("grid node hits an excluded point")
        return _add_scaled(parts)

    def H_point(self, j: int, x: complex) -> _Scaled:
        """H_j at a single (possibly off-segment) point."""
        logf = complex(np.asarray(self.fs[j].log(np.asarray(x))))
        if j == self.d - 1:
            return _Scaled.from_log(np.array([logf]))
        s, t = self.ts[j], self.ts[j + 1]
        Hn = self.H_grid(j + 1)
        dens_w = self._p_density(x, s, t, self.y) * self.wq
        parts = [_Scaled(np.array([np.dot(dens_w, Hn.m)]), Hn.s)]
        for pt, mass in self._p_atoms(x, s, t):
            hv = self.H_point(j + 1, pt)
            parts.append(_Scaled(mass * hv.m, hv.s))
        inner = _add_scaled(parts)
        return _Scaled(np.exp(logf - logf.real) * inner.m, logf.real + inner.s)

    def total(self) -> _Scaled:
        c1, c2, t = self.c1, self.c2, self.ts[0]
        H1 = self.H_grid(0)
        dens_coef = (1 - c1 * c2) / (2 * np.pi)
        dens = dens_coef / ((1 + c1 * c1 / (t * t) - c1 * self.y / t) * (1 + c2 * c2 * t * t - c2 * self.y * t))
        parts = [_Scaled(np.array([np.dot(dens * self.wq, H1.m)]), H1.s)]
        for pt, mass in self._pi_atoms():
            hv = self.H_point(0, pt)
            parts.append(_Scaled(mass * hv.m, hv.s))
        return _add_scaled(parts)


def measure_compose_oracle(
    ts: Sequence[float],
    ns: Sequence[int],
    c1: float,
    c2: float,
    a: float,
    tol: Tolerances = DEFAULTS,
    kernels: Optional[Sequence[AnalyticKernel]] = None,
    rel_tol: Optional[float] = None,
) -> Evaluation:
    """pi^{t_1..t_d}[(x)_j h_{a t_j}^{-n_j}] as iterated integrals over [-2, 2] plus atoms.

    Densities and masses are the explicit signed measures of pi^t and
    P_x^{s,t}; atoms are followed wherever they land, including points off
    [-2, 2]. Values are carried on a log scale, so huge powers are fine.
    ``kernels`` may replace the power kernels. The node count doubles until
    the result settles to ``rel_tol``.
    """
    if kernels is None:
        kernels = [PowerKernel(a * t, n) for t, n in zip(ts, ns)]
    times, fs = collapse_times(ts, kernels)
    check_hypotheses(times, a, c1, c2)
    if any(isinstance(x, complex) for x in (c1, c2)):
        raise UnsupportedConfiguration("the measure oracle needs real parameters")
    rel_tol = tol.rel_tol if rel_tol is None else rel_tol
    M = tol.nodes_min
    prev = _MeasureChain(times, fs, c1, c2, M, tol).total()
    while True:
        M *= 2
        if M > tol.nested_nodes_max * 4:
            raise QuadratureError(
                f"measure oracle did not converge with {M // 2} nodes", complex(prev.value()[0]), float("nan")
            )
        cur = _MeasureChain(times, fs, c1, c2, M, tol).total()
        old = prev.m[0] * math.exp(prev.s - cur.s)
        delta = abs(cur.m[0] - old)
        if delta <= rel_tol * abs(cur.m[0]) or delta <= 1e3 * _EPS * max(1.0, abs(cur.m[0])):
            return Evaluation(complex(cur.m[0]), cur.s, "measure", float(delta), M, None)
        prev = cur
