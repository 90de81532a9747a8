"""Randomized identity suites shared by the command line and the tests.

Each suite draws admissible parameters from a seeded generator and compares
two independent evaluations of the same quantity.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .aw_functional import (
    ContourSpec,
    PowerKernel,
    contour_eval,
    power_kernel_closed_form,
)
from .composition import compose_power, radii_plan, single_step_sides, swap_identity_sides
from .config import DEFAULTS, Tolerances
from .errors import FreeAwError
from .lpp_gibbs import LppConfig, gb_integral, gen_fn_explicit_sum, gen_fn_truncated, recurrence_sides
from .asymptotics import series_in_z, series_truncated
from .moment_functional import ChebPoly, moment_poly, reduction_residual


@dataclass
class CaseResult:
    label: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual < self.threshold)


@dataclass
class SuiteResult:
    name: str
    cases: List[CaseResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(c.passed for c in self.cases)

    @property
    def worst(self) -> float:
        return max((c.residual / c.threshold for c in self.cases), default=math.inf)


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(x), abs(y), 1e-300)


def random_params(rng: np.random.Generator, kind: str, scale: float = 2.5) -> tuple:
    """Three parameters, either real or one real plus a conjugate pair."""
    if kind == "real":
        return tuple(float(x) for x in rng.uniform(-scale, scale, 3))
    r, phi = rng.uniform(0.05, scale), rng.uniform(0.1, math.pi - 0.1)
    z = r * complex(math.cos(phi), math.sin(phi))
    return (float(rng.uniform(-scale, scale)), z, z.conjugate())


def random_chebpoly(rng: np.random.Generator, max_degree: int = 15) -> ChebPoly:
    n = int(rng.integers(0, max_degree + 1))
    return ChebPoly(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))


# ---------------------------------------------------------------------------


def suite_extension(trials: int = 200, seed: int = 0, threshold: float = 1e-9, tol: Tolerances = DEFAULTS) -> SuiteResult:
    """Contour functional against the moment functional on polynomials of degree <= 15."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("extension")
    for i in range(trials):
        p = random_params(rng, "real" if i % 2 == 0 else "conjugate")
        q = random_chebpoly(rng)
        exact = moment_poly(p, q)
        got = contour_eval(p, q, tol=tol).value
        res.cases.append(CaseResult(f"deg={len(q.coeffs) - 1} p={p}", _rel(got, exact), threshold))
    return res


def suite_closed_form(trials: int = 100, seed: int = 1, threshold: float = 1e-10, tol: Tolerances = DEFAULTS) -> SuiteResult:
    """Contour functional of 1/h_v against (1 - abcv)/((1-av)(1-bv)(1-cv))."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("closed-form")
    for i in range(trials):
        p = random_params(rng, "real" if i % 2 == 0 else "conjugate")
        R = max(1.0, *(abs(x) for x in p))
        v = complex(rng.uniform(-0.95, 0.95) / R, 0.0)
        if i % 3 == 2:
            phi = rng.uniform(0, 2 * math.pi)
            v = rng.uniform(0, 0.95 / R) * complex(math.cos(phi), math.sin(phi))
        got = contour_eval(p, PowerKernel(v, 1), tol=tol).value
        res.cases.append(CaseResult(f"p={p} v={v:.4g}", _rel(got, power_kernel_closed_form(p, v)), threshold))
    return res


def suite_reduction(trials: int = 50, seed: int = 2, threshold: float = 1e-10) -> SuiteResult:
    """L^{a,b,c}[h_c q] = (1-ac)(1-bc) L^{a,b}[q] on random polynomials."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("reduction")
    for i in range(trials):
        p = random_params(rng, "real" if i % 2 == 0 else "conjugate", scale=1.5)
        q = random_chebpoly(rng, 10)
        res.cases.append(CaseResult(f"p={p}", reduction_residual(p, q), threshold))
    return res


def _draw_lpp(rng: np.random.Generator, N: int, d: int, c_max: float = 1.6):
    """Admissible (a, c1, c2, t) with t nondecreasing and d distinct values."""
    for _ in range(1000):
        a = float(rng.uniform(0.1, 0.5))
        c1 = float(rng.uniform(0.2, c_max))
        c2 = float(rng.uniform(0.2, c_max))
        d_eff = min(d, N)
        levels = np.sort(rng.uniform(0.7, 1.3, d_eff))
        # each distinct level appears at least once, in order
        counts = np.ones(d_eff, dtype=int)
        for _k in range(N - d_eff):
            counts[rng.integers(0, d_eff)] += 1
        t = np.repeat(levels, counts)
        try:
            cfg = LppConfig(a, c1, c2, N)
            cfg.check_stationary()
            if not (a * c2 * t[-1] ** 2 < 0.9 and a * c1 < 0.9):
                continue
            radii_plan(tuple(levels), a, c1, c2)
        except FreeAwError:
            continue
        return cfg, t
    raise RuntimeError("could not draw admissible parameters")


def suite_oracle_triangle(trials: int = 20, max_N: int = 4, max_d: int = 3, seed: int = 3, cap: int = 30, k_cap: int = 80) -> SuiteResult:
    """Truncated path sum, explicit lattice sum and nested contour, pairwise."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("oracle-triangle")
    for i in range(trials):
        N = 1 + i % max_N
        d = 1 + (i // max_N) % max_d
        cfg, t = _draw_lpp(rng, N, d)
        g = gen_fn_truncated(cfg, t, cap)
        e = gen_fn_explicit_sum(cfg, t, k_cap)
        c = compose_power(tuple(t), [1] * N, cfg.c1, cfg.c2, cfg.a)
        cv = c.value.real
        label = f"N={N} d={len(set(t))} a={cfg.a:.3f} c1={cfg.c1:.3f} c2={cfg.c2:.3f} t={np.round(t, 3).tolist()}"
        for name, x, xt, y, yt in (
            ("trunc/explicit", g.value, g.tail_bound, e.value, e.tail_bound),
            ("trunc/compose", g.value, g.tail_bound, cv, c.abs_error * math.exp(c.log_scale)),
            ("explicit/compose", e.value, e.tail_bound, cv, c.abs_error * math.exp(c.log_scale)),
        ):
            scale = max(abs(x), abs(y))
            thr = max(1e-6, 3 * (xt + yt) / scale)
            res.cases.append(CaseResult(f"{name} {label}", abs(x - y) / scale, thr))
    return res


def suite_gb_integral(trials: int = 10, max_N: int = 4, seed: int = 4, cap: int = 30, threshold: float = 1e-6) -> SuiteResult:
    """Real-line integral form against the truncated path sum, for c1, c2 < 1."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("gb-integral")
    for i in range(trials):
        N = 1 + i % max_N
        a = float(rng.uniform(0.1, 0.5))
        c1, c2 = (float(x) for x in rng.uniform(0.1, 0.9, 2))
        t = float(rng.uniform(c1, 1 / c2))
        t = min(max(t, c1 * 1.05), 0.95 / c2)
        if a * c2 * t * t >= 1 or a * t >= 1:
            t = 1.0
        cfg = LppConfig(a, c1, c2, N)
        g = gen_fn_truncated(cfg, np.full(N, t), cap)
        gb = gb_integral(cfg, t)
        res.cases.append(CaseResult(f"N={N} a={a:.3f} c1={c1:.3f} c2={c2:.3f} t={t:.3f}", _rel(gb, g.value), threshold))
    return res


def suite_recurrence(points: int = 10, seed: int = 5, cap: int = 30, threshold: float = 1e-6) -> SuiteResult:
    """G_{N+1} = k1 G_N + k2 G_N(c2 -> a) for N = 1 -> 2 and 2 -> 3."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("recurrence")
    for _ in range(points):
        while True:
            a = float(rng.uniform(0.1, 0.5))
            c1, c2 = (float(x) for x in rng.uniform(0.2, 1.5, 2))
            if abs(a - c2) > 0.05 and a * c2 * 1.2**2 < 0.9:
                break
        for N in (2, 3):
            t = np.sort(rng.uniform(0.8, 1.2, N))
            cfg = LppConfig(a, c1, c2, N)
            lhs, rhs, _tail = recurrence_sides(cfg, t, cap)
            res.cases.append(CaseResult(f"N={N - 1}->{N} a={a:.3f} c1={c1:.3f} c2={c2:.3f}", _rel(lhs, rhs), threshold))
    return res


def suite_swap(trials: int = 10, d: int = 2, seed: int = 6, threshold: float = 1e-9) -> SuiteResult:
    """Parameter-swap identity for nested compositions, plus its one-step forms."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("swap")
    done = 0
    while done < trials:
        a = float(rng.uniform(0.1, 0.5))
        c1, c2 = (float(x) for x in rng.uniform(0.2, 1.5, 2))
        ts = tuple(np.sort(rng.uniform(0.7, 1.3, d)))
        ns = [int(x) for x in rng.integers(1, 4, d)]
        try:
            radii_plan(ts, a, c1, c2)
            radii_plan(ts, a, c1, a)
            fs = [PowerKernel(a * t, n) for t, n in zip(ts, ns)]
            lhs, rhs = swap_identity_sides(ts, fs, c1, c2, a)
        except FreeAwError:
            continue
        res.cases.append(CaseResult(f"d={d} a={a:.3f} c1={c1:.3f} c2={c2:.3f} ts={np.round(ts, 3).tolist()}", _rel(lhs, rhs), threshold))
        s, t = ts[0], ts[-1]
        f = PowerKernel(a * t, ns[-1])
        try:
            lhs, rhs = single_step_sides("pi", 0, s, t, c1, c2, a, PowerKernel(a * s, ns[0]))
            res.cases.append(CaseResult(f"pi-step s={s:.3f}", _rel(lhs, rhs), threshold))
            x = float(rng.uniform(-1.9, 1.9))
            lhs, rhs = single_step_sides("step", x, s, t, c1, c2, a, f)
            res.cases.append(CaseResult(f"P-step x={x:.3f} s={s:.3f} t={t:.3f}", _rel(lhs, rhs), threshold))
        except FreeAwError:
            pass
        done += 1
    return res


def suite_series(points: int = 10, seed: int = 7, n_max: int = 60, threshold: float = 1e-8) -> SuiteResult:
    """Truncated generating series in z against its closed form."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("series")
    while len(res.cases) < points:
        a = float(rng.uniform(0.1, 0.5))
        c1, c2 = (float(x) for x in rng.uniform(0.2, 1.5, 2))
        t = float(rng.uniform(0.8, 1.2))
        z = float(rng.uniform(0.0, 0.25)) * (1 - a * t) ** 2
        try:
            closed = series_in_z(z, t, a, c1, c2)
        except FreeAwError:
            continue
        trunc = series_truncated(z, t, a, c1, c2, n_max)
        res.cases.append(CaseResult(f"z={z:.4f} t={t:.3f} a={a:.3f} c1={c1:.3f} c2={c2:.3f}", _rel(trunc, closed), threshold))
    return res


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "extension": suite_extension,
    "closed-form": suite_closed_form,
    "reduction": suite_reduction,
    "swap": suite_swap,
    "recurrence": suite_recurrence,
    "oracle-triangle": suite_oracle_triangle,
    "theorem14": suite_oracle_triangle,  # name fixed by the CLI contract
    "gb-integral": suite_gb_integral,
    "series": suite_series,
}


def run_suite(name: str, **kw) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    res = SUITES[name](**kw)
    res.seconds = time.perf_counter() - t0
    return res
