"""Large-n behaviour of L[h_v^{-n}], the generating function in z, the phase
diagram of L1(N)/N and the Poisson limits.

Exact finite-N quantities come from the representation route of
``aw_functional`` (density on [-2, 2] plus atoms) with log-scaled values, so
N in the thousands is routine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .aw_functional import Evaluation, power_kernel_eval
from .composition import measure_compose_oracle
from .config import DEFAULTS, Tolerances
from .errors import ConstraintError, DomainError, UnsupportedConfiguration
from .moment_functional import _as_params
from .poly_core import u_inverse


# ---------------------------------------------------------------------------
# B(z) and H(z)


def b_root(z: complex, v: float) -> complex:
    """Smaller root of B + 1/B = (1 - z)/v + v, with B(0) = v.

    Defined for |z| < (1 - v)^2.
    """
    if not (0 < v < 1):
        raise DomainError(f"v must lie in (0, 1), got {v}")
    z = complex(z)
    if not abs(z) < (1 - v) ** 2:
        raise DomainError(f"|z| = {abs(z):g} must be below (1 - v)^2 = {(1 - v) ** 2:g}")
    return complex(u_inverse((1 - z) / v + v))


def h_pole(p: float, v: float) -> float:
    """Pole of H at z_p = (p - v)(1 - v p)/p for a real parameter p > 1."""
    return (p - v) * (1 - v * p) / p


def h_generating(z: complex, p, v: float) -> complex:
    """H(z) = sum_{n>=1} z^{n-1} L[h_v^{-n}] = (B/v)(1 - abcB)/((1-aB)(1-bB)(1-cB))."""
    p = _as_params(p)
    a, b, c = p.three()
    if not abs(v) < 1.0 / p.radius_R:
        raise DomainError("need |v| < 1/R")
    z = complex(z)
    for x in (a, b, c):
        if abs(x) > 1 and abs(x.imag) == 0:
            zp = h_pole(x.real, v)
            if abs(z) >= abs(zp):
                raise DomainError(f"|z| = {abs(z):g} reaches the pole z_p = {zp:g} of parameter {x.real:g}")
    B = b_root(z, v)
    den = (1 - a * B) * (1 - b * B) * (1 - c * B)
    if abs(den) < 1e-14:
        raise DomainError("z sits on a pole of H")
    return (B / v) * (1 - a * b * c * B) / den


def series_in_z(z: float, t: float, a: float, c1: float, c2: float) -> float:
    """sum_{N>=1} z^{N-1} G_N(t) in closed form, B / (a (t - c1 B)(1 - c2 t B))."""
    if not (0 < a and a * t < 1 and a * c1 < 1 and a * c2 * t * t < 1):
        raise ConstraintError("needs a t, a c1, a c2 t^2 < 1")
    if not (0 <= z < (1 - a * t) ** 2):
        raise DomainError(f"z must lie in [0, (1 - a t)^2) = [0, {(1 - a * t) ** 2:g})")
    B = b_root(z, a * t).real
    if not (B * c1 < t and B * c2 * t < 1):
        raise DomainError("z too large: needs B c1 < t and B c2 t < 1")
    return B / (a * (t - c1 * B) * (1 - c2 * t * B))


def series_truncated(z: float, t: float, a: float, c1: float, c2: float, n_max: int = 60, tol: Tolerances = DEFAULTS) -> float:
    """sum_{N=1}^{n_max} z^{N-1} G_N(t), with G_N from the functional."""
    total = math.fsum(
        (z ** (N - 1) * power_kernel_eval((c1 / t, c2 * t), a * t, N, tol=tol).value).real for N in range(1, n_max + 1)
    )
    return total


# ---------------------------------------------------------------------------
# Asymptotic cases


class CaseId(enum.Enum):
    AllInsideDisk = "all_inside_disk"
    OneLarge = "one_large"
    DoubleLarge = "double_large"
    UnitParam = "unit_param"


@dataclass(frozen=True)
class AsymptoticCase:
    case_id: CaseId
    constant: float
    rate: str
    params: tuple  # reordered so the distinguished parameter comes first


def _real_or_conj(ps, tol=1e-12) -> bool:
    nonreal = [x for x in ps if x.imag != 0]
    if not nonreal:
        return True
    return len(nonreal) == 2 and abs(nonreal[0] - nonreal[1].conjugate()) <= tol * max(1, abs(nonreal[0]))


def classify_asymptotic(p, tol: float = 1e-12) -> AsymptoticCase:
    """Match parameters to one of the implemented large-n regimes."""
    ps = list(_as_params(p).three())
    mods = [abs(x) for x in ps]
    if all(m < 1 for m in mods):
        if not _real_or_conj(ps):
            raise UnsupportedConfiguration("all-inside case needs real parameters or a conjugate pair")
        a, b, c = ps
        C = (1 - a * b) * (1 - a * c) * (1 - b * c) / (2 * math.sqrt(math.pi) * ((1 - a) * (1 - b) * (1 - c)) ** 2)
        return AsymptoticCase(CaseId.AllInsideDisk, C.real, "n^{-3/2} v^{-3/2} (1-v)^{-(2n-3)}", tuple(ps))
    ordered = sorted(ps, key=lambda x: -abs(x))
    a = ordered[0]
    if abs(a.imag) > 0:
        raise UnsupportedConfiguration("the largest parameter must be real")
    a = a.real
    b, c = ordered[1], ordered[2]
    if abs(a - 1) <= tol:
        if not (abs(b) < 1 and abs(c) < 1 and _real_or_conj([b, c])):
            raise UnsupportedConfiguration("unit case needs |b|, |c| < 1, real or conjugate")
        C = (1 - b * c) / (math.sqrt(math.pi) * (1 - b) * (1 - c))
        return AsymptoticCase(CaseId.UnitParam, C.real, "n^{-1/2} v^{-1/2} (1-v)^{-(2n-1)}", (1.0, b, c))
    if a < 1:
        raise UnsupportedConfiguration("no implemented case")
    if abs(b - a) <= tol * a:
        if abs(c.imag) > 0 or not (0 <= c.real < a):
            raise UnsupportedConfiguration("double case needs real 0 <= c < a")
        c = c.real
        if abs(c - a) <= tol * a:
            raise UnsupportedConfiguration("three equal large parameters are not implemented")
        C = (a * a - 1) ** 2 * (1 - a * c) / (a * a * (a - c))
        return AsymptoticCase(CaseId.DoubleLarge, C, "v n (a/((a-v)(1-av)))^{n+1}", (a, a, c))
    ok = (abs(b) <= 1 and abs(c) <= 1) or (abs(c) < 1 and b.imag == 0 and 1 <= b.real < a)
    if not ok:
        raise UnsupportedConfiguration("one-large case needs |b|, |c| <= 1 or |c| < 1 <= b < a")
    C = (a * a - 1) * (1 - b * c) / ((a - b) * (a - c))
    return AsymptoticCase(CaseId.OneLarge, C.real, "(a/((a-v)(1-av)))^n", (a, b, c))


def asymptotic_log(case: AsymptoticCase, v: float, n: int) -> float:
    """Natural log of the leading-order prediction."""
    C = case.constant
    if C <= 0:
        raise ConstraintError("prediction constant must be positive for a log value")
    cid = case.case_id
    a = case.params[0].real if isinstance(case.params[0], complex) else case.params[0]
    if cid is CaseId.AllInsideDisk:
        return math.log(C) - 1.5 * math.log(n) - 1.5 * math.log(v) - (2 * n - 3) * math.log(1 - v)
    if cid is CaseId.UnitParam:
        return math.log(C) - 0.5 * math.log(n) - 0.5 * math.log(v) - (2 * n - 1) * math.log(1 - v)
    base = math.log(a / ((a - v) * (1 - a * v)))
    if cid is CaseId.OneLarge:
        return math.log(C) + n * base
    return math.log(C) + math.log(v) + math.log(n) + (n + 1) * base


def asymptotic_value(case: AsymptoticCase, p, v: float, n: int) -> float:
    """Leading-order prediction for L^{a,b,c}[h_v^{-n}]; checks that p matches the case."""
    found = classify_asymptotic(p)
    if found.case_id is not case.case_id:
        raise ConstraintError(f"parameters fall in case {found.case_id.name}, not {case.case_id.name}")
    return math.exp(asymptotic_log(case, v, n))


def asymptotic_ratio(p, v: float, n: int, tol: Tolerances = DEFAULTS) -> float:
    """exact / prediction, computed on the log scale."""
    case = classify_asymptotic(p)
    exact = power_kernel_eval(p, v, n, tol=tol)
    return math.exp(exact.log_abs() - asymptotic_log(case, v, n))


# ---------------------------------------------------------------------------
# Phase diagram


class Region(enum.Enum):
    MaxCurrent = "MaxCurrent"
    LowDensity = "LowDensity"
    HighDensity = "HighDensity"
    Coexistence = "Coexistence"


@dataclass(frozen=True)
class PhaseResult:
    region: Region
    density: Optional[float]
    low: Optional[float] = None
    high: Optional[float] = None
    boundary: bool = False
    tie: bool = False


def phase_limit(a: float, c1: float, c2: float, tie_tol: float = DEFAULTS.tie_tol) -> PhaseResult:
    """Limit of L1(N)/N by region of the (c1, c2) diagram."""
    if not (0 < a < 1):
        raise ConstraintError("a must lie in (0, 1)")
    if not (0 < c1 < 1 / a and 0 < c2 < 1 / a):
        raise ConstraintError("c1 and c2 must lie in (0, 1/a)")
    low = a / (c1 - a) if c1 > a else None
    high = a * c2 / (1 - a * c2)
    near1 = abs(c1 - 1) <= tie_tol or abs(c2 - 1) <= tie_tol
    if abs(c1 - c2) <= tie_tol and c1 > 1 + tie_tol:
        c = 0.5 * (c1 + c2)
        return PhaseResult(
            Region.Coexistence, None, a / (c - a), a * c / (1 - a * c), False, c1 != c2
        )
    if c1 <= 1 + tie_tol and c2 <= 1 + tie_tol:
        return PhaseResult(Region.MaxCurrent, a / (1 - a), boundary=near1)
    if c1 > c2:
        return PhaseResult(Region.LowDensity, low)
    return PhaseResult(Region.HighDensity, high)


def mixture_transform(a: float, c: float, s: float) -> float:
    """E exp(2 s X) for X uniform between the low and high densities on the coexistence line."""
    if s == 0:
        return 1.0
    pre = (c - a) * (1 - a * c) / (a * (c * c - 1))
    return pre * (math.exp(2 * a * c * s / (1 - a * c)) - math.exp(2 * a * s / (c - a))) / (2 * s)


def phase_transform_limit(a: float, c1: float, c2: float, s: float) -> float:
    res = phase_limit(a, c1, c2)
    if res.region is Region.Coexistence:
        return mixture_transform(a, 0.5 * (c1 + c2), s)
    return math.exp(2 * s * res.density)


def _g_eval(N: int, t: float, a: float, c1: float, c2: float, tol: Tolerances) -> Evaluation:
    return power_kernel_eval((c1 / t, c2 * t), a * t, N, tol=tol)


def laplace_transform(N: int, s: float, a: float, c1: float, c2: float, tol: Tolerances = DEFAULTS) -> float:
    """phi_N(s) = E exp(2 s L1(N)/N) = G_N(e^{s/N}) / G_N(1)."""
    t = math.exp(s / N)
    if not (a * t < 1 and a * c1 < 1 and a * c2 * t * t < 1):
        raise ConstraintError("shifted parameters leave the admissible range")
    num = _g_eval(N, t, a, c1, c2, tol)
    den = _g_eval(N, 1.0, a, c1, c2, tol)
    return float(num.ratio(den).real)


def log_laplace(N: int, s: float, a: float, c1: float, c2: float, tol: Tolerances = DEFAULTS) -> float:
    t = math.exp(s / N)
    if not (a * t < 1 and a * c1 < 1 and a * c2 * t * t < 1):
        raise ConstraintError("shifted parameters leave the admissible range")
    num = _g_eval(N, t, a, c1, c2, tol)
    den = _g_eval(N, 1.0, a, c1, c2, tol)
    return num.log_abs() - den.log_abs()


def mean_density(N: int, a: float, c1: float, c2: float, h: float = DEFAULTS.density_step, tol: Tolerances = DEFAULTS) -> float:
    """E[L1(N)]/N from a central difference of log phi_N at s = 0."""
    t_plus = math.exp(h / N)
    up = _g_eval(N, t_plus, a, c1, c2, tol).log_abs()
    down = _g_eval(N, 1 / t_plus, a, c1, c2, tol).log_abs()
    return 0.5 * (up - down) / (2 * h)


# ---------------------------------------------------------------------------
# Poisson limits


@dataclass(frozen=True)
class PoissonResult:
    ratio: float
    target: float
    a: float
    c1: float
    c2: float
    blocks: tuple

    @property
    def rel_dev(self) -> float:
        return abs(self.ratio - self.target) / self.target


def poisson_params(scaling: str, lam: float, N: int, theta: float = 1.0, c_fixed: float = 0.5) -> tuple:
    """(a, c1, c2) for the two N-dependent scalings."""
    s = scaling.lower()
    if s == "a":
        return math.sqrt(lam / (N + 1)), math.sqrt(N / lam), c_fixed
    if s == "b":
        if theta <= 0:
            raise ConstraintError("theta must be positive")
        return N ** (-theta - 1), c_fixed, lam * N**theta
    raise ValueError(f"unknown scaling {scaling!r}")


def poisson_check(
    scaling: str,
    lam: float,
    N: int,
    t: Sequence[float],
    x: Optional[Sequence[float]] = None,
    theta: float = 1.0,
    c_fixed: float = 0.5,
    tol: Tolerances = DEFAULTS,
) -> PoissonResult:
    """Finite-N multipoint generating ratio G_N(t^n)/Z_N against exp(lam sum (x_j - x_{j-1})(t_j^2 - 1)).

    The blocks are n_j = floor(x_j N) - floor(x_{j-1} N) with x_d = 1.
    """
    t = [float(v) for v in t]
    d = len(t)
    if d == 0 or d > tol.max_depth:
        raise UnsupportedConfiguration(f"need 1 <= d <= {tol.max_depth}")
    if x is None:
        x = [(j + 1) / d for j in range(d)]
    x = [float(v) for v in x]
    if len(x) != d or abs(x[-1] - 1) > 1e-12 or any(x1 <= x0 for x0, x1 in zip([0.0] + x, x)):
        raise ConstraintError("x must be increasing in (0, 1] and end at 1")
    if any(t1 <= t0 for t0, t1 in zip(t, t[1:])):
        raise ConstraintError("t must be strictly increasing")
    a, c1, c2 = poisson_params(scaling, lam, N, theta, c_fixed)
    edges = [0] + [math.floor(xj * N + 1e-9) for xj in x]
    ns = [e1 - e0 for e0, e1 in zip(edges, edges[1:])]
    if any(n < 1 for n in ns):
        raise ConstraintError("N too small for the x grid")
    Z = power_kernel_eval((c1, c2), a, N, tol=tol)
    if d == 1:
        G = _g_eval(N, t[0], a, c1, c2, tol)
    else:
        G = measure_compose_oracle(t, ns, c1, c2, a, tol)
    ratio = float(G.ratio(Z).real)
    xs = [0.0] + x
    target = math.exp(lam * sum((xs[j + 1] - xs[j]) * (t[j] ** 2 - 1) for j in range(d)))
    return PoissonResult(ratio, target, a, c1, c2, tuple(ns))
