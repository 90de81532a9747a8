"""The functional L^{a,b,c} on analytic kernels.

Two evaluation routes:

* ``contour_eval``: trapezoid rule on a circle |w| = rho in the w-plane, where
  y = w + 1/w. Works for complex parameters; needs f analytic on an ellipse.
* ``representation_eval``: integral over [-2, 2] against an explicit density,
  plus point masses at p + 1/p for parameters p outside the unit disk. Covers
  real parameters and a real parameter with a conjugate pair.

Values can be astronomically large (h^{-n} for n in the thousands), so every
route returns an :class:`Evaluation` holding a mantissa and a natural-log
scale: value = mantissa * exp(log_scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import DomainError, QuadratureError, UnsupportedConfiguration
from .moment_functional import AwParams, ChebPoly, _as_params
from .poly_core import kernel_h

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class Evaluation:
    """A functional value stored as mantissa * exp(log_scale)."""

    mantissa: complex
    log_scale: float = 0.0
    method: str = ""
    abs_error: float = 0.0  # in mantissa units
    nodes: int = 0
    rho: Optional[float] = None

    @property
    def value(self) -> complex:
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale) if self.log_scale < 709 else complex(
            np.exp(np.log(complex(self.mantissa)) + self.log_scale)
        )

    @property
    def est_error(self) -> float:
        if self.abs_error == 0:
            return 0.0
        return float(np.exp(np.log(self.abs_error) + self.log_scale))

    @property
    def rel_error(self) -> float:
        m = abs(self.mantissa)
        return self.abs_error / m if m > 0 else float("inf")

    def log_abs(self) -> float:
        return math.log(abs(self.mantissa)) + self.log_scale

    def ratio(self, other: "Evaluation") -> complex:
        """self / other without forming either value."""
        return self.mantissa / other.mantissa * math.exp(self.log_scale - other.log_scale)

    def scaled_by(self, factor: complex) -> "Evaluation":
        return Evaluation(
            self.mantissa * factor, self.log_scale, self.method, self.abs_error * abs(factor), self.nodes, self.rho
        )


# ---------------------------------------------------------------------------
# Kernels


class AnalyticKernel:
    """A function of y analytic on the ellipse domain D_rho.

    Subclasses provide ``__call__``; ``log`` and ``derivative`` have generic
    fallbacks. ``saddle_weight`` in [1/2, 1) biases the automatic contour
    radius toward 1/R for kernels that grow steeply (large powers).
    """

    rho: float = 0.0
    saddle_weight: float = 0.5

    def __call__(self, y):
        raise NotImplementedError

    def log(self, y):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self(y), dtype=complex))

    def scaled(self, y, shift: float):
        """f(y) * exp(-shift)."""
        return np.exp(self.log(y) - shift)

    def derivative(self, y, step: float = DEFAULTS.fd_step):
        y = np.asarray(y, dtype=complex)
        h = step * np.maximum(1.0, np.abs(y))
        return (np.asarray(self(y + h)) - np.asarray(self(y - h))) / (2 * h)

    def derivative_scaled(self, y, shift: float, step: float = DEFAULTS.fd_step):
        y = np.asarray(y, dtype=complex)
        h = step * np.maximum(1.0, np.abs(y))
        return (self.scaled(y + h, shift) - self.scaled(y - h, shift)) / (2 * h)


class PowerKernel(AnalyticKernel):
    """y -> h_v(y)^{-n}, analytic on D_|v| for |v| < 1."""

    def __init__(self, v: complex, n: int = 1):
        v = complex(v)
        if n < 1 or int(n) != n:
            raise ValueError(f"power must be a positive integer, got {n}")
        if not abs(v) < 1:
            raise DomainError(f"power kernel needs |v| < 1, got |v| = {abs(v):g}")
        self.v = v
        self.n = int(n)
        self.rho = abs(v)
        self.saddle_weight = self.n / (self.n + 1.0)

    def __call__(self, y):
        return np.asarray(kernel_h(self.v, y)) ** (-self.n)

    def log(self, y):
        return -self.n * np.log(np.asarray(kernel_h(self.v, y), dtype=complex))

    def derivative(self, y, step: float = DEFAULTS.fd_step):
        return self.n * self.v * np.asarray(kernel_h(self.v, y)) ** (-self.n - 1)

    def derivative_scaled(self, y, shift: float, step: float = DEFAULTS.fd_step):
        h = np.log(np.asarray(kernel_h(self.v, y), dtype=complex))
        return np.exp(np.log(self.n * self.v) - (self.n + 1) * h - shift)

    def __repr__(self):
        return f"PowerKernel(v={self.v:g}, n={self.n})"


class ChebPolyKernel(AnalyticKernel):
    """A polynomial in the Chebyshev basis; entire, so rho = 0."""

    def __init__(self, poly):
        self.poly = poly if isinstance(poly, ChebPoly) else ChebPoly(poly)
        self.rho = 0.0

    def __call__(self, y):
        return self.poly(y)

    def __repr__(self):
        return f"ChebPolyKernel({list(self.poly.coeffs)})"


class GenericKernel(AnalyticKernel):
    """Caller-supplied evaluator with a declared analyticity radius."""

    def __init__(
        self,
        evaluator: Callable,
        rho: float,
        derivative: Optional[Callable] = None,
        log: Optional[Callable] = None,
        saddle_weight: float = 0.5,
    ):
        if not (0.0 <= rho < 1.0):
            raise DomainError(f"analyticity radius must lie in [0, 1), got {rho}")
        self._f = evaluator
        self._df = derivative
        self._log = log
        self.rho = float(rho)
        self.saddle_weight = saddle_weight

    def __call__(self, y):
        return self._f(y)

    def log(self, y):
        if self._log is not None:
            return self._log(y)
        return super().log(y)

    def derivative(self, y, step: float = DEFAULTS.fd_step):
        if self._df is not None:
            return self._df(y)
        return super().derivative(y, step)


class ProductKernel(AnalyticKernel):
    """Pointwise product of kernels."""

    def __init__(self, kernels: Sequence[AnalyticKernel]):
        self.kernels = tuple(kernels)
        if not self.kernels:
            raise ValueError("empty product")
        self.rho = max(k.rho for k in self.kernels)
        self.saddle_weight = max(k.saddle_weight for k in self.kernels)

    def __call__(self, y):
        out = np.asarray(self.kernels[0](y), dtype=complex)
        for k in self.kernels[1:]:
            out = out * np.asarray(k(y))
        return out

    def log(self, y):
        out = np.asarray(self.kernels[0].log(y), dtype=complex)
        for k in self.kernels[1:]:
            out = out + k.log(y)
        return out

    def derivative(self, y, step: float = DEFAULTS.fd_step):
        vals = [np.asarray(k(y), dtype=complex) for k in self.kernels]
        total = 0j
        for i, k in enumerate(self.kernels):
            term = np.asarray(k.derivative(y, step), dtype=complex)
            for j, v in enumerate(vals):
                if j != i:
                    term = term * v
            total = total + term
        return total

    def derivative_scaled(self, y, shift: float, step: float = DEFAULTS.fd_step):
        return self.derivative(y, step) * np.exp(-shift)


class ConstantKernel(ChebPolyKernel):
    def __init__(self, value: complex = 1.0):
        super().__init__([value])


def multiply_kernels(kernels: Sequence[AnalyticKernel]) -> AnalyticKernel:
    """Product with power kernels of equal v merged into one power."""
    powers: dict = {}
    others = []
    for k in kernels:
        if isinstance(k, PowerKernel):
            powers[k.v] = powers.get(k.v, 0) + k.n
        elif isinstance(k, ChebPolyKernel) and k.poly.coeffs == (1 + 0j,):
            continue
        else:
            others.append(k)
    merged = [PowerKernel(v, n) for v, n in powers.items()] + others
    if not merged:
        return ConstantKernel(1.0)
    if len(merged) == 1:
        return merged[0]
    return ProductKernel(merged)


def as_kernel(f, rho: float = 0.0) -> AnalyticKernel:
    if isinstance(f, AnalyticKernel):
        return f
    if isinstance(f, ChebPoly):
        return ChebPolyKernel(f)
    if callable(f):
        return GenericKernel(f, rho)
    raise TypeError(f"cannot interpret {f!r} as a kernel")


# ---------------------------------------------------------------------------
# Contour route


@dataclass(frozen=True)
class ContourSpec:
    rho: Optional[float] = None
    nodes_M: int = DEFAULTS.nodes_min
    adaptive: bool = True
    rel_tol: float = DEFAULTS.rel_tol
    nodes_max: int = DEFAULTS.nodes_max


def auto_rho(kernel_rho: float, R: float, saddle_weight: float = 0.5) -> float:
    """Radius between the kernel's singular ring and the parameters' one.

    With weight 1/2 this is the geometric midpoint sqrt(kernel_rho / R); larger
    weights move toward 1/R, where steep kernels have their saddle. Entire
    kernels use 0.9 / R.
    """
    hi = 1.0 / R
    lo = kernel_rho
    if lo >= hi:
        raise DomainError(f"empty contour band: kernel radius {lo:g} >= 1/R = {hi:g}")
    if lo == 0.0:
        return 0.9 * hi
    rho = lo ** (1.0 - saddle_weight) * hi**saddle_weight
    low_clip, high_clip = 1.01 * lo, 0.999 * hi
    if low_clip >= high_clip:
        return math.sqrt(lo * hi)
    return min(max(rho, low_clip), high_clip)


def _adaptive_periodic(sample: Callable, m0: int, m_max: int, rel_tol: float, what: str):
    """Trapezoid rule on a full period [0, 2pi) with node doubling.

    ``sample(theta)`` returns integrand values; the mean over nodes is the
    integral divided by 2pi. Returns (estimate, delta, nodes).
    """
    m = m0
    theta = 2 * np.pi * np.arange(m) / m
    vals = sample(theta)
    est = np.sum(vals) / m
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    while True:
        if 2 * m > m_max:
            raise QuadratureError(f"{what}: no convergence with {m} nodes", complex(est), float("nan"))
        mid = 2 * np.pi * (np.arange(m) + 0.5) / m
        new_vals = sample(mid)
        scale = max(scale, np.max(np.abs(new_vals)))
        new_est = 0.5 * (est + np.sum(new_vals) / m)
        delta = abs(new_est - est)
        m *= 2
        if delta <= rel_tol * abs(new_est) or delta <= 64 * _EPS * scale:
            return complex(new_est), float(delta), m
        est = new_est


def _adaptive_half_period(sample: Callable, m0: int, m_max: int, rel_tol: float, what: str):
    """Trapezoid rule on [0, pi] for an even periodic integrand vanishing at 0 and pi.

    Returns (integral over [0, pi], delta, nodes).
    """
    m = m0
    theta = np.pi * np.arange(1, m) / m
    vals = sample(theta)
    s = np.sum(vals)
    est = np.pi * s / m
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    while True:
        if 2 * m > m_max:
            raise QuadratureError(f"{what}: no convergence with {m} nodes", complex(est), float("nan"))
        mid = np.pi * (np.arange(m) + 0.5) / m
        new_vals = sample(mid)
        scale = max(scale, np.max(np.abs(new_vals)))
        s = s + np.sum(new_vals)
        m *= 2
        new_est = np.pi * s / m
        delta = abs(new_est - est)
        if delta <= rel_tol * abs(new_est) or delta <= 64 * _EPS * scale * np.pi:
            return complex(new_est), float(delta), m
        est = new_est


def contour_weight(params3, w):
    a, b, c = params3
    return (1 - w * w) * (1 - a * b * c * w) / ((1 - a * w) * (1 - b * w) * (1 - c * w))


def contour_eval(p, f, spec: Optional[ContourSpec] = None, tol: Tolerances = DEFAULTS) -> Evaluation:
    """(1/2 pi i) \\oint_{|w|=rho} f(w+1/w) (1-w^2)(1-abcw) / (w(1-aw)(1-bw)(1-cw)) dw."""
    p = _as_params(p)
    params3 = p.three()
    f = as_kernel(f)
    spec = spec or ContourSpec(rel_tol=tol.rel_tol, nodes_max=tol.nodes_max, nodes_M=tol.nodes_min)
    R = p.radius_R
    if spec.rho is None:
        rho = auto_rho(f.rho, R, f.saddle_weight)
    else:
        rho = float(spec.rho)
        if not (f.rho < rho < 1.0 / R):
            raise DomainError(f"rho = {rho:g} not in ({f.rho:g}, {1 / R:g})")

    theta0 = 2 * np.pi * np.arange(spec.nodes_M) / spec.nodes_M
    w0 = rho * np.exp(1j * theta0)
    shift = float(np.max(np.real(f.log(w0 + 1 / w0))))
    if not np.isfinite(shift):
        shift = 0.0

    def sample(theta):
        w = rho * np.exp(1j * theta)
        return f.scaled(w + 1 / w, shift) * contour_weight(params3, w)

    if not spec.adaptive:
        vals = sample(theta0)
        return Evaluation(complex(np.sum(vals) / spec.nodes_M), shift, "contour", float("nan"), spec.nodes_M, rho)
    est, delta, m = _adaptive_periodic(sample, spec.nodes_M, spec.nodes_max, spec.rel_tol, "contour_eval")
    return Evaluation(est, shift, "contour", delta, m, rho)


# ---------------------------------------------------------------------------
# Representation route


@dataclass(frozen=True)
class Atom:
    point: complex
    mass: complex
    kind: str = "simple"  # "simple", "double" (carries a derivative term), "pair" or "reciprocal"
    derivative_mass: complex = 0j
    # "pair" atoms: two nearly equal parameters. The double-atom formula at the
    # midpoint is used when it is more accurate than the two simple atoms.
    split: tuple = ()
    gap: float = 0.0
    base: complex = 0j


@dataclass(frozen=True)
class RepresentationPlan:
    case: str
    params: tuple
    density_coefficient: complex
    atoms: tuple = field(default_factory=tuple)


def _is_real(x: complex) -> bool:
    return x.imag == 0.0


def representation_plan(p, tol: Tolerances = DEFAULTS) -> RepresentationPlan:
    """Match the parameters to a representation case or raise UnsupportedConfiguration."""
    p = _as_params(p)
    a, b, c = p.three()
    ps = (a, b, c)

    nonreal = [x for x in ps if not _is_real(x)]
    if nonreal:
        if len(nonreal) != 2:
            raise UnsupportedConfiguration("needs real parameters or one real and a conjugate pair")
        x, y = nonreal
        if abs(x - y.conjugate()) > tol.coincidence * max(1.0, abs(x)):
            raise UnsupportedConfiguration("the complex parameters are not a conjugate pair")

    for i in range(3):
        for j in range(i + 1, 3):
            if abs(ps[i] * ps[j] - 1) < tol.coincidence:
                point = ps[i] + 1 / ps[i]
                return RepresentationPlan("reciprocal", ps, 0j, (Atom(point, 1.0 + 0j, "reciprocal"),))

    for x in ps:
        if abs(abs(x) - 1.0) < tol.unit_circle_guard:
            raise UnsupportedConfiguration(f"parameter {x:g} lies on the unit circle")

    dens = (1 - a * b) * (1 - a * c) * (1 - b * c) / (2 * np.pi)
    large = [i for i, x in enumerate(ps) if abs(x) > 1]
    atoms = []
    used = set()
    for i in large:
        if i in used:
            continue
        x = ps[i]
        twins = [
            j
            for j in large
            if j != i and j not in used and abs(ps[j] - x) < tol.degeneracy * max(1.0, abs(x), abs(ps[j]))
        ]
        if len(twins) >= 2:
            raise UnsupportedConfiguration("three coincident parameters outside the unit disk")
        if twins:
            j = twins[0]
            k = 3 - i - j
            z = ps[k]
            gap = abs(ps[j] - x)
            y = ps[j]
            x = 0.5 * (x + y)
            mass = ((x - z) ** 2 + (1 - x * z) ** 2) / (x - z) ** 2
            dmass = (x * x - 1) ** 2 * (1 - x * z) / (x * x * (x - z))
            if gap <= tol.coincidence * max(1.0, abs(x)):
                atoms.append(Atom(x + 1 / x, mass, "double", dmass))
            else:
                if not (_is_real(ps[i]) and _is_real(y)):
                    raise UnsupportedConfiguration("nearly coincident complex parameters outside the unit disk")
                split = tuple(
                    Atom(u + 1 / u, (u * u - 1) * (1 - o * z) / ((u - o) * (u - z)), "simple") for u, o in ((ps[i], y), (y, ps[i]))
                )
                atoms.append(Atom(x + 1 / x, mass, "pair", dmass, split, gap, x))
            used.update((i, j))
        else:
            q, r = [ps[k] for k in range(3) if k != i]
            mass = (x * x - 1) * (1 - q * r) / ((x - q) * (x - r))
            atoms.append(Atom(x + 1 / x, mass, "simple"))
            used.add(i)
    if any(a.kind in ("double", "pair") for a in atoms):
        case = "repeated"
    elif atoms:
        case = "distinct"
    else:
        case = "inside"
    return RepresentationPlan(case, ps, dens, tuple(atoms))


@dataclass(frozen=True)
class RepresentationParts:
    plan: RepresentationPlan
    shift: float
    density: complex
    density_error: float
    atom_terms: tuple
    nodes: int

    @property
    def total(self) -> Evaluation:
        m = self.density + sum(self.atom_terms)
        return Evaluation(m, self.shift, "representation", self.density_error, self.nodes, None)


def _density_sampler(params3, f: AnalyticKernel, shift: float):
    a, b, c = params3

    def sample(theta):
        y = 2 * np.cos(theta)
        s = np.sin(theta)
        den = kernel_h(a, y) * kernel_h(b, y) * kernel_h(c, y)
        return f.scaled(y, shift) * (4 * s * s) / den

    return sample


def representation_parts(p, f, tol: Tolerances = DEFAULTS, rel_tol: Optional[float] = None) -> RepresentationParts:
    p = _as_params(p)
    f = as_kernel(f)
    plan = representation_plan(p, tol)
    rel_tol = tol.rel_tol if rel_tol is None else rel_tol

    theta0 = np.pi * np.arange(1, tol.nodes_min) / tol.nodes_min
    logs = [np.real(f.log(2 * np.cos(theta0)))] if plan.case != "reciprocal" else []
    for atom in plan.atoms:
        logs.append(np.atleast_1d(np.real(f.log(np.asarray(atom.point)))))
    shift = float(np.max(np.concatenate(logs)))
    if not np.isfinite(shift):
        shift = 0.0

    if plan.case == "reciprocal":
        val = complex(np.asarray(f.scaled(np.asarray(plan.atoms[0].point), shift)))
        return RepresentationParts(plan, shift, 0j, 0.0, (val,), 0)

    integral, delta, m = _adaptive_half_period(
        _density_sampler(plan.params, f, shift), tol.nodes_min, tol.nodes_max, rel_tol, "representation_eval"
    )
    density = plan.density_coefficient * integral
    terms = []
    for atom in plan.atoms:
        terms.append(_atom_term(atom, f, shift, tol))
    return RepresentationParts(plan, shift, density, abs(plan.density_coefficient) * delta, tuple(terms), m)


def _atom_term(atom: Atom, f: AnalyticKernel, shift: float, tol: Tolerances) -> complex:
    pt = np.asarray(atom.point)
    if atom.kind == "pair":
        # Midpoint error ~ (kappa gap)^2, split error ~ eps / gap, where kappa is
        # the relative slope of f at the atom in the parameter variable.
        val = complex(np.asarray(f.scaled(pt, shift)))
        slope = complex(np.asarray(f.derivative_scaled(pt, shift, tol.fd_step)))
        m = atom.base
        kappa = max(1.0, abs(slope * (1 - 1 / (m * m))) / max(abs(val), 1e-300))
        crossover = (np.finfo(float).eps / kappa**2) ** (1.0 / 3.0)
        if atom.gap > crossover:
            return sum(_atom_term(a, f, shift, tol) for a in atom.split)
        return atom.mass * val + atom.derivative_mass * slope
    term = atom.mass * complex(np.asarray(f.scaled(pt, shift)))
    if atom.kind == "double":
        term += atom.derivative_mass * complex(np.asarray(f.derivative_scaled(pt, shift, tol.fd_step)))
    return term


def representation_eval(p, f, tol: Tolerances = DEFAULTS, rel_tol: Optional[float] = None) -> Evaluation:
    """Density integral over [-2, 2] plus point masses, when a case applies."""
    return representation_parts(p, f, tol, rel_tol).total


# ---------------------------------------------------------------------------
# Dispatch


def power_kernel_closed_form(p, v: complex) -> complex:
    """L^{a,b,c}[1/h_v] = (1-abcv)/((1-av)(1-bv)(1-cv))."""
    a, b, c = _as_params(p).three()
    v = complex(v)
    return (1 - a * b * c * v) / ((1 - a * v) * (1 - b * v) * (1 - c * v))


def evaluate(p, f, method: str = "auto", spec: Optional[ContourSpec] = None, tol: Tolerances = DEFAULTS) -> Evaluation:
    """Evaluate L^{a,b,c}[f] by representation when a case applies, else by contour."""
    if method not in ("auto", "contour", "representation"):
        raise ValueError(f"unknown method {method!r}")
    p = _as_params(p)
    f = as_kernel(f)
    if not f.rho < 1.0 / p.radius_R:
        raise DomainError(f"kernel needs analyticity beyond radius {f.rho:g}, which is not below 1/R = {1 / p.radius_R:g}")
    if method in ("auto", "representation"):
        try:
            return representation_eval(p, f, tol, rel_tol=None if spec is None else spec.rel_tol)
        except (UnsupportedConfiguration, QuadratureError):
            # parameters just outside the unit circle give a near-singular density
            if method == "representation":
                raise
    return contour_eval(p, f, spec, tol)


def power_kernel_eval(p, v: complex, n: int, method: str = "auto", tol: Tolerances = DEFAULTS) -> Evaluation:
    """L^{a,b,c}[h_v^{-n}] for |v| < 1/R."""
    p = _as_params(p)
    v = complex(v)
    if not abs(v) < 1.0 / p.radius_R:
        raise DomainError(f"|v| = {abs(v):g} must be below 1/R = {1 / p.radius_R:g}")
    return evaluate(p, PowerKernel(v, n), method=method, tol=tol)
