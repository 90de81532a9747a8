"""The moment functional on polynomials, expressed in the Chebyshev U basis.

The functional is determined by its moments lambda_n = L[U_n], which satisfy a
four-term linear recurrence driven by the elementary symmetric functions of
the parameters. The recurrence is the evaluation path; the closed forms below
it serve as independent oracles in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import ConstraintError, DomainError
from .poly_core import as_complex, chebyshev_u_table


@dataclass(frozen=True)
class AwParams:
    """Up to four complex parameters (a, b, c, d); missing ones are zero."""

    params: tuple = field(default=(0j, 0j, 0j, 0j))

    def __init__(self, *params):
        if len(params) == 1 and isinstance(params[0], (tuple, list)):
            params = tuple(params[0])
        if len(params) > 4:
            raise ValueError("at most four parameters")
        vals = tuple(as_complex(p) for p in params) + (0j,) * (4 - len(params))
        object.__setattr__(self, "params", vals)
        s4 = vals[0] * vals[1] * vals[2] * vals[3]
        if abs(1.0 - s4) < DEFAULTS.coincidence:
            raise ConstraintError("the product abcd must differ from 1")

    @property
    def radius_R(self) -> float:
        return max(1.0, *(abs(p) for p in self.params))

    @property
    def nonzero(self) -> tuple:
        return tuple(p for p in self.params if p != 0)

    @property
    def num_nonzero(self) -> int:
        return len(self.nonzero)

    def three(self) -> tuple:
        """Parameters as (a, b, c) after checking that at most three are nonzero."""
        nz = self.nonzero
        if len(nz) > 3:
            raise ConstraintError("expected at most three nonzero parameters")
        return tuple(nz) + (0j,) * (3 - len(nz))

    def __iter__(self):
        return iter(self.params)

    def __repr__(self) -> str:
        shown = ", ".join(f"{p:g}" for p in self.nonzero)
        return f"AwParams({shown})"


def _as_params(p) -> AwParams:
    return p if isinstance(p, AwParams) else AwParams(*p)


def elementary_symmetric(p) -> tuple:
    """(s1, s2, s3, s4) for the four parameters."""
    a, b, c, d = _as_params(p).params
    s1 = a + b + c + d
    s2 = a * b + a * c + a * d + b * c + b * d + c * d
    s3 = a * b * c + a * b * d + a * c * d + b * c * d
    s4 = a * b * c * d
    return s1, s2, s3, s4


@dataclass(frozen=True)
class ChebPoly:
    """Polynomial sum_k coeffs[k] U_k(y); trailing zeros are trimmed."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable):
        cs = [as_complex(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0j]
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def basis(cls, n: int) -> "ChebPoly":
        return cls([0] * n + [1])

    @classmethod
    def h_kernel(cls, alpha: complex) -> "ChebPoly":
        """h_alpha(y) = (1 + alpha^2) U_0 - alpha U_1."""
        alpha = complex(alpha)
        return cls([1 + alpha * alpha, -alpha])

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, y):
        table = chebyshev_u_table(len(self.coeffs) - 1, y)
        c = np.asarray(self.coeffs).reshape((-1,) + (1,) * (table.ndim - 1))
        out = np.sum(c * table, axis=0)
        return complex(out) if np.ndim(y) == 0 else out

    def __add__(self, other: "ChebPoly") -> "ChebPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return ChebPoly([x + y for x, y in zip(a, b)])

    def scale(self, k: complex) -> "ChebPoly":
        return ChebPoly([k * c for c in self.coeffs])

    def mul_y(self) -> "ChebPoly":
        """Multiply by y using y U_k = U_{k+1} + U_{k-1}, with U_{-1} = 0."""
        q = self.coeffs
        out = [0j] * (len(q) + 1)
        for k, ck in enumerate(q):
            out[k + 1] += ck
            if k >= 1:
                out[k - 1] += ck
        return ChebPoly(out)

    def mul_h(self, alpha: complex) -> "ChebPoly":
        """Multiply by h_alpha(y) = 1 + alpha^2 - alpha y."""
        alpha = complex(alpha)
        return self.scale(1 + alpha * alpha) + self.mul_y().scale(-alpha)


def aw_poly_coeffs(p, n: int) -> ChebPoly:
    """W_n in the Chebyshev basis, with the irregular n = 1, 2 cases."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    s1, s2, s3, s4 = elementary_symmetric(_as_params(p))
    if n == 0:
        return ChebPoly([1])
    if n == 1:
        return ChebPoly([s3 - s1, 1 - s4])
    if n == 2:
        return ChebPoly([s2 - s4, -s1, 1])
    coeffs = [0j] * (n + 1)
    for k, s in enumerate((1, -s1, s2, -s3, s4)):
        if n - k >= 0:
            coeffs[n - k] += s
    return ChebPoly(coeffs)


def moment_table(p, nmax: int) -> np.ndarray:
    """lambda_0, ..., lambda_nmax from the four-term recurrence."""
    s1, s2, s3, s4 = elementary_symmetric(_as_params(p))
    lam = np.zeros(nmax + 3, dtype=complex)
    # lam[k + 2] holds lambda_k, so the recurrence can read lambda_{-2}, lambda_{-1}.
    lam[0], lam[1], lam[2] = -1.0, 0.0, 1.0
    if nmax >= 1:
        lam[3] = (s1 - s3) / (1 - s4)
    for n in range(2, nmax + 1):
        k = n + 2
        lam[k] = s1 * lam[k - 1] - s2 * lam[k - 2] + s3 * lam[k - 3] - s4 * lam[k - 4]
    return lam[2:]


def moment_u(p, n: int) -> complex:
    """lambda_n = L[U_n]."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return complex(moment_table(p, n)[n])


def moment_poly(p, q: ChebPoly) -> complex:
    """L[q] by linearity over the Chebyshev basis."""
    lam = moment_table(p, len(q.coeffs) - 1)
    return complex(np.sum(np.asarray(q.coeffs) * lam))


def moment_generating(p, z: complex) -> complex:
    """sum_n lambda_n z^n in closed form, valid for |z| < 1/R."""
    p = _as_params(p)
    z = as_complex(z)
    if abs(z) >= 1.0 / p.radius_R:
        raise DomainError(f"|z| = {abs(z):g} outside the disk of radius 1/R = {1 / p.radius_R:g}")
    s1, s2, s3, s4 = elementary_symmetric(p)
    prod = 1.0 + 0j
    for x in p.params:
        prod *= 1 - x * z
    return z * (s1 * s4 - s3) / ((1 - s4) * prod) + (1 + s4 * z * z) / prod


def reduce_parameter(p, q: ChebPoly) -> tuple:
    """Drop the third parameter c using L^{a,b,c}[h_c q] = (1-ac)(1-bc) L^{a,b}[q].

    Returns ``(AwParams(a, b), (1-ac)(1-bc) q)``, so that
    ``moment_poly(p, q.mul_h(c)) == moment_poly(*result)``.
    """
    p = _as_params(p)
    a, b, c = p.three()
    return AwParams(a, b), q.scale((1 - a * c) * (1 - b * c))


def reduction_residual(p, q: ChebPoly) -> float:
    """Relative mismatch between the two sides of the reduction identity."""
    p = _as_params(p)
    c = p.three()[2]
    lhs = moment_poly(p, q.mul_h(c))
    rhs = moment_poly(*reduce_parameter(p, q))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


# Closed forms. These are oracles: they divide by parameter differences and
# lose accuracy as parameters collide, so the recurrence is never replaced.


def closed_moment_a(a: complex, n: int) -> complex:
    return complex(a) ** n


def closed_moment_ab(a: complex, b: complex, n: int) -> complex:
    a, b = complex(a), complex(b)
    if a == b:
        return (n + 1) * a**n
    return (a ** (n + 1) - b ** (n + 1)) / (a - b)


def closed_moment_abc(a: complex, b: complex, c: complex, n: int) -> complex:
    a, b, c = complex(a), complex(b), complex(c)
    return (
        (1 - b * c) * a ** (n + 2) / ((a - b) * (a - c))
        + (1 - a * c) * b ** (n + 2) / ((b - a) * (b - c))
        + (1 - a * b) * c ** (n + 2) / ((c - a) * (c - b))
    )


def closed_moment_abcd(params: Sequence[complex], n: int) -> complex:
    """Four distinct parameters."""
    ps = [complex(x) for x in params]
    s4 = ps[0] * ps[1] * ps[2] * ps[3]
    total = 0j
    for i, x in enumerate(ps):
        others = [ps[j] for j in range(4) if j != i]
        num = (1 - others[0] * others[1]) * (1 - others[0] * others[2]) * (1 - others[1] * others[2])
        den = (x - others[0]) * (x - others[1]) * (x - others[2]) * (1 - s4)
        total += num / den * x ** (n + 3)
    return total


def closed_moment_abb(a: complex, b: complex, n: int) -> complex:
    a, b = complex(a), complex(b)
    d2 = (a - b) ** 2
    return (
        b ** (n + 1) * (n * (b - a) * (1 - a * b) + b + a * a * b - 2 * a) / d2
        + (1 - b * b) * a ** (n + 2) / d2
    )


def closed_moment_aaa(a: complex, n: int) -> complex:
    a = complex(a)
    return 0.5 * (n + 1) * a**n * ((1 - a * a) * n + 2)


def closed_moment_auto(a: complex, b: complex, c: complex, n: int, tol: float = DEFAULTS.degeneracy) -> complex:
    """Pick the closed form matching the coincidence pattern of (a, b, c)."""
    a, b, c = complex(a), complex(b), complex(c)

    def close(x, y):
        return abs(x - y) < tol * max(1.0, abs(x))

    if close(a, b) and close(b, c):
        return closed_moment_aaa(a, n)
    for x, y, z in ((a, b, c), (b, c, a), (a, c, b)):
        if close(x, y):
            return closed_moment_abb(z, x, n)
    return closed_moment_abc(a, b, c, n)


def partial_fraction_abc(a: complex, b: complex, c: complex, n: int) -> complex:
    """lambda_n(a,b,c) assembled from the one-parameter moments."""
    a, b, c = complex(a), complex(b), complex(c)
    return (
        a * a * (1 - b * c) / ((a - b) * (a - c)) * moment_u((a,), n)
        + b * b * (1 - a * c) / ((b - a) * (b - c)) * moment_u((b,), n)
        + c * c * (1 - a * b) / ((c - a) * (c - b)) * moment_u((c,), n)
    )


def derivative_form_abb(a: complex, b: complex, n: int, db_moment_b: complex) -> complex:
    """lambda_n(a,b,b) from L^a, L^b and d/db L^b, the latter supplied by the caller."""
    a, b = complex(a), complex(b)
    d2 = (a - b) ** 2
    return (
        a * a * (1 - b * b) / d2 * moment_u((a,), n)
        + b * (b - a - a * (1 - a * b)) / d2 * moment_u((b,), n)
        + b * b * (1 - a * b) / (b - a) * db_moment_b
    )
