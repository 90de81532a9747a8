"""Chebyshev U polynomials, the h-kernel, the Joukowsky map and its inverse.

All functions accept Python scalars or numpy arrays. Scalar input gives a
Python ``complex`` (or ``bool``), array input gives an array of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[complex, float, np.ndarray]


def as_complex(x: complex | float) -> complex:
    """Coerce to ``complex``, refusing NaN and infinities."""
    z = complex(x)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"non-finite complex value {x!r}")
    return z


def _finish(out: np.ndarray, scalar: bool):
    if scalar:
        return complex(out)
    return out


def chebyshev_u(n: int, y: ArrayLike) -> ArrayLike:
    """Monic Chebyshev polynomial of the second kind, U_n(y).

    Forward three-term recurrence y U_n = U_{n+1} + U_{n-1}, with the
    conventions U_{-1} = 0 and U_{-2} = -1.
    """
    if n < -2:
        raise ValueError(f"chebyshev_u needs n >= -2, got {n}")
    scalar = np.ndim(y) == 0
    y = np.asarray(y, dtype=complex)
    if n == -2:
        return _finish(-np.ones_like(y), scalar)
    if n == -1:
        return _finish(np.zeros_like(y), scalar)
    prev = np.zeros_like(y)
    cur = np.ones_like(y)
    for _ in range(n):
        prev, cur = cur, y * cur - prev
    return _finish(cur, scalar)


def chebyshev_u_table(nmax: int, y: ArrayLike) -> np.ndarray:
    """Rows U_0(y), ..., U_nmax(y); shape ``(nmax + 1,) + shape(y)``."""
    y = np.asarray(y, dtype=complex)
    out = np.empty((nmax + 1,) + y.shape, dtype=complex)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = y
    for k in range(2, nmax + 1):
        out[k] = y * out[k - 1] - out[k - 2]
    return out


def chebyshev_closed_form(n: int, w: ArrayLike) -> ArrayLike:
    """U_n(w + 1/w) from (w^{n+1} - w^{-n-1}) / (w - 1/w); test oracle only."""
    scalar = np.ndim(w) == 0
    w = np.asarray(w, dtype=complex)
    out = (w ** (n + 1) - w ** (-(n + 1))) / (w - 1.0 / w)
    return _finish(out, scalar)


def kernel_h(alpha: ArrayLike, y: ArrayLike) -> ArrayLike:
    """The h-kernel 1 + alpha^2 - alpha*y."""
    scalar = np.ndim(alpha) == 0 and np.ndim(y) == 0
    alpha = np.asarray(alpha, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return _finish(1.0 + alpha * alpha - alpha * y, scalar)


def joukowsky(w: ArrayLike) -> ArrayLike:
    """w + 1/w."""
    scalar = np.ndim(w) == 0
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("joukowsky is undefined at w = 0")
    return _finish(w + 1.0 / w, scalar)


def u_inverse(z: ArrayLike) -> ArrayLike:
    """Smaller-modulus root of r^2 - z r + 1 = 0.

    Both roots are formed and the one of larger modulus is inverted, which is
    accurate away from the cut. On the cut z = 2cos(theta), theta in [0, pi],
    both roots have modulus one and e^{i theta} is returned.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    disc = np.sqrt(z * z - 4.0)
    r1 = 0.5 * (z + disc)
    r2 = 0.5 * (z - disc)
    big = np.where(np.abs(r1) >= np.abs(r2), r1, r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = 1.0 / big
    on_cut = (z.imag == 0.0) & (np.abs(z.real) <= 2.0)
    if np.any(on_cut):
        theta = np.arccos(np.clip(z.real[on_cut] / 2.0, -1.0, 1.0))
        small = np.array(small, copy=True)
        small[on_cut] = np.exp(1j * theta)
    return _finish(small, scalar)


@dataclass(frozen=True)
class EllipseDomain:
    """Interior of the ellipse gamma_rho, the image of |w| = rho."""

    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")

    def contains(self, z: ArrayLike):
        return in_domain(z, self)


def in_domain(z: ArrayLike, d: EllipseDomain):
    """True iff z lies strictly inside gamma_rho, i.e. |u(z)| > rho."""
    r = np.abs(u_inverse(z))
    if np.ndim(r) == 0:
        return bool(r > d.rho)
    return r > d.rho
