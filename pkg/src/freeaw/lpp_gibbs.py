"""The two-layer Gibbs ensemble behind the stationary measure.

A configuration is a pair of increment vectors (m, n) in Z_{>=0}^N with partial
sums L1, L2. Its weight is

    a^{L1(N) + L2(N)} (c1 c2)^{max_j (L2(j) - L1(j-1))} c2^{L1(N) - L2(N)},

and the multipoint generating function additionally carries prod_j t_j^{2 m_j}.
Everything here is an enumeration oracle: brute force over truncated
increments, an exact transfer-matrix sum over the same truncated set, and the
explicit sum over Z^{N-1}. Truncation errors come with geometric majorants.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import ConstraintError, UnsupportedConfiguration


@dataclass(frozen=True)
class PathPair:
    m: tuple
    n: tuple

    def __init__(self, m: Sequence[int], n: Sequence[int]):
        m = tuple(int(x) for x in m)
        n = tuple(int(x) for x in n)
        if len(m) != len(n):
            raise ValueError(f"length mismatch: {len(m)} vs {len(n)}")
        if any(x < 0 for x in m + n):
            raise ValueError("increments must be nonnegative")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)

    @property
    def N(self) -> int:
        return len(self.m)

    @property
    def L1(self) -> tuple:
        return (0,) + tuple(itertools.accumulate(self.m))

    @property
    def L2(self) -> tuple:
        return (0,) + tuple(itertools.accumulate(self.n))

    def max_term(self) -> int:
        L1, L2 = self.L1, self.L2
        return max(L2[j] - L1[j - 1] for j in range(1, self.N + 1))


@dataclass(frozen=True)
class LppConfig:
    a: float
    c1: float
    c2: float
    N: int

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ConstraintError(f"a must lie in (0, 1), got {self.a}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ConstraintError("c1 and c2 must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ConstraintError(f"N must be a positive integer, got {self.N}")
        if not self.a * self.c1 < 1.0:
            raise ConstraintError(f"a*c1 = {self.a * self.c1:g} must be below 1")

    def with_c2(self, c2: float) -> "LppConfig":
        return LppConfig(self.a, self.c1, c2, self.N)

    def with_N(self, N: int) -> "LppConfig":
        return LppConfig(self.a, self.c1, self.c2, N)

    def check_stationary(self):
        if not self.a * self.c2 < 1.0:
            raise ConstraintError(f"a*c2 = {self.a * self.c2:g} must be below 1")


def _times(cfg: LppConfig, t) -> np.ndarray:
    if t is None:
        t = np.ones(cfg.N)
    t = np.asarray(t, dtype=float)
    if t.shape != (cfg.N,):
        raise ValueError(f"expected {cfg.N} times, got shape {t.shape}")
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    if np.any(cfg.a * t >= 1.0):
        raise ConstraintError("a*t_j must be below 1")
    if not cfg.a * cfg.c2 * np.max(t) ** 2 < 1.0:
        raise ConstraintError("a*c2*max(t)^2 must be below 1")
    return t


def weight(pp: PathPair, cfg: LppConfig) -> float:
    """The two-layer weight of a configuration."""
    if pp.N != cfg.N:
        raise ValueError(f"configuration has length {pp.N}, config expects {cfg.N}")
    l1, l2 = sum(pp.m), sum(pp.n)
    return cfg.a ** (l1 + l2) * (cfg.c1 * cfg.c2) ** pp.max_term() * cfg.c2 ** (l1 - l2)


def gen_weight(pp: PathPair, cfg: LppConfig, t) -> float:
    t = _times(cfg, t)
    return weight(pp, cfg) * math.prod(float(tj) ** (2 * mj) for tj, mj in zip(t, pp.m))


# ---------------------------------------------------------------------------
# Tail majorants


def _lambda_grid():
    return np.linspace(0.0, 1.0, 101)


def _increment_ratios(cfg: LppConfig, t: np.ndarray, lam: float):
    """Per-coordinate geometric ratios dominating the weight.

    The max term M satisfies 0 <= M <= L2(N) and M >= L2(N) - L1(N-1). For
    c1 c2 >= 1 use M <= L2(N); otherwise (c1 c2)^M <= (c1 c2)^{lam (L2(N) - L1(N-1))}.
    """
    a, c1, c2 = cfg.a, cfg.c1, cfg.c2
    q = c1 * c2
    if q >= 1.0:
        rn = np.full(cfg.N, a * c1)
        rm = a * c2 * t**2
    else:
        rn = np.full(cfg.N, a * q**lam / c2)
        rm = a * c2 * t**2 * q ** (-lam)
        rm[-1] = a * c2 * t[-1] ** 2
    return np.concatenate([rm, rn])


def _geometric_tail(r: np.ndarray, cap: int) -> float:
    if np.any(r >= 1.0):
        return float("inf")
    total = float(np.prod(1.0 / (1.0 - r)))
    return total * float(np.sum(r ** (cap + 1)))


def truncation_tail_bound(cfg: LppConfig, t=None, cap: int = 30) -> float:
    """Upper bound on the weight of configurations with some increment > cap."""
    t = _times(cfg, t)
    lams = [0.0] if cfg.c1 * cfg.c2 >= 1 else _lambda_grid()
    return min(_geometric_tail(_increment_ratios(cfg, t, lam), cap) for lam in lams)


def explicit_sum_tail_bound(cfg: LppConfig, t=None, k_cap: int = 80) -> float:
    """Upper bound on the neglected part of the explicit Z^{N-1} sum, prefactor included."""
    t = _times(cfg, t)
    if cfg.N == 1:
        return 0.0
    a, c1, c2 = cfg.a, cfg.c1, cfg.c2
    q = c1 * c2
    tt = t[:-1]
    best = float("inf")
    lams = [1.0] if q >= 1 else _lambda_grid()
    for lam in lams:
        if q >= 1:
            rp = np.full(tt.shape, a * c1)
            rneg = a * c2 * tt**2
        else:
            rp = a * q**lam / c2 * np.ones_like(tt)
            rneg = a * c2 * tt**2 * q ** (-lam)
        if np.any(rp >= 1) or np.any(rneg >= 1):
            continue
        full = 1 + rp / (1 - rp) + rneg / (1 - rneg)
        tails = rp ** (k_cap + 1) / (1 - rp) + rneg ** (k_cap + 1) / (1 - rneg)
        best = min(best, float(np.prod(full) * np.sum(tails)))
    return best * _explicit_prefactor(cfg, t)


# ---------------------------------------------------------------------------
# Truncated sums


def _check_guard(count: float, guard: float, what: str):
    if count > guard:
        raise UnsupportedConfiguration(f"{what}: {count:.3g} terms exceeds the guard {guard:.3g}")


def gen_fn_brute(cfg: LppConfig, t=None, cap: int = 10, tol: Tolerances = DEFAULTS) -> float:
    """Odometer over all increments <= cap with compensated summation."""
    t = _times(cfg, t)
    N = cfg.N
    _check_guard(float(cap + 1) ** (2 * N), tol.path_guard, "brute-force enumeration")
    a, q, c2 = cfg.a, cfg.c1 * cfg.c2, cfg.c2
    rm = [a * c2 * float(tj) ** 2 for tj in t]
    rn = a / c2
    terms = []
    for m in itertools.product(range(cap + 1), repeat=N):
        L1 = (0,) + tuple(itertools.accumulate(m))
        wm = math.prod(r**k for r, k in zip(rm, m))
        for n in itertools.product(range(cap + 1), repeat=N):
            L2 = tuple(itertools.accumulate(n))
            M = max(L2[j] - L1[j] for j in range(N))
            terms.append(wm * rn ** sum(n) * q**M)
    return math.fsum(terms)


def gen_fn_dp(cfg: LppConfig, t=None, cap: int = 30) -> float:
    """Exact sum over the same truncated set by a transfer matrix.

    The state is (X, M) with X = L2 - L1 so far and M the running max of
    L2(j) - L1(j-1). Step j adds n_j to X and updates M, then subtracts m_j.
    """
    t = _times(cfg, t)
    N = cfg.N
    a, q, c2 = cfg.a, cfg.c1 * cfg.c2, cfg.c2
    span = N * cap
    off = span
    nx, nm = 2 * span + 1, span + 1
    rn_pows = (a / c2) ** np.arange(cap + 1)

    # First n-step fixes M = X = n_1 >= 0.
    dp = np.zeros((nx, nm))
    for k in range(cap + 1):
        dp[off + k, k] = rn_pows[k]

    def m_step(dp, j):
        pows = (a * c2 * t[j] ** 2) ** np.arange(cap + 1)
        out = np.zeros_like(dp)
        for k in range(cap + 1):
            out[: nx - k] += pows[k] * dp[k:]
        return out

    def n_step(dp):
        out = np.zeros_like(dp)
        # cumulative mass over M below each level, per X row
        csum = np.cumsum(dp, axis=1)
        for k in range(cap + 1):
            w = rn_pows[k]
            for x in range(nx - k):
                row = dp[x]
                if not csum[x, -1]:
                    continue
                xn = x - off + k  # new difference
                if xn < 0:
                    out[x + k] += w * row
                    continue
                # M >= xn keeps M; M < xn collapses onto M = xn
                out[x + k, xn:] += w * row[xn:]
                if xn > 0:
                    out[x + k, xn] += w * csum[x, xn - 1]
        return out

    dp = m_step(dp, 0)
    for j in range(1, N):
        dp = n_step(dp)
        dp = m_step(dp, j)
    return float(np.sum(dp.sum(axis=0) * q ** np.arange(nm)))


@dataclass(frozen=True)
class TruncatedSum:
    value: float
    tail_bound: float
    method: str


def gen_fn_truncated(
    cfg: LppConfig, t=None, cap: int = 30, method: str = "auto", tol: Tolerances = DEFAULTS
) -> TruncatedSum:
    """Generating function summed over increments <= cap, with a tail majorant.

    ``method`` is "brute" (odometer, guarded), "dp" (transfer matrix) or
    "auto" (brute when under the guard and small, else dp).
    """
    t = _times(cfg, t)
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    if method == "auto":
        method = "brute" if float(cap + 1) ** (2 * cfg.N) <= 2e5 else "dp"
    if method == "brute":
        value = gen_fn_brute(cfg, t, cap, tol)
    elif method == "dp":
        value = gen_fn_dp(cfg, t, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TruncatedSum(float(value), float(truncation_tail_bound(cfg, t, cap)), method)


def partition_truncated(cfg: LppConfig, cap: int = 30, method: str = "auto", tol: Tolerances = DEFAULTS) -> TruncatedSum:
    return gen_fn_truncated(cfg, None, cap, method, tol)


def _explicit_prefactor(cfg: LppConfig, t: np.ndarray) -> float:
    a = cfg.a
    pre = 1.0 / ((1 - a * cfg.c1) * (1 - a * cfg.c2 * t[-1] ** 2))
    for tj in t[:-1]:
        pre /= 1 - (a * tj) ** 2
    return pre


def gen_fn_explicit_sum(cfg: LppConfig, t=None, k_cap: int = 80, tol: Tolerances = DEFAULTS) -> TruncatedSum:
    """Prefactor times the sum over k in Z^{N-1}, |k_j| <= k_cap, of
    (c1 c2)^{max(0, partial sums of k)} prod (a t_j)^{|k_j|} / (c2 t_j)^{k_j}.
    """
    t = _times(cfg, t)
    N = cfg.N
    pre = _explicit_prefactor(cfg, t)
    if N == 1:
        return TruncatedSum(float(pre), 0.0, "explicit")
    _check_guard(float(2 * k_cap + 1) ** (N - 1), tol.ksum_guard, "explicit sum")
    a, c2, q = cfg.a, cfg.c2, cfg.c1 * cfg.c2
    ks = np.arange(-k_cap, k_cap + 1)
    # log of the per-coordinate factor, one row per coordinate
    logs = [np.abs(ks) * math.log(a * tj) - ks * math.log(c2 * tj) for tj in t[:-1]]
    logq = math.log(q)

    # Iterate over the first coordinate; broadcast the rest.
    rest = N - 2
    if rest > 0:
        grids = np.meshgrid(*([ks] * rest), indexing="ij")
        rest_k = np.stack([g.ravel() for g in grids])  # (rest, K)
        rest_log = sum(logs[i + 1][rest_k[i] + k_cap] for i in range(rest))
        rest_csum = np.cumsum(rest_k, axis=0)
    partials = []
    for i0, k0 in enumerate(ks):
        base = logs[0][i0]
        if rest > 0:
            S = k0 + rest_csum
            Smax = np.maximum(0, np.maximum(k0, S.max(axis=0)))
            vals = np.exp(base + rest_log + Smax * logq)
            partials.append(math.fsum(np.sort(vals)))
        else:
            partials.append(math.exp(base + max(0, k0) * logq))
    total = math.fsum(partials)
    return TruncatedSum(float(pre * total), float(explicit_sum_tail_bound(cfg, t, k_cap)), "explicit")


def recurrence_sides(cfg_next: LppConfig, t, cap: int = 30, method: str = "auto") -> tuple:
    """Both sides of the N -> N+1 recurrence, with cfg_next.N = N + 1.

    Returns (lhs, rhs, tail) where tail bounds the combined truncation error.
    """
    t = _times(cfg_next, t)
    a, c1, c2 = cfg_next.a, cfg_next.c1, cfg_next.c2
    if abs(a - c2) < 1e-12:
        raise ConstraintError("the recurrence needs a != c2")
    N = cfg_next.N - 1
    if N < 1:
        raise ValueError("need N + 1 >= 2")
    cfg = cfg_next.with_N(N)
    lhs = gen_fn_truncated(cfg_next, t, cap, method)
    g = gen_fn_truncated(cfg, t[:-1], cap, method)
    ga = gen_fn_truncated(cfg.with_c2(a), t[:-1], cap, method)
    tn = t[-1]
    k1 = c2 / ((c2 - a) * (1 - a * c2 * tn**2))
    k2 = a * (c1 * c2 - 1) / ((c2 - a) * (1 - a * c1) * (1 - a * c2 * tn**2))
    rhs = k1 * g.value + k2 * ga.value
    tail = lhs.tail_bound + abs(k1) * g.tail_bound + abs(k2) * ga.tail_bound
    return float(lhs.value), float(rhs), float(tail)


def recurrence_check(cfg_next: LppConfig, t, cap: int = 30, method: str = "auto") -> float:
    """Relative residual of the recurrence N -> N+1."""
    lhs, rhs, _ = recurrence_sides(cfg_next, t, cap, method)
    return abs(lhs - rhs) / abs(lhs)


def gb_integral(cfg: LppConfig, t: float, tol: Tolerances = DEFAULTS) -> float:
    """(1 - c1 c2)/(2 pi) int_{-2}^{2} sqrt(4 - y^2) / (h_{at}^N h_{c1/t} h_{c2 t}) dy.

    Valid for c1, c2 < 1 and c1 < t < 1/c2. Evaluated with y = 2 cos(theta)
    and the trapezoid rule, doubling until the estimate settles.
    """
    a, c1, c2, N = cfg.a, cfg.c1, cfg.c2, cfg.N
    if not (c1 < 1 and c2 < 1 and c1 < t < 1 / c2 and a * t < 1):
        raise ConstraintError("needs c1, c2 < 1, c1 < t < 1/c2 and a t < 1")

    def g(theta):
        y = 2 * np.cos(theta)
        h = lambda al: 1 + al * al - al * y
        return 4 * np.sin(theta) ** 2 / (h(a * t) ** N * h(c1 / t) * h(c2 * t))

    m = tol.nodes_min
    est = np.pi / m * np.sum(g(np.pi * np.arange(1, m) / m))
    while m < tol.nodes_max:
        m *= 2
        new = np.pi / m * np.sum(g(np.pi * np.arange(1, m) / m))
        if abs(new - est) <= tol.rel_tol * abs(new):
            est = new
            break
        est = new
    return float((1 - c1 * c2) / (2 * np.pi) * est)


# ---------------------------------------------------------------------------
# The L1 marginal


@dataclass(frozen=True)
class MarginalTable:
    """Unnormalized weights of L1 increments m in {0..cap}^N, summed over n <= cap."""

    weights: np.ndarray
    cap: int
    tail_bound: float

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def unaccounted_mass(self) -> float:
        """Upper bound on the probability outside the truncated support."""
        return self.tail_bound / (self.total + self.tail_bound)


def l1_marginal(cfg: LppConfig, cap: int, t=None, tol: Tolerances = DEFAULTS, chunk: int = 256) -> MarginalTable:
    """Marginal weights of the L1 increments over the truncated support."""
    t = _times(cfg, t)
    N = cfg.N
    _check_guard(float(cap + 1) ** (2 * N), tol.path_guard, "marginal table")
    a, q, c2 = cfg.a, cfg.c1 * cfg.c2, cfg.c2
    grid = np.array(list(itertools.product(range(cap + 1), repeat=N)), dtype=np.int64).reshape(-1, N)
    L = np.cumsum(grid, axis=1)  # L(1..N)
    wn = (a / c2) ** L[:, -1]
    L1_prev = np.concatenate([np.zeros((len(grid), 1), dtype=np.int64), L[:, :-1]], axis=1)
    rm = np.array([a * c2 * tj**2 for tj in t])
    wm = np.prod(rm[None, :] ** grid, axis=1)
    out = np.empty(len(grid))
    for s in range(0, len(grid), chunk):
        A = L1_prev[s : s + chunk]  # (c, N)
        M = np.max(L[None, :, :] - A[:, None, :], axis=2)  # (c, n-configs)
        out[s : s + chunk] = wm[s : s + chunk] * ((q**M) @ wn)
    return MarginalTable(out.reshape((cap + 1,) * N), cap, truncation_tail_bound(cfg, t, cap))


def marginal_mean_L1(cfg: LppConfig, cap: int) -> float:
    """E[L1(N)] under the truncated ensemble."""
    tab = l1_marginal(cfg, cap)
    grid = np.indices(tab.weights.shape).sum(axis=0)
    return float(np.sum(grid * tab.weights) / tab.total)
