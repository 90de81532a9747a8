"""Forward simulation of geometric LPP on the strip of width N + 1.

Random streams come from numpy's Philox counter-based generator. Batched
routines split the work into fixed-size chunks, and each chunk draws from its
own child of ``SeedSequence(seed)``, so results depend only on the seed and
never on the number of worker threads (``FREEAW_THREADS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import ConstraintError
from .lpp_gibbs import LppConfig, MarginalTable, l1_marginal

CHUNK = 8192


def make_rng(seed: int) -> np.random.Generator:
    """Philox stream for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FREEAW_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class StripRow:
    """values[j] = G(n + j, n) - G(n, n) for j = 0..N."""

    level: int
    values: tuple

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if not self.values or self.values[0] != 0:
            raise ValueError("values[0] must be 0")

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def increments(self) -> tuple:
        v = self.values
        return tuple(v[j] - v[j - 1] for j in range(1, len(v)))

    @classmethod
    def zero(cls, N: int) -> "StripRow":
        return cls(0, (0,) * (N + 1))

    @classmethod
    def from_increments(cls, m, level: int = 0) -> "StripRow":
        return cls(level, (0,) + tuple(int(x) for x in np.cumsum(m)))


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p >= 1):
        raise ConstraintError("geometric parameter must lie in [0, 1)")
    return p


def geo_sample(p: float, rng: np.random.Generator, size=None):
    """P(X = k) = p^k (1 - p) by inversion: X = floor(log U / log p), U in (0, 1]."""
    p = float(_check_p(p))
    u = 1.0 - rng.random(size)
    if p == 0.0:
        return np.zeros(size, dtype=np.int64) if size is not None else 0
    x = np.floor(np.log(u) / np.log(p)).astype(np.int64)
    return x if size is not None else int(x)


def _noise_params(cfg: LppConfig) -> np.ndarray:
    cfg.check_stationary()
    p = np.full(cfg.N + 1, cfg.a * cfg.a)
    p[0] = cfg.a * cfg.c1
    p[-1] = cfg.a * cfg.c2
    return p


def _sample_noise(cfg: LppConfig, rng: np.random.Generator, count: int) -> np.ndarray:
    p = _noise_params(cfg)
    u = 1.0 - rng.random((count, cfg.N + 1))
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    out = np.floor(np.log(u) / logp[None, :])
    out[:, p == 0] = 0
    return out.astype(np.int64)


def step_with_noise(values: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """One level of the recursion for rows of shape (S, N + 1), re-centered.

    Predecessors outside the strip are dropped. On rows with values >= 0 this
    equals treating them as 0, and it keeps the map translation invariant.
    """
    P = np.asarray(values, dtype=np.int64)
    N = P.shape[1] - 1
    Q = np.empty_like(P)
    Q[:, 0] = omega[:, 0] + P[:, 1]
    for j in range(1, N):
        Q[:, j] = omega[:, j] + np.maximum(Q[:, j - 1], P[:, j + 1])
    Q[:, N] = omega[:, N] + Q[:, N - 1]
    return Q - Q[:, :1]


def lpp_step(row: StripRow, cfg: LppConfig, rng: np.random.Generator) -> StripRow:
    """Advance one level."""
    if row.N != cfg.N:
        raise ValueError(f"row has N = {row.N}, config has N = {cfg.N}")
    omega = _sample_noise(cfg, rng, 1)
    Q = step_with_noise(np.asarray(row.values)[None, :], omega)
    return StripRow(row.level + 1, tuple(int(x) for x in Q[0]))


def lpp_step_batch(values: np.ndarray, cfg: LppConfig, rng: np.random.Generator) -> np.ndarray:
    values = np.atleast_2d(values)
    return step_with_noise(values, _sample_noise(cfg, rng, len(values)))


# ---------------------------------------------------------------------------
# Stationary sampling


class StationarySampler:
    """Inverse-CDF sampler of the truncated L1 marginal."""

    def __init__(self, cfg: LppConfig, cap: int, tol: Tolerances = DEFAULTS):
        cfg.check_stationary()
        self.cfg = cfg
        self.cap = int(cap)
        self.table: MarginalTable = l1_marginal(cfg, self.cap, tol=tol)
        probs = self.table.probabilities().ravel()
        self.probs = probs
        self.cdf = np.cumsum(probs)
        self.cdf[-1] = 1.0

    def increments(self, rng: np.random.Generator, count: int) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.random(count), side="right")
        idx = np.minimum(idx, len(self.cdf) - 1)
        return np.stack(np.unravel_index(idx, self.table.weights.shape), axis=1).astype(np.int64)

    def rows(self, rng: np.random.Generator, count: int) -> np.ndarray:
        m = self.increments(rng, count)
        return np.concatenate([np.zeros((count, 1), dtype=np.int64), np.cumsum(m, axis=1)], axis=1)


def sample_stationary(cfg: LppConfig, cap: int, rng: np.random.Generator, tol: Tolerances = DEFAULTS) -> StripRow:
    """One row drawn from the truncated stationary law."""
    row = StationarySampler(cfg, cap, tol).rows(rng, 1)[0]
    return StripRow(0, tuple(int(x) for x in row))


# ---------------------------------------------------------------------------
# Stationarity test


@dataclass(frozen=True)
class StationarityResult:
    tv: float
    correction: float  # bound on the exact law's mass outside the truncated support
    outside: float  # empirical fraction of stepped rows outside the support
    samples: int
    initial: str

    @property
    def tv_upper(self) -> float:
        return self.tv + self.correction


def _chunk_counts(sampler, cfg, initial, seq, count):
    rng = np.random.Generator(np.random.Philox(seq))
    N = cfg.N
    if initial == "stationary":
        rows = sampler.rows(rng, count)
    else:
        rows = np.zeros((count, N + 1), dtype=np.int64)
    out = lpp_step_batch(rows, cfg, rng)
    m = np.diff(out, axis=1)
    inside = np.all(m <= sampler.cap, axis=1)
    flat = np.ravel_multi_index(tuple(m[inside].T), sampler.table.weights.shape)
    return np.bincount(flat, minlength=len(sampler.probs)), int((~inside).sum())


def stationarity_test(
    cfg: LppConfig,
    samples: int,
    cap: int,
    seed: int,
    initial: str = "stationary",
    tol: Tolerances = DEFAULTS,
    sampler: Optional[StationarySampler] = None,
) -> StationarityResult:
    """TV distance between the law after one step and the truncated stationary law."""
    if initial not in ("stationary", "zero"):
        raise ValueError("initial must be 'stationary' or 'zero'")
    if samples < 1:
        raise ValueError("samples must be positive")
    sampler = sampler or StationarySampler(cfg, cap, tol)
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    seqs = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    jobs = list(zip(seqs, sizes))
    if _threads() > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(_threads()) as ex:
            parts = list(ex.map(lambda js: _chunk_counts(sampler, cfg, initial, *js), jobs))
    else:
        parts = [_chunk_counts(sampler, cfg, initial, *js) for js in jobs]
    counts = sum(p[0] for p in parts)
    outside = sum(p[1] for p in parts)
    emp = counts / samples
    tv = 0.5 * (float(np.abs(emp - sampler.probs).sum()) + outside / samples)
    return StationarityResult(tv, sampler.table.unaccounted_mass(), outside / samples, samples, initial)
