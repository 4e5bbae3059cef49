"""Seeded simulation of the reflected walk, the statistical oracle.

Path i draws its increments from the Philox substream keyed by (seed, i), so
results are bit-reproducible for a fixed config no matter how paths are
partitioned into blocks or threads. Aggregation is plain counting.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoReflectionsObserved
from .laws import LatticeLaw
from .philox import uniforms

THREADS_ENV = "REFLECTWALK_THREADS"
_BLOCK_PATHS = 16_384
_CHUNK_DRAWS = 4_096  # must stay 4-aligned for the substream layout
_CACHE_LIMIT = 32


@dataclass(frozen=True, eq=False)
class SimConfig:
    law: LatticeLaw
    start: int
    horizon: int
    paths: int
    seed: int

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("start state must be nonnegative")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.paths < 1:
            raise ValueError("need at least one path")

    def key(self) -> tuple:
        return (self.law.key(), self.start, self.horizon, self.paths, self.seed)


@dataclass(frozen=True)
class Estimate:
    point: float
    stderr: float
    count: int


@dataclass(frozen=True, eq=False)
class SimResult:
    """Aggregated path statistics for one config.

    terminal[y]: paths ending at y after `horizon` steps.
    first_reflection_time[t]: paths whose first reflection happens at step t
        (index 0 counts paths that never reflect).
    first_reflection_target[w-1]: landing state of those first reflections.
    reflection_target[w-1]: landing counts over all reflections, all paths.
    """

    config: SimConfig
    terminal: np.ndarray
    first_reflection_time: np.ndarray
    first_reflection_target: np.ndarray
    reflection_target: np.ndarray

    def terminal_prob(self, y: int) -> float:
        if 0 <= y < self.terminal.shape[0]:
            return float(self.terminal[y]) / self.config.paths
        return 0.0


def _max_workers(n_blocks: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        workers = max(1, int(cap))
    else:
        workers = os.cpu_count() or 1
    return max(1, min(workers, n_blocks))


def _path_blocks(paths: int):
    for start in range(0, paths, _BLOCK_PATHS):
        yield start, min(start + _BLOCK_PATHS, paths)


def _draw_increments(law: LatticeLaw, seed: int, ids: np.ndarray, first: int, count: int):
    cdf = np.cumsum(law.masses)
    u = uniforms(seed, ids, first, count)
    idx = np.searchsorted(cdf, u, side="right")
    return idx + law.lo


def _run_block(config: SimConfig, lo: int, hi: int):
    law = config.law
    a = law.a
    n = config.horizon
    ids = np.arange(lo, hi, dtype=np.uint64)
    states = np.full(hi - lo, config.start, dtype=np.int64)
    first_time = np.zeros(hi - lo, dtype=np.int64)  # 0 = not yet reflected
    first_target = np.zeros(hi - lo, dtype=np.int64)
    target_counts = np.zeros(a, dtype=np.int64)

    t = 0
    while t < n:
        m = min(_CHUNK_DRAWS, ((n - t + 3) // 4) * 4)
        inc = _draw_increments(law, config.seed, ids, t, m)
        for j in range(min(m, n - t)):
            raw = states + inc[:, j]
            reflected = raw < 0
            np.abs(raw, out=raw)
            states = raw
            if reflected.any():
                landings = states[reflected]
                target_counts += np.bincount(landings - 1, minlength=a)
                newly = reflected & (first_time == 0)
                if newly.any():
                    first_time[newly] = t + j + 1
                    first_target[newly] = states[newly]
        t += m

    width = max(int(states.max(initial=0)), a) + 1
    terminal = np.bincount(states, minlength=width)
    time_counts = np.bincount(first_time, minlength=n + 1)
    ft = first_target[first_target > 0]
    first_target_counts = np.bincount(ft - 1, minlength=a) if ft.size else np.zeros(a, dtype=np.int64)
    return terminal, time_counts, first_target_counts, target_counts


def simulate(config: SimConfig) -> SimResult:
    """Run all paths and aggregate terminal and reflection statistics."""
    blocks = list(_path_blocks(config.paths))
    with ThreadPoolExecutor(max_workers=_max_workers(len(blocks))) as pool:
        parts = list(pool.map(lambda b: _run_block(config, *b), blocks))

    a = config.law.a
    width = max(p[0].shape[0] for p in parts)
    terminal = np.zeros(width, dtype=np.int64)
    times = np.zeros(config.horizon + 1, dtype=np.int64)
    first_targets = np.zeros(a, dtype=np.int64)
    targets = np.zeros(a, dtype=np.int64)
    for term, tc, ftc, tgt in parts:
        terminal[: term.shape[0]] += term
        times += tc
        first_targets += ftc
        targets += tgt
    return SimResult(config, terminal, times, first_targets, targets)


_sim_cache: dict[tuple, SimResult] = {}


def _simulate_cached(config: SimConfig) -> SimResult:
    key = config.key()
    if key not in _sim_cache:
        if len(_sim_cache) >= _CACHE_LIMIT:
            _sim_cache.clear()
        _sim_cache[key] = simulate(config)
    return _sim_cache[key]


def estimate_pxy(config: SimConfig, y: int) -> Estimate:
    """Empirical P[X_horizon = y] with its binomial standard error."""
    result = _simulate_cached(config)
    hits = 0
    if 0 <= y < result.terminal.shape[0]:
        hits = int(result.terminal[y])
    p = hits / config.paths
    stderr = math.sqrt(p * (1.0 - p) / config.paths)
    return Estimate(p, stderr, hits)


def estimate_nu(config: SimConfig, burnin: int = 100) -> dict[int, Estimate]:
    """Occupation law of the reflection targets on [1, a], after burn-in.

    Discards the first `burnin` reflections of every path, then pools the
    remaining landings. The standard error treats each path as one cluster
    (landings within a path are dependent), via the ratio-estimator form.
    """
    law = config.law
    a = law.a
    counts = np.zeros((config.paths, a), dtype=np.int64)

    for lo, hi in _path_blocks(config.paths):
        ids = np.arange(lo, hi, dtype=np.uint64)
        states = np.full(hi - lo, config.start, dtype=np.int64)
        seen = np.zeros(hi - lo, dtype=np.int64)
        t = 0
        n = config.horizon
        while t < n:
            m = min(_CHUNK_DRAWS, ((n - t + 3) // 4) * 4)
            inc = _draw_increments(law, config.seed, ids, t, m)
            for j in range(min(m, n - t)):
                raw = states + inc[:, j]
                reflected = raw < 0
                np.abs(raw, out=raw)
                states = raw
                if reflected.any():
                    seen[reflected] += 1
                    keep = reflected & (seen > burnin)
                    if keep.any():
                        rows = np.nonzero(keep)[0] + lo
                        np.add.at(counts, (rows, states[keep] - 1), 1)
            t += m

    per_path = counts.sum(axis=1)
    total = int(per_path.sum())
    if total == 0:
        raise NoReflectionsObserved(
            f"no reflections past burn-in {burnin} over {config.paths} paths "
            f"of length {config.horizon}"
        )
    out = {}
    for w in range(1, a + 1):
        c_w = counts[:, w - 1]
        p = float(c_w.sum()) / total
        resid = c_w - p * per_path
        stderr = math.sqrt(float(np.sum(resid * resid.astype(float)))) / total
        out[w] = Estimate(p, stderr, int(c_w.sum()))
    return out
