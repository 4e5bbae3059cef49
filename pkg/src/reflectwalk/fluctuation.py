"""Exact dynamic-programming oracles for ladder epochs of the free walk.

These tables are the ground truth that the closed-form machinery is checked
against. They converge slowly (the centered first-passage tail decays like
n^(-1/2)), so they are oracles, not the production path for ladder laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonTooLarge
from .laws import LatticeLaw
from .series import TruncatedSeries

MEMORY_CAP_FLOATS = 50_000_000


def _kernel(law: LatticeLaw) -> np.ndarray:
    """Convolution kernel m[u] = mu(lo + u)."""
    return law.masses


def _halfline_step(row: np.ndarray, law: LatticeLaw) -> tuple[np.ndarray, np.ndarray]:
    """One step of the walk killed below 0.

    Returns (next row over y >= 0, dropped masses indexed by w - 1 for the
    mass landing on -w, w = 1..a).
    """
    full = np.convolve(row, _kernel(law))
    a = law.a
    dropped = full[:a][::-1]  # index w-1 <- landing point -w
    return full[a:], dropped


@dataclass(frozen=True, eq=False)
class HalfLineTable:
    """Rows n = 0..n_max of P[tau_strict_descent > n, S_n = y], y in [0, b*n]."""

    law: LatticeLaw
    n_max: int
    rows: tuple  # row n is an ndarray of length b*n + 1
    descent_mass: np.ndarray  # [n, w-1] = P[tau = n, S_n = -w]

    def prob(self, n: int, y: int) -> float:
        row = self.rows[n]
        if 0 <= y < row.shape[0]:
            return float(row[y])
        return 0.0

    def row_total(self, n: int) -> float:
        return float(np.sum(self.rows[n]))


def _check_table_budget(law: LatticeLaw, n_max: int, cap: int):
    estimate = law.b * n_max * (n_max + 1) // 2 + n_max + 1
    if estimate > cap:
        raise HorizonTooLarge(
            f"table would hold ~{estimate} floats, cap is {cap}; "
            "use the streaming series builders instead"
        )


def stay_nonneg_table(
    law: LatticeLaw, n_max: int, memory_cap: int = MEMORY_CAP_FLOATS
) -> HalfLineTable:
    """Joint law of staying nonnegative: row n maps y to P[tau > n, S_n = y]."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    _check_table_budget(law, n_max, memory_cap)
    rows = [np.array([1.0])]
    descent = np.zeros((n_max + 1, law.a))
    row = rows[0]
    for n in range(1, n_max + 1):
        row, dropped = _halfline_step(row, law)
        rows.append(row)
        descent[n] = dropped
    for r in rows:
        r.flags.writeable = False
    descent.flags.writeable = False
    return HalfLineTable(law, n_max, tuple(rows), descent)


def descent_joint_table(law: LatticeLaw, n_max: int) -> list[TruncatedSeries]:
    """Series for (tau_strict_descent, landing point): entry w-1 of the list is
    the series of P[tau = n, S_n = -w], w = 1..a. Streams the DP, so large
    horizons are fine."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    coeffs = np.zeros((law.a, n_max + 1))
    row = np.array([1.0])
    for n in range(1, n_max + 1):
        row, dropped = _halfline_step(row, law)
        coeffs[:, n] = dropped
    return [TruncatedSeries(coeffs[w - 1]) for w in range(1, law.a + 1)]


def stay_series(law: LatticeLaw, ys, n_max: int) -> dict[int, TruncatedSeries]:
    """Columns of the stay-nonnegative table as series, streamed (row storage free).

    Coefficient n of series y is P[tau_strict_descent > n, S_n = y].
    """
    ys = sorted(set(int(y) for y in ys))
    out = np.zeros((len(ys), n_max + 1))
    row = np.array([1.0])
    for i, y in enumerate(ys):
        if y == 0:
            out[i, 0] = 1.0
    for n in range(1, n_max + 1):
        row, _ = _halfline_step(row, law)
        for i, y in enumerate(ys):
            if 0 <= y < row.shape[0]:
                out[i, n] = row[y]
    return {y: TruncatedSeries(out[i]) for i, y in enumerate(ys)}


def _negative_step(h: np.ndarray, law: LatticeLaw) -> tuple[np.ndarray, np.ndarray]:
    """One step of the walk killed at re-entry into [0, inf).

    h[i] carries the mass at y = -1 - i. Returns (next h, exit masses
    indexed by landing point j = 0..b-1).
    """
    b = law.b
    full = np.convolve(h, _kernel(law)[::-1])
    exits = full[b - 1 :: -1][:b]  # full[b-1-j] lands at j
    return full[b:], exits


def ascent_joint_table(law: LatticeLaw, n_max: int) -> list[TruncatedSeries]:
    """Series for (tau_weak_ascent, landing point): entry j of the list is the
    series of P[tau+ = n, S_n = j], j = 0..b."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    coeffs = np.zeros((law.b + 1, n_max + 1))
    # first step leaves the origin: landing >= 0 means tau+ = 1
    for j in range(0, law.b + 1):
        coeffs[j, 1] = law.mass(j)
    h = np.array([law.mass(-1 - i) for i in range(law.a)])
    for n in range(2, n_max + 1):
        h, exits = _negative_step(h, law)
        coeffs[: law.b, n] = exits
    return [TruncatedSeries(coeffs[j]) for j in range(law.b + 1)]
