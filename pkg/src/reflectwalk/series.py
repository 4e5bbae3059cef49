"""Truncated power series in the time variable s, the carrier for all transforms.

Coefficients are held for exponents 0..n_max. Operations never read beyond
the horizon; the Cauchy product is exact for the retained coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonMismatch


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    coeffs: np.ndarray  # coefficient of s^n at index n, length n_max + 1

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n])

    def _check(self, other: "TruncatedSeries"):
        if self.n_max != other.n_max:
            raise HorizonMismatch(f"horizons differ: {self.n_max} vs {other.n_max}")

    def add(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.coeffs + other.coeffs)

    def sub(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries(self.coeffs - other.coeffs)

    def scale(self, c: float) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs * c)

    def mul(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Cauchy product truncated at the common horizon."""
        self._check(other)
        full = np.convolve(self.coeffs, other.coeffs)
        return TruncatedSeries(full[: self.n_max + 1])

    __add__ = add
    __sub__ = sub
    __mul__ = mul

    def evaluate(self, s: float) -> float:
        """Horner evaluation of the truncated polynomial at s."""
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * s + c
        return acc

    def tail_bound(self, s: float) -> float:
        """Geometric bound on the discarded tail, |c_nmax| s^(nmax+1) / (1-s).

        Valid as a crude error indicator when the coefficients are
        probabilities of disjoint events (so they are bounded by the last
        retained coefficient's scale); only defined for 0 <= s < 1.
        """
        if not 0.0 <= s < 1.0:
            raise ValueError(f"tail bound needs 0 <= s < 1, got {s}")
        return abs(float(self.coeffs[-1])) * s ** (self.n_max + 1) / (1.0 - s)

    def partial_sums(self) -> np.ndarray:
        """Cumulative sums of the coefficients (evaluation at s = 1, by stage)."""
        return np.cumsum(self.coeffs)


def zero_series(n_max: int) -> TruncatedSeries:
    return TruncatedSeries(np.zeros(n_max + 1))


def delta_series(n: int, n_max: int, value: float = 1.0) -> TruncatedSeries:
    """Monomial value * s^n as a truncated series."""
    coeffs = np.zeros(n_max + 1)
    if 0 <= n <= n_max:
        coeffs[n] = value
    return TruncatedSeries(coeffs)
