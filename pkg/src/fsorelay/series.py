"""
Generalized power series with real exponents.

A :class:`GeneralizedPowerSeries` is a finite list of ``(exponent,
coefficient)`` pairs representing ``sum c_i x**e_i``.  Truncated series
carry a *horizon*: the smallest exponent that was dropped.  Products and
integer powers keep only the terms whose exponents are guaranteed to be
exact, i.e. below the horizon of the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

__all__ = ["GeneralizedPowerSeries", "series_integer_power"]

# Exponents closer than this are merged.
_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class GeneralizedPowerSeries:
    """``sum_i c_i x**e_i`` with non-negative, sorted, distinct exponents.

    Parameters
    ----------
    terms : iterable of (exponent, coefficient)
        Terms in any order; equal exponents are merged.
    horizon : float
        Smallest exponent *not* represented (``inf`` for an exact, finite
        series).  Coefficients of exponents ``>= horizon`` are unknown.
    """

    terms: tuple = field(default=())
    horizon: float = math.inf

    def __post_init__(self) -> None:
        merged: list[list] = []
        for e, c in sorted((float(e), float(c)) for e, c in self.terms):
            if e < 0:
                raise ValueError("exponents must be non-negative")
            if e >= self.horizon:
                continue
            if merged and abs(e - merged[-1][0]) <= _MERGE_TOL * max(1.0, e):
                merged[-1][1].append(c)
            else:
                merged.append([e, [c]])
        object.__setattr__(self, "terms", tuple((e, math.fsum(cs)) for e, cs in merged))

    @classmethod
    def constant(cls, value: float = 1.0) -> "GeneralizedPowerSeries":
        return cls(((0.0, value),))

    @property
    def exponents(self) -> list[float]:
        return [e for e, _ in self.terms]

    @property
    def coefficients(self) -> list[float]:
        return [c for _, c in self.terms]

    def __len__(self) -> int:
        return len(self.terms)

    def __call__(self, x: float) -> float:
        if x == 0:
            return math.fsum(c for e, c in self.terms if e == 0)
        lx = math.log(x)
        return math.fsum(c * math.exp(e * lx) for e, c in self.terms)

    def __mul__(self, other: "GeneralizedPowerSeries") -> "GeneralizedPowerSeries":
        if not isinstance(other, GeneralizedPowerSeries):
            return NotImplemented
        # Missing tails start at the horizons; the lowest exponent a factor
        # can contribute is its first known term (or its horizon if empty).
        low_a = self.terms[0][0] if self.terms else self.horizon
        low_b = other.terms[0][0] if other.terms else other.horizon
        h = min(low_a + other.horizon, low_b + self.horizon)
        # Equal exponents are merged (within tolerance) by the constructor.
        products = tuple((e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms
                         if e1 + e2 < h)
        return GeneralizedPowerSeries(products, h)

    def truncate(self, horizon: float) -> "GeneralizedPowerSeries":
        return GeneralizedPowerSeries(self.terms, min(horizon, self.horizon))

    def map_exponents(self, scale: float) -> "GeneralizedPowerSeries":
        """Series in ``y`` obtained by substituting ``x = y**scale``."""
        return GeneralizedPowerSeries(tuple((e * scale, c) for e, c in self.terms),
                                      self.horizon * scale)


def series_integer_power(s: GeneralizedPowerSeries, t: int,
                         n_max: int | None = None) -> GeneralizedPowerSeries:
    """Raise a generalized power series to a non-negative integer power.

    The power is formed by repeated Cauchy products (binary exponentiation)
    with exponent merging.  When `s` is truncated (finite horizon ``h``),
    the result keeps exactly the terms that are unaffected by the missing
    tail: those with exponent below ``(t-1) e_min + h``.

    Parameters
    ----------
    s : GeneralizedPowerSeries
    t : int
        Power, ``t >= 0``; ``t = 0`` gives the constant series 1.
    n_max : int, optional
        If given, keep at most the `n_max` lowest-exponent terms of the
        result (the horizon is lowered accordingly).
    """
    if t < 0 or int(t) != t:
        raise ValueError("t must be a non-negative integer")
    result = GeneralizedPowerSeries.constant(1.0)
    base = s
    k = int(t)
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    if n_max is not None and len(result) > n_max:
        cut = result.terms[n_max][0]
        result = result.truncate(cut)
    return result


def from_terms(terms: Iterable[tuple[float, float]], horizon: float = math.inf) -> GeneralizedPowerSeries:
    return GeneralizedPowerSeries(tuple(terms), horizon)
