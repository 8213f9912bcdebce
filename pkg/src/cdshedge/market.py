"""Market primitives: tenor grid, discounting, liquid quotes, and the
physical measure for default time and recovery.

All prices and rates are plain decimals (fractions of notional, per-year
rates).  Percent conversions happen only at the CLI boundary.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InterpolationRangeError, NoMarketError

_QUARTER = 0.25
_SPACING_TOL = 1e-12

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(z: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * z * z) / _SQRT_2PI


@dataclass(frozen=True)
class TenorGrid:
    """Quarterly premium payment dates T_1..T_N with T_0 = 0.

    The first period T_1 - T_0 may be shorter than a quarter; every later
    period is exactly a quarter of a year.
    """

    payment_times: tuple[float, ...]

    def __post_init__(self):
        times = self.payment_times
        if len(times) < 1:
            raise ValueError("grid needs at least one payment date")
        if not 0.0 < times[0] <= _QUARTER:
            raise ValueError(f"first period must lie in (0, 0.25], got {times[0]}")
        for k in range(1, len(times)):
            if abs((times[k] - times[k - 1]) - _QUARTER) > _SPACING_TOL:
                raise ValueError(
                    f"periods after the first must be exactly a quarter year; "
                    f"spacing {times[k] - times[k - 1]} at index {k + 1}"
                )

    @classmethod
    def quarterly(cls, n_quarters: int = 21, first_period: float = _QUARTER) -> "TenorGrid":
        times = tuple(first_period + _QUARTER * k for k in range(n_quarters))
        return cls(times)

    @property
    def n_quarters(self) -> int:
        return len(self.payment_times)

    @property
    def t0(self) -> float:
        return 0.0

    @property
    def horizon(self) -> float:
        """Largest payment date T_N."""
        return self.payment_times[-1]

    def time(self, k: int) -> float:
        """T_k for k = 0..N (T_0 = 0)."""
        if not 0 <= k <= self.n_quarters:
            raise IndexError(f"quarter index {k} outside 0..{self.n_quarters}")
        return 0.0 if k == 0 else self.payment_times[k - 1]

    def period(self, k: int) -> float:
        """Length T_k - T_{k-1} of quarter k."""
        return self.time(k) - self.time(k - 1)

    def quarter_of(self, tau: float) -> int:
        """Index k such that tau lies in (T_{k-1}, T_k]; error beyond T_N."""
        if tau <= 0.0:
            raise ValueError(f"default time must be positive, got {tau}")
        if tau > self.horizon:
            raise ValueError(f"time {tau} lies beyond the last payment date")
        return bisect.bisect_left(self.payment_times, tau) + 1


@dataclass(frozen=True)
class DiscountCurve:
    """Flat continuously compounded risk-free curve: d(t) = exp(-r t)."""

    risk_free_rate: float

    def __post_init__(self):
        if self.risk_free_rate < 0.0:
            raise ValueError("risk-free rate must be non-negative")

    def factor(self, t):
        """Discount factor for time t (scalar or array)."""
        return np.exp(-self.risk_free_rate * np.asarray(t, dtype=float)) if np.ndim(t) else math.exp(
            -self.risk_free_rate * t
        )


@dataclass(frozen=True)
class LiquidMarket:
    """Running spread plus upfront quotes for the liquid maturities.

    ``quotes`` maps quarter index -> upfront price per unit notional, stored
    as sorted (index, upfront) pairs.  The market may be empty.
    """

    spread: float
    quotes: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        indices = [m for m, _ in self.quotes]
        if any(m < 1 for m in indices):
            raise ValueError("quoted maturity indices must be >= 1")
        if sorted(set(indices)) != indices:
            raise ValueError("quoted maturity indices must be distinct and sorted")

    @classmethod
    def from_mapping(cls, spread: float, quotes: dict[int, float]) -> "LiquidMarket":
        return cls(spread, tuple(sorted(quotes.items())))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.quotes)

    @property
    def n_quotes(self) -> int:
        return len(self.quotes)

    def is_empty(self) -> bool:
        return not self.quotes

    def is_liquid(self, m: int) -> bool:
        return any(m == idx for idx in self.indices)

    def upfront(self, m: int) -> float:
        for idx, u in self.quotes:
            if idx == m:
                return u
        raise KeyError(f"maturity index {m} is not quoted")

    def restricted_to(self, indices) -> "LiquidMarket":
        keep = set(indices)
        return LiquidMarket(self.spread, tuple(p for p in self.quotes if p[0] in keep))


class PointMass(NamedTuple):
    """Atom descriptor returned by density queries on a degenerate law."""

    value: float
    mass: float


@dataclass(frozen=True)
class TruncatedNormalRecovery:
    """Normal(mu, sigma) restricted to [0, 1] and renormalised."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")

    @property
    def _z_bounds(self) -> tuple[float, float]:
        return (0.0 - self.mu) / self.sigma, (1.0 - self.mu) / self.sigma

    @property
    def normalization(self) -> float:
        """Mass of the untruncated normal on [0, 1]."""
        z_lo, z_hi = self._z_bounds
        return float(ndtr(z_hi) - ndtr(z_lo))

    @property
    def mean(self) -> float:
        z_lo, z_hi = self._z_bounds
        return self.mu + self.sigma * (_phi(z_lo) - _phi(z_hi)) / self.normalization

    def pdf(self, rho: float) -> float:
        z = (rho - self.mu) / self.sigma
        return _phi(z) / (self.sigma * self.normalization)

    def cdf(self, rho):
        """CDF evaluated on scalars or arrays; clamps outside [0, 1]."""
        z_lo, _ = self._z_bounds
        x = np.asarray(rho, dtype=float)
        out = (ndtr((x - self.mu) / self.sigma) - ndtr(z_lo)) / self.normalization
        out = np.clip(out, 0.0, 1.0)
        out = np.where(x < 0.0, 0.0, np.where(x > 1.0, 1.0, out))
        return float(out) if np.ndim(rho) == 0 else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws, deterministic for a given generator state."""
        z_lo, _ = self._z_bounds
        u = rng.random(size)
        return self.mu + self.sigma * ndtri(ndtr(z_lo) + u * self.normalization)


@dataclass(frozen=True)
class ConstantRecovery:
    """Degenerate recovery law: a single known value in [0, 1]."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("constant recovery must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return self.value


RecoveryLaw = Union[TruncatedNormalRecovery, ConstantRecovery]


@dataclass(frozen=True)
class PhysicalMeasure:
    """Real-world law of the path: constant hazard rate for the default time,
    independent recovery with the given law."""

    hazard_rate: float
    recovery_law: RecoveryLaw

    def __post_init__(self):
        if self.hazard_rate <= 0.0:
            raise ValueError("hazard rate must be positive")

    def survival(self, t: float) -> float:
        return math.exp(-self.hazard_rate * t)

    def default_density(self, t):
        """h * exp(-h t), the density of the default time."""
        return self.hazard_rate * np.exp(-self.hazard_rate * np.asarray(t, dtype=float))

    @property
    def mean_recovery(self) -> float:
        return self.recovery_law.mean


def hazard_from_pd1(pd1: float) -> float:
    """Constant hazard rate implied by the one-year default probability."""
    if not 0.0 < pd1 < 1.0:
        raise ValueError(f"one-year default probability must lie in (0, 1), got {pd1}")
    return -math.log1p(-pd1)


def default_interval_probability(measure: PhysicalMeasure, grid: TenorGrid, k: int) -> float:
    """Probability of default inside quarter k: exp(-h T_{k-1}) - exp(-h T_k)."""
    if not 1 <= k <= grid.n_quarters:
        raise IndexError(f"quarter index {k} outside 1..{grid.n_quarters}")
    h = measure.hazard_rate
    return math.exp(-h * grid.time(k - 1)) - math.exp(-h * grid.time(k))


def recovery_density(measure: PhysicalMeasure, rho: float):
    """Recovery density at ``rho``; a PointMass descriptor for the constant law."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"recovery rate must lie in [0, 1], got {rho}")
    law = measure.recovery_law
    if isinstance(law, ConstantRecovery):
        return PointMass(law.value, 1.0)
    return law.pdf(rho)


def interpolated_upfront(market: LiquidMarket, grid: TenorGrid, m: int) -> float:
    """Upfront price at maturity index m, linearly interpolated in the index
    between the bracketing liquid quotes.

    Exact at liquid indices.  No extrapolation: below the first or above the
    last quoted index is an error.
    """
    if market.is_empty():
        raise NoMarketError("no liquid quotes to interpolate between")
    if not 1 <= m <= grid.n_quarters:
        raise IndexError(f"maturity index {m} outside 1..{grid.n_quarters}")
    indices = market.indices
    if m < indices[0] or m > indices[-1]:
        raise InterpolationRangeError(
            f"maturity index {m} outside the quoted range {indices[0]}..{indices[-1]}"
        )
    if market.is_liquid(m):
        return market.upfront(m)
    pos = bisect.bisect_left(indices, m)
    lo, hi = indices[pos - 1], indices[pos]
    u_lo, u_hi = market.upfront(lo), market.upfront(hi)
    return u_lo + (u_hi - u_lo) * (m - lo) / (hi - lo)
