"""Discounted payoff streams of CDSs, portfolios, and hedged positions.

A path is a pair (tau, rho): default time and recovery rate.  The value of a
long-protection unit-notional contract maturing at T_m along a path is

    -w * A_m(tau) + (1 - rho) * d(tau) * [tau <= T_m]

where A_m is the discounted premium accrual and d the discount factor.  The
indicator is inclusive at T_m, so a default exactly on the maturity date
still triggers the loss payment.

Restricted to one quarter (T_{k-1}, T_k], the value of any hedged position
collapses to

    A_k + (B_k * (tau - T_{k-1}) + (1 - rho) * G_k) * exp(-r tau)

with G_k the net notional still alive in quarter k.  That regrouping is the
single source of truth for constraint generation and for the closed-form
interval minima used to verify optimizer output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .market import DiscountCurve, TenorGrid


@lru_cache(maxsize=64)
def _grid_discount(grid: TenorGrid, curve: DiscountCurve):
    """Per-grid discount data: d_k and cumulative discounted accruals.

    Returns (d, cum) where d[k] = exp(-r T_k) and cum[k] = sum_{j<=k}
    (T_j - T_{j-1}) d_j, both indexed 0..N with zeroth entries for T_0.
    """
    times = np.concatenate(([0.0], np.asarray(grid.payment_times)))
    d = np.exp(-curve.risk_free_rate * times)
    steps = np.diff(times) * d[1:]
    cum = np.concatenate(([0.0], np.cumsum(steps)))
    return times, d, cum


@dataclass(frozen=True)
class Portfolio:
    """Signed net notionals per quarter index; long protection is positive."""

    notionals: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.notionals):
            raise ValueError("portfolio notionals must be finite")

    @classmethod
    def from_array(cls, values) -> "Portfolio":
        return cls(tuple(float(v) for v in values))

    @classmethod
    def empty(cls, n: int) -> "Portfolio":
        return cls((0.0,) * n)

    @classmethod
    def single(cls, n: int, m: int, notional: float = 1.0) -> "Portfolio":
        if not 1 <= m <= n:
            raise IndexError(f"maturity index {m} outside 1..{n}")
        values = [0.0] * n
        values[m - 1] = notional
        return cls(tuple(values))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.notionals, dtype=float)

    def __len__(self) -> int:
        return len(self.notionals)

    def scaled(self, factor: float) -> "Portfolio":
        return Portfolio(tuple(factor * x for x in self.notionals))

    def plus(self, other: "Portfolio") -> "Portfolio":
        if len(other) != len(self):
            raise ConfigurationError("portfolio lengths differ")
        return Portfolio(tuple(a + b for a, b in zip(self.notionals, other.notionals)))


@dataclass(frozen=True)
class HedgedPosition:
    """A portfolio plus a cash deposit; evaluates to cash + sum of contract values."""

    portfolio: Portfolio
    cash: float = 0.0


class Path(NamedTuple):
    """Default path; tau = inf encodes survival past the last payment date."""

    tau: float
    rho: float


def accrual(grid: TenorGrid, curve: DiscountCurve, m: int, tau: float) -> float:
    """Discounted premium accrual A_m(tau) per unit spread.

    For a default in (0, T_m]: the paid quarters at their payment-date
    discounts plus the accrued fraction discounted at tau.  After T_m the full
    A_m = sum_k (T_k - T_{k-1}) d_k is locked in.
    """
    if not 1 <= m <= grid.n_quarters:
        raise IndexError(f"maturity index {m} outside 1..{grid.n_quarters}")
    if tau <= 0.0:
        raise ValueError(f"default time must be positive, got {tau}")
    times, _, cum = _grid_discount(grid, curve)
    if tau > times[m]:
        return float(cum[m])
    k = grid.quarter_of(tau)
    return float(cum[k - 1] + (tau - times[k - 1]) * math.exp(-curve.risk_free_rate * tau))


def cds_payoff(
    grid: TenorGrid,
    curve: DiscountCurve,
    m: int,
    spread: float,
    tau: float,
    rho: float,
) -> float:
    """Present value of a long-protection unit-notional CDS along (tau, rho)."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"recovery rate must lie in [0, 1], got {rho}")
    value = -spread * accrual(grid, curve, m, tau)
    if tau <= grid.time(m):
        value += (1.0 - rho) * math.exp(-curve.risk_free_rate * tau)
    return value


def contract_values(
    grid: TenorGrid, curve: DiscountCurve, spread: float, tau: float, rho: float
) -> np.ndarray:
    """Vector of CDS payoffs, one per maturity index 1..N, at a single path."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"recovery rate must lie in [0, 1], got {rho}")
    if tau <= 0.0:
        raise ValueError(f"default time must be positive, got {tau}")
    times, _, cum = _grid_discount(grid, curve)
    n = grid.n_quarters
    if tau > times[n]:
        return -spread * cum[1:]
    k = grid.quarter_of(tau)
    disc = math.exp(-curve.risk_free_rate * tau)
    values = np.empty(n)
    values[: k - 1] = -spread * cum[1:k]
    values[k - 1 :] = -spread * (cum[k - 1] + (tau - times[k - 1]) * disc) + (1.0 - rho) * disc
    return values


def position_value(
    position: HedgedPosition,
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    tau: float,
    rho: float,
) -> float:
    """cash + sum_m alpha_m * payoff_m along the path.

    Affine in rho at fixed tau: the value equals the linear interpolation
    between the rho = 1 and rho = 0 values.
    """
    alpha = position.portfolio.array
    if len(alpha) != grid.n_quarters:
        raise ConfigurationError(
            f"portfolio has {len(alpha)} notionals for a grid of {grid.n_quarters} quarters"
        )
    return position.cash + float(alpha @ contract_values(grid, curve, spread, tau, rho))


@dataclass(frozen=True)
class QuarterCoefficients:
    """Per-quarter regrouping of a hedged position's value.

    For tau in quarter k (offset s = tau - T_{k-1}) and recovery rho:

        value = a[k] + (b[k] * s + (1 - rho) * g[k]) * exp(-r * tau)

    ``no_default`` is the constant value on tau > T_N.  Arrays are indexed by
    quarter 1..N at positions 0..N-1.
    """

    grid: TenorGrid
    curve: DiscountCurve
    spread: float
    a: np.ndarray
    b: np.ndarray
    g: np.ndarray
    no_default: float

    def value(self, k: int, offset: float, rho: float) -> float:
        """Value inside quarter k; offset 0 is the right limit at T_{k-1}."""
        tau = self.grid.time(k - 1) + offset
        disc = math.exp(-self.curve.risk_free_rate * tau)
        i = k - 1
        return float(self.a[i] + (self.b[i] * offset + (1.0 - rho) * self.g[i]) * disc)


def quarter_coefficients(
    position: HedgedPosition, grid: TenorGrid, curve: DiscountCurve, spread: float
) -> QuarterCoefficients:
    """Build the piecewise form of the position's value over the path space."""
    alpha = position.portfolio.array
    if len(alpha) != grid.n_quarters:
        raise ConfigurationError(
            f"portfolio has {len(alpha)} notionals for a grid of {grid.n_quarters} quarters"
        )
    _, _, cum = _grid_discount(grid, curve)
    # g[k-1] = net notional alive in quarter k; prefix = premium already locked
    g = np.cumsum(alpha[::-1])[::-1]
    locked = np.concatenate(([0.0], np.cumsum(alpha * cum[1:])))[:-1]
    a = position.cash - spread * (locked + cum[:-1] * g)
    b = -spread * g
    no_default = position.cash - spread * float(alpha @ cum[1:])
    return QuarterCoefficients(grid, curve, spread, a, b, g, no_default)


def _interval_candidates(
    coeffs: QuarterCoefficients, k: int, rho: float
) -> list[tuple[float, float]]:
    """(value, offset) candidates for the extremum of the quarter-k restriction.

    The restriction g(s) = A + (B s + C) e^{-r (T_{k-1}+s)} has at most one
    stationary point, so its extrema over [0, dt] lie among both endpoints
    and that point.  Offset 0 stands for the right limit at T_{k-1}.
    """
    i = k - 1
    a_k, b_k = float(coeffs.a[i]), float(coeffs.b[i])
    c_k = (1.0 - rho) * float(coeffs.g[i])
    t_left = coeffs.grid.time(k - 1)
    dt = coeffs.grid.period(k)
    r = coeffs.curve.risk_free_rate

    def value(s: float) -> float:
        return a_k + (b_k * s + c_k) * math.exp(-r * (t_left + s))

    candidates = [(value(0.0), 0.0), (value(dt), dt)]
    if r > 0.0 and b_k != 0.0:
        s_star = 1.0 / r - c_k / b_k
        if 0.0 < s_star < dt:
            candidates.append((value(s_star), s_star))
    return candidates


def interval_minimum(coeffs: QuarterCoefficients, k: int, rho: float) -> tuple[float, float]:
    """Exact minimum of the position value over quarter k at fixed rho.

    Returns (value, tau); tau equal to T_{k-1} denotes the right limit.
    """
    value, offset = min(_interval_candidates(coeffs, k, rho), key=lambda c: c[0])
    return value, coeffs.grid.time(k - 1) + offset


class ExtremePoint(NamedTuple):
    """Location of a path-space extremum; quarter None marks survival."""

    value: float
    quarter: int | None
    offset: float
    rho: float

    @property
    def is_survival(self) -> bool:
        return self.quarter is None


def global_minimum(coeffs: QuarterCoefficients) -> ExtremePoint:
    """Exact minimum over all quarters, both recovery endpoints, and survival.

    Only rho in {0, 1} is scanned: the value is affine in rho, so the
    extremum over [0, 1] is attained at an endpoint.
    """
    return _scan_extremum(coeffs, minimize=True)


def global_maximum(coeffs: QuarterCoefficients) -> ExtremePoint:
    """Exact maximum over all paths; see :func:`global_minimum`."""
    return _scan_extremum(coeffs, minimize=False)


def _scan_extremum(coeffs: QuarterCoefficients, minimize: bool) -> ExtremePoint:
    best = ExtremePoint(coeffs.no_default, None, math.inf, 0.0)
    pick = min if minimize else max
    for k in range(1, coeffs.grid.n_quarters + 1):
        for rho in (0.0, 1.0):
            value, offset = pick(_interval_candidates(coeffs, k, rho), key=lambda c: c[0])
            if (value < best.value) if minimize else (value > best.value):
                best = ExtremePoint(value, k, offset, rho)
    return best


def _extreme_path(grid: TenorGrid, point: ExtremePoint) -> Path:
    tau = math.inf if point.quarter is None else grid.time(point.quarter - 1) + point.offset
    return Path(tau, point.rho)


def path_minimum(
    position: HedgedPosition, grid: TenorGrid, curve: DiscountCurve, spread: float
) -> tuple[float, Path]:
    """Exact global minimum of the position value over all paths."""
    coeffs = quarter_coefficients(position, grid, curve, spread)
    point = global_minimum(coeffs)
    return point.value, _extreme_path(grid, point)


def path_maximum(
    position: HedgedPosition, grid: TenorGrid, curve: DiscountCurve, spread: float
) -> tuple[float, Path]:
    """Exact global maximum of the position value over all paths."""
    coeffs = quarter_coefficients(position, grid, curve, spread)
    point = global_maximum(coeffs)
    return point.value, _extreme_path(grid, point)
