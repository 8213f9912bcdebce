"""Closed-form price bounds from the single-instrument bracketing hedge.

A short-protection contract of maturity index M is superhedged by buying the
nearest liquid protection at or above M plus cash covering the extra spread
payments; a long-protection contract is superhedged with the nearest liquid
maturity at or below M.  Both hedge costs are closed-form in the discounted
accruals, which makes these bounds cheap reference points for the optimizer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NoBracketingQuoteError
from .market import DiscountCurve, LiquidMarket, TenorGrid
from .optimizer import Discretization, no_arbitrage_bounds
from .payoff import _grid_discount


def bracketing_maturities(
    market: LiquidMarket, m: int
) -> tuple[Optional[int], Optional[int]]:
    """Nearest liquid indices at or below and at or above m (either may be absent)."""
    if m < 1:
        raise IndexError(f"maturity index must be >= 1, got {m}")
    below = max((i for i in market.indices if i <= m), default=None)
    above = min((i for i in market.indices if i >= m), default=None)
    return below, above


def vanilla_ask_bound(
    market: LiquidMarket, grid: TenorGrid, curve: DiscountCurve, m: int
) -> float:
    """Least upper ask bound from the single-instrument hedge.

    Cost of the hedge: buy the bracketing liquid protection above, plus cash
    for the spread payments between the two maturities.  Equals the quote at
    liquid m.  Not computable when no liquid maturity lies at or above m.
    """
    _, above = bracketing_maturities(market, m)
    if above is None:
        raise NoBracketingQuoteError(
            f"no liquid maturity at or above index {m}; the single-instrument "
            f"ask hedge needs one"
        )
    _, _, cum = _grid_discount(grid, curve)
    return market.upfront(above) + market.spread * float(cum[above] - cum[m])


def vanilla_bid_bound(
    market: LiquidMarket, grid: TenorGrid, curve: DiscountCurve, m: int
) -> float:
    """Greatest lower bid bound from the single-instrument hedge.

    Hedge: sell the bracketing liquid protection below plus cash for the
    spread gap.  With no liquid maturity at or below m the hedge degenerates
    to cash covering the full spread stream, giving bound -w * A_m.
    """
    below, _ = bracketing_maturities(market, m)
    _, _, cum = _grid_discount(grid, curve)
    if below is None:
        hedge_cost = market.spread * float(cum[m])
    else:
        hedge_cost = -market.upfront(below) + market.spread * float(cum[m] - cum[below])
    return -hedge_cost


@dataclass(frozen=True)
class VanillaBound:
    """One single-instrument bound with its construction details."""

    maturity_index: int
    side: str  # "ask" (short protection) or "bid" (long protection)
    bracketing_liquid: Optional[int]
    hedge_cost: float
    bound: float


def describe_vanilla(
    market: LiquidMarket, grid: TenorGrid, curve: DiscountCurve, m: int, side: str
) -> VanillaBound:
    """Bound plus bracket and hedge cost, for reporting."""
    below, above = bracketing_maturities(market, m)
    if side == "ask":
        bound = vanilla_ask_bound(market, grid, curve, m)
        return VanillaBound(m, side, above, hedge_cost=bound, bound=bound)
    if side == "bid":
        bound = vanilla_bid_bound(market, grid, curve, m)
        return VanillaBound(m, side, below, hedge_cost=-bound, bound=bound)
    raise ValueError(f"side must be 'ask' or 'bid', got {side!r}")


@dataclass(frozen=True)
class ComparisonRow:
    maturity_index: int
    opt_ask: float
    van_ask: float
    opt_bid: float
    van_bid: float


def comparison_table(
    market: LiquidMarket,
    grid: TenorGrid,
    curve: DiscountCurve,
    maturities: tuple[int, ...] = (10, 11, 12, 14, 15, 16),
    discretization: Discretization | None = None,
) -> list[ComparisonRow]:
    """Optimizer bounds next to the single-instrument bounds, per maturity."""
    rows = []
    for m in maturities:
        bid, ask = no_arbitrage_bounds(market, grid, curve, m, discretization)
        rows.append(
            ComparisonRow(
                maturity_index=m,
                opt_ask=ask,
                van_ask=vanilla_ask_bound(market, grid, curve, m),
                opt_bid=bid,
                van_bid=vanilla_bid_bound(market, grid, curve, m),
            )
        )
    return rows
