"""Physical-measure valuation: expected payoffs, fair-price ranges, capital
at risk, rates of return, and bid/ask quotes built on the superhedge bounds.

The expected position value integrates the default-time density per quarter
with Gauss-Legendre nodes plus the exact survival atom.  Because the value is
affine in the recovery rate, only the mean recovery enters the expectation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, UndefinedReturnError
from .market import DiscountCurve, LiquidMarket, PhysicalMeasure, TenorGrid
from .optimizer import Discretization, HedgeProblem, HedgeSolution, optimize_hedge
from .payoff import HedgedPosition, Portfolio, _grid_discount, position_value


@dataclass(frozen=True)
class QuadratureConfig:
    """Default-time quadrature: Gauss-Legendre nodes per quarter."""

    tau_nodes_per_quarter: int = 16

    def __post_init__(self):
        if self.tau_nodes_per_quarter < 2:
            raise ConfigurationError("quadrature needs at least 2 nodes per quarter")


@lru_cache(maxsize=64)
def _expectation_basis(
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    measure: PhysicalMeasure,
    nodes_per_quarter: int,
):
    """Cached (default-mass, per-contract expected values) under the measure.

    E[contract_m] decomposes into the per-quarter integral of the default
    density times the contract value at mean recovery, plus the survival atom
    at the fully accrued premium leg.  Expectations of portfolios follow by
    linearity.
    """
    times, _, cum = _grid_discount(grid, curve)
    n = grid.n_quarters
    r = curve.risk_free_rate
    h = measure.hazard_rate
    rho_bar = measure.mean_recovery

    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_quarter)
    tau_all, weight_all, quarter_all = [], [], []
    for k in range(1, n + 1):
        left, dt = times[k - 1], grid.period(k)
        tau_all.append(left + (nodes + 1.0) * 0.5 * dt)
        weight_all.append(weights * 0.5 * dt)
        quarter_all.append(np.full(nodes_per_quarter, k))
    tau = np.concatenate(tau_all)
    wgt = np.concatenate(weight_all) * h * np.exp(-h * tau)
    kk = np.concatenate(quarter_all).astype(int)

    disc = np.exp(-r * tau)
    accr = cum[kk - 1] + (tau - times[kk - 1]) * disc
    alive = np.arange(1, n + 1)[None, :] >= kk[:, None]
    values = np.where(
        alive,
        (-spread * accr + (1.0 - rho_bar) * disc)[:, None],
        -spread * cum[1:][None, :],
    )

    survival = measure.survival(grid.horizon)
    expected = wgt @ values + survival * (-spread * cum[1:])
    default_mass = float(wgt.sum())
    expected.setflags(write=False)
    return default_mass, survival, expected


def expected_payoff(
    position: HedgedPosition,
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    measure: PhysicalMeasure,
    quad: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Expected present value of the position under the physical measure."""
    alpha = position.portfolio.array
    if len(alpha) != grid.n_quarters:
        raise ConfigurationError(
            f"portfolio has {len(alpha)} notionals for a grid of {grid.n_quarters} quarters"
        )
    default_mass, survival, expected = _expectation_basis(
        grid, curve, spread, measure, quad.tau_nodes_per_quarter
    )
    return position.cash * (default_mass + survival) + float(alpha @ expected)


class FairPrice(NamedTuple):
    """Fair price with an arbitrage flag for non-positive profit shares."""

    price: float
    arbitrage: bool


def fair_price(glb: float, lam: float, expected_payoff_value: float) -> FairPrice:
    """glb + lam * expected payoff; flagged when lam <= 0 admits buyer arbitrage."""
    return FairPrice(glb + lam * expected_payoff_value, arbitrage=lam <= 0.0)


def lambda_from_return(target_return: float) -> float:
    """Profit share implied by the expected rate of return on capital at risk."""
    if target_return <= -1.0:
        raise ValueError(f"expected return must exceed -1, got {target_return}")
    return 1.0 / (1.0 + target_return)


def return_from_lambda(lam: float) -> float:
    if lam <= 0.0:
        raise ValueError(f"profit share must be positive, got {lam}")
    return 1.0 / lam - 1.0


class RealizedOutcome(NamedTuple):
    """Realized P&L and rate of return on capital at risk along one path."""

    pnl: float
    rate_of_return: float


def realized_return(
    position: HedgedPosition,
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    lam: float,
    expected_payoff_value: float,
    tau: float,
    rho: float,
) -> RealizedOutcome:
    """P&L and return of a hedged position bought at price lam * expectation."""
    capital = lam * expected_payoff_value
    if capital == 0.0:
        raise UndefinedReturnError("capital at risk is zero; rate of return undefined")
    delta = position_value(position, grid, curve, spread, tau, rho)
    pnl = delta - capital
    return RealizedOutcome(pnl=pnl, rate_of_return=pnl / capital)


@dataclass(frozen=True)
class ValuationResult:
    """Valuation summary of an existing portfolio after optimal hedging."""

    expected_payoff: float
    glb: float
    lam: float
    fair_price: float
    max_loss: float
    expected_return: float
    solution: Optional[HedgeSolution] = None


def value_portfolio(
    old_portfolio: Portfolio,
    market: LiquidMarket,
    grid: TenorGrid,
    curve: DiscountCurve,
    measure: PhysicalMeasure,
    lam: float,
    quad: QuadratureConfig = QuadratureConfig(),
    discretization: Discretization | None = None,
    old_cash: float = 0.0,
) -> ValuationResult:
    """Hedge the portfolio, then derive the fair price and risk figures.

    The greatest lower bound on the seller's proceeds is minus the hedge
    cost; the fair price adds the negotiated share of the expected profit.
    """
    problem = HedgeProblem(
        old_portfolio, market, grid, curve, discretization or Discretization(), old_cash
    )
    solution = optimize_hedge(problem)
    if solution.is_unbounded:
        raise RuntimeError(
            "hedge cost is unbounded below; the quoted market admits arbitrage"
        )
    dbar = expected_payoff(solution.position, grid, curve, market.spread, measure, quad)
    glb = -solution.cost
    fp = fair_price(glb, lam, dbar)
    return ValuationResult(
        expected_payoff=dbar,
        glb=glb,
        lam=lam,
        fair_price=fp.price,
        max_loss=lam * dbar,
        expected_return=return_from_lambda(lam),
        solution=solution,
    )


@dataclass(frozen=True)
class BidAskRange:
    """Arbitrage-free quote range for one maturity.

    The ask must sit strictly below the least upper bound and the bid
    strictly above the greatest lower bound; the distances are the profit
    shares times the expected payoffs of the two hedged unit positions.
    """

    maturity_index: int
    lub_ask: float
    glb_bid: float
    expected_payoff_short: float
    expected_payoff_long: float
    lambda_short: float
    lambda_long: float

    def ask_at(self, lam: float) -> float:
        return self.lub_ask - lam * self.expected_payoff_short

    def bid_at(self, lam: float) -> float:
        return self.glb_bid + lam * self.expected_payoff_long

    @property
    def ask(self) -> float:
        return self.ask_at(self.lambda_short)

    @property
    def bid(self) -> float:
        return self.bid_at(self.lambda_long)


def bid_ask_range(
    market: LiquidMarket,
    grid: TenorGrid,
    curve: DiscountCurve,
    measure: PhysicalMeasure,
    m: int,
    lambda_short: float,
    lambda_long: float,
    quad: QuadratureConfig = QuadratureConfig(),
    discretization: Discretization | None = None,
) -> BidAskRange:
    """Bid/ask quotes for unit notional of the maturity-m contract."""
    if not 1 <= m <= grid.n_quarters:
        raise IndexError(f"maturity index {m} outside 1..{grid.n_quarters}")
    if lambda_short <= 0.0 or lambda_long <= 0.0:
        raise ValueError("profit shares must be positive")
    disc = discretization or Discretization()
    n = grid.n_quarters
    spread = market.spread

    short = optimize_hedge(HedgeProblem(Portfolio.single(n, m, -1.0), market, grid, curve, disc))
    long = optimize_hedge(HedgeProblem(Portfolio.single(n, m, +1.0), market, grid, curve, disc))
    if short.is_unbounded or long.is_unbounded:
        raise RuntimeError(
            "hedge cost is unbounded below; the quoted market admits arbitrage"
        )
    dbar_short = expected_payoff(short.position, grid, curve, spread, measure, quad)
    dbar_long = expected_payoff(long.position, grid, curve, spread, measure, quad)
    return BidAskRange(
        maturity_index=m,
        lub_ask=short.cost,
        glb_bid=-long.cost,
        expected_payoff_short=dbar_short,
        expected_payoff_long=dbar_long,
        lambda_short=lambda_short,
        lambda_long=lambda_long,
    )
