"""Simulation studies: maximum-loss reduction on random portfolios, and the
bounds-versus-maturity sweep.

Every study is deterministic.  Trial t draws its portfolio from a PCG64
generator seeded with ``numpy.random.SeedSequence(master_seed,
spawn_key=(t,))``, so a single trial can be replayed in isolation and the
same portfolio sequence is shared by every market variant run under the same
master seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import AppConfig, ModelInputs, build_inputs
from .errors import InterpolationRangeError, NoBracketingQuoteError, StudyAbortedError
from .market import LiquidMarket, interpolated_upfront
from .optimizer import Discretization, HedgeProblem, no_arbitrage_bounds, optimize_hedge
from .payoff import Portfolio
from .valuation import QuadratureConfig, expected_payoff
from .vanilla import vanilla_ask_bound, vanilla_bid_bound

#: Liquid maturity-index sets of the three market variants (5 yearly quotes,
#: odd years only, 5-year point only).
VARIANT_INDICES: dict[str, tuple[int, ...]] = {
    "a": (5, 9, 13, 17, 21),
    "b": (5, 13, 21),
    "c": (21,),
}

#: Bundled 21-quarter example portfolio used by the documentation, the
#: regression studies, and the `paper-example` CLI fixture.
EXAMPLE_PORTFOLIO = Portfolio((
    0.2190, 0.9513, 0.0744, 0.3669, 0.2543, -0.2179, 0.7840, 0.3894,
    0.1945, 0.6885, 0.7642, -0.9360, -0.8572, 0.5786, -0.1819,
    0.7254, 0.1285, -0.8874, -0.0712, -0.7650, 0.0290,
))


def market_variant(market: LiquidMarket, variant: str) -> LiquidMarket:
    """Restrict the quoted market to one of the named maturity sets."""
    try:
        indices = VARIANT_INDICES[variant]
    except KeyError:
        raise ValueError(f"unknown market variant {variant!r}") from None
    return market.restricted_to(indices)


def random_portfolio(master_seed: int, trial_index: int, n: int) -> Portfolio:
    """Uniform [-1, 1] notionals from the trial's dedicated PCG64 stream."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    rng = np.random.Generator(np.random.PCG64(seq))
    return Portfolio.from_array(rng.uniform(-1.0, 1.0, n))


@dataclass(frozen=True)
class StudyConfig:
    """Controls of the maximum-loss ratio study."""

    variant: str = "a"
    n_trials: int = 1000
    master_seed: int = 7
    lam: float = 0.8
    discretization: Discretization = field(default_factory=Discretization)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("need at least one trial")
        if self.variant not in VARIANT_INDICES:
            raise ValueError(f"unknown market variant {self.variant!r}")


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    portfolio: Portfolio
    lmax_hedged: float
    lmax_unhedged: float

    @property
    def ratio(self) -> float:
        return self.lmax_hedged / self.lmax_unhedged


@dataclass(frozen=True)
class CdfEstimate:
    """Empirical CDF of the stored sample."""

    sorted_values: np.ndarray

    @classmethod
    def from_values(cls, values) -> "CdfEstimate":
        return cls(np.sort(np.asarray(values, dtype=float)))

    def __call__(self, x: float) -> float:
        n = len(self.sorted_values)
        return float(np.searchsorted(self.sorted_values, x, side="right")) / n

    @property
    def mean(self) -> float:
        return float(self.sorted_values.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.sorted_values))

    @property
    def max(self) -> float:
        return float(self.sorted_values[-1])


@dataclass(frozen=True)
class StudyResult:
    variant: str
    records: tuple[TrialRecord, ...]

    @property
    def ratios(self) -> np.ndarray:
        return np.array([rec.ratio for rec in self.records])

    @property
    def cdf(self) -> CdfEstimate:
        return CdfEstimate.from_values(self.ratios)


def lmax_ratio_study(config: StudyConfig, inputs: Optional[ModelInputs] = None) -> StudyResult:
    """Maximum possible loss with and without market instruments, per trial.

    Each random portfolio is hedged twice: with the variant's liquid
    contracts, and with cash alone.  The capital at risk lam * E[value] of
    the two hedged positions gives the stored ratio; lam cancels in it.
    """
    inputs = inputs or build_inputs(AppConfig())
    grid, curve, measure = inputs.grid, inputs.curve, inputs.measure
    market = market_variant(inputs.market, config.variant)
    empty = LiquidMarket(market.spread, ())
    spread = market.spread

    records = []
    for t in range(config.n_trials):
        portfolio = random_portfolio(config.master_seed, t, grid.n_quarters)
        try:
            hedged = optimize_hedge(
                HedgeProblem(portfolio, market, grid, curve, config.discretization)
            )
            if hedged.is_unbounded:
                raise RuntimeError("unbounded hedge cost")
            unhedged = optimize_hedge(
                HedgeProblem(portfolio, empty, grid, curve, config.discretization)
            )
            dbar_h = expected_payoff(
                hedged.position, grid, curve, spread, measure, config.quadrature
            )
            dbar_u = expected_payoff(
                unhedged.position, grid, curve, spread, measure, config.quadrature
            )
        except Exception as exc:
            raise StudyAbortedError(
                f"trial {t} failed under variant {config.variant!r} "
                f"(master seed {config.master_seed}): {exc}",
                trial_index=t,
                master_seed=config.master_seed,
            ) from exc
        records.append(
            TrialRecord(
                trial_index=t,
                portfolio=portfolio,
                lmax_hedged=config.lam * dbar_h,
                lmax_unhedged=config.lam * dbar_u,
            )
        )
    return StudyResult(variant=config.variant, records=tuple(records))


@dataclass(frozen=True)
class BoundsRow:
    """One maturity of the bounds sweep; None marks a value that does not exist."""

    maturity_index: int
    opt_ask: float
    opt_bid: float
    van_ask: Optional[float]
    van_bid: float
    interpolated: Optional[float]


def bounds_sweep(
    inputs: Optional[ModelInputs] = None,
    discretization: Discretization | None = None,
) -> list[BoundsRow]:
    """Optimizer and single-instrument bounds plus the interpolated quote,
    for every maturity index of the grid."""
    inputs = inputs or build_inputs(AppConfig())
    grid, curve, market = inputs.grid, inputs.curve, inputs.market
    rows = []
    for m in range(1, grid.n_quarters + 1):
        bid, ask = no_arbitrage_bounds(market, grid, curve, m, discretization)
        try:
            van_ask = vanilla_ask_bound(market, grid, curve, m)
        except NoBracketingQuoteError:
            van_ask = None
        van_bid = vanilla_bid_bound(market, grid, curve, m)
        try:
            interp = interpolated_upfront(market, grid, m)
        except InterpolationRangeError:
            interp = None
        rows.append(BoundsRow(m, ask, bid, van_ask, van_bid, interp))
    return rows


def asymmetry_ratio(row: BoundsRow) -> Optional[float]:
    """Distance of the ask bound above the interpolated quote, relative to the
    distance of the bid bound below it.  None when not defined."""
    if row.interpolated is None:
        return None
    gap_bid = row.interpolated - row.opt_bid
    if gap_bid == 0.0:
        return None
    return (row.opt_ask - row.interpolated) / gap_bid
