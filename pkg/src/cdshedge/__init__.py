"""Superhedge price bounds, valuation, and risk densities for illiquid
single-name CDS portfolios in an incomplete market."""

from .config import AppConfig, ModelInputs, build_inputs, config_hash, load_config
from .density import (
    BinningConfig,
    DensityEstimate,
    DiscreteSpectrum,
    cdf_query,
    constant_recovery_spectrum,
    payoff_density,
    pnl_density,
)
from .market import (
    ConstantRecovery,
    DiscountCurve,
    LiquidMarket,
    PhysicalMeasure,
    PointMass,
    TenorGrid,
    TruncatedNormalRecovery,
    default_interval_probability,
    hazard_from_pd1,
    interpolated_upfront,
    recovery_density,
)
from .optimizer import (
    BoundPair,
    Discretization,
    HedgeProblem,
    HedgeSolution,
    LinearProgram,
    build_constraints,
    no_arbitrage_bounds,
    optimize_hedge,
    solve_lp,
)
from .payoff import (
    HedgedPosition,
    Path,
    Portfolio,
    QuarterCoefficients,
    accrual,
    cds_payoff,
    contract_values,
    interval_minimum,
    path_maximum,
    path_minimum,
    position_value,
    quarter_coefficients,
)
from .study import (
    EXAMPLE_PORTFOLIO,
    CdfEstimate,
    StudyConfig,
    StudyResult,
    TrialRecord,
    bounds_sweep,
    lmax_ratio_study,
    market_variant,
    random_portfolio,
)
from .valuation import (
    BidAskRange,
    FairPrice,
    QuadratureConfig,
    ValuationResult,
    bid_ask_range,
    expected_payoff,
    fair_price,
    lambda_from_return,
    realized_return,
    return_from_lambda,
    value_portfolio,
)
from .vanilla import (
    VanillaBound,
    bracketing_maturities,
    comparison_table,
    describe_vanilla,
    vanilla_ask_bound,
    vanilla_bid_bound,
)

__version__ = "0.1.0"
