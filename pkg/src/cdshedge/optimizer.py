"""Cost-minimizing static superhedge via linear programming.

The hedge problem: choose cash beta and notionals of the liquid contracts so
that the combined position pays a non-negative amount on every default path
(tau, rho) and on survival, at minimum upfront cost

    minimize  beta + sum_m u_m * alpha_m      over liquid m.

The path continuum is sampled per quarter (right limit, interior points,
endpoint; recovery at 0 and 1, which suffices because the value is affine in
recovery).  The sampled LP is solved, then verified against the exact
piecewise minimum; violated paths are appended as cutting planes until the
true minimum is within tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigurationError, ConvergenceError
from .market import DiscountCurve, LiquidMarket, TenorGrid
from .payoff import (
    HedgedPosition,
    Path,
    Portfolio,
    _grid_discount,
    global_minimum,
    interval_minimum,
    quarter_coefficients,
)

BINDING_TOL = 1e-7

# 1e-10 is the tightest feasibility tolerance the solver accepts
_LP_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class Discretization:
    """Path sampling and refinement controls for the hedge LP."""

    interior_points_per_quarter: int = 8
    refinement_tolerance: float = 1e-9
    max_refinement_rounds: int = 20

    def __post_init__(self):
        if self.interior_points_per_quarter < 0:
            raise ConfigurationError("interior point count must be non-negative")
        if self.refinement_tolerance <= 0:
            raise ConfigurationError("refinement tolerance must be positive")


class SamplePath(NamedTuple):
    """A sampled constraint path.  quarter None marks the survival row;
    offset 0 stands for the right limit at the quarter's left edge."""

    quarter: Optional[int]
    offset: float
    rho: float

    def tau(self, grid: TenorGrid) -> float:
        if self.quarter is None:
            return math.inf
        return grid.time(self.quarter - 1) + self.offset


@dataclass(frozen=True)
class HedgeProblem:
    """Inputs of one superhedge optimization."""

    old_portfolio: Portfolio
    market: LiquidMarket
    grid: TenorGrid
    curve: DiscountCurve
    discretization: Discretization = field(default_factory=Discretization)
    old_cash: float = 0.0

    def __post_init__(self):
        if len(self.old_portfolio) != self.grid.n_quarters:
            raise ConfigurationError(
                f"portfolio has {len(self.old_portfolio)} notionals for a grid "
                f"of {self.grid.n_quarters} quarters"
            )
        bad = [m for m in self.market.indices if not 1 <= m <= self.grid.n_quarters]
        if bad:
            raise ConfigurationError(f"quoted maturities {bad} outside the tenor grid")


@dataclass(frozen=True)
class LinearProgram:
    """Sampled hedge LP: minimize objective @ x subject to matrix @ x >= rhs.

    Decision variables are x = [beta, alpha_m for each liquid m].  Every row
    states that the hedged position's value at one sampled path is
    non-negative; the old portfolio's payoff sits in the right-hand side.
    """

    objective: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    paths: tuple[SamplePath, ...]
    variables: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_variables(self) -> int:
        return self.matrix.shape[1]

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Slack of every row at x; equals the position value at each path."""
        return self.matrix @ x - self.rhs


class LpSolution(NamedTuple):
    x: Optional[np.ndarray]
    objective: float
    status: str  # "optimal" | "unbounded"


@dataclass(frozen=True)
class HedgeSolution:
    """Optimizer output.

    ``cost`` is beta plus the quoted cost of the hedge notionals;
    ``binding_paths`` are the paths where the hedged position's value is zero
    within tolerance, and ``max_violation`` the worst remaining constraint
    violation of the exact (non-sampled) problem.
    """

    hedge_notionals: dict[int, float]
    cash: float
    cost: float
    binding_paths: tuple[Path, ...]
    max_violation: float
    position: Optional[HedgedPosition]
    status: str = "optimal"
    refinement_rounds: int = 0

    @property
    def is_unbounded(self) -> bool:
        return self.status == "unbounded"


class BoundPair(NamedTuple):
    """No-arbitrage price bounds: greatest lower bid, least upper ask."""

    glb_bid: float
    lub_ask: float


@lru_cache(maxsize=32)
def _sample_basis(
    grid: TenorGrid, curve: DiscountCurve, spread: float, interior_points: int
):
    """Sampled paths and the per-contract payoff matrix, shared across problems.

    Returns (paths, D) with D[i, m-1] the value of the unit maturity-m CDS at
    path i.  The last row is the survival path.
    """
    times, _, cum = _grid_discount(grid, curve)
    n = grid.n_quarters
    r = curve.risk_free_rate

    quarters, offsets, rhos = [], [], []
    for k in range(1, n + 1):
        dt = grid.period(k)
        steps = np.arange(0, interior_points + 2) / (interior_points + 1)
        for s in steps * dt:
            for rho in (0.0, 1.0):
                quarters.append(k)
                offsets.append(float(s))
                rhos.append(rho)

    kk = np.array(quarters)
    ss = np.array(offsets)
    rr = np.array(rhos)
    tau = times[kk - 1] + ss
    disc = np.exp(-r * tau)
    accr = cum[kk - 1] + ss * disc

    m_idx = np.arange(1, n + 1)
    alive = m_idx[None, :] >= kk[:, None]
    live_value = (-spread * accr + (1.0 - rr) * disc)[:, None]
    dead_value = -spread * cum[1:][None, :]
    matrix = np.where(alive, live_value, dead_value)

    survival = -spread * cum[1:]
    matrix = np.vstack([matrix, survival])
    matrix.setflags(write=False)

    paths = tuple(
        SamplePath(int(k), s, rho) for k, s, rho in zip(quarters, offsets, rhos)
    ) + (SamplePath(None, math.inf, 0.0),)
    return paths, matrix


def _contract_row(
    grid: TenorGrid, curve: DiscountCurve, spread: float, path: SamplePath
) -> np.ndarray:
    """Per-contract payoff vector at one sampled path (right limits exact)."""
    times, _, cum = _grid_discount(grid, curve)
    n = grid.n_quarters
    if path.quarter is None:
        return -spread * cum[1:]
    k = path.quarter
    disc = math.exp(-curve.risk_free_rate * (times[k - 1] + path.offset))
    accr = cum[k - 1] + path.offset * disc
    row = np.where(
        np.arange(1, n + 1) >= k,
        -spread * accr + (1.0 - path.rho) * disc,
        -spread * cum[1:],
    )
    return row


def build_constraints(problem: HedgeProblem) -> LinearProgram:
    """Assemble the sampled LP for the given problem."""
    market = problem.market
    paths, contract_matrix = _sample_basis(
        problem.grid,
        problem.curve,
        market.spread,
        problem.discretization.interior_points_per_quarter,
    )
    liquid = list(market.indices)
    columns = [np.ones(contract_matrix.shape[0])]
    columns += [contract_matrix[:, m - 1] for m in liquid]
    matrix = np.column_stack(columns)
    rhs = -(contract_matrix @ problem.old_portfolio.array) - problem.old_cash
    objective = np.array([1.0] + [market.upfront(m) for m in liquid])
    variables = ("cash",) + tuple(f"m{m}" for m in liquid)
    return LinearProgram(objective, matrix, rhs, paths, variables)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the minimization; deterministic, reports unboundedness as a status."""
    bounds = [(None, None)] * lp.n_variables
    result = linprog(
        lp.objective,
        A_ub=-lp.matrix,
        b_ub=-lp.rhs,
        bounds=bounds,
        method="highs",
        options=_LP_OPTIONS,
    )
    if result.status == 4:
        # presolve can leave "infeasible or unbounded" undecided; rerun without
        result = linprog(
            lp.objective,
            A_ub=-lp.matrix,
            b_ub=-lp.rhs,
            bounds=bounds,
            method="highs",
            options={**_LP_OPTIONS, "presolve": False},
        )
    if result.status == 0:
        return LpSolution(np.asarray(result.x), float(result.fun), "optimal")
    if result.status == 3:
        return LpSolution(None, -math.inf, "unbounded")
    raise RuntimeError(f"LP solve failed (status {result.status}): {result.message}")


def _append_row(lp: LinearProgram, problem: HedgeProblem, path: SamplePath) -> LinearProgram:
    contract = _contract_row(problem.grid, problem.curve, problem.market.spread, path)
    hedge_cols = [contract[m - 1] for m in problem.market.indices]
    row = np.array([1.0] + hedge_cols)
    rhs_value = -float(contract @ problem.old_portfolio.array) - problem.old_cash
    return LinearProgram(
        lp.objective,
        np.vstack([lp.matrix, row]),
        np.append(lp.rhs, rhs_value),
        lp.paths + (path,),
        lp.variables,
    )


def _hedged_position(problem: HedgeProblem, x: np.ndarray) -> HedgedPosition:
    alpha = problem.old_portfolio.array.copy()
    for value, m in zip(x[1:], problem.market.indices):
        alpha[m - 1] += value
    return HedgedPosition(Portfolio.from_array(alpha), problem.old_cash + float(x[0]))


def _binding_paths(coeffs, grid: TenorGrid) -> tuple[Path, ...]:
    found = []
    for k in range(1, grid.n_quarters + 1):
        for rho in (0.0, 1.0):
            value, tau = interval_minimum(coeffs, k, rho)
            if abs(value) <= BINDING_TOL:
                found.append(Path(tau, rho))
    if abs(coeffs.no_default) <= BINDING_TOL:
        found.append(Path(math.inf, 0.0))
    return tuple(dict.fromkeys(found))


def _beta_only_solution(problem: HedgeProblem) -> HedgeSolution:
    """Exact solution when no liquid contracts are available: cash must lift
    the worst path of the existing portfolio to zero."""
    base = HedgedPosition(problem.old_portfolio, problem.old_cash)
    coeffs = quarter_coefficients(base, problem.grid, problem.curve, problem.market.spread)
    worst = global_minimum(coeffs)
    beta = -worst.value
    position = HedgedPosition(problem.old_portfolio, problem.old_cash + beta)
    coeffs = quarter_coefficients(position, problem.grid, problem.curve, problem.market.spread)
    return HedgeSolution(
        hedge_notionals={},
        cash=beta,
        cost=beta,
        binding_paths=_binding_paths(coeffs, problem.grid),
        max_violation=max(0.0, -global_minimum(coeffs).value),
        position=position,
    )


def optimize_hedge(problem: HedgeProblem) -> HedgeSolution:
    """Solve the superhedge problem to the exact path continuum.

    Solves the sampled LP, checks the candidate against the closed-form path
    minimum, and appends a cutting plane at any violating path until the exact
    minimum is within the refinement tolerance.
    """
    if problem.market.is_empty():
        return _beta_only_solution(problem)

    spread = problem.market.spread
    tol = problem.discretization.refinement_tolerance
    lp = build_constraints(problem)
    rounds = 0
    while True:
        solution = solve_lp(lp)
        if solution.status == "unbounded":
            return HedgeSolution(
                hedge_notionals={},
                cash=math.nan,
                cost=-math.inf,
                binding_paths=(),
                max_violation=math.nan,
                position=None,
                status="unbounded",
                refinement_rounds=rounds,
            )
        position = _hedged_position(problem, solution.x)
        coeffs = quarter_coefficients(position, problem.grid, problem.curve, spread)
        worst = global_minimum(coeffs)
        if worst.value >= -tol:
            break
        if rounds >= problem.discretization.max_refinement_rounds:
            raise ConvergenceError(
                f"constraint refinement stalled after {rounds} rounds "
                f"(residual violation {-worst.value:.3e})",
                residual=-worst.value,
            )
        lp = _append_row(lp, problem, SamplePath(worst.quarter, worst.offset, worst.rho))
        rounds += 1

    x = solution.x
    hedge = {m: float(v) for m, v in zip(problem.market.indices, x[1:])}
    return HedgeSolution(
        hedge_notionals=hedge,
        cash=float(x[0]),
        cost=float(lp.objective @ x),
        binding_paths=_binding_paths(coeffs, problem.grid),
        max_violation=max(0.0, -worst.value),
        position=position,
        refinement_rounds=rounds,
    )


def no_arbitrage_bounds(
    market: LiquidMarket,
    grid: TenorGrid,
    curve: DiscountCurve,
    m: int,
    discretization: Discretization | None = None,
) -> BoundPair:
    """Price bounds for the maturity-m contract from the two superhedges.

    The ask bound is the cost of hedging a short-protection unit; the bid
    bound is minus the cost of hedging a long-protection unit.  At liquid
    maturities both collapse to the market quote.
    """
    disc = discretization or Discretization()
    n = grid.n_quarters
    short = HedgeProblem(Portfolio.single(n, m, -1.0), market, grid, curve, disc)
    long = HedgeProblem(Portfolio.single(n, m, +1.0), market, grid, curve, disc)
    ask = optimize_hedge(short).cost
    bid = -optimize_hedge(long).cost
    return BoundPair(glb_bid=bid, lub_ask=ask)
