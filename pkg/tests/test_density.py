import math

import numpy as np
import pytest

from cdshedge.density import (
    BinningConfig,
    cdf_query,
    constant_recovery_spectrum,
    payoff_density,
    pnl_density,
)
from cdshedge.errors import RecoveryLawError
from cdshedge.market import ConstantRecovery, PhysicalMeasure, TruncatedNormalRecovery
from cdshedge.optimizer import HedgeProblem, optimize_hedge
from cdshedge.payoff import HedgedPosition, Portfolio, quarter_coefficients
from cdshedge.study import EXAMPLE_PORTFOLIO
from cdshedge.valuation import expected_payoff

W = 0.05


@pytest.fixture(scope="module")
def hedged_example(market, grid, curve):
    solution = optimize_hedge(HedgeProblem(EXAMPLE_PORTFOLIO, market, grid, curve))
    return solution.position


@pytest.fixture(scope="module")
def example_density(hedged_example, grid, curve, measure):
    return payoff_density(hedged_example, grid, curve, W, measure)


class TestPayoffDensity:
    def test_total_mass_is_one(self, example_density):
        assert example_density.total_mass() == pytest.approx(1.0, abs=1e-6)

    def test_total_mass_random_positions(self, grid, curve, measure):
        rng = np.random.default_rng(55)
        for _ in range(3):
            position = HedgedPosition(
                Portfolio.from_array(rng.uniform(-1, 1, 21)), cash=float(rng.normal())
            )
            estimate = payoff_density(position, grid, curve, W, measure,
                                      BinningConfig(n_bins=150))
            assert estimate.total_mass() == pytest.approx(1.0, abs=1e-6)

    def test_survival_atom(self, example_density, measure, grid):
        (value, mass), = example_density.atoms
        assert mass == pytest.approx(measure.survival(grid.horizon), abs=1e-12)

    def test_continuous_mass_complements_atom(self, example_density, measure, grid):
        continuous = float(example_density.bin_masses.sum())
        assert continuous == pytest.approx(1.0 - measure.survival(grid.horizon), abs=1e-6)

    def test_mean_matches_quadrature(self, hedged_example, example_density, grid, curve, measure):
        dbar = expected_payoff(hedged_example, grid, curve, W, measure)
        assert example_density.mean() == pytest.approx(dbar, abs=1e-4)

    def test_mean_matches_quadrature_unhedged(self, grid, curve, measure):
        position = HedgedPosition(EXAMPLE_PORTFOLIO, cash=0.4)
        estimate = payoff_density(position, grid, curve, W, measure)
        dbar = expected_payoff(position, grid, curve, W, measure)
        assert estimate.mean() == pytest.approx(dbar, abs=1e-4)

    def test_masses_nonnegative(self, example_density):
        assert np.all(example_density.bin_masses >= -1e-15)

    def test_constant_law_rejected(self, grid, curve):
        measure = PhysicalMeasure(0.35, ConstantRecovery(0.4))
        position = HedgedPosition(Portfolio.single(21, 14, 1.0))
        with pytest.raises(RecoveryLawError, match="constant_recovery_spectrum"):
            payoff_density(position, grid, curve, W, measure)


class TestCdfQuery:
    def test_full_support(self, example_density):
        edges = example_density.bin_edges
        total = cdf_query(example_density, edges[0] - 1.0, edges[-1] + 1.0)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_empty_interval(self, example_density):
        # a point with no atom carries no mass
        mid = float(example_density.bin_edges[3])
        assert cdf_query(example_density, mid, mid) == pytest.approx(0.0, abs=1e-12)

    def test_atom_at_endpoint_included(self, example_density):
        (value, mass), = example_density.atoms
        eps = 1e-9
        got = cdf_query(example_density, value - eps, value + eps)
        assert got >= mass

    def test_domain(self, example_density):
        with pytest.raises(ValueError):
            cdf_query(example_density, 1.0, 0.0)

    def test_halves_sum_to_total(self, example_density):
        edges = example_density.bin_edges
        mid = float(0.5 * (edges[0] + edges[-1]))
        lower = cdf_query(example_density, edges[0] - 1.0, mid)
        upper = cdf_query(example_density, mid, edges[-1] + 1.0)
        # mid sits strictly inside a bin and carries no atom
        assert lower + upper == pytest.approx(example_density.total_mass(), abs=1e-9)

    def test_stable_under_bin_refinement(self, grid, curve, measure):
        position = HedgedPosition(EXAMPLE_PORTFOLIO, cash=0.4)
        coarse = payoff_density(position, grid, curve, W, measure,
                                BinningConfig(n_bins=400))
        fine = payoff_density(position, grid, curve, W, measure,
                              BinningConfig(n_bins=1600))
        for a, b in [(-0.05, 0.8), (0.3, 1.9), (0.9, 2.2), (-1.0, 3.5)]:
            assert cdf_query(coarse, a, b) == pytest.approx(
                cdf_query(fine, a, b), abs=1e-3
            )


class TestPnlDensity:
    def test_zero_share_is_identity(self, example_density):
        shifted = pnl_density(example_density, 0.0, 0.7)
        assert np.array_equal(shifted.bin_edges, example_density.bin_edges)
        assert shifted.atoms == example_density.atoms

    def test_shift_preserves_mass(self, example_density):
        shifted = pnl_density(example_density, 0.8, 0.53)
        assert shifted.total_mass() == pytest.approx(example_density.total_mass(), abs=1e-12)

    def test_support_minimum_is_max_loss(self, hedged_example, example_density, grid, curve, measure):
        from cdshedge.payoff import path_minimum

        dbar = expected_payoff(hedged_example, grid, curve, W, measure)
        lam = 0.8
        shifted = pnl_density(example_density, lam, dbar)
        worst, _ = path_minimum(hedged_example, grid, curve, W)
        # hedged worst value is zero, so the loss floor is the capital at risk
        assert worst == pytest.approx(0.0, abs=1e-7)
        assert shifted.mean() == pytest.approx(example_density.mean() - lam * dbar, abs=1e-12)


class TestConstantRecoverySpectrum:
    def test_probabilities_telescope_exactly(self, grid, curve):
        measure = PhysicalMeasure(0.35667494393873245, ConstantRecovery(0.4))
        position = HedgedPosition(EXAMPLE_PORTFOLIO)
        spectrum = constant_recovery_spectrum(position, grid, curve, W, measure)
        assert spectrum.total_mass() == pytest.approx(1.0, abs=1e-12)
        # oracle: first-quarter default probability
        assert spectrum.probabilities[0] == pytest.approx(1.0 - 0.7**0.25, abs=1e-12)

    def test_values_average_quarter_ends(self, grid, curve):
        measure = PhysicalMeasure(0.4, ConstantRecovery(0.3))
        position = HedgedPosition(Portfolio.single(21, 9, 1.0), cash=0.1)
        spectrum = constant_recovery_spectrum(position, grid, curve, W, measure)
        coeffs = quarter_coefficients(position, grid, curve, W)
        for k in (1, 5, 9, 20):
            expected = 0.5 * (coeffs.value(k, 0.0, 0.3) + coeffs.value(k, 0.25, 0.3))
            assert spectrum.values[k - 1] == pytest.approx(expected, abs=1e-15)

    def test_full_recovery_single_contract_monotone(self, grid, curve):
        # pure premium leg: later defaults owe more premium, values fall
        measure = PhysicalMeasure(0.35, ConstantRecovery(1.0))
        position = HedgedPosition(Portfolio.single(21, 21, 1.0))
        spectrum = constant_recovery_spectrum(position, grid, curve, W, measure)
        assert np.all(np.diff(spectrum.values) < 0.0)
        assert np.all(spectrum.values < 0.0)

    def test_smooth_law_rejected(self, grid, curve, measure):
        position = HedgedPosition(Portfolio.single(21, 14, 1.0))
        with pytest.raises(RecoveryLawError, match="payoff_density"):
            constant_recovery_spectrum(position, grid, curve, W, measure)


class TestWeakLimit:
    def test_narrow_recovery_concentrates_on_spectrum(self, grid, curve):
        """As the recovery law collapses to a point, the histogram mass near
        each quarter's spectrum value approaches that quarter's probability."""
        rho_c = 0.4
        hazard = 0.35667494393873245
        # ladder book: strictly decreasing alive notional keeps the quarter
        # values separated while each quarter stays narrow
        alive = 0.25 - 0.0235 * np.arange(21)
        alpha = np.append(-np.diff(alive), alive[-1])
        position = HedgedPosition(Portfolio.from_array(alpha), cash=0.05)

        spectrum = constant_recovery_spectrum(
            position, grid, curve, W, PhysicalMeasure(hazard, ConstantRecovery(rho_c))
        )
        window = 0.005

        # preconditions: quarter values separated and quarters internally narrow
        coeffs = quarter_coefficients(position, grid, curve, W)
        widths = [
            abs(coeffs.value(k, 0.0, rho_c) - coeffs.value(k, grid.period(k), rho_c))
            for k in range(1, 22)
        ]
        assert max(widths) < 0.8 * window
        points = np.append(spectrum.values, spectrum.survival_value)
        gaps = np.abs(points[:, None] - points[None, :])
        np.fill_diagonal(gaps, np.inf)
        assert gaps.min() > 2.5 * window

        narrow = PhysicalMeasure(hazard, TruncatedNormalRecovery(rho_c, 1e-4))
        estimate = payoff_density(
            position, grid, curve, W, narrow,
            BinningConfig(n_bins=3000, tau_nodes_per_quarter=128),
        )
        for value, prob in zip(spectrum.values, spectrum.probabilities):
            mass = cdf_query(estimate, value - window, value + window)
            assert mass == pytest.approx(prob, abs=1e-3)
