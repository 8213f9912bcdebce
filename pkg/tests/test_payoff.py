import math

import numpy as np
import pytest

from cdshedge.errors import ConfigurationError
from cdshedge.market import DiscountCurve, TenorGrid
from cdshedge.payoff import (
    HedgedPosition,
    Portfolio,
    accrual,
    cds_payoff,
    contract_values,
    interval_minimum,
    path_maximum,
    path_minimum,
    position_value,
    quarter_coefficients,
)
from cdshedge.study import EXAMPLE_PORTFOLIO

W = 0.05
R = 0.02


def brute_force_minimum(position, grid, curve, spread, points_per_quarter=500):
    """Independent minimum: dense per-quarter scan of the direct contract sums,
    right limits approximated by a tiny offset, recovery at both endpoints."""
    best = position_value(position, grid, curve, spread, grid.horizon + 1.0, 0.0)
    for k in range(1, grid.n_quarters + 1):
        left, right = grid.time(k - 1), grid.time(k)
        taus = np.linspace(left, right, points_per_quarter)
        taus[0] = left + 1e-9
        for tau in taus:
            for rho in (0.0, 1.0):
                value = position_value(position, grid, curve, spread, float(tau), rho)
                best = min(best, value)
    return best


class TestAccrual:
    def test_full_four_quarters(self, grid, curve):
        # oracle: direct four-term sum of discounted quarter lengths
        expected = sum(0.25 * math.exp(-R * 0.25 * k) for k in range(1, 5))
        assert accrual(grid, curve, 4, tau=2.0) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.987593, abs=1e-6)

    def test_at_first_payment(self, grid, curve):
        # oracle: a single discounted quarter
        expected = 0.25 * math.exp(-R * 0.25)
        for m in (1, 7, 21):
            assert accrual(grid, curve, m, tau=0.25) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.248753, abs=1e-6)

    def test_zero_rate_counts_quarters(self, grid):
        flat = DiscountCurve(0.0)
        for m in (1, 4, 21):
            assert accrual(grid, flat, m, tau=10.0) == pytest.approx(0.25 * m, abs=1e-15)

    def test_constant_beyond_maturity(self, grid, curve):
        full = accrual(grid, curve, 4, tau=1.0)
        for tau in (1.0000001, 2.7, 5.25, 99.0):
            assert accrual(grid, curve, 4, tau) == full

    def test_monotone_in_tau(self, grid, curve):
        taus = np.linspace(0.01, 6.0, 400)
        values = [accrual(grid, curve, 13, float(t)) for t in taus]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_domain(self, grid, curve):
        with pytest.raises(ValueError):
            accrual(grid, curve, 4, tau=0.0)
        with pytest.raises(IndexError):
            accrual(grid, curve, 0, tau=1.0)
        with pytest.raises(IndexError):
            accrual(grid, curve, 22, tau=1.0)


class TestCdsPayoff:
    def test_early_default(self, grid, curve):
        # oracle: premium accrued for 0.1y discounted at tau, plus loss leg
        disc = math.exp(-R * 0.1)
        expected = -W * 0.1 * disc + 0.6 * disc
        got = cds_payoff(grid, curve, 21, W, tau=0.1, rho=0.4)
        assert got == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.593811, abs=1e-6)

    def test_full_recovery_is_pure_premium(self, grid, curve):
        for tau in (0.1, 1.3, 5.25):
            got = cds_payoff(grid, curve, 21, W, tau, rho=1.0)
            assert got == pytest.approx(-W * accrual(grid, curve, 21, tau), abs=1e-15)

    def test_survival_value(self, grid, curve):
        # oracle: geometric sum of discounted quarters
        full = 0.25 * sum(math.exp(-R * 0.25 * k) for k in range(1, 22))
        got = cds_payoff(grid, curve, 21, W, tau=6.0, rho=0.3)
        assert got == pytest.approx(-W * full, abs=1e-15)
        assert got == pytest.approx(-0.248566, abs=1e-6)

    def test_loss_paid_at_exact_maturity(self, grid, curve):
        at = cds_payoff(grid, curve, 4, W, tau=1.0, rho=0.4)
        after = cds_payoff(grid, curve, 4, W, tau=1.0 + 1e-9, rho=0.4)
        assert at - after == pytest.approx(0.6 * math.exp(-R * 1.0), abs=1e-10)

    def test_jump_size_across_every_maturity(self, grid, curve):
        rng = np.random.default_rng(3)
        for m in (1, 8, 21):
            rho = float(rng.uniform(0.0, 0.99))
            t_m = grid.time(m)
            jump = cds_payoff(grid, curve, m, W, t_m, rho) - cds_payoff(
                grid, curve, m, W, t_m + 1e-9, rho
            )
            assert jump == pytest.approx((1.0 - rho) * math.exp(-R * t_m), abs=1e-10)

    def test_domain(self, grid, curve):
        with pytest.raises(ValueError):
            cds_payoff(grid, curve, 4, W, tau=1.0, rho=1.5)


class TestPositionValue:
    def test_cash_only(self, grid, curve):
        position = HedgedPosition(Portfolio.empty(21), cash=0.7)
        for tau, rho in [(0.3, 0.2), (9.0, 0.9)]:
            assert position_value(position, grid, curve, W, tau, rho) == 0.7

    def test_single_contract_matches_cds(self, grid, curve):
        position = HedgedPosition(Portfolio.single(21, 21, 1.0))
        assert position_value(position, grid, curve, W, 6.0, 0.5) == pytest.approx(
            cds_payoff(grid, curve, 21, W, 6.0, 0.5), abs=1e-15
        )

    def test_matches_direct_sum(self, grid, curve):
        rng = np.random.default_rng(11)
        alpha = rng.uniform(-1, 1, 21)
        position = HedgedPosition(Portfolio.from_array(alpha), cash=0.1)
        for _ in range(50):
            tau = float(rng.uniform(0.001, 6.0))
            rho = float(rng.uniform(0.0, 1.0))
            direct = 0.1 + sum(
                a * cds_payoff(grid, curve, m, W, tau, rho)
                for m, a in enumerate(alpha, start=1)
            )
            assert position_value(position, grid, curve, W, tau, rho) == pytest.approx(
                direct, abs=1e-12
            )

    def test_affine_in_recovery(self, grid, curve):
        rng = np.random.default_rng(7)
        for trial in range(10):
            alpha = rng.uniform(-1, 1, 21)
            position = HedgedPosition(Portfolio.from_array(alpha), cash=float(rng.normal()))
            for _ in range(100):
                tau = float(rng.uniform(0.001, 6.0))
                rho = float(rng.uniform(0.0, 1.0))
                at0 = position_value(position, grid, curve, W, tau, 0.0)
                at1 = position_value(position, grid, curve, W, tau, 1.0)
                got = position_value(position, grid, curve, W, tau, rho)
                assert got == pytest.approx(at1 + (1.0 - rho) * (at0 - at1), abs=1e-14)

    def test_length_mismatch(self, grid, curve):
        position = HedgedPosition(Portfolio.empty(20))
        with pytest.raises(ConfigurationError):
            position_value(position, grid, curve, W, 1.0, 0.5)

    def test_contract_values_vector(self, grid, curve):
        values = contract_values(grid, curve, W, 1.3, 0.4)
        for m in (1, 6, 21):
            assert values[m - 1] == pytest.approx(
                cds_payoff(grid, curve, m, W, 1.3, 0.4), abs=1e-15
            )


class TestQuarterCoefficients:
    def test_reconstruction_matches_direct(self, grid, curve):
        rng = np.random.default_rng(5)
        for _ in range(5):
            alpha = rng.uniform(-1, 1, 21)
            position = HedgedPosition(Portfolio.from_array(alpha), cash=float(rng.normal()))
            coeffs = quarter_coefficients(position, grid, curve, W)
            for _ in range(200):
                tau = float(rng.uniform(1e-6, 5.25))
                rho = float(rng.uniform(0.0, 1.0))
                k = grid.quarter_of(tau)
                via_coeffs = coeffs.value(k, tau - grid.time(k - 1), rho)
                direct = position_value(position, grid, curve, W, tau, rho)
                assert via_coeffs == pytest.approx(direct, abs=1e-12)

    def test_no_default_value(self, grid, curve):
        rng = np.random.default_rng(6)
        alpha = rng.uniform(-1, 1, 21)
        position = HedgedPosition(Portfolio.from_array(alpha), cash=0.3)
        coeffs = quarter_coefficients(position, grid, curve, W)
        direct = position_value(position, grid, curve, W, grid.horizon + 0.5, 0.7)
        assert coeffs.no_default == pytest.approx(direct, abs=1e-14)


class TestIntervalMinimum:
    def test_constant_quarter(self, grid, curve):
        position = HedgedPosition(Portfolio.empty(21), cash=0.4)
        coeffs = quarter_coefficients(position, grid, curve, W)
        value, tau = interval_minimum(coeffs, 3, rho=0.5)
        assert value == pytest.approx(0.4, abs=1e-15)
        assert grid.time(2) <= tau <= grid.time(3)

    def test_stationary_point_formula(self):
        # g(s) = A + (B s + C) e^{-r(t+s)} has its stationary point at
        # s* = 1/r - C/B; with r=0.02, B=-1, C=0.5 that is 50.5, far outside
        # any quarter, so the interval minimum sits at an endpoint.
        r, B, C, t_left = 0.02, -1.0, 0.5, 1.0
        s_star = 1.0 / r - C / B
        assert t_left + s_star == pytest.approx(51.5)
        g = lambda s: (B * s + C) * math.exp(-r * (t_left + s))
        dense = min(g(s) for s in np.linspace(0.0, 0.25, 20001))
        assert min(g(0.0), g(0.25)) == pytest.approx(dense, abs=1e-9)

    def test_matches_dense_scan(self, grid, curve):
        rng = np.random.default_rng(17)
        for _ in range(5):
            alpha = rng.uniform(-1, 1, 21)
            position = HedgedPosition(Portfolio.from_array(alpha), cash=0.0)
            coeffs = quarter_coefficients(position, grid, curve, W)
            k = int(rng.integers(1, 22))
            rho = float(rng.integers(0, 2))
            value, tau = interval_minimum(coeffs, k, rho)
            left = grid.time(k - 1)
            scan = min(
                position_value(position, grid, curve, W, float(t), rho)
                for t in np.linspace(left + 1e-9, grid.time(k), 2000)
            )
            assert value <= scan + 1e-12
            assert value == pytest.approx(scan, abs=1e-6)
            assert left <= tau <= grid.time(k)


class TestPathMinimum:
    def test_cash_only(self, grid, curve):
        position = HedgedPosition(Portfolio.empty(21), cash=1.0)
        value, path = path_minimum(position, grid, curve, W)
        assert value == pytest.approx(1.0, abs=1e-15)

    def test_single_long_contract(self, grid, curve):
        # worst case of a paid-up long protection: survive and pay all premiums
        position = HedgedPosition(Portfolio.single(21, 21, 1.0))
        value, path = path_minimum(position, grid, curve, W)
        full = 0.25 * sum(math.exp(-R * 0.25 * k) for k in range(1, 22))
        assert value == pytest.approx(-W * full, abs=1e-12)

    def test_example_portfolio_unhedged_dips_negative(self, grid, curve):
        value, _ = path_minimum(HedgedPosition(EXAMPLE_PORTFOLIO), grid, curve, W)
        assert value < 0.0

    def test_agrees_with_brute_force(self, grid, curve):
        rng = np.random.default_rng(23)
        for _ in range(8):
            alpha = rng.uniform(-1, 1, 21)
            position = HedgedPosition(Portfolio.from_array(alpha), cash=float(rng.normal(0, 0.2)))
            exact, _ = path_minimum(position, grid, curve, W)
            scan = brute_force_minimum(position, grid, curve, W)
            assert exact <= scan + 1e-12
            assert exact == pytest.approx(scan, abs=1e-6)

    def test_maximum_mirrors_minimum(self, grid, curve):
        rng = np.random.default_rng(29)
        alpha = rng.uniform(-1, 1, 21)
        position = HedgedPosition(Portfolio.from_array(alpha))
        negated = HedgedPosition(Portfolio.from_array(-alpha))
        max_value, _ = path_maximum(position, grid, curve, W)
        min_value, _ = path_minimum(negated, grid, curve, W)
        assert max_value == pytest.approx(-min_value, abs=1e-14)

    def test_argmin_path_attains_value(self, grid, curve):
        rng = np.random.default_rng(31)
        for _ in range(5):
            alpha = rng.uniform(-1, 1, 21)
            position = HedgedPosition(Portfolio.from_array(alpha))
            value, path = path_minimum(position, grid, curve, W)
            if math.isinf(path.tau):
                attained = position_value(position, grid, curve, W, grid.horizon + 1.0, 0.0)
            else:
                # right limits sit a hair inside the quarter
                tau = np.nextafter(path.tau, math.inf)
                attained = position_value(position, grid, curve, W, float(tau), path.rho)
            assert attained == pytest.approx(value, abs=1e-9)
