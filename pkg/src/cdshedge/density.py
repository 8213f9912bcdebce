"""Probability law of the realized present value of a hedged position.

With a smooth recovery law the value has a continuous part on default plus a
single atom at the survival value.  Each quarter is cut into uniform
default-time slices carrying their exact default probabilities; inside a
slice the recovery law maps through the affine value function into the
histogram bins via exact CDF differences, so the total mass is preserved no
matter how coarse the slicing.  Bin masses are reported as probability mass
per bin, not as a density.

Under a constant recovery rate the smoothing disappears and the law is
essentially discrete: one value per quarter with the quarter's default
probability, plus the survival atom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, RecoveryLawError
from .market import ConstantRecovery, DiscountCurve, PhysicalMeasure, TenorGrid, TruncatedNormalRecovery
from .payoff import (
    HedgedPosition,
    path_maximum,
    path_minimum,
    quarter_coefficients,
)

_DEGENERATE_SLOPE = 1e-15


@dataclass(frozen=True)
class BinningConfig:
    """Histogram controls; bounds default to the exact path extrema plus margin."""

    n_bins: int = 400
    lo: Optional[float] = None
    hi: Optional[float] = None
    margin: float = 0.01
    tau_nodes_per_quarter: int = 64

    def __post_init__(self):
        if self.n_bins < 1:
            raise ConfigurationError("need at least one bin")
        if self.tau_nodes_per_quarter < 1:
            raise ConfigurationError("need at least one default-time node per quarter")


@dataclass(frozen=True)
class DensityEstimate:
    """Histogram of the continuous part plus discrete atoms (value, mass)."""

    bin_edges: np.ndarray
    bin_masses: np.ndarray
    atoms: tuple[tuple[float, float], ...]

    def total_mass(self) -> float:
        return float(self.bin_masses.sum()) + sum(m for _, m in self.atoms)

    def mean(self) -> float:
        mids = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        return float(self.bin_masses @ mids) + sum(v * m for v, m in self.atoms)

    def shifted(self, offset: float) -> "DensityEstimate":
        return DensityEstimate(
            self.bin_edges + offset,
            self.bin_masses,
            tuple((v + offset, m) for v, m in self.atoms),
        )


@dataclass(frozen=True)
class DiscreteSpectrum:
    """One value per quarter with its default probability, plus the survival atom."""

    values: np.ndarray
    probabilities: np.ndarray
    survival_value: float
    survival_mass: float

    def total_mass(self) -> float:
        return float(self.probabilities.sum()) + self.survival_mass


def payoff_density(
    position: HedgedPosition,
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    measure: PhysicalMeasure,
    bins: BinningConfig = BinningConfig(),
) -> DensityEstimate:
    """Histogram of the position's realized present value under the measure."""
    law = measure.recovery_law
    if not isinstance(law, TruncatedNormalRecovery):
        raise RecoveryLawError(
            "payoff_density needs a smooth recovery law; use "
            "constant_recovery_spectrum for a constant recovery rate"
        )
    coeffs = quarter_coefficients(position, grid, curve, spread)

    lo, hi = bins.lo, bins.hi
    if lo is None:
        lo = path_minimum(position, grid, curve, spread)[0] - bins.margin
    if hi is None:
        hi = path_maximum(position, grid, curve, spread)[0] + bins.margin
    if not hi > lo:
        raise ConfigurationError(f"empty histogram range [{lo}, {hi}]")
    edges = np.linspace(lo, hi, bins.n_bins + 1)
    masses = np.zeros(bins.n_bins)

    h = measure.hazard_rate
    r = curve.risk_free_rate
    nn = bins.tau_nodes_per_quarter
    for k in range(1, grid.n_quarters + 1):
        left, dt = grid.time(k - 1), grid.period(k)
        sub = left + dt * np.arange(nn + 1) / nn
        slice_mass = np.exp(-h * sub[:-1]) - np.exp(-h * sub[1:])
        offsets = (np.arange(nn) + 0.5) * dt / nn
        disc = np.exp(-r * (left + offsets))
        i = k - 1
        at_rho1 = coeffs.a[i] + coeffs.b[i] * offsets * disc
        at_rho0 = at_rho1 + coeffs.g[i] * disc
        slope = at_rho1 - at_rho0  # value = at_rho0 + rho * slope

        degenerate = np.abs(slope) < _DEGENERATE_SLOPE
        if np.any(degenerate):
            idx = np.clip(
                np.searchsorted(edges, at_rho1[degenerate], side="right") - 1,
                0,
                bins.n_bins - 1,
            )
            np.add.at(masses, idx, slice_mass[degenerate])
        live = ~degenerate
        if np.any(live):
            z = (edges[None, :] - at_rho0[live, None]) / slope[live, None]
            cdf = law.cdf(z)
            falling = slope[live] < 0.0
            cdf[falling] = 1.0 - cdf[falling]
            per_bin = np.diff(cdf, axis=1)
            per_bin[:, 0] += cdf[:, 0]
            per_bin[:, -1] += 1.0 - cdf[:, -1]
            masses += slice_mass[live] @ per_bin

    atom = (coeffs.no_default, measure.survival(grid.horizon))
    return DensityEstimate(edges, masses, (atom,))


def pnl_density(density: DensityEstimate, lam: float, expected_payoff_value: float) -> DensityEstimate:
    """Law of the net position after paying lam * expected payoff upfront."""
    return density.shifted(-lam * expected_payoff_value)


def constant_recovery_spectrum(
    position: HedgedPosition,
    grid: TenorGrid,
    curve: DiscountCurve,
    spread: float,
    measure: PhysicalMeasure,
) -> DiscreteSpectrum:
    """Discrete value spectrum under a constant recovery rate.

    Each quarter contributes the average of its right-limit and endpoint
    values with the quarter's exact default probability; survival carries the
    remaining mass at the no-default value.
    """
    law = measure.recovery_law
    if not isinstance(law, ConstantRecovery):
        raise RecoveryLawError(
            "constant_recovery_spectrum needs a constant recovery law; use "
            "payoff_density for a smooth one"
        )
    coeffs = quarter_coefficients(position, grid, curve, spread)
    h = measure.hazard_rate
    n = grid.n_quarters
    values = np.empty(n)
    probs = np.empty(n)
    rho = law.value
    for k in range(1, n + 1):
        values[k - 1] = 0.5 * (
            coeffs.value(k, 0.0, rho) + coeffs.value(k, grid.period(k), rho)
        )
        probs[k - 1] = math.exp(-h * grid.time(k - 1)) - math.exp(-h * grid.time(k))
    return DiscreteSpectrum(
        values=values,
        probabilities=probs,
        survival_value=coeffs.no_default,
        survival_mass=measure.survival(grid.horizon),
    )


def cdf_query(density: DensityEstimate, a: float, b: float) -> float:
    """Probability mass of [a, b], atoms at the endpoints included.

    Bins partially covered by the interval contribute proportionally to the
    covered width.
    """
    if a > b:
        raise ValueError(f"empty query interval: a={a} > b={b}")
    edges, masses = density.bin_edges, density.bin_masses
    left = np.maximum(edges[:-1], a)
    right = np.minimum(edges[1:], b)
    widths = edges[1:] - edges[:-1]
    overlap = np.clip(right - left, 0.0, None)
    total = float(masses @ (overlap / widths))
    total += sum(m for v, m in density.atoms if a <= v <= b)
    return total
