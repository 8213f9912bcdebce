"""Command-line interface.

Commands: ``bounds``, ``vanilla``, ``hedge``, ``value``, ``density``,
``spectrum``, ``study``.  Every command reads the same config file (defaults
are built in), writes delimited data files with at least ten significant
digits, and prints a human summary in percent.  Data files carry a header
comment with the config hash and seed so identical inputs give byte-identical
outputs.  Exit status: 0 success, 1 configuration problem, 2 numerical
failure.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import click

from .config import AppConfig, ModelInputs, build_inputs, config_hash, load_config
from .density import BinningConfig, constant_recovery_spectrum, payoff_density
from .errors import ConfigurationError, ConvergenceError, StudyAbortedError
from .market import ConstantRecovery, LiquidMarket, PhysicalMeasure
from .optimizer import HedgeProblem, optimize_hedge
from .payoff import HedgedPosition, Portfolio
from .study import (
    EXAMPLE_PORTFOLIO,
    StudyConfig,
    asymmetry_ratio,
    bounds_sweep,
    lmax_ratio_study,
    market_variant,
)
from .valuation import bid_ask_range, expected_payoff, value_portfolio
from .vanilla import comparison_table


def _fmt(value) -> str:
    """Data-file number format: 12 significant digits, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _pct(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{100 * value:.4f}%"


def _write_rows(
    out: Optional[str],
    fmt: str,
    header: dict,
    columns: Sequence[str],
    rows: Sequence[Sequence],
) -> None:
    if out is None:
        return
    path = Path(out)
    if fmt == "json":
        payload = {
            "meta": header,
            "columns": list(columns),
            "rows": [[None if isinstance(v, float) and math.isnan(v) else v for v in row]
                     for row in rows],
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return
    buffer = io.StringIO()
    meta = "; ".join(f"{k}={v}" for k, v in header.items())
    buffer.write(f"# {meta}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _load_portfolio(spec: str, n: int) -> Portfolio:
    """Portfolio from a built-in fixture name or a file of numbers."""
    if spec in ("paper-example", "example"):
        if n != len(EXAMPLE_PORTFOLIO):
            raise ConfigurationError(
                f"built-in example portfolio has {len(EXAMPLE_PORTFOLIO)} notionals, "
                f"grid expects {n}"
            )
        return EXAMPLE_PORTFOLIO
    path = Path(spec)
    if not path.exists():
        raise ConfigurationError(
            f"portfolio {spec!r} is neither the built-in name 'paper-example' nor a file"
        )
    text = path.read_text(encoding="utf-8")
    try:
        values = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse portfolio file {spec}: {exc}") from exc
    if len(values) != n:
        raise ConfigurationError(
            f"portfolio file {spec} has {len(values)} notionals, grid expects {n}"
        )
    return Portfolio.from_array(values)


def _load_inputs(config_path: Optional[str]) -> tuple[AppConfig, ModelInputs]:
    config = load_config(config_path)
    return config, build_inputs(config)


def _hedged_or_unhedged(
    portfolio: Portfolio, inputs: ModelInputs, hedged: bool
) -> HedgedPosition:
    market = inputs.market if hedged else LiquidMarket(inputs.market.spread, ())
    solution = optimize_hedge(HedgeProblem(portfolio, market, inputs.grid, inputs.curve))
    if solution.is_unbounded:
        raise RuntimeError("hedge cost is unbounded below; quoted prices admit arbitrage")
    return solution.position


config_option = click.option(
    "--config", "-c", "config_path", type=click.Path(), default=None,
    help="YAML/JSON configuration file (built-in defaults when omitted).",
)
out_option = click.option("--out", "-o", type=click.Path(), default=None,
                          help="Output data file.")
format_option = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                             default="csv", help="Output file format.")
plot_option = click.option("--plot", "plot_path", type=click.Path(), default=None,
                           help="Also render a figure to this file.")


@click.group()
def cli():
    """Superhedge bounds, valuation, and risk reports for single-name CDS books."""


@cli.command()
@config_option
@out_option
@format_option
@plot_option
def bounds(config_path, out, fmt, plot_path):
    """No-arbitrage bounds for every maturity: optimizer, single-instrument,
    and the interpolated market quote."""
    config, inputs = _load_inputs(config_path)
    rows = bounds_sweep(inputs)
    _write_rows(
        out,
        fmt,
        {"report": "bounds", "config": config_hash(config), "seed": config.study.seed},
        ("maturity_index", "opt_ask", "opt_bid", "van_ask", "van_bid", "interpolated"),
        [(r.maturity_index, r.opt_ask, r.opt_bid, r.van_ask, r.van_bid, r.interpolated)
         for r in rows],
    )
    click.echo("maturity  opt ask    opt bid    van ask    van bid    interp")
    for r in rows:
        click.echo(
            f"{r.maturity_index:8d}  {_pct(r.opt_ask):>9} {_pct(r.opt_bid):>10} "
            f"{_pct(r.van_ask):>10} {_pct(r.van_bid):>10} {_pct(r.interpolated):>9}"
        )
    diagnostics = [(r.maturity_index, asymmetry_ratio(r)) for r in rows
                   if not inputs.market.is_liquid(r.maturity_index)]
    diagnostics = [(m, ratio) for m, ratio in diagnostics if ratio is not None]
    if diagnostics:
        click.echo("ask/bid distance ratio to the interpolated quote:")
        click.echo("  " + "  ".join(f"m={m}: {ratio:.2f}" for m, ratio in diagnostics))
    if plot_path:
        from .plotting import plot_bounds

        plot_bounds(rows, plot_path)
        click.echo(f"figure written to {plot_path}")


@cli.command()
@config_option
@out_option
@format_option
@click.option("--maturities", default="10,11,12,14,15,16",
              help="Comma-separated maturity indices for the comparison table.")
def vanilla(config_path, out, fmt, maturities):
    """Single-instrument bounds next to the optimizer bounds."""
    config, inputs = _load_inputs(config_path)
    try:
        m_list = tuple(int(tok) for tok in maturities.split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad maturity list {maturities!r}") from exc
    rows = comparison_table(inputs.market, inputs.grid, inputs.curve, m_list)
    _write_rows(
        out,
        fmt,
        {"report": "vanilla", "config": config_hash(config), "seed": config.study.seed},
        ("maturity_index", "opt_ask", "van_ask", "opt_bid", "van_bid"),
        [(r.maturity_index, r.opt_ask, r.van_ask, r.opt_bid, r.van_bid) for r in rows],
    )
    header = "             " + "".join(f"{r.maturity_index:>10d}" for r in rows)
    click.echo(header)
    for label, attr in [("ask (Opt)", "opt_ask"), ("ask (Van)", "van_ask"),
                        ("bid (Opt)", "opt_bid"), ("bid (Van)", "van_bid")]:
        values = "".join(f"{100 * getattr(r, attr):>10.4f}" for r in rows)
        click.echo(f"{label:13s}{values}")
    click.echo("(upfront prices in % of notional)")


@cli.command()
@config_option
@out_option
@format_option
@click.option("--portfolio", "-p", required=True,
              help="Portfolio: 'paper-example' or a file of notionals.")
@click.option("--cash", type=float, default=0.0, help="Existing cash in the position.")
def hedge(config_path, out, fmt, portfolio, cash):
    """Optimal superhedge of one portfolio: notionals, cash, cost, binding paths."""
    config, inputs = _load_inputs(config_path)
    alpha = _load_portfolio(portfolio, inputs.grid.n_quarters)
    solution = optimize_hedge(
        HedgeProblem(alpha, inputs.market, inputs.grid, inputs.curve, old_cash=cash)
    )
    if solution.is_unbounded:
        raise RuntimeError("hedge cost is unbounded below; quoted prices admit arbitrage")
    rows = [("cash", "", solution.cash), ("cost", "", solution.cost),
            ("max_violation", "", solution.max_violation)]
    rows += [("notional", m, v) for m, v in sorted(solution.hedge_notionals.items())]
    rows += [("binding_path", "" if math.isinf(p.tau) else p.tau, p.rho)
             for p in solution.binding_paths]
    _write_rows(
        out,
        fmt,
        {"report": "hedge", "config": config_hash(config), "seed": config.study.seed},
        ("field", "key", "value"),
        rows,
    )
    click.echo(f"hedge cost V = {_pct(solution.cost)} of notional; cash = {_pct(solution.cash)}")
    for m, v in sorted(solution.hedge_notionals.items()):
        click.echo(f"  maturity {m:2d}: notional {v:+.6f}")
    click.echo(f"max constraint violation: {solution.max_violation:.2e}; "
               f"binding paths: {len(solution.binding_paths)}")
    for p in solution.binding_paths:
        tau = "survival" if math.isinf(p.tau) else f"tau={p.tau:.4f}"
        click.echo(f"  {tau}, rho={p.rho:g}")


@cli.command()
@config_option
@out_option
@format_option
@click.option("--portfolio", "-p", default=None,
              help="Portfolio to value: 'paper-example' or a file of notionals.")
@click.option("--maturity", "-m", type=int, default=None,
              help="Single-contract mode: bid/ask range for this maturity index.")
@click.option("--lambda", "lam", type=float, default=None,
              help="Profit share; defaults to the configured value.")
@click.option("--lambda-short", type=float, default=None)
@click.option("--lambda-long", type=float, default=None)
def value(config_path, out, fmt, portfolio, maturity, lam, lambda_short, lambda_long):
    """Fair price of a portfolio, or the bid/ask range of one maturity."""
    config, inputs = _load_inputs(config_path)
    lam = inputs.lam if lam is None else lam
    if (portfolio is None) == (maturity is None):
        raise ConfigurationError("give exactly one of --portfolio or --maturity")

    if maturity is not None:
        rng = bid_ask_range(
            inputs.market, inputs.grid, inputs.curve, inputs.measure, maturity,
            lambda_short or lam, lambda_long or lam,
        )
        _write_rows(
            out,
            fmt,
            {"report": "value", "config": config_hash(config), "seed": config.study.seed},
            ("maturity_index", "lub_ask", "glb_bid", "ask", "bid",
             "expected_payoff_short", "expected_payoff_long", "lambda_short", "lambda_long"),
            [(rng.maturity_index, rng.lub_ask, rng.glb_bid, rng.ask, rng.bid,
              rng.expected_payoff_short, rng.expected_payoff_long,
              rng.lambda_short, rng.lambda_long)],
        )
        click.echo(f"maturity {maturity}: ask bound {_pct(rng.lub_ask)}, "
                   f"bid bound {_pct(rng.glb_bid)}")
        click.echo(f"  ask({rng.lambda_short:g}) = {_pct(rng.ask)}, "
                   f"bid({rng.lambda_long:g}) = {_pct(rng.bid)}")
        return

    alpha = _load_portfolio(portfolio, inputs.grid.n_quarters)
    result = value_portfolio(
        alpha, inputs.market, inputs.grid, inputs.curve, inputs.measure, lam
    )
    _write_rows(
        out,
        fmt,
        {"report": "value", "config": config_hash(config), "seed": config.study.seed},
        ("expected_payoff", "glb", "lambda", "fair_price", "max_loss", "expected_return"),
        [(result.expected_payoff, result.glb, result.lam, result.fair_price,
          result.max_loss, result.expected_return)],
    )
    click.echo(f"expected hedged payoff = {_pct(result.expected_payoff)}")
    click.echo(f"greatest lower bound   = {_pct(result.glb)}")
    click.echo(f"fair price (lambda={lam:g}) = {_pct(result.fair_price)}")
    click.echo(f"capital at risk        = {_pct(result.max_loss)}")
    click.echo(f"expected return        = {100 * result.expected_return:.2f}%")


@cli.command()
@config_option
@out_option
@format_option
@plot_option
@click.option("--portfolio", "-p", required=True,
              help="Portfolio: 'paper-example' or a file of notionals.")
@click.option("--hedged/--unhedged", "hedged", default=True,
              help="Hedge with the liquid market, or with cash alone.")
@click.option("--bins", type=int, default=400, help="Number of histogram bins.")
def density(config_path, out, fmt, plot_path, portfolio, hedged, bins):
    """Probability mass histogram of the hedged position's realized value."""
    config, inputs = _load_inputs(config_path)
    alpha = _load_portfolio(portfolio, inputs.grid.n_quarters)
    position = _hedged_or_unhedged(alpha, inputs, hedged)
    estimate = payoff_density(
        position, inputs.grid, inputs.curve, inputs.market.spread, inputs.measure,
        BinningConfig(n_bins=bins),
    )
    rows = [("bin", left, right, 0.5 * (left + right), mass)
            for left, right, mass in zip(
                estimate.bin_edges[:-1], estimate.bin_edges[1:], estimate.bin_masses)]
    rows += [("atom", v, v, v, m) for v, m in estimate.atoms]
    _write_rows(
        out,
        fmt,
        {"report": "density", "config": config_hash(config), "seed": config.study.seed,
         "hedged": hedged},
        ("row_type", "left", "right", "value", "mass"),
        rows,
    )
    dbar = expected_payoff(position, inputs.grid, inputs.curve, inputs.market.spread,
                           inputs.measure)
    label = "hedged" if hedged else "cash-only"
    click.echo(f"{label} position: total mass {estimate.total_mass():.8f}, "
               f"mean {_pct(estimate.mean())}, expected payoff {_pct(dbar)}")
    for v, m in estimate.atoms:
        click.echo(f"  atom at {_pct(v)} with mass {m:.4f}")
    if plot_path:
        from .plotting import plot_density

        plot_density(estimate, plot_path, title=f"{label} position")
        click.echo(f"figure written to {plot_path}")


@cli.command()
@config_option
@out_option
@format_option
@plot_option
@click.option("--portfolio", "-p", required=True,
              help="Portfolio: 'paper-example' or a file of notionals.")
@click.option("--hedged/--unhedged", "hedged", default=True)
@click.option("--recovery", type=float, default=None,
              help="Constant recovery rate override (otherwise from config).")
def spectrum(config_path, out, fmt, plot_path, portfolio, hedged, recovery):
    """Discrete value spectrum under a constant recovery rate."""
    config, inputs = _load_inputs(config_path)
    measure = inputs.measure
    if recovery is not None:
        measure = PhysicalMeasure(measure.hazard_rate, ConstantRecovery(recovery))
    if not isinstance(measure.recovery_law, ConstantRecovery):
        raise ConfigurationError(
            "spectrum needs a constant recovery rate; set measure.recovery.constant "
            "in the config or pass --recovery"
        )
    alpha = _load_portfolio(portfolio, inputs.grid.n_quarters)
    position = _hedged_or_unhedged(alpha, inputs, hedged)
    spec = constant_recovery_spectrum(
        position, inputs.grid, inputs.curve, inputs.market.spread, measure
    )
    rows = [("quarter", k + 1, v, p) for k, (v, p) in
            enumerate(zip(spec.values, spec.probabilities))]
    rows.append(("survival", "", spec.survival_value, spec.survival_mass))
    _write_rows(
        out,
        fmt,
        {"report": "spectrum", "config": config_hash(config), "seed": config.study.seed,
         "hedged": hedged},
        ("row_type", "quarter", "value", "mass"),
        rows,
    )
    click.echo(f"discrete spectrum: {len(spec.values)} quarter values, "
               f"total mass {spec.total_mass():.12f}")
    click.echo(f"survival atom at {_pct(spec.survival_value)} with mass "
               f"{spec.survival_mass:.4f}")
    if plot_path:
        from .plotting import plot_spectrum

        plot_spectrum(spec, plot_path)
        click.echo(f"figure written to {plot_path}")


@cli.command()
@config_option
@out_option
@format_option
@plot_option
@click.option("--variant", "-v", "variants", multiple=True,
              type=click.Choice(["a", "b", "c"]),
              help="Market variant(s); repeatable. Defaults to the configured one.")
@click.option("--trials", "-n", type=int, default=None, help="Number of trials.")
@click.option("--seed", "-s", type=int, default=None, help="Master seed.")
def study(config_path, out, fmt, plot_path, variants, trials, seed):
    """Maximum-loss reduction study on random portfolios.

    Writes one per-trial file and one empirical-CDF file per variant; the
    same master seed reuses the same portfolio sequence across variants.
    """
    config, inputs = _load_inputs(config_path)
    variants = variants or (config.study.variant,)
    n_trials = trials if trials is not None else config.study.trials
    master_seed = seed if seed is not None else config.study.seed

    ratios_by_variant = {}
    for variant in variants:
        study_config = StudyConfig(variant=variant, n_trials=n_trials,
                                   master_seed=master_seed, lam=inputs.lam)
        result = lmax_ratio_study(study_config, inputs)
        cdf = result.cdf
        ratios_by_variant[variant] = result.ratios

        header = {"report": "study", "config": config_hash(config),
                  "seed": master_seed, "variant": variant, "trials": n_trials}
        if out:
            path = Path(out)
            suffix = f"_{variant}" if len(variants) > 1 else ""
            trial_path = path.with_name(path.stem + suffix + path.suffix)
            cdf_path = path.with_name(path.stem + suffix + "_cdf" + path.suffix)
            _write_rows(
                str(trial_path), fmt, header,
                ("trial_index", "lmax_hedged", "lmax_unhedged", "ratio"),
                [(r.trial_index, r.lmax_hedged, r.lmax_unhedged, r.ratio)
                 for r in result.records],
            )
            sorted_ratios = cdf.sorted_values
            _write_rows(
                str(cdf_path), fmt, header,
                ("ratio", "cumulative_probability"),
                [(x, (i + 1) / len(sorted_ratios)) for i, x in enumerate(sorted_ratios)],
            )
        click.echo(
            f"variant {variant}: {n_trials} trials, mean ratio {cdf.mean:.4f}, "
            f"median {cdf.median:.4f}, max {cdf.max:.4f}"
        )
        click.echo(f"  F(0.235) = {cdf(0.235):.3f}, F(0.725) = {cdf(0.725):.3f}")
    if plot_path:
        from .plotting import plot_cdf

        plot_cdf(ratios_by_variant, plot_path)
        click.echo(f"figure written to {plot_path}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except (ConfigurationError, OSError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return 1
    except (ConvergenceError, StudyAbortedError, RuntimeError, ArithmeticError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
