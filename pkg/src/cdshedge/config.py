"""Configuration files and default parameters.

The config file is a UTF-8 key/value tree (YAML, or JSON by extension) with
sections ``grid``, ``curve``, ``market``, ``measure``, ``valuation`` and
``study``.  Quoted prices, the running spread, the risk-free rate, the
one-year default probability and the target return are given in percent;
recovery-law parameters and the profit share ``lambda`` are plain fractions.
Omitted keys fall back to the defaults below.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigurationError
from .market import (
    ConstantRecovery,
    DiscountCurve,
    LiquidMarket,
    PhysicalMeasure,
    TenorGrid,
    TruncatedNormalRecovery,
    hazard_from_pd1,
)

DEFAULT_QUOTES_PCT: tuple[tuple[int, float], ...] = (
    (5, 5.25),
    (9, 12.47),
    (13, 18.08),
    (17, 21.56),
    (21, 24.05),
)

DEFAULT_SEED = 7


@dataclass(frozen=True)
class GridSection:
    n_quarters: int = 21
    first_period: float = 0.25


@dataclass(frozen=True)
class CurveSection:
    rate: float = 2.0  # percent per year


@dataclass(frozen=True)
class MarketSection:
    spread: float = 5.0  # percent per year
    quotes: tuple[tuple[int, float], ...] = DEFAULT_QUOTES_PCT  # (quarter, percent)


@dataclass(frozen=True)
class RecoverySection:
    kind: str = "normal"  # "normal" or "constant"
    mu: float = 0.15
    sigma: float = 0.16
    value: float = 0.40  # used by kind == "constant"


@dataclass(frozen=True)
class MeasureSection:
    pd1: Optional[float] = 30.0  # percent; ignored when hazard is given
    hazard: Optional[float] = None  # per year, decimal
    recovery: RecoverySection = field(default_factory=RecoverySection)


@dataclass(frozen=True)
class ValuationSection:
    lam: float = 0.8
    target_return: Optional[float] = None  # percent; overrides lam when given


@dataclass(frozen=True)
class StudySection:
    variant: str = "a"
    trials: int = 1000
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class AppConfig:
    grid: GridSection = field(default_factory=GridSection)
    curve: CurveSection = field(default_factory=CurveSection)
    market: MarketSection = field(default_factory=MarketSection)
    measure: MeasureSection = field(default_factory=MeasureSection)
    valuation: ValuationSection = field(default_factory=ValuationSection)
    study: StudySection = field(default_factory=StudySection)


@dataclass(frozen=True)
class ModelInputs:
    """Resolved model objects in natural units (decimals, years)."""

    grid: TenorGrid
    curve: DiscountCurve
    market: LiquidMarket
    measure: PhysicalMeasure
    lam: float


def _merge(section_cls, data: dict, path: str):
    allowed = {f for f in section_cls.__dataclass_fields__}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys {sorted(unknown)} in section '{path}'")
    return data


def _parse_quotes(raw) -> tuple[tuple[int, float], ...]:
    if isinstance(raw, dict):
        pairs = [(int(k), float(v)) for k, v in raw.items()]
    else:
        try:
            pairs = [(int(q), float(u)) for q, u in raw]
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(
                "market.quotes must be a mapping or a list of (quarter, upfront) pairs"
            ) from exc
    return tuple(sorted(pairs))


def config_from_dict(data: dict) -> AppConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("configuration root must be a mapping")
    known = {"grid", "curve", "market", "measure", "valuation", "study"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown top-level sections {sorted(unknown)}")

    grid = GridSection(**_merge(GridSection, data.get("grid", {}), "grid"))
    curve = CurveSection(**_merge(CurveSection, data.get("curve", {}), "curve"))

    market_data = dict(_merge(MarketSection, data.get("market", {}), "market"))
    if "quotes" in market_data:
        market_data["quotes"] = _parse_quotes(market_data["quotes"])
    market = MarketSection(**market_data)

    measure_data = dict(data.get("measure", {}))
    recovery_data = dict(measure_data.pop("recovery", {}))
    if "normal" in recovery_data or "constant" in recovery_data:
        # nested spelling: recovery: {normal: {mu, sigma}} or {constant: value}
        if "normal" in recovery_data:
            inner = recovery_data.pop("normal")
            recovery_data.update({"kind": "normal", **inner})
        else:
            recovery_data.update({"kind": "constant", "value": recovery_data.pop("constant")})
    recovery = RecoverySection(**_merge(RecoverySection, recovery_data, "measure.recovery"))
    measure = MeasureSection(recovery=recovery, **_merge(MeasureSection, measure_data, "measure"))

    valuation_data = dict(data.get("valuation", {}))
    if "lambda" in valuation_data:
        valuation_data["lam"] = valuation_data.pop("lambda")
    valuation = ValuationSection(**_merge(ValuationSection, valuation_data, "valuation"))

    study = StudySection(**_merge(StudySection, data.get("study", {}), "study"))
    if study.variant not in ("a", "b", "c"):
        raise ConfigurationError(f"study.variant must be one of a/b/c, got {study.variant!r}")
    return AppConfig(grid, curve, market, measure, valuation, study)


def load_config(path: str | Path | None) -> AppConfig:
    """Read a YAML/JSON config file; None gives the built-in defaults."""
    if path is None:
        return AppConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse config file {path}: {exc}") from exc
    return config_from_dict(data or {})


def build_inputs(config: AppConfig) -> ModelInputs:
    """Resolve a config into model objects, converting percent to decimals."""
    grid = TenorGrid.quarterly(config.grid.n_quarters, config.grid.first_period)
    curve = DiscountCurve(config.curve.rate / 100.0)
    market = LiquidMarket(
        spread=config.market.spread / 100.0,
        quotes=tuple((m, u / 100.0) for m, u in config.market.quotes),
    )

    measure_cfg = config.measure
    if measure_cfg.hazard is not None:
        hazard = measure_cfg.hazard
    elif measure_cfg.pd1 is not None:
        hazard = hazard_from_pd1(measure_cfg.pd1 / 100.0)
    else:
        raise ConfigurationError("measure needs either pd1 or hazard")
    rec = measure_cfg.recovery
    if rec.kind == "normal":
        law = TruncatedNormalRecovery(rec.mu, rec.sigma)
    elif rec.kind == "constant":
        law = ConstantRecovery(rec.value)
    else:
        raise ConfigurationError(f"recovery.kind must be normal or constant, got {rec.kind!r}")
    measure = PhysicalMeasure(hazard, law)

    val = config.valuation
    if val.target_return is not None:
        lam = 1.0 / (1.0 + val.target_return / 100.0)
    else:
        lam = val.lam
    return ModelInputs(grid=grid, curve=curve, market=market, measure=measure, lam=lam)


def config_hash(config: AppConfig) -> str:
    """Stable short hash of the resolved configuration, for output headers."""
    canonical = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
