"""Regime-switching correlated price engine for the three fictional stocks.

Prices follow a discrete-time lognormal random walk: each tick draws
correlated log-returns ``r = mu + L z`` (L the factor of the regime's
covariance matrix, z independent standard normals) and multiplies prices by
``exp(r)``.  The hidden regime (boom / normal / bust) selects mu and the
covariance; the longer the market sits in one regime, the likelier it is to
switch, unless the conductor has forced a regime, which sticks until
released.  Every tick also selects a news story from the pool of the regime
the *upcoming* price update will use, so headlines foreshadow the move.

One tick is 15 seconds of performance time by default.  All parameters
live in a YAML config file; the packaged defaults satisfy the intended
orderings (wealth the highest drift and volatility, comfort the lowest).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml

from .core import REGIMES, STOCKS, Regime, StockId


class MarketConfigError(ValueError):
    """Raised at load time for parameter sets the engine must never tick on."""


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular-ish factor L with L@L.T == cov, accepting singular PSD."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(cov)
        if eigvals.min() < -1e-10 * max(eigvals.max(), 1.0):
            raise MarketConfigError("covariance matrix is not positive semi-definite")
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


@dataclass(frozen=True, eq=False)
class RegimeParams:
    """Per-tick log-return drift vector and covariance for one regime."""

    mu: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mu.shape != (len(STOCKS),) or cov.shape != (len(STOCKS), len(STOCKS)):
            raise MarketConfigError("mu must be a 3-vector and cov a 3x3 matrix")
        if not np.allclose(cov, cov.T):
            raise MarketConfigError("covariance matrix must be symmetric")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", _psd_factor(cov))


@dataclass(frozen=True)
class HazardParams:
    """Regime-switch probability per tick: min(cap, p0 + lam * ticks_in_regime)."""

    p0: float = 0.02
    lam: float = 0.004
    cap: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.p0 <= self.cap <= 1.0:
            raise MarketConfigError("hazard requires 0 <= p0 <= cap <= 1")
        if self.lam < 0:
            raise MarketConfigError("hazard growth rate must be nonnegative")

    def switch_probability(self, ticks_in_regime: int) -> float:
        return min(self.cap, self.p0 + self.lam * ticks_in_regime)


@dataclass(frozen=True)
class NewsItem:
    text: str
    regime: Regime


@dataclass
class MarketConfig:
    regimes: dict[Regime, RegimeParams]
    hazard: HazardParams
    initial_prices: np.ndarray
    news_pools: dict[Regime, list[str]]
    display_names: dict[StockId, str]
    tick_seconds: float = 15.0
    seed: int = 0

    def __post_init__(self) -> None:
        self.initial_prices = np.asarray(self.initial_prices, dtype=float)
        missing = [r.value for r in REGIMES if r not in self.regimes]
        if missing:
            raise MarketConfigError(f"missing regime parameters for: {missing}")
        if np.any(self.initial_prices <= 0):
            raise MarketConfigError("initial prices must be positive")
        for regime in REGIMES:
            if not self.news_pools.get(regime):
                raise MarketConfigError(f"news pool for {regime.value} is empty")
        self._check_orderings()

    def _check_orderings(self) -> None:
        # Wealth must out-drift and out-vol Protection, which outdoes Comfort,
        # whenever the market is not crashing; booms lift everything and busts
        # sink everything.
        for regime in (Regime.NORMAL, Regime.BOOM):
            mu = self.regimes[regime].mu
            var = np.diag(self.regimes[regime].cov)
            if not (mu[0] > mu[1] > mu[2]):
                raise MarketConfigError(f"{regime.value}: drifts must order wealth > protection > comfort")
            if not (var[0] > var[1] > var[2]):
                raise MarketConfigError(f"{regime.value}: variances must order wealth > protection > comfort")
        if not np.all(self.regimes[Regime.BOOM].mu > 0):
            raise MarketConfigError("boom drifts must all be positive")
        if not np.all(self.regimes[Regime.BUST].mu < 0):
            raise MarketConfigError("bust drifts must all be negative")


@dataclass
class MarketState:
    prices: np.ndarray
    regime: Regime
    ticks_in_regime: int
    tick: int
    forced: Regime | None
    rng: np.random.Generator

    def price_of(self, stock: StockId) -> float:
        return float(self.prices[STOCKS.index(stock)])


def initial_state(config: MarketConfig, seed: int | None = None) -> MarketState:
    return MarketState(
        prices=np.array(config.initial_prices, dtype=float),
        regime=Regime.NORMAL,
        ticks_in_regime=0,
        tick=0,
        forced=None,
        rng=np.random.default_rng(config.seed if seed is None else seed),
    )


def advance_regime(state: MarketState, hazard: HazardParams) -> MarketState:
    """Resolve which regime the upcoming price update will use.

    A forced regime (conductor override) always wins and suspends the hazard
    clock; it stays in force until explicitly released.  Otherwise the
    market switches with the hazard probability, landing uniformly on one of
    the other two regimes.
    """
    if state.forced is not None:
        new_regime = state.forced
    else:
        new_regime = state.regime
        if state.rng.random() < hazard.switch_probability(state.ticks_in_regime):
            others = [r for r in REGIMES if r is not state.regime]
            new_regime = others[int(state.rng.integers(len(others)))]
    if new_regime is state.regime:
        return state
    return replace(state, regime=new_regime, ticks_in_regime=0)


def step_prices(state: MarketState, params: Mapping[Regime, RegimeParams]) -> MarketState:
    """Apply one correlated lognormal price update under the current regime."""
    p = params[state.regime]
    z = state.rng.standard_normal(len(STOCKS))
    log_returns = p.mu + p.chol @ z
    return replace(
        state,
        prices=state.prices * np.exp(log_returns),
        tick=state.tick + 1,
        ticks_in_regime=state.ticks_in_regime + 1,
    )


def pick_news(
    next_regime: Regime,
    pools: Mapping[Regime, list[str]],
    rng: np.random.Generator,
) -> NewsItem:
    """Pick a headline from the pool of the regime the next update will use."""
    pool = pools.get(next_regime) or []
    if not pool:
        raise ValueError(f"news pool for {next_regime.value} is empty")
    return NewsItem(text=pool[int(rng.integers(len(pool)))], regime=next_regime)


# --- configuration loading ----------------------------------------------------


def _stock_vector(mapping: Mapping[str, float], what: str) -> np.ndarray:
    try:
        return np.array([float(mapping[s.value]) for s in STOCKS])
    except KeyError as missing:
        raise MarketConfigError(f"{what} is missing an entry for {missing.args[0]!r}") from None


def _correlation_matrix(corr: Mapping[str, float]) -> np.ndarray:
    m = np.eye(len(STOCKS))
    for i, a in enumerate(STOCKS):
        for j, b in enumerate(STOCKS):
            if i < j:
                value = corr.get(f"{a.value}_{b.value}", corr.get(f"{b.value}_{a.value}"))
                if value is None:
                    raise MarketConfigError(f"missing correlation for {a.value}/{b.value}")
                m[i, j] = m[j, i] = float(value)
    return m


def market_config_from_dict(raw: Mapping) -> MarketConfig:
    hazard_raw = raw.get("hazard", {})
    hazard = HazardParams(
        p0=float(hazard_raw.get("p0", 0.02)),
        lam=float(hazard_raw.get("lambda", hazard_raw.get("lam", 0.004))),
        cap=float(hazard_raw.get("cap", 0.5)),
    )
    corr = _correlation_matrix(raw.get("correlations", {}))
    regimes: dict[Regime, RegimeParams] = {}
    for regime in REGIMES:
        try:
            spec = raw["regimes"][regime.value]
        except KeyError:
            raise MarketConfigError(f"config has no parameters for regime {regime.value!r}") from None
        mu = _stock_vector(spec["mu"], f"{regime.value} mu")
        vol = _stock_vector(spec["vol"], f"{regime.value} vol")
        cov = corr * np.outer(vol, vol)
        regimes[regime] = RegimeParams(mu=mu, cov=cov)
    news_pools = {
        regime: list(raw.get("news", {}).get(regime.value, [])) for regime in REGIMES
    }
    display_names = {
        stock: str(raw.get("display_names", {}).get(stock.value, stock.value.capitalize()))
        for stock in STOCKS
    }
    return MarketConfig(
        regimes=regimes,
        hazard=hazard,
        initial_prices=_stock_vector(raw.get("initial_prices", {s.value: 100.0 for s in STOCKS}), "initial_prices"),
        news_pools=news_pools,
        display_names=display_names,
        tick_seconds=float(raw.get("tick_seconds", 15.0)),
        seed=int(raw.get("seed", 0)),
    )


def load_market_config(path: str | Path | None = None) -> MarketConfig:
    """Load a market config file; with no path, the packaged defaults."""
    if path is None:
        text = resources.files("outcry.data").joinpath("market_default.yaml").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = yaml.safe_load(text)
    if not isinstance(raw, Mapping):
        raise MarketConfigError("market config must be a mapping")
    return market_config_from_dict(raw)


# --- headless Monte Carlo -----------------------------------------------------


@dataclass
class MonteCarloSummary:
    n_paths: int
    n_ticks: int
    inflation_rate: float
    mean_final_prices: dict[StockId, float]
    beat_cash_fraction: dict[StockId, float]


def monte_carlo(
    config: MarketConfig,
    n_paths: int,
    n_ticks: int,
    inflation_rate: float = 0.002,
    seed: int | None = None,
) -> MonteCarloSummary:
    """Simulate many performances and score buy-and-hold against melting cash.

    For each path, each stock "wins" if holding one unit from the opening
    tick beats holding the equivalent cash while it deflates by
    ``inflation_rate`` per tick.
    """
    root = np.random.SeedSequence(config.seed if seed is None else seed)
    finals = np.empty((n_paths, len(STOCKS)))
    for k, child_seed in enumerate(root.spawn(n_paths)):
        state = initial_state(config)
        state.rng = np.random.default_rng(child_seed)
        for _ in range(n_ticks):
            state = advance_regime(state, config.hazard)
            state = step_prices(state, config.regimes)
        finals[k] = state.prices
    cash_factor = (1.0 - inflation_rate) ** n_ticks
    growth = finals / np.asarray(config.initial_prices)
    wins = (growth > cash_factor).mean(axis=0)
    return MonteCarloSummary(
        n_paths=n_paths,
        n_ticks=n_ticks,
        inflation_rate=inflation_rate,
        mean_final_prices={s: float(finals[:, i].mean()) for i, s in enumerate(STOCKS)},
        beat_cash_fraction={s: float(wins[i]) for i, s in enumerate(STOCKS)},
    )
