"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they land
(or `-rP` to collect them at the end).  The full-scale composition run is
the slow one; everything else finishes in seconds.
"""

import functools
import json
import random
import time

import pytest
from scipy import stats

from outcry.agents import AgentSimConfig, Segment, run_simulation
from outcry.composer import GaConfig, fitness, run_ga
from outcry.core import REGIMES, STOCKS, Regime, StockId
from outcry.engine import (
    ExchangeConfig,
    PerformanceConfig,
    PerformanceEngine,
    replay_log,
)
from outcry.exchange import (
    Portfolio,
    Trade,
    TradeRejected,
    apply_cash_injection,
    apply_inflation,
    execute_trade,
    initial_portfolios,
    value_portfolio,
)
from outcry.harmony import set_consonance
from outcry.market import load_market_config, monte_carlo
from outcry.smf import read_smf

from conftest import random_genome, random_tune_set
from oracles import DEFAULT_TABLE, oracle_fitness, oracle_set_consonance


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                value = fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}")
                raise
            print(f"[PASS] {name}")
            return value

        return wrapper

    return decorate


@criterion("consonance oracle equivalence (100 random set pairs, 1e-9, <5s)")
def test_consonance_oracle_equivalence():
    rng = random.Random(20_12)
    started = time.time()
    for _ in range(100):
        xs = random_tune_set(rng, rng.randint(1, 5))
        ys = random_tune_set(rng, rng.randint(1, 5))
        expected = oracle_set_consonance(
            [t.pitches for t in xs], [t.pitches for t in ys], DEFAULT_TABLE
        )
        assert set_consonance(xs, ys) == pytest.approx(expected, abs=1e-9)
    assert time.time() - started < 5.0


@criterion("fitness formula fidelity (100 random genomes, 1e-9)")
def test_fitness_formula_fidelity():
    rng = random.Random(41)
    for _ in range(100):
        genome = random_genome(rng)
        expected = oracle_fitness(
            [t.pitches for t in genome.buy_tunes],
            [t.pitches for t in genome.sell_tunes],
        )
        assert fitness(genome) == pytest.approx(expected, abs=1e-9)


@criterion("GA desk scale: monotone history, buy/sell separation >= 1.0, worker-count invariance, <60s")
def test_ga_desk_scale():
    cfg = GaConfig(population_size=40, generations=400, seed=7)
    started = time.time()
    sequential = run_ga(cfg, n_workers=1)
    elapsed = time.time() - started
    assert elapsed < 60.0

    assert all(b >= a for a, b in zip(sequential.history, sequential.history[1:]))

    buys, sells = sequential.best.buy_tunes, sequential.best.sell_tunes
    separation = set_consonance(buys, buys) - set_consonance(sells, sells)
    assert separation >= 1.0

    parallel = run_ga(cfg, n_workers=3)
    assert parallel.best == sequential.best
    assert parallel.history == sequential.history


@criterion("GA full configuration (120 x 4000) completes in <30min")
def test_ga_full_configuration_runs():
    cfg = GaConfig(seed=2024)
    assert cfg.population_size == 120 and cfg.generations == 4000
    started = time.time()
    result = run_ga(cfg)
    assert time.time() - started < 1800.0
    assert len(result.history) == 4000


@criterion("market calibration: wealth beats melting cash in 60-80% of 1000 paths, <30s")
def test_market_calibration():
    config = load_market_config()
    started = time.time()
    summary = monte_carlo(config, n_paths=1000, n_ticks=120, inflation_rate=0.002)
    assert time.time() - started < 30.0
    wealth_fraction = summary.beat_cash_fraction[StockId.WEALTH]
    assert 0.60 <= wealth_fraction <= 0.80


@criterion("inflation exactness: 120 ticks at 0.2% multiply cash by 0.998^120 within 1e-9")
def test_inflation_exactness():
    portfolios = {1: Portfolio(holdings={}, cash=1.0)}
    for _ in range(120):
        portfolios = apply_inflation(portfolios, 0.002)
    assert portfolios[1].cash == pytest.approx(0.998**120, abs=1e-9)


@criterion("ledger conservation over 10,000 random slips/trades/injections")
def test_ledger_conservation():
    rng = random.Random(99)
    n_traders = 12
    portfolios = initial_portfolios(n_traders)
    unit_totals = {s: sum(p.holdings[s] for p in portfolios.values()) for s in STOCKS}
    expected_cash = sum(p.cash for p in portfolios.values())

    for k in range(10_000):
        action = rng.random()
        if action < 0.80:
            buyer, seller = rng.sample(range(1, n_traders + 1), 2)
            trade = Trade(
                buyer=buyer,
                seller=seller,
                stock=rng.choice(STOCKS),
                quantity=rng.randint(1, 8),
                price=round(rng.uniform(1, 120), 2),
                tick_executed=k,
            )
            try:
                portfolios = execute_trade(trade, portfolios)  # cash zero-sum
            except TradeRejected:
                pass
        elif action < 0.90:
            portfolios = apply_cash_injection(portfolios, 50.0)
            expected_cash += 50.0 * n_traders
        else:
            portfolios = apply_inflation(portfolios, 0.002)
            expected_cash *= 1.0 - 0.002

        if k % 500 == 0:
            for s in STOCKS:
                assert sum(p.holdings[s] for p in portfolios.values()) == unit_totals[s]
            total = sum(p.cash for p in portfolios.values())
            assert total == pytest.approx(expected_cash, rel=1e-9)

    for s in STOCKS:
        assert sum(p.holdings[s] for p in portfolios.values()) == unit_totals[s]
    assert sum(p.cash for p in portfolios.values()) == pytest.approx(expected_cash, rel=1e-9)


@criterion("valuation spot-check: {P:2, W:1, C:1} at premiere prices = 261")
def test_valuation_spot_check():
    portfolio = Portfolio(
        holdings={StockId.PROTECTION: 2, StockId.WEALTH: 1, StockId.COMFORT: 1}, cash=0.0
    )
    prices = {StockId.PROTECTION: 75.0, StockId.WEALTH: 29.0, StockId.COMFORT: 82.0}
    assert value_portfolio(portfolio, prices) == 261.0


def _scripted_120_tick_performance(log_path):
    config = PerformanceConfig(
        market=load_market_config(),
        exchange=ExchangeConfig(),
        duration_ticks=120,
        tempo_start_bpm=60.0,
        seed=31337,
    )
    engine = PerformanceEngine(config, log_path=log_path)
    engine.start()
    for t in range(120):
        if t == 6:
            engine.force_regime(Regime.BUST)  # the enforced early bust
        if t == 24:
            engine.force_regime(None)
        if t == 30:
            engine.set_shout(True)
        if t == 38:
            engine.set_shout(False)
        if t in (45, 70, 95):
            engine.set_tempo(60.0 + (t - 20) // 25)  # gentle bpm ramp
        if t == 50:
            engine.submit_slip(
                trader=1, counterparty=2, side="buy", stock="wealth", quantity=8, price=95.0
            )
            engine.submit_slip(
                trader=2, counterparty=1, side="sell", stock="wealth", quantity=8, price=95.0
            )
        if t == 60:
            engine.inject_cash(50.0)
        if t == 62:
            engine.submit_slip(
                trader=5, counterparty=9, side="sell", stock="comfort", quantity=3, price=80.0
            )
            engine.submit_slip(
                trader=9, counterparty=5, side="buy", stock="comfort", quantity=3, price=80.0
            )
        if t == 80:
            engine.submit_slip(
                trader=7, counterparty=8, side="buy", stock="protection", quantity=2, price=70.0
            )  # left unmatched, expires
        engine.tick()
    engine.close()
    return engine


@criterion("replay determinism: 120-tick scripted run replays byte-identically")
def test_replay_determinism(tmp_path):
    log_path = tmp_path / "performance.ndjson"
    engine = _scripted_120_tick_performance(log_path)
    assert engine.ended

    result = replay_log(log_path)
    assert result.snapshot_json == engine.snapshot_json()
    assert result.payout is not None and engine.payout is not None
    assert result.payout.shares == engine.payout.shares
    assert sum(result.payout.shares.values()) == pytest.approx(1.0, abs=1e-9)


@criterion("agent simulator: empty file at density 0; bias 0.8 rejects p=0.5; 12 tracks; seed-stable bytes")
def test_agent_simulator(tmp_path):
    genome = random_genome(random.Random(17))

    silent_cfg = AgentSimConfig(
        tuneset=genome, schedule=(Segment(50, 0.0, 0.5),), n_agents=12, seed=1
    )
    silent_path = tmp_path / "silent.mid"
    silent_summary = run_simulation(silent_cfg, silent_path)
    silent = read_smf(silent_path)
    assert silent_summary.n_events == 0
    assert silent.format == 1 and silent.note_count == 0

    cfg = AgentSimConfig(
        tuneset=genome, schedule=(Segment(6000, 1.0, 0.8),), n_agents=12, seed=5
    )
    opera_path = tmp_path / "opera.mid"
    summary = run_simulation(cfg, opera_path)
    assert summary.n_events >= 2000
    test_result = stats.binomtest(summary.buy_events, summary.n_events, p=0.5)
    assert test_result.pvalue < 0.01

    parsed = read_smf(opera_path)
    assert parsed.format == 1
    assert parsed.note_bearing_tracks == 12

    again = tmp_path / "again.mid"
    run_simulation(cfg, again)
    assert again.read_bytes() == opera_path.read_bytes()


@criterion("hidden-regime invariant: 1000 fuzzed snapshots never leak regime or force")
def test_hidden_regime_invariant():
    rng = random.Random(8)
    config = PerformanceConfig(
        market=load_market_config(), exchange=ExchangeConfig(), duration_ticks=5000, seed=4
    )
    engine = PerformanceEngine(config)
    engine.start()

    def assert_clean(node):
        if isinstance(node, dict):
            for key, value in node.items():
                assert "regime" not in key.lower()
                assert "force" not in key.lower()
                assert_clean(value)
        elif isinstance(node, list):
            for item in node:
                assert_clean(item)

    forces = [None, *REGIMES]
    for k in range(1000):
        engine.market.regime = rng.choice(REGIMES)
        engine.market.forced = rng.choice(forces)
        if k % 7 == 0:
            engine.tick()
        snapshot = engine.snapshot()
        assert_clean(snapshot)
        text = json.dumps(snapshot, sort_keys=True)
        assert '"regime"' not in text and '"forced"' not in text
