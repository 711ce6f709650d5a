import json

import pytest

from outcry.core import Regime, StockId
from outcry.engine import (
    CommandRejected,
    EventKind,
    EventRecord,
    ExchangeConfig,
    PerformanceConfig,
    PerformanceEngine,
    ReplayError,
    load_performance_config,
    parse_log,
    replay_log,
    replay_records,
)
from outcry.market import load_market_config


def make_config(duration_ticks=30, seed=5, **exchange_overrides):
    exchange = ExchangeConfig(**exchange_overrides) if exchange_overrides else ExchangeConfig()
    return PerformanceConfig(
        market=load_market_config(),
        exchange=exchange,
        duration_ticks=duration_ticks,
        tempo_start_bpm=60.0,
        seed=seed,
    )


def make_engine(tmp_path=None, **kwargs):
    log = (tmp_path / "perf.ndjson") if tmp_path is not None else None
    return PerformanceEngine(make_config(**kwargs), log_path=log)


def scripted_performance(engine):
    """A fixed command script over a full run, exercising every surface."""
    engine.start()
    mirror_pending = False
    for t in range(engine.config.duration_ticks):
        if t == 3:
            engine.force_regime(Regime.BUST)
        if t == 8:
            engine.force_regime(None)
        if t == 5:
            engine.set_tempo(63.0)
            engine.set_shout(True)
        if t == 7:
            engine.set_shout(False)
            engine.set_tempo(66.0)
        if t == 10:
            engine.submit_slip(
                trader=1, counterparty=2, side="buy", stock="wealth", quantity=5, price=90.0
            )
            mirror_pending = True
        if t == 11 and mirror_pending:
            engine.submit_slip(
                trader=2, counterparty=1, side="sell", stock="wealth", quantity=5, price=90.0
            )
        if t == 13:
            engine.inject_cash(50.0)
        if t == 15:
            # an over-sized order that matches but cannot settle
            engine.submit_slip(
                trader=3, counterparty=4, side="buy", stock="comfort", quantity=1000, price=100.0
            )
            engine.submit_slip(
                trader=4, counterparty=3, side="sell", stock="comfort", quantity=1000, price=100.0
            )
        engine.tick()
    return engine


class TestLifecycle:
    def test_tick_before_start_rejected(self):
        engine = make_engine()
        with pytest.raises(CommandRejected):
            engine.tick()

    def test_double_start_rejected(self):
        engine = make_engine()
        engine.start()
        with pytest.raises(CommandRejected):
            engine.start()

    def test_conductor_commands_before_start_rejected(self):
        engine = make_engine()
        with pytest.raises(CommandRejected):
            engine.set_tempo(70)
        with pytest.raises(CommandRejected):
            engine.force_regime(Regime.BUST)

    def test_performance_ends_after_duration(self):
        engine = make_engine(duration_ticks=5)
        engine.start()
        for _ in range(5):
            engine.tick()
        assert engine.ended
        kinds = [r.kind for r in engine.records]
        assert kinds.count(EventKind.PERFORMANCE_END) == 1
        assert kinds.count(EventKind.PAYOUT) == 1
        with pytest.raises(CommandRejected):
            engine.tick()

    def test_manual_end_computes_payout(self):
        engine = make_engine(duration_ticks=100)
        engine.start()
        engine.tick()
        engine.end()
        assert engine.ended
        assert engine.payout is not None
        assert sum(engine.payout.shares.values()) == pytest.approx(1.0, abs=1e-9)


class TestTickComposition:
    def cycles(self, engine):
        groups, current = [], None
        for record in engine.records:
            if record.kind is EventKind.TICK:
                current = []
                groups.append(current)
            elif current is not None:
                current.append(record)
        return groups

    def test_fixed_order_every_cycle(self):
        engine = make_engine(duration_ticks=25)
        engine.start()
        for _ in range(25):
            engine.tick()
        for cycle in self.cycles(engine):
            kinds = [r.kind for r in cycle if r.kind not in (EventKind.PERFORMANCE_END, EventKind.PAYOUT)]
            if kinds and kinds[0] is EventKind.REGIME_CHANGE:
                kinds = kinds[1:]
            assert kinds == [EventKind.NEWS, EventKind.PRICE_UPDATE, EventKind.INFLATION]

    def test_news_matches_price_update_regime(self):
        engine = make_engine(duration_ticks=40, seed=11)
        engine.start()
        for _ in range(40):
            engine.tick()
        regime = Regime.NORMAL
        current_news_regime = None
        for record in engine.records:
            if record.kind is EventKind.REGIME_CHANGE:
                regime = Regime(record.payload["regime"])
            elif record.kind is EventKind.NEWS:
                current_news_regime = record.payload["regime"]
            elif record.kind is EventKind.PRICE_UPDATE:
                assert current_news_regime == regime.value

    def test_records_are_gapless_and_increasing(self):
        engine = scripted_performance(make_engine(duration_ticks=20))
        seqs = [r.seq for r in engine.records]
        assert seqs == list(range(1, len(seqs) + 1))

    def test_cycle_records_share_the_update_tick(self):
        engine = make_engine(duration_ticks=4)
        engine.start()
        for _ in range(4):
            engine.tick()
        for cycle_index, cycle in enumerate(self.cycles(engine), start=1):
            for record in cycle:
                assert record.tick == cycle_index


class TestConductor:
    def test_forced_regime_sticks_until_auto(self):
        engine = make_engine(duration_ticks=60, seed=2)
        engine.start()
        engine.force_regime(Regime.BUST)
        for _ in range(20):
            engine.tick()
            assert engine.market.regime is Regime.BUST
        engine.force_regime(None)
        seen = set()
        for _ in range(39):
            engine.tick()
            seen.add(engine.market.regime)
        assert len(seen) > 1  # hazard switching resumed

    def test_tempo_ramp_lands_in_snapshot(self):
        engine = make_engine()
        engine.start()
        engine.set_tempo(63.0)
        engine.set_tempo(66.0)
        assert engine.snapshot()["tempo_bpm"] == 66.0

    def test_shout_toggle_round_trip(self):
        engine = make_engine()
        engine.start()
        before = engine.snapshot()["shout"]
        engine.set_shout(True)
        assert engine.snapshot()["shout"] is True
        engine.set_shout(False)
        assert engine.snapshot()["shout"] == before

    def test_commands_are_logged(self):
        engine = make_engine()
        engine.start()
        engine.set_shout(True)
        engine.force_regime(Regime.BOOM)
        kinds = [r.kind for r in engine.records]
        assert kinds.count(EventKind.CONDUCTOR_COMMAND) == 2


class TestAdmin:
    def test_matched_pair_reaches_the_snapshot(self):
        engine = make_engine()
        engine.start()
        first = engine.submit_slip(
            trader=1, counterparty=2, side="buy", stock="wealth", quantity=10, price=100.0
        )
        assert first.status == "pending"
        second = engine.submit_slip(
            trader=2, counterparty=1, side="sell", stock="wealth", quantity=10, price=100.0
        )
        assert second.status == "matched"
        assert second.trade["buyer"] == 1 and second.trade["seller"] == 2
        engine.tick()
        trades = engine.snapshot()["recent_trades"]
        assert any(t["buyer"] == 1 and t["quantity"] == 10 for t in trades)

    def test_unknown_trader_rejected(self):
        engine = make_engine()
        engine.start()
        outcome = engine.submit_slip(
            trader=99, counterparty=1, side="buy", stock="wealth", quantity=1, price=1.0
        )
        assert outcome.status == "rejected"
        assert outcome.reason == "unknown_trader"
        assert engine.records[-1].kind is EventKind.TRADE_REJECTED

    def test_malformed_side_rejected(self):
        engine = make_engine()
        engine.start()
        outcome = engine.submit_slip(
            trader=1, counterparty=2, side="borrow", stock="wealth", quantity=1, price=1.0
        )
        assert outcome.status == "rejected"
        assert outcome.reason == "malformed"

    def test_self_trade_rejected_with_record(self):
        engine = make_engine()
        engine.start()
        outcome = engine.submit_slip(
            trader=1, counterparty=1, side="buy", stock="wealth", quantity=1, price=1.0
        )
        assert outcome.status == "rejected"
        assert outcome.reason == "self_trade"

    def test_match_that_cannot_settle_is_rejected_and_logged(self):
        engine = make_engine()
        engine.start()
        engine.submit_slip(
            trader=1, counterparty=2, side="buy", stock="wealth", quantity=100, price=100.0
        )
        outcome = engine.submit_slip(
            trader=2, counterparty=1, side="sell", stock="wealth", quantity=100, price=100.0
        )
        assert outcome.status == "rejected"
        assert outcome.reason == "insufficient_cash"
        stages = [
            r.payload.get("stage") for r in engine.records if r.kind is EventKind.TRADE_REJECTED
        ]
        assert "execution" in stages
        # ledgers untouched
        assert engine.portfolios[1].cash == 1000.0
        assert engine.portfolios[2].holdings[StockId.WEALTH] == 10

    def test_injection_raises_every_cash_balance(self):
        engine = make_engine()
        engine.start()
        engine.inject_cash()
        for portfolio in engine.portfolios.values():
            assert portfolio.cash == 1050.0
        kinds = [r.kind for r in engine.records]
        assert kinds.count(EventKind.INJECTION) == 1

    def test_slips_expire_after_the_window(self):
        engine = make_engine(duration_ticks=50)
        engine.start()
        engine.submit_slip(
            trader=1, counterparty=2, side="buy", stock="wealth", quantity=3, price=50.0
        )
        for _ in range(4):
            engine.tick()
        outcome = engine.submit_slip(
            trader=2, counterparty=1, side="sell", stock="wealth", quantity=3, price=50.0
        )
        assert outcome.status == "pending"  # the original slip is gone

    def test_admin_commands_after_end_rejected(self):
        engine = make_engine(duration_ticks=1)
        engine.start()
        engine.tick()
        with pytest.raises(CommandRejected):
            engine.inject_cash(50.0)


class TestSnapshotSecrecy:
    def test_no_regime_or_force_fields(self):
        engine = make_engine(duration_ticks=20, seed=13)
        engine.start()
        engine.force_regime(Regime.BUST)
        for _ in range(10):
            engine.tick()
        text = engine.snapshot_json()
        for needle in ('"regime"', '"forced"', '"force"', '"hidden'):
            assert needle not in text

    def test_snapshot_carries_display_content(self):
        engine = make_engine()
        engine.start()
        engine.tick()
        snap = engine.snapshot()
        assert set(snap["prices"]) == {"wealth", "protection", "comfort"}
        assert len(snap["price_history"]["wealth"]) == 2  # initial + one tick
        assert snap["news"]
        assert snap["portfolio_values"]
        assert snap["portfolios"]["1"]["cash"] == pytest.approx(998.0)


class TestReplay:
    def test_full_scripted_run_replays_byte_identically(self, tmp_path):
        engine = scripted_performance(make_engine(tmp_path, duration_ticks=40, seed=3))
        live_json = engine.snapshot_json()
        result = replay_log(tmp_path / "perf.ndjson")
        assert result.snapshot_json == live_json
        assert result.payout is not None
        assert result.payout.shares == engine.payout.shares
        assert sum(result.payout.shares.values()) == pytest.approx(1.0, abs=1e-9)

    def test_replay_empty_log_fails(self):
        with pytest.raises(ReplayError, match="missing performance start"):
            replay_records([])

    def test_replay_requires_start_record_first(self):
        record = EventRecord(seq=1, tick=0, kind=EventKind.TICK, payload={})
        with pytest.raises(ReplayError, match="must start"):
            replay_records([record])

    def test_gap_reports_first_bad_sequence(self, tmp_path):
        engine = scripted_performance(make_engine(tmp_path, duration_ticks=10))
        records = parse_log(tmp_path / "perf.ndjson")
        broken = [r for r in records if r.seq != 5]
        with pytest.raises(ReplayError, match="expected 5, found 6"):
            replay_records(broken)

    def test_truncated_log_fails_at_the_cut(self, tmp_path):
        engine = scripted_performance(make_engine(tmp_path, duration_ticks=10))
        records = parse_log(tmp_path / "perf.ndjson")
        with pytest.raises(ReplayError, match="truncated"):
            replay_records(records[:-2])

    def test_corrupt_line_names_its_position(self, tmp_path):
        engine = scripted_performance(make_engine(tmp_path, duration_ticks=5))
        path = tmp_path / "perf.ndjson"
        lines = path.read_text().splitlines()
        lines[3] = lines[3][: len(lines[3]) // 2]  # cut a record in half
        path.write_text("\n".join(lines))
        with pytest.raises(ReplayError, match="line 4"):
            replay_log(path)

    def test_payout_uses_final_tick_prices(self, tmp_path):
        engine = scripted_performance(make_engine(tmp_path, duration_ticks=15))
        snap = engine.snapshot()
        final_prices = {StockId(s): p for s, p in snap["prices"].items()}
        from outcry.exchange import value_portfolio

        for trader, portfolio in engine.portfolios.items():
            assert snap["payout"]["values"][str(trader)] == pytest.approx(
                value_portfolio(portfolio, final_prices), abs=1e-12
            )


class TestConfigFile:
    def test_load_defaults(self):
        config = load_performance_config()
        assert config.duration_ticks == 120
        assert config.exchange.n_traders == 12

    def test_load_overrides(self, tmp_path):
        path = tmp_path / "perf.yaml"
        path.write_text(
            """
duration_ticks: 12
tempo_start_bpm: 72
seed: 99
exchange:
  n_traders: 4
  initial_cash: 500
  inflation_rate: 0.01
tokens:
  conductor: c-token
  admin: a-token
"""
        )
        config = load_performance_config(path)
        assert config.duration_ticks == 12
        assert config.exchange.n_traders == 4
        assert config.exchange.inflation_rate == pytest.approx(0.01)
        assert config.tokens == {"conductor": "c-token", "admin": "a-token"}
        assert config.seed == 99
