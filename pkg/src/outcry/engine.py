"""Live performance orchestration: the tick loop, commands, log and replay.

One engine owns one performance.  Every 15 seconds (one tick) it advances
the hidden regime (honoring any conductor override), picks the news story
that foreshadows the move, updates prices, melts everyone's cash a little,
expires stale slips, and publishes a display snapshot.  Conductor and
administrator commands arrive between ticks and are applied in order.

Everything observable is appended to an event log (newline-delimited JSON,
flushed per record).  Every random outcome lands in the log, so `replay`
can rebuild the exact final state, byte for byte, without touching a
random generator.

Display snapshots deliberately never carry the regime or the conductor's
override: performers may only infer the market mood from prices and news.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Mapping, Sequence

import yaml

from .core import STOCKS, Regime, Side, StockId
from .exchange import (
    Portfolio,
    PayoutSplit,
    RejectionReason,
    Slip,
    SlipBook,
    SlipRejected,
    Trade,
    TradeRejected,
    apply_cash_injection,
    apply_inflation,
    compute_payouts,
    execute_trade,
    expire_slips,
    initial_portfolios,
    submit_slip,
    value_portfolio,
)
from .market import (
    MarketConfig,
    MarketState,
    advance_regime,
    initial_state,
    load_market_config,
    market_config_from_dict,
    pick_news,
    step_prices,
)

RECENT_TRADES_SHOWN = 10


class EventKind(str, Enum):
    TICK = "tick"
    NEWS = "news"
    PRICE_UPDATE = "price_update"
    REGIME_CHANGE = "regime_change"
    SLIP_SUBMITTED = "slip_submitted"
    TRADE_EXECUTED = "trade_executed"
    TRADE_REJECTED = "trade_rejected"
    INFLATION = "inflation"
    INJECTION = "injection"
    CONDUCTOR_COMMAND = "conductor_command"
    PERFORMANCE_START = "performance_start"
    PERFORMANCE_END = "performance_end"
    PAYOUT = "payout"


@dataclass(frozen=True)
class EventRecord:
    seq: int
    tick: int
    kind: EventKind
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "tick": self.tick, "kind": self.kind.value, "payload": self.payload},
            sort_keys=True,
        )


class CommandRejected(ValueError):
    """A conductor/administrator command the engine refuses in its current state."""


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class ExchangeConfig:
    n_traders: int = 12
    units_per_stock: int = 10
    initial_cash: float = 1000.0
    inflation_rate: float = 0.002
    injection_amount: float = 50.0
    slip_expiry_ticks: int = 4
    pot: float = 1000.0
    show_holdings: bool = True


@dataclass
class PerformanceConfig:
    market: MarketConfig
    exchange: ExchangeConfig = ExchangeConfig()
    duration_ticks: int = 120
    tempo_start_bpm: float = 60.0
    seed: int = 0
    tokens: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.duration_ticks < 1:
            raise ValueError("duration_ticks must be at least 1")


def load_performance_config(path: str | Path | None = None) -> PerformanceConfig:
    """Load a performance config file; the market section uses the market schema."""
    if path is None:
        return PerformanceConfig(market=load_market_config())
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    market = market_config_from_dict(raw["market"]) if "market" in raw else load_market_config()
    ex = raw.get("exchange", {})
    exchange = ExchangeConfig(
        n_traders=int(ex.get("n_traders", 12)),
        units_per_stock=int(ex.get("units_per_stock", 10)),
        initial_cash=float(ex.get("initial_cash", 1000.0)),
        inflation_rate=float(ex.get("inflation_rate", 0.002)),
        injection_amount=float(ex.get("injection_amount", 50.0)),
        slip_expiry_ticks=int(ex.get("slip_expiry_ticks", 4)),
        pot=float(ex.get("pot", 1000.0)),
        show_holdings=bool(ex.get("show_holdings", True)),
    )
    return PerformanceConfig(
        market=market,
        exchange=exchange,
        duration_ticks=int(raw.get("duration_ticks", 120)),
        tempo_start_bpm=float(raw.get("tempo_start_bpm", 60.0)),
        seed=int(raw.get("seed", market.seed)),
        tokens=dict(raw.get("tokens", {})),
    )


def _portfolio_values(
    portfolios: Mapping[int, Portfolio], prices: Mapping[StockId, float]
) -> dict[str, float]:
    return {str(t): value_portfolio(p, prices) for t, p in portfolios.items()}


def _portfolios_payload(portfolios: Mapping[int, Portfolio]) -> dict:
    return {
        str(t): {"cash": p.cash, "holdings": {s.value: p.holdings[s] for s in STOCKS}}
        for t, p in portfolios.items()
    }


def build_snapshot(
    *,
    tick: int,
    running: bool,
    ended: bool,
    duration_ticks: int,
    prices: Mapping[StockId, float],
    price_history: Mapping[StockId, Sequence[float]],
    display_names: Mapping[StockId, str],
    news: str | None,
    portfolios: Mapping[int, Portfolio],
    show_holdings: bool,
    recent_trades: Sequence[dict],
    shout: bool,
    tempo_bpm: float,
    payout: dict | None,
) -> dict:
    """The display-wall data. The hidden regime and any conductor force never
    appear here; prices and news are the only clues performers get."""
    snapshot = {
        "tick": tick,
        "running": running,
        "ended": ended,
        "duration_ticks": duration_ticks,
        "prices": {s.value: prices[s] for s in STOCKS},
        "price_history": {s.value: list(price_history[s]) for s in STOCKS},
        "display_names": {s.value: display_names[s] for s in STOCKS},
        "news": news,
        "portfolio_values": _portfolio_values(portfolios, prices),
        "recent_trades": list(recent_trades[-RECENT_TRADES_SHOWN:]),
        "shout": shout,
        "tempo_bpm": tempo_bpm,
        "payout": payout,
    }
    if show_holdings:
        snapshot["portfolios"] = _portfolios_payload(portfolios)
    return snapshot


class PerformanceEngine:
    """Single owner of one performance's state.

    All mutating entry points (tick, conductor and admin commands) are
    serialized behind one lock, so observers never see a half-applied
    step.  Methods return the event records they appended, which the HTTP
    layer fans out to subscribers.
    """

    def __init__(self, config: PerformanceConfig, log_path: str | Path | None = None):
        self.config = config
        self.market: MarketState = initial_state(config.market, seed=config.seed)
        self.portfolios = initial_portfolios(
            config.exchange.n_traders,
            config.exchange.units_per_stock,
            config.exchange.initial_cash,
        )
        self.book = SlipBook()
        self.started = False
        self.ended = False
        self.shout = False
        self.tempo_bpm = config.tempo_start_bpm
        self.latest_news: str | None = None
        self.price_history: dict[StockId, list[float]] = {s: [] for s in STOCKS}
        self.trades: list[dict] = []
        self.payout_payload: dict | None = None
        self.payout: PayoutSplit | None = None
        self.records: list[EventRecord] = []
        self._seq = 0
        self._slip_seq = 0
        self._lock = threading.RLock()
        self._log: IO[str] | None = open(log_path, "w", encoding="utf-8") if log_path else None

    # -- record plumbing ------------------------------------------------------

    def _record(self, tick: int, kind: EventKind, payload: dict) -> EventRecord:
        self._seq += 1
        record = EventRecord(seq=self._seq, tick=tick, kind=kind, payload=payload)
        self.records.append(record)
        if self._log is not None:
            self._log.write(record.to_json() + "\n")
            self._log.flush()
        return record

    def close(self) -> None:
        if self._log is not None:
            self._log.close()
            self._log = None

    # -- views -----------------------------------------------------------------

    @property
    def running(self) -> bool:
        return self.started and not self.ended

    def _prices_dict(self) -> dict[StockId, float]:
        return {s: float(self.market.prices[i]) for i, s in enumerate(STOCKS)}

    def snapshot(self) -> dict:
        with self._lock:
            return build_snapshot(
                tick=self.market.tick,
                running=self.running,
                ended=self.ended,
                duration_ticks=self.config.duration_ticks,
                prices=self._prices_dict(),
                price_history=self.price_history,
                display_names=self.config.market.display_names,
                news=self.latest_news,
                portfolios=self.portfolios,
                show_holdings=self.config.exchange.show_holdings,
                recent_trades=self.trades,
                shout=self.shout,
                tempo_bpm=self.tempo_bpm,
                payout=self.payout_payload,
            )

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    # -- conductor commands ------------------------------------------------------

    def _require_running(self) -> None:
        if not self.started:
            raise CommandRejected("performance has not started")
        if self.ended:
            raise CommandRejected("performance has ended")

    def start(self) -> list[EventRecord]:
        with self._lock:
            if self.started:
                raise CommandRejected("performance already started")
            self.started = True
            for i, stock in enumerate(STOCKS):
                self.price_history[stock].append(float(self.market.prices[i]))
            ex = self.config.exchange
            payload = {
                "config": {
                    "duration_ticks": self.config.duration_ticks,
                    "tempo_start_bpm": self.config.tempo_start_bpm,
                    "seed": self.config.seed,
                    "n_traders": ex.n_traders,
                    "units_per_stock": ex.units_per_stock,
                    "initial_cash": ex.initial_cash,
                    "inflation_rate": ex.inflation_rate,
                    "injection_amount": ex.injection_amount,
                    "slip_expiry_ticks": ex.slip_expiry_ticks,
                    "pot": ex.pot,
                    "show_holdings": ex.show_holdings,
                    "initial_prices": {s.value: float(self.market.prices[i]) for i, s in enumerate(STOCKS)},
                    "display_names": {s.value: self.config.market.display_names[s] for s in STOCKS},
                }
            }
            return [self._record(0, EventKind.PERFORMANCE_START, payload)]

    def end(self) -> list[EventRecord]:
        with self._lock:
            self._require_running()
            return self._finish()

    def force_regime(self, mode: Regime | None) -> list[EventRecord]:
        with self._lock:
            self._require_running()
            self.market.forced = mode
            payload = {"command": "force_regime", "mode": mode.value if mode else "auto"}
            return [self._record(self.market.tick, EventKind.CONDUCTOR_COMMAND, payload)]

    def set_shout(self, on: bool) -> list[EventRecord]:
        with self._lock:
            self._require_running()
            self.shout = bool(on)
            payload = {"command": "shout", "on": self.shout}
            return [self._record(self.market.tick, EventKind.CONDUCTOR_COMMAND, payload)]

    def set_tempo(self, bpm: float) -> list[EventRecord]:
        with self._lock:
            self._require_running()
            if bpm <= 0:
                raise CommandRejected("tempo must be positive")
            self.tempo_bpm = float(bpm)
            payload = {"command": "tempo", "bpm": self.tempo_bpm}
            return [self._record(self.market.tick, EventKind.CONDUCTOR_COMMAND, payload)]

    # -- administrator commands ---------------------------------------------------

    def submit_slip(
        self,
        *,
        trader: int,
        counterparty: int,
        side: Side | str,
        stock: StockId | str,
        quantity: int,
        price: float,
    ) -> "SlipOutcome":
        with self._lock:
            self._require_running()
            raw = {
                "trader": trader,
                "counterparty": counterparty,
                "side": str(getattr(side, "value", side)),
                "stock": str(getattr(stock, "value", stock)),
                "quantity": quantity,
                "price": price,
            }
            try:
                side = Side(raw["side"])
                stock = StockId(raw["stock"])
            except ValueError:
                return self._reject_slip(raw, RejectionReason.MALFORMED)
            if trader not in self.portfolios or counterparty not in self.portfolios:
                return self._reject_slip(raw, RejectionReason.UNKNOWN_TRADER)
            try:
                slip = Slip(
                    id=self._slip_seq + 1,
                    trader=int(trader),
                    counterparty=int(counterparty),
                    side=side,
                    stock=stock,
                    quantity=int(quantity),
                    price=float(price),
                    tick_submitted=self.market.tick,
                )
            except SlipRejected as rejection:
                return self._reject_slip(raw, rejection.reason)
            self._slip_seq += 1
            return self._accept_slip(slip)

    def _reject_slip(self, raw: dict, reason: RejectionReason) -> "SlipOutcome":
        record = self._record(
            self.market.tick,
            EventKind.TRADE_REJECTED,
            {"stage": "intake", "reason": reason.value, "slip": raw},
        )
        return SlipOutcome(status="rejected", reason=reason.value, records=[record])

    def _accept_slip(self, slip: Slip) -> "SlipOutcome":
        records = [
            self._record(
                self.market.tick,
                EventKind.SLIP_SUBMITTED,
                {"slip": _slip_payload(slip)},
            )
        ]
        self.book, trade = submit_slip(self.book, slip)
        if trade is None:
            return SlipOutcome(status="pending", slip_id=slip.id, records=records)
        try:
            self.portfolios = execute_trade(trade, self.portfolios)
        except TradeRejected as rejection:
            records.append(
                self._record(
                    self.market.tick,
                    EventKind.TRADE_REJECTED,
                    {
                        "stage": "execution",
                        "reason": rejection.reason.value,
                        "trade": _trade_payload(trade),
                    },
                )
            )
            return SlipOutcome(
                status="rejected", slip_id=slip.id, reason=rejection.reason.value, records=records
            )
        payload = _trade_payload(trade)
        self.trades.append(payload)
        records.append(self._record(self.market.tick, EventKind.TRADE_EXECUTED, {"trade": payload}))
        return SlipOutcome(status="matched", slip_id=slip.id, trade=payload, records=records)

    def inject_cash(self, amount: float | None = None) -> list[EventRecord]:
        with self._lock:
            self._require_running()
            amount = self.config.exchange.injection_amount if amount is None else float(amount)
            if amount <= 0:
                raise CommandRejected("injection amount must be positive")
            self.portfolios = apply_cash_injection(self.portfolios, amount)
            return [self._record(self.market.tick, EventKind.INJECTION, {"amount": amount})]

    # -- the tick loop -------------------------------------------------------------

    def tick(self) -> list[EventRecord]:
        """One 15-second cycle: regime, news, prices, inflation, expiry, snapshot."""
        with self._lock:
            if not self.started:
                raise CommandRejected("cannot tick before the performance starts")
            if self.ended:
                raise CommandRejected("cannot tick after the performance ends")
            cycle = self.market.tick + 1
            records = [self._record(cycle, EventKind.TICK, {})]

            was = self.market.regime
            self.market = advance_regime(self.market, self.config.market.hazard)
            if self.market.regime is not was:
                source = "forced" if self.market.forced is not None else "hazard"
                records.append(
                    self._record(
                        cycle,
                        EventKind.REGIME_CHANGE,
                        {"regime": self.market.regime.value, "source": source},
                    )
                )

            news = pick_news(self.market.regime, self.config.market.news_pools, self.market.rng)
            self.latest_news = news.text
            records.append(
                self._record(cycle, EventKind.NEWS, {"text": news.text, "regime": news.regime.value})
            )

            self.market = step_prices(self.market, self.config.market.regimes)
            prices = self._prices_dict()
            for stock in STOCKS:
                self.price_history[stock].append(prices[stock])
            records.append(
                self._record(
                    cycle,
                    EventKind.PRICE_UPDATE,
                    {"prices": {s.value: prices[s] for s in STOCKS}},
                )
            )

            rate = self.config.exchange.inflation_rate
            self.portfolios = apply_inflation(self.portfolios, rate)
            records.append(self._record(cycle, EventKind.INFLATION, {"rate": rate}))

            self.book, _stale = expire_slips(
                self.book, self.market.tick, self.config.exchange.slip_expiry_ticks
            )

            if self.market.tick >= self.config.duration_ticks:
                records.extend(self._finish())
            return records

    def _finish(self) -> list[EventRecord]:
        prices = self._prices_dict()
        records = [
            self._record(
                self.market.tick,
                EventKind.PERFORMANCE_END,
                {"final_prices": {s.value: prices[s] for s in STOCKS}},
            )
        ]
        self.payout = compute_payouts(self.portfolios, prices, self.config.exchange.pot)
        self.payout_payload = {
            "pot": self.payout.pot,
            "values": {str(t): value_portfolio(p, prices) for t, p in self.portfolios.items()},
            "shares": {str(t): share for t, share in self.payout.shares.items()},
        }
        records.append(self._record(self.market.tick, EventKind.PAYOUT, self.payout_payload))
        self.ended = True
        return records


@dataclass
class SlipOutcome:
    """Acknowledgement returned to the administrator console."""

    status: str  # "pending" | "matched" | "rejected"
    records: list[EventRecord]
    slip_id: int | None = None
    trade: dict | None = None
    reason: str | None = None


def _slip_payload(slip: Slip) -> dict:
    return {
        "id": slip.id,
        "trader": slip.trader,
        "counterparty": slip.counterparty,
        "side": slip.side.value,
        "stock": slip.stock.value,
        "quantity": slip.quantity,
        "price": slip.price,
        "tick": slip.tick_submitted,
    }


def _trade_payload(trade: Trade) -> dict:
    return {
        "buyer": trade.buyer,
        "seller": trade.seller,
        "stock": trade.stock.value,
        "quantity": trade.quantity,
        "price": trade.price,
        "tick": trade.tick_executed,
    }


# --- deterministic replay --------------------------------------------------------


@dataclass
class ReplayResult:
    snapshot: dict
    snapshot_json: str
    payout: PayoutSplit | None
    n_records: int


class _ReplayState:
    def __init__(self, start_payload: dict):
        cfg = start_payload["config"]
        self.cfg = cfg
        self.portfolios = initial_portfolios(
            cfg["n_traders"], cfg["units_per_stock"], cfg["initial_cash"]
        )
        self.book = SlipBook()
        self.prices = {s: float(cfg["initial_prices"][s.value]) for s in STOCKS}
        self.price_history = {s: [self.prices[s]] for s in STOCKS}
        self.display_names = {s: cfg["display_names"][s.value] for s in STOCKS}
        self.tick = 0
        self.started = True
        self.ended = False
        self.latest_news: str | None = None
        self.trades: list[dict] = []
        self.shout = False
        self.tempo_bpm = float(cfg["tempo_start_bpm"])
        self.payout: PayoutSplit | None = None
        self.payout_payload: dict | None = None


def replay_records(records: Sequence[EventRecord]) -> ReplayResult:
    """Rebuild the final state from the log alone (no randomness re-run).

    The log must be complete: contiguous sequence numbers from 1, starting
    with the performance-start record and reaching the payout.
    """
    if not records:
        raise ReplayError("log is empty: missing performance start at sequence 1")
    expected_seq = 1
    state: _ReplayState | None = None
    for record in records:
        if record.seq != expected_seq:
            raise ReplayError(f"sequence gap: expected {expected_seq}, found {record.seq}")
        expected_seq += 1
        if state is None:
            if record.kind is not EventKind.PERFORMANCE_START:
                raise ReplayError("log must start with a performance-start record")
            state = _ReplayState(record.payload)
            continue
        _apply(state, record)
    assert state is not None
    if not state.ended:
        raise ReplayError(f"log truncated: ends at sequence {records[-1].seq} before the performance ended")

    snapshot = build_snapshot(
        tick=state.tick,
        running=False,
        ended=True,
        duration_ticks=int(state.cfg["duration_ticks"]),
        prices=state.prices,
        price_history=state.price_history,
        display_names=state.display_names,
        news=state.latest_news,
        portfolios=state.portfolios,
        show_holdings=bool(state.cfg["show_holdings"]),
        recent_trades=state.trades,
        shout=state.shout,
        tempo_bpm=state.tempo_bpm,
        payout=state.payout_payload,
    )
    return ReplayResult(
        snapshot=snapshot,
        snapshot_json=json.dumps(snapshot, sort_keys=True),
        payout=state.payout,
        n_records=len(records),
    )


def _apply(state: _ReplayState, record: EventRecord) -> None:
    kind, payload = record.kind, record.payload
    if kind is EventKind.PERFORMANCE_START:
        raise ReplayError(f"duplicate performance start at sequence {record.seq}")
    elif kind is EventKind.PRICE_UPDATE:
        state.tick = record.tick
        for stock in STOCKS:
            price = float(payload["prices"][stock.value])
            state.prices[stock] = price
            state.price_history[stock].append(price)
    elif kind is EventKind.NEWS:
        state.latest_news = payload["text"]
    elif kind is EventKind.INFLATION:
        state.portfolios = apply_inflation(state.portfolios, float(payload["rate"]))
        state.book, _ = expire_slips(state.book, record.tick, int(state.cfg["slip_expiry_ticks"]))
    elif kind is EventKind.INJECTION:
        state.portfolios = apply_cash_injection(state.portfolios, float(payload["amount"]))
    elif kind is EventKind.SLIP_SUBMITTED:
        raw = payload["slip"]
        slip = Slip(
            id=int(raw["id"]),
            trader=int(raw["trader"]),
            counterparty=int(raw["counterparty"]),
            side=Side(raw["side"]),
            stock=StockId(raw["stock"]),
            quantity=int(raw["quantity"]),
            price=float(raw["price"]),
            tick_submitted=int(raw["tick"]),
        )
        state.book, _trade = submit_slip(state.book, slip)
    elif kind is EventKind.TRADE_EXECUTED:
        raw = payload["trade"]
        trade = Trade(
            buyer=int(raw["buyer"]),
            seller=int(raw["seller"]),
            stock=StockId(raw["stock"]),
            quantity=int(raw["quantity"]),
            price=float(raw["price"]),
            tick_executed=int(raw["tick"]),
        )
        state.portfolios = execute_trade(trade, state.portfolios)
        state.trades.append(dict(raw))
    elif kind is EventKind.CONDUCTOR_COMMAND:
        command = payload.get("command")
        if command == "shout":
            state.shout = bool(payload["on"])
        elif command == "tempo":
            state.tempo_bpm = float(payload["bpm"])
    elif kind is EventKind.PERFORMANCE_END:
        state.tick = record.tick
    elif kind is EventKind.PAYOUT:
        state.ended = True
        state.payout = compute_payouts(state.portfolios, state.prices, float(payload["pot"]))
        state.payout_payload = {
            "pot": state.payout.pot,
            "values": {
                str(t): value_portfolio(p, state.prices) for t, p in state.portfolios.items()
            },
            "shares": {str(t): share for t, share in state.payout.shares.items()},
        }
    # TICK, REGIME_CHANGE and TRADE_REJECTED need no state changes: the regime
    # is hidden state the display never uses, and rejected trades left the
    # ledgers untouched.


def parse_log(path: str | Path) -> list[EventRecord]:
    records: list[EventRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    EventRecord(
                        seq=int(obj["seq"]),
                        tick=int(obj["tick"]),
                        kind=EventKind(obj["kind"]),
                        payload=obj["payload"],
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ReplayError(f"corrupt record at line {lineno}: {exc}") from None
    return records


def replay_log(path: str | Path) -> ReplayResult:
    return replay_records(parse_log(path))
