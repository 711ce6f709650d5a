"""Trade-slip intake, bilateral matching, portfolio ledgers and the payout split.

Trading here is not an order book.  Two singers agree a trade on the floor,
then each files a slip naming the other as counterparty; when the second
slip arrives and mirrors the first exactly (same stock, quantity and price,
opposite side), the administrator's reconciliation produces a Trade.
Anything that does not mirror an outstanding slip just waits in the book
until it expires.

Ledgers are strict: no shorting and no negative cash, enforced atomically
at trade execution.  Cash decays multiplicatively each tick (the artificial
hyperinflation that keeps hoarders singing) and can be topped up by equal
cash injections.  At the end, portfolios are valued at the underlying
prices and the bonus pot is split in proportion to value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

from .core import STOCKS, Side, StockId

TraderId = int


class RejectionReason(str, Enum):
    MALFORMED = "malformed"
    SELF_TRADE = "self_trade"
    BAD_QUANTITY = "bad_quantity"
    BAD_PRICE = "bad_price"
    UNKNOWN_TRADER = "unknown_trader"
    INSUFFICIENT_CASH = "insufficient_cash"
    INSUFFICIENT_HOLDINGS = "insufficient_holdings"


class SlipRejected(ValueError):
    def __init__(self, reason: RejectionReason, detail: str = ""):
        super().__init__(detail or reason.value)
        self.reason = reason


class TradeRejected(Exception):
    def __init__(self, reason: RejectionReason, detail: str = ""):
        super().__init__(detail or reason.value)
        self.reason = reason


@dataclass(frozen=True)
class Portfolio:
    """Per-trader stock units and cash; both are never negative."""

    holdings: Mapping[StockId, int]
    cash: float

    def __post_init__(self) -> None:
        holdings = {stock: int(self.holdings.get(stock, 0)) for stock in STOCKS}
        if any(units < 0 for units in holdings.values()):
            raise ValueError("holdings cannot be negative")
        if self.cash < 0:
            raise ValueError("cash cannot be negative")
        object.__setattr__(self, "holdings", holdings)


@dataclass(frozen=True)
class Slip:
    """One side of a bilateral trade, as written on the cardboard slip."""

    id: int
    trader: TraderId
    counterparty: TraderId
    side: Side
    stock: StockId
    quantity: int
    price: float
    tick_submitted: int

    def __post_init__(self) -> None:
        if self.trader == self.counterparty:
            raise SlipRejected(RejectionReason.SELF_TRADE, "a trader cannot trade with themselves")
        if self.quantity < 1:
            raise SlipRejected(RejectionReason.BAD_QUANTITY, "quantity must be at least 1")
        if self.price <= 0:
            raise SlipRejected(RejectionReason.BAD_PRICE, "price must be positive")

    def mirrors(self, other: "Slip") -> bool:
        return (
            other.trader == self.counterparty
            and other.counterparty == self.trader
            and other.stock is self.stock
            and other.quantity == self.quantity
            and other.price == self.price
            and other.side is not self.side
        )


@dataclass(frozen=True)
class Trade:
    buyer: TraderId
    seller: TraderId
    stock: StockId
    quantity: int
    price: float
    tick_executed: int

    def __post_init__(self) -> None:
        if self.buyer == self.seller:
            raise ValueError("buyer and seller must differ")


@dataclass(frozen=True)
class SlipBook:
    """Pending (unmatched) slips in arrival order."""

    pending: tuple[Slip, ...] = ()

    def __len__(self) -> int:
        return len(self.pending)


def submit_slip(book: SlipBook, slip: Slip) -> tuple[SlipBook, Trade | None]:
    """Reconcile a slip against the book.

    Returns the updated book and the Trade if the slip exactly mirrors an
    outstanding one from its counterparty (first such slip, in arrival
    order).  Otherwise the slip joins the book.
    """
    for candidate in book.pending:
        if slip.mirrors(candidate):
            remaining = tuple(s for s in book.pending if s is not candidate)
            buy_side = slip if slip.side is Side.BUY else candidate
            sell_side = candidate if buy_side is slip else slip
            trade = Trade(
                buyer=buy_side.trader,
                seller=sell_side.trader,
                stock=slip.stock,
                quantity=slip.quantity,
                price=slip.price,
                tick_executed=slip.tick_submitted,
            )
            return SlipBook(remaining), trade
    return SlipBook(book.pending + (slip,)), None


def expire_slips(book: SlipBook, current_tick: int, max_age_ticks: int) -> tuple[SlipBook, list[Slip]]:
    """Drop slips that have waited `max_age_ticks` or more ticks unmatched."""
    fresh, stale = [], []
    for slip in book.pending:
        (stale if current_tick - slip.tick_submitted >= max_age_ticks else fresh).append(slip)
    return SlipBook(tuple(fresh)), stale


def execute_trade(
    trade: Trade, portfolios: Mapping[TraderId, Portfolio]
) -> dict[TraderId, Portfolio]:
    """Settle a matched trade; rejects atomically rather than go negative."""
    buyer = portfolios[trade.buyer]
    seller = portfolios[trade.seller]
    cost = trade.quantity * trade.price
    if buyer.cash < cost:
        raise TradeRejected(
            RejectionReason.INSUFFICIENT_CASH,
            f"buyer {trade.buyer} has {buyer.cash:.2f}, needs {cost:.2f}",
        )
    if seller.holdings[trade.stock] < trade.quantity:
        raise TradeRejected(
            RejectionReason.INSUFFICIENT_HOLDINGS,
            f"seller {trade.seller} holds {seller.holdings[trade.stock]}, needs {trade.quantity}",
        )
    updated = dict(portfolios)
    updated[trade.buyer] = Portfolio(
        holdings={**buyer.holdings, trade.stock: buyer.holdings[trade.stock] + trade.quantity},
        cash=buyer.cash - cost,
    )
    updated[trade.seller] = Portfolio(
        holdings={**seller.holdings, trade.stock: seller.holdings[trade.stock] - trade.quantity},
        cash=seller.cash + cost,
    )
    return updated


def apply_inflation(
    portfolios: Mapping[TraderId, Portfolio], rate_per_tick: float
) -> dict[TraderId, Portfolio]:
    """Decay every trader's cash by the per-tick inflation rate; stock untouched."""
    if not 0 <= rate_per_tick < 1:
        raise ValueError("inflation rate must lie in [0, 1)")
    factor = 1.0 - rate_per_tick
    return {t: replace(p, cash=p.cash * factor) for t, p in portfolios.items()}


def apply_cash_injection(
    portfolios: Mapping[TraderId, Portfolio], amount: float
) -> dict[TraderId, Portfolio]:
    """Hand every trader the same free unit of cash."""
    if amount <= 0:
        raise ValueError("injection amount must be positive")
    return {t: replace(p, cash=p.cash + amount) for t, p in portfolios.items()}


def value_portfolio(portfolio: Portfolio, prices: Mapping[StockId, float]) -> float:
    """Cash plus holdings marked at the given underlying prices."""
    value = portfolio.cash
    for stock in STOCKS:
        value += portfolio.holdings[stock] * prices[stock]
    return value


@dataclass(frozen=True)
class PayoutSplit:
    """Each trader's fraction of the bonus pot; fractions sum to one."""

    shares: Mapping[TraderId, float]
    pot: float

    def __post_init__(self) -> None:
        total = sum(self.shares.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"shares must sum to 1, got {total}")
        if any(s < 0 for s in self.shares.values()):
            raise ValueError("shares cannot be negative")
        object.__setattr__(self, "shares", dict(self.shares))

    def amount_for(self, trader: TraderId) -> float:
        return self.shares[trader] * self.pot


def compute_payouts(
    portfolios: Mapping[TraderId, Portfolio],
    prices: Mapping[StockId, float],
    pot: float,
) -> PayoutSplit:
    """Split the pot in proportion to final portfolio value (floored at zero)."""
    if pot <= 0:
        raise ValueError("pot must be positive")
    values = {t: max(0.0, value_portfolio(p, prices)) for t, p in portfolios.items()}
    total = sum(values.values())
    if total <= 0:
        equal = 1.0 / len(values)
        return PayoutSplit(shares={t: equal for t in values}, pot=pot)
    return PayoutSplit(shares={t: v / total for t, v in values.items()}, pot=pot)


def initial_portfolios(
    n_traders: int = 12, units_per_stock: int = 10, cash: float = 1000.0
) -> dict[TraderId, Portfolio]:
    """The default roster: traders 1..n, same starting book for everyone."""
    return {
        t: Portfolio(holdings={s: units_per_stock for s in STOCKS}, cash=cash)
        for t in range(1, n_traders + 1)
    }
