"""Shared vocabulary: the three tradeable stocks, market regimes, and order sides.

Conventions
-----------
- Stocks are identified by lowercase ids; human-facing display names live in
  configuration, not here.
- There are exactly three stocks. Everything downstream (genomes, covariance
  matrices, portfolios) is sized accordingly.
"""

from __future__ import annotations

from enum import Enum


class StockId(str, Enum):
    WEALTH = "wealth"
    PROTECTION = "protection"
    COMFORT = "comfort"


class Regime(str, Enum):
    BOOM = "boom"
    NORMAL = "normal"
    BUST = "bust"


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"


#: Canonical stock ordering used for vectors, matrices and genome layout.
STOCKS: tuple[StockId, ...] = (StockId.WEALTH, StockId.PROTECTION, StockId.COMFORT)

REGIMES: tuple[Regime, ...] = (Regime.BOOM, Regime.NORMAL, Regime.BUST)
