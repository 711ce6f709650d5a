"""Sung open-outcry market performance engine.

Composition (tune evolution), the regime-switching underlying market, the
bilateral slip exchange, the live performance engine with deterministic
replay, and a musical multi-agent simulator for auditioning tune sets.
"""

from .core import REGIMES, STOCKS, Regime, Side, StockId

__all__ = ["REGIMES", "STOCKS", "Regime", "Side", "StockId"]

__version__ = "0.1.0"
