/**
 * Display-wall state derived purely from snapshots.
 *
 * The model is stateless with respect to market truth: feed it the latest
 * snapshot after a reload and it renders the identical wall. Everything it
 * can show comes from the Snapshot wire type; prices and headlines are the
 * only market mood anyone on stage gets to see.
 */

import type { Snapshot, TradePayload } from "./protocol.js";
import { STOCK_ORDER } from "./protocol.js";
import type { StreamStatus } from "./sse.js";

export interface PortfolioRow {
  trader: number;
  value: number;
  cash: number | null;
  holdings: Record<string, number> | null;
}

export interface PayoutRow {
  trader: number;
  share: number;
  amount: number;
}

export type Trend = "up" | "down" | "flat";

export class ViewModel {
  snapshot: Snapshot | null = null;
  status: StreamStatus = "connecting";

  applySnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
  }

  setStatus(status: StreamStatus): void {
    this.status = status;
  }

  get stale(): boolean {
    return this.status !== "live";
  }

  stocks(): string[] {
    if (!this.snapshot) return [...STOCK_ORDER];
    const known = Object.keys(this.snapshot.prices);
    const canonical: string[] = STOCK_ORDER.filter((s) => known.includes(s));
    return canonical.concat(known.filter((s) => !canonical.includes(s)));
  }

  displayName(stock: string): string {
    return this.snapshot?.display_names[stock] ?? stock;
  }

  price(stock: string): number | null {
    return this.snapshot?.prices[stock] ?? null;
  }

  series(stock: string): number[] {
    return this.snapshot?.price_history[stock] ?? [];
  }

  /** Net movement over the last `window` ticks of history. */
  priceChange(stock: string, window = 3): number {
    const series = this.series(stock);
    if (series.length < 2) return 0;
    const span = Math.min(window, series.length - 1);
    return series[series.length - 1] - series[series.length - 1 - span];
  }

  trend(stock: string, window = 3): Trend {
    const change = this.priceChange(stock, window);
    if (change > 0) return "up";
    if (change < 0) return "down";
    return "flat";
  }

  latestNews(): string | null {
    return this.snapshot?.news ?? null;
  }

  /** Portfolio table rows, highest value first (ties by trader number). */
  portfolioRows(): PortfolioRow[] {
    if (!this.snapshot) return [];
    const rows = Object.entries(this.snapshot.portfolio_values).map(([trader, value]) => ({
      trader: Number(trader),
      value,
      cash: this.snapshot?.portfolios?.[trader]?.cash ?? null,
      holdings: this.snapshot?.portfolios?.[trader]?.holdings ?? null,
    }));
    rows.sort((a, b) => b.value - a.value || a.trader - b.trader);
    return rows;
  }

  recentTrades(): TradePayload[] {
    return this.snapshot ? [...this.snapshot.recent_trades].reverse() : [];
  }

  payoutRows(): PayoutRow[] {
    const payout = this.snapshot?.payout;
    if (!payout) return [];
    return Object.entries(payout.shares)
      .map(([trader, share]) => ({
        trader: Number(trader),
        share,
        amount: share * payout.pot,
      }))
      .sort((a, b) => b.share - a.share || a.trader - b.trader);
  }

  money(value: number): string {
    return value.toFixed(2);
  }
}
