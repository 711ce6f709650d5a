/**
 * Wire types for the performance engine's HTTP + SSE interface.
 *
 * The snapshot deliberately has no field for the market's hidden mood or
 * any conductor override: prices, charts and news are all the stage sees,
 * and this type is the whole vocabulary the display code may use.
 */

export const STOCK_ORDER = ["wealth", "protection", "comfort"] as const;

export interface TradePayload {
  buyer: number;
  seller: number;
  stock: string;
  quantity: number;
  price: number;
  tick: number;
}

export interface PayoutPayload {
  pot: number;
  values: Record<string, number>;
  shares: Record<string, number>;
}

export interface PortfolioPayload {
  cash: number;
  holdings: Record<string, number>;
}

export interface Snapshot {
  tick: number;
  running: boolean;
  ended: boolean;
  duration_ticks: number;
  prices: Record<string, number>;
  price_history: Record<string, number[]>;
  display_names: Record<string, string>;
  news: string | null;
  portfolio_values: Record<string, number>;
  portfolios?: Record<string, PortfolioPayload>;
  recent_trades: TradePayload[];
  shout: boolean;
  tempo_bpm: number;
  payout: PayoutPayload | null;
}

export interface EventRecordWire {
  seq: number;
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SlipAck {
  status: "pending" | "matched" | "rejected";
  slip_id: number | null;
  trade: TradePayload | null;
  reason: string | null;
}

export interface SlipForm {
  trader: number;
  counterparty: number;
  side: string;
  stock: string;
  quantity: number;
  price: number;
}

/** A displayable identity for an executed trade; both counterparties derive
 * the same one from the trade payload. */
export function tradeId(trade: TradePayload): string {
  return `T${trade.tick}-${trade.buyer}x${trade.seller}-${trade.stock}-${trade.quantity}@${trade.price}`;
}
