/**
 * Slip entry flow for the administrator console.
 *
 * Client-side validation mirrors the engine's structural rules (self-trade,
 * quantity, price), so nothing obviously bad goes on the wire. Submitted
 * slips are tracked: a slip acknowledged "pending" flips to "matched" when
 * the mirroring counterparty slip produces the trade, which arrives on the
 * event stream; both counterparties end up showing the same trade id.
 */

import type { ApiClient } from "./api.js";
import type { EventRecordWire, SlipForm, TradePayload } from "./protocol.js";
import { tradeId } from "./protocol.js";

export function validateSlip(form: SlipForm): string[] {
  const problems: string[] = [];
  if (!Number.isInteger(form.trader) || form.trader < 1) problems.push("trader must be a positive id");
  if (!Number.isInteger(form.counterparty) || form.counterparty < 1)
    problems.push("counterparty must be a positive id");
  if (form.trader === form.counterparty) problems.push("trader and counterparty must differ");
  if (form.side !== "buy" && form.side !== "sell") problems.push("side must be buy or sell");
  if (!form.stock) problems.push("stock is required");
  if (!Number.isInteger(form.quantity) || form.quantity < 1)
    problems.push("quantity must be a positive whole number");
  if (!(form.price > 0)) problems.push("price must be positive");
  return problems;
}

export type SlipState = "invalid" | "error" | "pending" | "matched" | "rejected";

export interface SlipStatus {
  state: SlipState;
  form: SlipForm;
  slipId: number | null;
  tradeId: string | null;
  reason: string | null;
  problems: string[];
}

function matchesTrade(form: SlipForm, trade: TradePayload): boolean {
  const buyer = form.side === "buy" ? form.trader : form.counterparty;
  const seller = form.side === "buy" ? form.counterparty : form.trader;
  return (
    trade.buyer === buyer &&
    trade.seller === seller &&
    trade.stock === form.stock &&
    trade.quantity === form.quantity &&
    trade.price === form.price
  );
}

export class SlipTracker {
  statuses: SlipStatus[] = [];

  constructor(private api: ApiClient) {}

  /** Validate locally, then submit. Invalid forms never reach the wire. */
  async submit(form: SlipForm): Promise<SlipStatus> {
    const problems = validateSlip(form);
    if (problems.length > 0) {
      const status: SlipStatus = {
        state: "invalid",
        form,
        slipId: null,
        tradeId: null,
        reason: null,
        problems,
      };
      this.statuses.push(status);
      return status;
    }
    const result = await this.api.submitSlip(form);
    let status: SlipStatus;
    if (!result.ok || result.data === null) {
      status = {
        state: "error",
        form,
        slipId: null,
        tradeId: null,
        reason: result.error,
        problems: [],
      };
    } else if (result.data.status === "matched" && result.data.trade) {
      status = {
        state: "matched",
        form,
        slipId: result.data.slip_id,
        tradeId: tradeId(result.data.trade),
        reason: null,
        problems: [],
      };
    } else if (result.data.status === "rejected") {
      status = {
        state: "rejected",
        form,
        slipId: result.data.slip_id,
        tradeId: null,
        reason: result.data.reason,
        problems: [],
      };
    } else {
      status = {
        state: "pending",
        form,
        slipId: result.data.slip_id,
        tradeId: null,
        reason: null,
        problems: [],
      };
    }
    this.statuses.push(status);
    return status;
  }

  /** Feed event records; executed trades settle matching pending slips. */
  onRecord(record: EventRecordWire): void {
    if (record.kind !== "trade_executed") return;
    const trade = (record.payload as { trade?: TradePayload }).trade;
    if (!trade) return;
    for (const status of this.statuses) {
      if (status.state === "pending" && matchesTrade(status.form, trade)) {
        status.state = "matched";
        status.tradeId = tradeId(trade);
      }
    }
  }
}
