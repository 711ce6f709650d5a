/** Administrator panel: slip entry with live match tracking, cash injection. */

import { connect, el, makeClient } from "./page.js";
import type { SlipForm } from "./protocol.js";
import { SlipTracker } from "./slipform.js";

const api = makeClient("admin");
const tracker = new SlipTracker(api);

function readForm(): SlipForm {
  return {
    trader: Number(el<HTMLInputElement>("slip-trader").value),
    counterparty: Number(el<HTMLInputElement>("slip-counterparty").value),
    side: el<HTMLSelectElement>("slip-side").value,
    stock: el<HTMLSelectElement>("slip-stock").value,
    quantity: Number(el<HTMLInputElement>("slip-quantity").value),
    price: Number(el<HTMLInputElement>("slip-price").value),
  };
}

function renderStatuses(): void {
  const list = el<HTMLUListElement>("slip-statuses");
  list.innerHTML = tracker.statuses
    .map((status, index) => {
      const f = status.form;
      const what = `#${index + 1} ${f.trader}→${f.counterparty} ${f.side} ${f.quantity} ${f.stock} @ ${f.price}`;
      switch (status.state) {
        case "invalid":
          return `<li class="rejected">${what} — invalid: ${status.problems.join("; ")}</li>`;
        case "error":
          return `<li class="rejected">${what} — error: ${status.reason}</li>`;
        case "rejected":
          return `<li class="rejected">${what} — rejected: ${status.reason}</li>`;
        case "matched":
          return `<li class="matched">${what} — matched (${status.tradeId})</li>`;
        default:
          return `<li class="pending">${what} — pending</li>`;
      }
    })
    .reverse()
    .join("");
}

el<HTMLButtonElement>("slip-submit").addEventListener("click", async () => {
  const button = el<HTMLButtonElement>("slip-submit");
  button.disabled = true;
  await tracker.submit(readForm());
  button.disabled = false;
  renderStatuses();
});

el<HTMLButtonElement>("inject-submit").addEventListener("click", async () => {
  const amount = Number(el<HTMLInputElement>("inject-amount").value);
  const result = await api.injectCash(amount);
  const node = el<HTMLDivElement>("inject-status");
  node.textContent = result.ok
    ? `injected ${amount} to every trader`
    : `injection rejected: ${result.error}`;
  node.className = result.ok ? "status" : "status error";
});

connect(
  (model) => {
    el<HTMLDivElement>("stale-banner").hidden = !model.stale;
    el<HTMLSpanElement>("tick-display").textContent = model.snapshot
      ? `tick ${model.snapshot.tick} / ${model.snapshot.duration_ticks}`
      : "connecting";
    const pending = el<HTMLUListElement>("recent-trades");
    const trades = model.recentTrades();
    pending.innerHTML =
      trades.length === 0
        ? `<li class="empty">no executed trades yet</li>`
        : trades
            .map((t) => `<li>tick ${t.tick}: ${t.buyer}←${t.seller} ${t.quantity} ${t.stock} @ ${t.price}</li>`)
            .join("");
  },
  (record) => {
    tracker.onRecord(record);
    renderStatuses();
  },
);
