/** The display wall: price tiles, charts, news ticker, portfolios, trades. */

import { drawSparkline } from "./chart.js";
import { connect, el } from "./page.js";
import type { ViewModel } from "./viewmodel.js";

const ARROWS = { up: "▲", down: "▼", flat: "–" } as const;

function renderPrices(model: ViewModel): void {
  const host = el<HTMLDivElement>("price-tiles");
  for (const stock of model.stocks()) {
    let tile = document.getElementById(`tile-${stock}`);
    if (!tile) {
      tile = document.createElement("div");
      tile.id = `tile-${stock}`;
      tile.className = "tile";
      tile.innerHTML = `
        <div class="tile-name"></div>
        <div class="tile-price"></div>
        <div class="tile-change"></div>
        <canvas width="220" height="60"></canvas>`;
      host.appendChild(tile);
    }
    const price = model.price(stock);
    const trend = model.trend(stock);
    const change = model.priceChange(stock);
    tile.querySelector(".tile-name")!.textContent = model.displayName(stock);
    tile.querySelector(".tile-price")!.textContent = price === null ? "–" : model.money(price);
    const changeNode = tile.querySelector(".tile-change")!;
    changeNode.textContent = `${ARROWS[trend]} ${model.money(Math.abs(change))}`;
    changeNode.className = `tile-change trend-${trend}`;
    drawSparkline(
      tile.querySelector("canvas")!,
      model.series(stock),
      trend === "down" ? "#f87171" : trend === "up" ? "#4ade80" : "#7dd3fc",
    );
  }
}

function renderPortfolios(model: ViewModel): void {
  const rows = model.portfolioRows();
  const body = el<HTMLTableSectionElement>("portfolio-rows");
  body.innerHTML = rows
    .map((row) => {
      const holdings = row.holdings
        ? model
            .stocks()
            .map((s) => `${model.displayName(s).slice(0, 1)}:${row.holdings![s] ?? 0}`)
            .join(" ")
        : "";
      const cash = row.cash === null ? "" : model.money(row.cash);
      return `<tr><td>${row.trader}</td><td>${model.money(row.value)}</td><td>${cash}</td><td>${holdings}</td></tr>`;
    })
    .join("");
}

function renderTrades(model: ViewModel): void {
  const trades = model.recentTrades();
  const list = el<HTMLUListElement>("trade-list");
  if (trades.length === 0) {
    list.innerHTML = `<li class="empty">no trades yet — sing louder</li>`;
    return;
  }
  list.innerHTML = trades
    .map(
      (t) =>
        `<li>tick ${t.tick}: ${t.buyer} buys ${t.quantity} ${model.displayName(t.stock)} ` +
        `from ${t.seller} @ ${model.money(t.price)}</li>`,
    )
    .join("");
}

function renderPayout(model: ViewModel): void {
  const rows = model.payoutRows();
  const panel = el<HTMLDivElement>("payout-panel");
  if (rows.length === 0) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  el<HTMLTableSectionElement>("payout-rows").innerHTML = rows
    .map(
      (r) =>
        `<tr><td>${r.trader}</td><td>${(r.share * 100).toFixed(1)}%</td><td>${model.money(r.amount)}</td></tr>`,
    )
    .join("");
}

function render(model: ViewModel): void {
  el<HTMLDivElement>("stale-banner").hidden = !model.stale;
  el<HTMLSpanElement>("tick-display").textContent = model.snapshot
    ? `tick ${model.snapshot.tick} / ${model.snapshot.duration_ticks}`
    : "waiting";
  el<HTMLSpanElement>("tempo-display").textContent = model.snapshot
    ? `${model.snapshot.tempo_bpm.toFixed(0)} bpm`
    : "";
  el<HTMLDivElement>("shout-banner").hidden = !model.snapshot?.shout;
  el<HTMLDivElement>("news-ticker").textContent = model.latestNews() ?? "awaiting the first headline";
  renderPrices(model);
  renderPortfolios(model);
  renderTrades(model);
  renderPayout(model);
}

connect(render);
