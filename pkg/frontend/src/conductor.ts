/** Conductor panel: regime forcing, shout mode, tempo. Keep it off the wall. */

import { CommandTracker } from "./commands.js";
import { connect, el, makeClient } from "./page.js";
import type { ViewModel } from "./viewmodel.js";

const api = makeClient("conductor");
const tracker = new CommandTracker();

function note(text: string, isError = false): void {
  const node = el<HTMLDivElement>("command-status");
  node.textContent = text;
  node.className = isError ? "status error" : "status";
}

function wireButton(id: string, key: string, action: () => Promise<{ ok: boolean } | null>): void {
  const button = el<HTMLButtonElement>(id);
  button.addEventListener("click", async () => {
    button.disabled = true;
    const result = await tracker.run(key, async () => {
      const response = await action();
      return response;
    });
    button.disabled = false;
    if (result === null) return; // duplicate while pending
  });
}

async function send(label: string, call: () => Promise<{ ok: boolean; error: string | null }>) {
  const result = await call();
  if (result.ok) note(`${label} acknowledged`);
  else note(`${label} rejected: ${result.error}`, true);
  return result;
}

wireButton("btn-start", "lifecycle", () => send("start", () => api.startPerformance()));
wireButton("btn-end", "lifecycle", () => send("end", () => api.endPerformance()));

for (const mode of ["boom", "normal", "bust", "auto"] as const) {
  wireButton(`btn-${mode}`, "regime", () => send(mode, () => api.forceRegime(mode)));
}

wireButton("btn-shout-on", "shout", () => send("shout on", () => api.setShout(true)));
wireButton("btn-shout-off", "shout", () => send("shout off", () => api.setShout(false)));

function currentTempo(model: ViewModel | null): number {
  return model?.snapshot?.tempo_bpm ?? 60;
}

let lastModel: ViewModel | null = null;

wireButton("btn-tempo-up", "tempo", () =>
  send("tempo +1", () => api.setTempo(currentTempo(lastModel) + 1)),
);
wireButton("btn-tempo-down", "tempo", () =>
  send("tempo -1", () => api.setTempo(Math.max(1, currentTempo(lastModel) - 1))),
);
wireButton("btn-tempo-set", "tempo", () => {
  const bpm = Number(el<HTMLInputElement>("tempo-input").value);
  return send(`tempo ${bpm}`, () => api.setTempo(bpm));
});

connect((model) => {
  lastModel = model;
  el<HTMLDivElement>("stale-banner").hidden = !model.stale;
  el<HTMLSpanElement>("tick-display").textContent = model.snapshot
    ? `tick ${model.snapshot.tick} / ${model.snapshot.duration_ticks}` +
      (model.snapshot.ended ? " — ended" : model.snapshot.running ? " — running" : " — not started")
    : "connecting";
  el<HTMLSpanElement>("tempo-display").textContent = `${currentTempo(model).toFixed(0)} bpm`;
  el<HTMLSpanElement>("shout-display").textContent = model.snapshot?.shout ? "SHOUT" : "sung";
});
