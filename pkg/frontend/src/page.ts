/** Shared page plumbing: server base URL, role token, stream wiring. */

import { ApiClient } from "./api.js";
import type { EventRecordWire, Snapshot } from "./protocol.js";
import { EventStream } from "./sse.js";
import { ViewModel } from "./viewmodel.js";

export function serverBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("server") ?? window.location.origin;
}

export function roleToken(role: string): string | null {
  const params = new URLSearchParams(window.location.search);
  const fromQuery = params.get("token");
  if (fromQuery) {
    window.localStorage.setItem(`outcry-token-${role}`, fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem(`outcry-token-${role}`);
}

export function makeClient(role: string): ApiClient {
  return new ApiClient(serverBase(), roleToken(role));
}

export interface PageStream {
  model: ViewModel;
  stream: EventStream;
}

/** Subscribe a view model to the live stream; returns both for page code. */
export function connect(
  onChange: (model: ViewModel) => void,
  onRecord?: (record: EventRecordWire) => void,
): PageStream {
  const model = new ViewModel();
  const stream = new EventStream(`${serverBase()}/events`, {
    onEvent: (event) => {
      if (event.event === "snapshot") {
        model.applySnapshot(JSON.parse(event.data) as Snapshot);
        onChange(model);
      } else if (event.event === "record" && onRecord) {
        onRecord(JSON.parse(event.data) as EventRecordWire);
      }
    },
    onStatus: (status) => {
      model.setStatus(status);
      onChange(model);
    },
  });
  stream.start();
  return { model, stream };
}

export function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}
