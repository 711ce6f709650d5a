/**
 * Server-sent-events client on top of fetch streaming, so the same code
 * runs in the browser and under node for tests. Reconnects automatically
 * and reports liveness, which the wall turns into its stale-data banner.
 */

export interface SseEvent {
  event: string;
  data: string;
}

/** Incremental parser for a text/event-stream byte stream. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseEvent[] {
    this.buffer += chunk;
    const events: SseEvent[] = [];
    let cut: number;
    while ((cut = this.buffer.indexOf("\n\n")) !== -1) {
      const block = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      let eventName = "message";
      const dataLines: string[] = [];
      for (const line of block.split("\n")) {
        if (line.startsWith(":")) continue; // comment / keepalive
        if (line.startsWith("event:")) eventName = line.slice(6).trim();
        else if (line.startsWith("data:")) dataLines.push(line.slice(5).trimStart());
      }
      if (dataLines.length > 0) events.push({ event: eventName, data: dataLines.join("\n") });
    }
    return events;
  }
}

export type StreamStatus = "connecting" | "live" | "stale";

export interface EventStreamHandlers {
  onEvent: (event: SseEvent) => void;
  onStatus?: (status: StreamStatus) => void;
}

export class EventStream {
  private stopped = false;
  private status: StreamStatus = "connecting";

  constructor(
    private url: string,
    private handlers: EventStreamHandlers,
    private fetchImpl: typeof fetch = fetch,
    private reconnectDelayMs = 1000,
  ) {}

  private setStatus(status: StreamStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.handlers.onStatus?.(status);
    }
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        const response = await this.fetchImpl(this.url, {
          headers: { accept: "text/event-stream" },
        });
        if (!response.ok || !response.body) throw new Error(`stream HTTP ${response.status}`);
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (this.stopped) {
            await reader.cancel().catch(() => undefined);
            return;
          }
          if (done) break;
          for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
            this.setStatus("live");
            this.handlers.onEvent(event);
          }
        }
      } catch {
        // fall through to reconnect
      }
      if (this.stopped) return;
      this.setStatus("stale");
      await new Promise((resolve) => setTimeout(resolve, this.reconnectDelayMs));
    }
  }
}
