/**
 * Thin typed client for the engine's command endpoints. Each console page
 * carries its own role token, forwarded as the x-auth-token header.
 */

import type { SlipAck, SlipForm, Snapshot } from "./protocol.js";

export interface ApiResult<T> {
  ok: boolean;
  status: number;
  data: T | null;
  error: string | null;
}

export class ApiClient {
  constructor(
    public baseUrl: string,
    private token: string | null = null,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["x-auth-token"] = this.token;
    return headers;
  }

  async post<T>(path: string, body: unknown): Promise<ApiResult<T>> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: this.headers(),
        body: JSON.stringify(body),
      });
      const text = await response.text();
      let parsed: unknown = null;
      try {
        parsed = text ? JSON.parse(text) : null;
      } catch {
        parsed = null;
      }
      if (!response.ok) {
        const detail =
          parsed && typeof parsed === "object" && "detail" in parsed
            ? String((parsed as { detail: unknown }).detail)
            : `HTTP ${response.status}`;
        return { ok: false, status: response.status, data: null, error: detail };
      }
      return { ok: true, status: response.status, data: parsed as T, error: null };
    } catch (failure) {
      return { ok: false, status: 0, data: null, error: String(failure) };
    }
  }

  async getState(): Promise<Snapshot> {
    const response = await this.fetchImpl(`${this.baseUrl}/state`);
    if (!response.ok) throw new Error(`state HTTP ${response.status}`);
    return (await response.json()) as Snapshot;
  }

  startPerformance(): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/performance/start", {});
  }

  endPerformance(): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/performance/end", {});
  }

  forceRegime(mode: "boom" | "normal" | "bust" | "auto"): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/conductor/regime", { mode });
  }

  setShout(on: boolean): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/conductor/shout", { on });
  }

  setTempo(bpm: number): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/conductor/tempo", { bpm });
  }

  submitSlip(form: SlipForm): Promise<ApiResult<SlipAck>> {
    return this.post("/admin/slip", form);
  }

  injectCash(amount: number): Promise<ApiResult<{ ok: boolean }>> {
    return this.post("/admin/injection", { amount });
  }
}
