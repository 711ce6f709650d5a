/**
 * Fire-and-acknowledge command dispatch with client-side de-duplication:
 * while a command key is in flight its control is locked, so a double
 * click sends exactly one request.
 */

export class CommandTracker {
  private pending = new Set<string>();

  constructor(private timeoutMs = 4000) {}

  isPending(key: string): boolean {
    return this.pending.has(key);
  }

  /**
   * Run `action` under `key`. Returns null (without calling the action)
   * when the key is already pending; otherwise resolves with the action's
   * result and releases the key, or releases it after the timeout.
   */
  async run<T>(key: string, action: () => Promise<T>): Promise<T | null> {
    if (this.pending.has(key)) return null;
    this.pending.add(key);
    const timer = setTimeout(() => this.pending.delete(key), this.timeoutMs);
    try {
      return await action();
    } finally {
      clearTimeout(timer);
      this.pending.delete(key);
    }
  }
}
