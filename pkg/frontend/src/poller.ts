/**
 * Interval polling with an injectable scheduler, so tests can drive
 * poll cycles by hand instead of waiting on wall-clock timers.
 */

export type Cancel = () => void;
export type Scheduler = (fn: () => void, intervalMs: number) => Cancel;

export const intervalScheduler: Scheduler = (fn, intervalMs) => {
  const id = setInterval(fn, intervalMs);
  return () => clearInterval(id);
};

export class Poller {
  private cancel: Cancel | null = null;
  private running = false;

  constructor(
    private readonly fn: () => Promise<void>,
    private readonly intervalMs: number,
    private readonly scheduler: Scheduler = intervalScheduler,
  ) {}

  start(): void {
    if (this.cancel) return;
    this.cancel = this.scheduler(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.cancel) {
      this.cancel();
      this.cancel = null;
    }
  }

  /** One poll cycle; overlapping ticks are skipped, errors swallowed. */
  async tick(): Promise<void> {
    if (this.running) return;
    this.running = true;
    try {
      await this.fn();
    } catch {
      // polling is best-effort; the next cycle retries
    } finally {
      this.running = false;
    }
  }
}
