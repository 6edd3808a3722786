// Polling and request-overlap control.
//
// The service rejects concurrent steps on the same run, so the client
// keeps at most one step in flight and drops clicks that arrive while
// one is pending. Reads are idempotent and keep polling throughout.

export class SingleFlight {
  private pending = false;

  get busy(): boolean {
    return this.pending;
  }

  /** Runs fn unless a previous call is still in flight; then returns null. */
  async run<T>(fn: () => Promise<T>): Promise<T | null> {
    if (this.pending) return null;
    this.pending = true;
    try {
      return await fn();
    } finally {
      this.pending = false;
    }
  }
}

export interface Poller {
  stop(): void;
  setCadence(ms: number): void;
}

export function startPolling(tick: () => void | Promise<void>, cadenceMs: number): Poller {
  let cadence = cadenceMs;
  let stopped = false;
  let ticking = false;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const loop = async () => {
    if (stopped) return;
    ticking = true;
    try {
      await tick();
    } catch {
      // a failed poll is retried on the next tick
    } finally {
      ticking = false;
    }
    if (!stopped) {
      timer = setTimeout(loop, cadence);
    }
  };
  timer = setTimeout(loop, cadence);

  return {
    stop() {
      stopped = true;
      if (timer) clearTimeout(timer);
    },
    setCadence(ms: number) {
      if (!Number.isFinite(ms) || ms < 100) return;
      cadence = ms;
      // re-arm the pending wait; mid-tick the next schedule picks it up
      if (!stopped && !ticking && timer) {
        clearTimeout(timer);
        timer = setTimeout(loop, cadence);
      }
    },
  };
}
