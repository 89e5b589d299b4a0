/**
 * Rate limiter for control events. A slider drag fires dozens of input
 * events per second; the wire only needs the newest value, at most one
 * send per interval, and a trailing send so the final position is never
 * lost.
 */
export function throttled<T>(
  send: (value: T) => void,
  intervalMs: number,
): (value: T) => void {
  let lastSent = -Infinity;
  let timer: ReturnType<typeof setTimeout> | null = null;
  let queued: { value: T } | null = null;

  const flush = () => {
    timer = null;
    if (!queued) return;
    const { value } = queued;
    queued = null;
    lastSent = Date.now();
    send(value);
  };

  return (value: T) => {
    const now = Date.now();
    if (now - lastSent >= intervalMs && timer === null) {
      lastSent = now;
      send(value);
      return;
    }
    queued = { value };
    if (timer === null) {
      timer = setTimeout(flush, Math.max(0, intervalMs - (now - lastSent)));
    }
  };
}

/** Interval that keeps slider traffic at or under 20 events per second. */
export const SLIDER_INTERVAL_MS = 50;
