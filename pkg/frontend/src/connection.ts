/**
 * Websocket wrapper: parses frames, reports status changes, reconnects
 * with exponential backoff, and resyncs (hello + get_state) after every
 * reconnect. The socket constructor is injectable so tests can drive the
 * connection with a fake.
 */
import {
  ClientMessage, HelloMessage, ServerMessage, parseServerMessage, serialize,
} from "./protocol.js";

export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface ConnectionOptions {
  url: string;
  hello: HelloMessage;
  onMessage: (message: ServerMessage) => void;
  onStatus?: (connected: boolean) => void;
  makeSocket?: (url: string) => SocketLike;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

export class Connection {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly options: ConnectionOptions) {}

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.socket?.close();
    this.socket = null;
  }

  /** Send one message; false when the link is down (the message is dropped). */
  send(message: ClientMessage): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(serialize(message));
      return true;
    } catch {
      return false;
    }
  }

  private open(): void {
    const make = this.options.makeSocket ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    const socket = make(this.options.url);
    this.socket = socket;

    socket.onopen = () => {
      this.attempts = 0;
      this.options.onStatus?.(true);
      socket.send(serialize(this.options.hello));
      socket.send(serialize({ type: "get_state" }));
    };
    socket.onmessage = (ev) => {
      const message = parseServerMessage(String(ev.data));
      if (message) this.options.onMessage(message);
    };
    socket.onerror = () => {
      // the close handler schedules the retry
    };
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      this.options.onStatus?.(false);
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    const base = this.options.baseDelayMs ?? 500;
    const max = this.options.maxDelayMs ?? 15_000;
    const delay = Math.min(base * 2 ** this.attempts, max);
    this.attempts += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      if (!this.stopped) this.open();
    }, delay);
  }
}
