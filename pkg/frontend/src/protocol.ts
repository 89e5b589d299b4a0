/**
 * Wire message types for the live optimization service.
 *
 * The server speaks JSON, one message per websocket frame (or per line on
 * the TCP stream transport). A solution message carries its own element and
 * device id lists so the matrices can always be interpreted without the
 * current instance snapshot.
 */

export const VECTOR_KEYS = ["visual", "text", "touch", "mouse"] as const;
export type VectorKey = (typeof VECTOR_KEYS)[number];
export type Vec4 = Record<VectorKey, number>;

export interface UserSpec {
  id: string;
  present: boolean;
}

export interface DeviceSpec {
  id: string;
  characteristics: Vec4;
  width: number;
  height: number;
  enabled: boolean;
}

export interface ElementSpec {
  id: string;
  requirements: Vec4;
  min_width: number;
  min_height: number;
  max_width: number;
  max_height: number;
}

export interface Pin {
  element: string;
  device: string;
  forced: number;
}

export interface InstanceSnapshot {
  users: UserSpec[];
  devices: DeviceSpec[];
  elements: ElementSpec[];
  /** user x device */
  access: number[][];
  /** element x user */
  permission: number[][];
  /** element x user */
  importance: number[][];
  pins: Pin[];
  weights: { quality: number; completeness: number };
}

export interface StateMessage {
  type: "state";
  instance: InstanceSnapshot;
  seq: number;
  warnings: string[];
}

export interface SolutionDiff {
  added: [number, number, number][];
  removed: [number, number][];
  resized: [number, number, number, number][];
}

export interface SolutionMessage {
  type: "solution";
  /** element x device 0/1 */
  assignment: number[][];
  /** element x device, px^2 */
  sizes: number[][];
  /** element x user 0/1 */
  availability: number[][];
  per_user_completeness: number[];
  r_min: number;
  objective: number;
  gap: number | null;
  solve_ms: number;
  status: string;
  seq: number;
  stale: boolean;
  diff: SolutionDiff;
  elements: string[];
  devices: string[];
  users: string[];
}

export interface ErrorMessage {
  type: "error";
  code: "bad_message" | "rejected";
  detail: string;
}

export type ServerMessage = StateMessage | SolutionMessage | ErrorMessage;

export type EventKind =
  | "user_join"
  | "user_leave"
  | "device_join"
  | "device_leave"
  | "set_importance"
  | "set_permission"
  | "set_access"
  | "set_pin"
  | "set_weights"
  | "set_element_params";

export interface HelloMessage {
  type: "hello";
  client_id: string;
  user_id?: string;
}

export interface EventMessage {
  type: "event";
  kind: EventKind;
  payload: Record<string, unknown>;
}

export interface GetStateMessage {
  type: "get_state";
}

export type ClientMessage = HelloMessage | EventMessage | GetStateMessage;

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

/**
 * Parse one raw server frame. Returns null for anything that is not a
 * well-formed message of a known type; the caller decides whether to log.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!isRecord(data)) return null;
  switch (data.type) {
    case "state":
      if (!isRecord(data.instance) || typeof data.seq !== "number") return null;
      return data as unknown as StateMessage;
    case "solution":
      if (!Array.isArray(data.assignment) || typeof data.seq !== "number") return null;
      return data as unknown as SolutionMessage;
    case "error":
      if (typeof data.detail !== "string") return null;
      return data as unknown as ErrorMessage;
    default:
      return null;
  }
}

export function serialize(message: ClientMessage): string {
  return JSON.stringify(message);
}
