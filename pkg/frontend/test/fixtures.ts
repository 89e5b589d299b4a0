import {
  InstanceSnapshot, SolutionMessage, StateMessage, Vec4,
} from "../src/protocol.js";

export function vec(visual = 1, text = 0, touch = 0, mouse = 0): Vec4 {
  return { visual, text, touch, mouse };
}

/** Two elements, two devices, one user; everything visible and permitted. */
export function makeInstance(): InstanceSnapshot {
  return {
    users: [{ id: "analyst", present: true }],
    devices: [
      { id: "laptop", characteristics: vec(), width: 1000, height: 1000, enabled: true },
      { id: "tablet", characteristics: vec(), width: 800, height: 750, enabled: true },
    ],
    elements: [
      {
        id: "dashboard", requirements: vec(),
        min_width: 400, min_height: 250, max_width: 1600, max_height: 1600,
      },
      {
        id: "feed", requirements: vec(),
        min_width: 400, min_height: 250, max_width: 1600, max_height: 1600,
      },
    ],
    access: [[1, 1]],
    permission: [[1], [1]],
    importance: [[0.9], [0.6]],
    pins: [],
    weights: { quality: 0.8, completeness: 0.2 },
  };
}

export function makeState(seq = 0,
                          instance: InstanceSnapshot = makeInstance()): StateMessage {
  return { type: "state", instance, seq, warnings: [] };
}

export function makeSolution(seq = 0,
                             overrides: Partial<SolutionMessage> = {}): SolutionMessage {
  return {
    type: "solution",
    assignment: [[1, 0], [0, 1]],
    sizes: [[500_000, 0], [0, 300_000]],
    availability: [[1], [1]],
    per_user_completeness: [1.0],
    r_min: 1.0,
    objective: 0.9,
    gap: 0.0,
    solve_ms: 3,
    status: "optimal",
    seq,
    stale: false,
    diff: { added: [], removed: [], resized: [] },
    elements: ["dashboard", "feed"],
    devices: ["laptop", "tablet"],
    users: ["analyst"],
    ...overrides,
  };
}
