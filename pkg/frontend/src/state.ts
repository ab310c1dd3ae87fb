// UI state lives in one immutable object advanced by a reducer; every
// socket event, pointer gesture and clock tick is an action.

import { StateMessage } from "./messages.js";

export const STALE_AFTER_MS = 500;

export type Connection = "connecting" | "open" | "closed";

export interface UiState {
  connection: Connection;
  lastState: StateMessage | null;
  lastStateAtMs: number;     // arrival wall-clock of lastState
  stale: boolean;            // no fresh frame for STALE_AFTER_MS
  dropped: number;           // malformed inbound frames dropped locally
  latencyMs: number[];       // recent command->reflection samples
}

export type Action =
  | { kind: "connecting" }
  | { kind: "connected" }
  | { kind: "disconnected" }
  | { kind: "state"; msg: StateMessage; atMs: number }
  | { kind: "malformed" }
  | { kind: "clock"; nowMs: number }
  | { kind: "latency"; ms: number };

export function initialState(): UiState {
  return {
    connection: "connecting",
    lastState: null,
    lastStateAtMs: 0,
    stale: false,
    dropped: 0,
    latencyMs: [],
  };
}

export function reduce(state: UiState, action: Action): UiState {
  switch (action.kind) {
    case "connecting":
      return { ...initialState(), connection: "connecting" };
    case "connected":
      return { ...state, connection: "open" };
    case "disconnected":
      return { ...state, connection: "closed", stale: true };
    case "state":
      return {
        ...state,
        lastState: action.msg,
        lastStateAtMs: action.atMs,
        stale: false,
      };
    case "malformed":
      return { ...state, dropped: state.dropped + 1 };
    case "clock": {
      const stale = state.lastState !== null &&
        action.nowMs - state.lastStateAtMs > STALE_AFTER_MS;
      return stale === state.stale ? state : { ...state, stale };
    }
    case "latency": {
      const latencyMs = [...state.latencyMs, action.ms].slice(-60);
      return { ...state, latencyMs };
    }
  }
}

export function medianLatencyMs(state: UiState): number | null {
  if (state.latencyMs.length === 0) return null;
  const sorted = [...state.latencyMs].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 ? sorted[mid]
    : 0.5 * (sorted[mid - 1] + sorted[mid]);
}
