// Telemetry message schemas. The server speaks JSON text frames; state
// flows in, stylus poses and parameter updates flow out.

export interface PoseMsg {
  quat: [number, number, number, number]; // w, x, y, z
  pos: [number, number, number];          // mm
}

export interface StateMessage {
  type: "state";
  t: number;
  macro_joints: number[];
  snake_config: number[];
  flange_pose: PoseMsg;
  tip_pose: PoseMsg;
  clutches: { macro: boolean; micro: boolean };
  pulley_angles: number[];
  stylus: { pos: number[]; quat: number[]; white: boolean; grey: boolean };
  arm_points: [number, number, number][];
  snake_points: [number, number, number][];
  scales: {
    macro: { translation: number; rotation: number };
    micro: { translation: number; rotation: number };
  };
  errors: number;
}

export interface StylusMessage {
  type: "stylus";
  pos: [number, number, number];
  quat: [number, number, number, number];
  white: boolean;
  grey: boolean;
}

export interface ParamsMessage {
  type: "params";
  module: "macro" | "micro";
  translation_scale?: number;
  rotation_scale?: number;
}

export type ClientMessage = StylusMessage | ParamsMessage;

function isNumberArray(v: unknown, n?: number): v is number[] {
  return Array.isArray(v) && (n === undefined || v.length === n) &&
    v.every((x) => typeof x === "number" && Number.isFinite(x));
}

function isPose(v: unknown): v is PoseMsg {
  return typeof v === "object" && v !== null &&
    isNumberArray((v as PoseMsg).quat, 4) &&
    isNumberArray((v as PoseMsg).pos, 3);
}

function isPointList(v: unknown): v is [number, number, number][] {
  return Array.isArray(v) && v.length >= 2 &&
    v.every((p) => isNumberArray(p, 3));
}

/** Strict parse of one inbound frame; null when the payload is not a
 * well-formed state message (the caller counts and drops it). */
export function parseStateMessage(raw: string): StateMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  const m = doc as StateMessage;
  if (typeof m !== "object" || m === null || m.type !== "state") return null;
  if (typeof m.t !== "number" || !Number.isFinite(m.t)) return null;
  if (!isNumberArray(m.macro_joints, 6)) return null;
  if (!isNumberArray(m.snake_config, 4)) return null;
  if (!isPose(m.flange_pose) || !isPose(m.tip_pose)) return null;
  if (typeof m.clutches !== "object" || m.clutches === null ||
      typeof m.clutches.macro !== "boolean" ||
      typeof m.clutches.micro !== "boolean") return null;
  if (!isNumberArray(m.pulley_angles, 4)) return null;
  if (!isPointList(m.arm_points) || !isPointList(m.snake_points)) return null;
  if (typeof m.scales !== "object" || m.scales === null) return null;
  return m;
}

export function stylusMessage(pos: [number, number, number],
                              quat: [number, number, number, number],
                              white: boolean, grey: boolean): string {
  const msg: StylusMessage = { type: "stylus", pos, quat, white, grey };
  return JSON.stringify(msg);
}

export function paramsMessage(module: "macro" | "micro",
                              translation?: number,
                              rotation?: number): string {
  const msg: ParamsMessage = { type: "params", module };
  if (translation !== undefined) msg.translation_scale = translation;
  if (rotation !== undefined) msg.rotation_scale = rotation;
  return JSON.stringify(msg);
}
