// The virtual stylus: pointer drags move in the x-y plane, the wheel or
// W/S moves depth, and Q/E, A/D, R/F rotate about z, y, x. Outbound pose
// messages are capped at a fixed rate with latest-wins coalescing;
// button toggles are sent immediately as one-message pulses so each
// click lands as exactly one rising edge server-side.

export type Quat = [number, number, number, number];
export type Vec3 = [number, number, number];

export function quatMul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const n = Math.hypot(...axis);
  const h = angle / 2;
  const s = Math.sin(h) / (n || 1);
  return [Math.cos(h), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function quatNormalize(q: Quat): Quat {
  const n = Math.hypot(...q) || 1;
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export interface StylusPose {
  pos: Vec3;
  quat: Quat;
}

const DRAG_MM_PER_PX = 0.5;
const WHEEL_MM_PER_NOTCH = 2.0;
const KEY_STEP_MM = 2.0;
const KEY_STEP_RAD = 0.05;

export class VirtualStylus {
  pos: Vec3 = [0, 0, 0];
  quat: Quat = [1, 0, 0, 0];

  drag(dxPx: number, dyPx: number): void {
    // screen right = +x, screen up = +y
    this.pos = [
      this.pos[0] + dxPx * DRAG_MM_PER_PX,
      this.pos[1] - dyPx * DRAG_MM_PER_PX,
      this.pos[2],
    ];
  }

  wheel(notches: number): void {
    this.pos = [this.pos[0], this.pos[1],
                this.pos[2] - notches * WHEEL_MM_PER_NOTCH];
  }

  key(code: string): boolean {
    const rot = (axis: Vec3, sign: number) => {
      this.quat = quatNormalize(quatMul(
        quatFromAxisAngle(axis, sign * KEY_STEP_RAD), this.quat));
    };
    switch (code) {
      case "KeyW": this.pos = [this.pos[0], this.pos[1], this.pos[2] + KEY_STEP_MM]; return true;
      case "KeyS": this.pos = [this.pos[0], this.pos[1], this.pos[2] - KEY_STEP_MM]; return true;
      case "KeyQ": rot([0, 0, 1], +1); return true;
      case "KeyE": rot([0, 0, 1], -1); return true;
      case "KeyA": rot([0, 1, 0], +1); return true;
      case "KeyD": rot([0, 1, 0], -1); return true;
      case "KeyR": rot([1, 0, 0], +1); return true;
      case "KeyF": rot([1, 0, 0], -1); return true;
      case "Digit0":
        this.pos = [0, 0, 0];
        this.quat = [1, 0, 0, 0];
        return true;
      default: return false;
    }
  }

  snapshot(): StylusPose {
    return { pos: [...this.pos] as Vec3, quat: [...this.quat] as Quat };
  }
}

/** Latest-wins outbound pose scheduler with a hard rate cap. Button
 * pulses bypass the cap (they are rare and must never coalesce away). */
export class StylusSender {
  private lastSentMs = -Infinity;
  private dirty = false;
  readonly periodMs: number;
  sent = 0;

  constructor(private readonly send: (white: boolean, grey: boolean) => void,
              rateHz = 60) {
    this.periodMs = 1000 / rateHz;
  }

  markDirty(): void {
    this.dirty = true;
  }

  /** Called from a timer/rAF loop; sends at most one pose per period. */
  flush(nowMs: number): boolean {
    if (!this.dirty || nowMs - this.lastSentMs < this.periodMs) return false;
    this.send(false, false);
    this.lastSentMs = nowMs;
    this.dirty = false;
    this.sent += 1;
    return true;
  }

  /** One click = one immediate pulse message with the button raised. */
  pulse(button: "white" | "grey"): void {
    this.send(button === "white", button === "grey");
    this.sent += 1;
    this.dirty = false;
  }
}
