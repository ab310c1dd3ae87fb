// Scene rendering: two synchronized orthographic projections (top x-y,
// side x-z) of the arm linkage with the continuum tip polyline, plus a
// magnified inset of the tip region. Engaged modules draw highlighted.

import { StateMessage } from "./messages.js";

export interface Viewport {
  width: number;
  height: number;
  scale: number;     // px per mm
  cx: number;        // world origin x in px
  cy: number;        // world origin y in px
}

export type Projection = (p: [number, number, number]) => [number, number];

/** Fit a world-space box (mm) into a canvas with a margin. */
export function fitViewport(width: number, height: number,
                            spanMm: number): Viewport {
  const scale = Math.min(width, height) / spanMm;
  return { width, height, scale, cx: width / 2, cy: height * 0.72 };
}

export function projectTop(v: Viewport): Projection {
  // world x -> right, world y -> up
  return (p) => [v.cx + p[0] * v.scale, v.cy - p[1] * v.scale];
}

export function projectSide(v: Viewport): Projection {
  // world x -> right, world z -> up
  return (p) => [v.cx + p[0] * v.scale, v.cy - p[2] * v.scale];
}

function polyline(ctx: CanvasRenderingContext2D, proj: Projection,
                  pts: [number, number, number][], color: string,
                  width: number): void {
  if (pts.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.lineJoin = "round";
  ctx.lineCap = "round";
  ctx.beginPath();
  const [x0, y0] = proj(pts[0]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < pts.length; i++) {
    const [x, y] = proj(pts[i]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function dot(ctx: CanvasRenderingContext2D, proj: Projection,
             p: [number, number, number], color: string, r: number): void {
  const [x, y] = proj(p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

const ARM_IDLE = "#5b8dbd";
const ARM_LIVE = "#ffd34d";
const SNAKE_IDLE = "#4db6ac";
const SNAKE_LIVE = "#ff7a5c";
const GRID = "#2a2f36";

function grid(ctx: CanvasRenderingContext2D, v: Viewport,
              stepMm: number): void {
  ctx.strokeStyle = GRID;
  ctx.lineWidth = 1;
  const stepPx = stepMm * v.scale;
  for (let x = v.cx % stepPx; x < v.width; x += stepPx) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, v.height);
    ctx.stroke();
  }
  for (let y = v.cy % stepPx; y < v.height; y += stepPx) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(v.width, y);
    ctx.stroke();
  }
}

export function drawProjection(ctx: CanvasRenderingContext2D,
                               state: StateMessage, v: Viewport,
                               which: "top" | "side"): void {
  ctx.clearRect(0, 0, v.width, v.height);
  grid(ctx, v, 200);
  const proj = which === "top" ? projectTop(v) : projectSide(v);
  const armColor = state.clutches.macro ? ARM_LIVE : ARM_IDLE;
  const snakeColor = state.clutches.micro ? SNAKE_LIVE : SNAKE_IDLE;
  polyline(ctx, proj, state.arm_points, armColor,
           state.clutches.macro ? 4 : 2.5);
  for (const p of state.arm_points) dot(ctx, proj, p, armColor, 3);
  polyline(ctx, proj, state.snake_points, snakeColor,
           state.clutches.micro ? 3 : 2);
  dot(ctx, proj, state.tip_pose.pos, snakeColor, 4);
  ctx.fillStyle = "#9aa4b0";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(which === "top" ? "top (x-y)" : "side (x-z)", 8, 16);
}

/** Magnified tip inset: the snake polyline in flange-local millimetres. */
export function drawSnakeInset(ctx: CanvasRenderingContext2D,
                               state: StateMessage, width: number,
                               height: number): void {
  ctx.clearRect(0, 0, width, height);
  const pts = state.snake_points;
  const last = Math.min(pts.length, 16);
  const tail = pts.slice(-last);
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const p of tail) {
    minX = Math.min(minX, p[0]); maxX = Math.max(maxX, p[0]);
    minY = Math.min(minY, p[2]); maxY = Math.max(maxY, p[2]);
  }
  const span = Math.max(maxX - minX, maxY - minY, 25);
  const scale = (Math.min(width, height) - 24) / span;
  const cx = (minX + maxX) / 2, cy = (minY + maxY) / 2;
  const proj: Projection = (p) => [
    width / 2 + (p[0] - cx) * scale,
    height / 2 + (cy - p[2]) * scale,
  ];
  const snakeColor = state.clutches.micro ? SNAKE_LIVE : SNAKE_IDLE;
  polyline(ctx, proj, tail, snakeColor, 3);
  for (const p of tail) dot(ctx, proj, p, snakeColor, 2.5);
  ctx.fillStyle = "#9aa4b0";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText("tip detail (x-z, world mm)", 8, 16);
}
