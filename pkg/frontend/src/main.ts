// Wiring: socket lifecycle, pointer/key input, reducer-owned state, and
// the render loop. All state transitions funnel through reduce().

import { parseStateMessage, paramsMessage, stylusMessage } from "./messages.js";
import { drawProjection, drawSnakeInset, fitViewport } from "./render.js";
import { Action, initialState, medianLatencyMs, reduce, UiState } from "./state.js";
import { StylusSender, VirtualStylus } from "./stylus.js";

const $ = (id: string) => document.getElementById(id)!;

let ui: UiState = initialState();
const stylus = new VirtualStylus();
let socket: WebSocket | null = null;
// pose fingerprints awaiting their echo in a state frame
const inflight: { key: string; sentMs: number }[] = [];

function dispatch(action: Action): void {
  ui = reduce(ui, action);
}

function poseKey(pos: number[]): string {
  return pos.map((v) => v.toFixed(4)).join(",");
}

const sender = new StylusSender((white, grey) => {
  if (!socket || socket.readyState !== WebSocket.OPEN) return;
  const snap = stylus.snapshot();
  socket.send(stylusMessage(snap.pos, snap.quat, white, grey));
  if (inflight.length < 128) {
    inflight.push({ key: poseKey(snap.pos), sentMs: performance.now() });
  }
}, 60);

function connect(): void {
  const url = ($("url") as HTMLInputElement).value;
  dispatch({ kind: "connecting" });
  socket = new WebSocket(url);
  socket.onopen = () => dispatch({ kind: "connected" });
  socket.onclose = () => {
    dispatch({ kind: "disconnected" });
    socket = null;
  };
  socket.onerror = () => { /* onclose follows */ };
  socket.onmessage = (ev: MessageEvent) => {
    const msg = parseStateMessage(String(ev.data));
    if (msg === null) {
      dispatch({ kind: "malformed" });
      return;
    }
    const key = poseKey(msg.stylus.pos);
    const hit = inflight.findIndex((e) => e.key === key);
    if (hit >= 0) {
      dispatch({ kind: "latency",
                 ms: performance.now() - inflight[hit].sentMs });
      inflight.splice(0, hit + 1);
    }
    dispatch({ kind: "state", msg, atMs: performance.now() });
  };
}

// ---------------------------------------------------------------------------
// input

function setupInput(): void {
  const pad = $("pad");
  let dragging = false;
  let lastX = 0, lastY = 0;
  pad.addEventListener("pointerdown", (ev: PointerEvent) => {
    dragging = true;
    lastX = ev.clientX;
    lastY = ev.clientY;
    pad.setPointerCapture(ev.pointerId);
  });
  pad.addEventListener("pointermove", (ev: PointerEvent) => {
    if (!dragging || ui.connection !== "open") return;
    stylus.drag(ev.clientX - lastX, ev.clientY - lastY);
    lastX = ev.clientX;
    lastY = ev.clientY;
    sender.markDirty();
  });
  pad.addEventListener("pointerup", () => { dragging = false; });
  pad.addEventListener("wheel", (ev: WheelEvent) => {
    if (ui.connection !== "open") return;
    ev.preventDefault();
    stylus.wheel(Math.sign(ev.deltaY));
    sender.markDirty();
  }, { passive: false });
  window.addEventListener("keydown", (ev: KeyboardEvent) => {
    if (ui.connection !== "open") return;
    if (stylus.key(ev.code)) {
      sender.markDirty();
      ev.preventDefault();
    }
  });

  $("white").addEventListener("click", () => {
    if (ui.connection === "open") sender.pulse("white");
  });
  $("grey").addEventListener("click", () => {
    if (ui.connection === "open") sender.pulse("grey");
  });
  $("connect").addEventListener("click", () => {
    if (socket === null) connect();
  });

  for (const module of ["macro", "micro"] as const) {
    const slider = $(`${module}-scale`) as HTMLInputElement;
    slider.addEventListener("input", () => {
      if (!socket || socket.readyState !== WebSocket.OPEN) return;
      socket.send(paramsMessage(module, Number(slider.value)));
    });
  }
}

// ---------------------------------------------------------------------------
// render loop

function draw(): void {
  dispatch({ kind: "clock", nowMs: performance.now() });
  sender.flush(performance.now());

  const top = $("top") as HTMLCanvasElement;
  const side = $("side") as HTMLCanvasElement;
  const inset = $("inset") as HTMLCanvasElement;
  const st = ui.lastState;
  if (st) {
    const vp = fitViewport(top.width, top.height, 2100);
    drawProjection(top.getContext("2d")!, st, vp, "top");
    drawProjection(side.getContext("2d")!, st, vp, "side");
    drawSnakeInset(inset.getContext("2d")!, st, inset.width, inset.height);
    $("macro-state").textContent = st.clutches.macro ? "ENGAGED" : "idle";
    $("macro-state").className = st.clutches.macro ? "engaged" : "idle";
    $("micro-state").textContent = st.clutches.micro ? "ENGAGED" : "idle";
    $("micro-state").className = st.clutches.micro ? "engaged" : "idle";
    $("sim-t").textContent = st.t.toFixed(2) + " s";
    $("server-errors").textContent = String(st.errors);
    $("pulleys").textContent =
      st.pulley_angles.map((a) => a.toFixed(3)).join("  ");
  }
  const snap = stylus.snapshot();
  $("stylus-pos").textContent =
    snap.pos.map((v) => v.toFixed(1)).join(", ") + " mm";
  $("dropped").textContent = String(ui.dropped);
  const median = medianLatencyMs(ui);
  $("latency").textContent = median === null ? "–"
    : `${median.toFixed(0)} ms`;
  $("conn").textContent = ui.connection;
  $("banner").hidden = !(ui.stale && ui.connection === "open");
  ($("reconnect") as HTMLElement).hidden = ui.connection !== "closed";
  ($("connect") as HTMLButtonElement).disabled = ui.connection === "open";

  requestAnimationFrame(draw);
}

setupInput();
connect();
requestAnimationFrame(draw);
