// Application wiring: WebSocket connection, two mechanism viewports,
// and the control panels.

import { Camera } from "./camera.js";
import { DragController } from "./drag.js";
import {
  ClientMessage,
  MechName,
  decodeServerMessage,
  encodeClientMessage,
} from "./protocol.js";
import { drawMechanism } from "./render.js";
import {
  ViewModel,
  validateFriction,
  validateFivebarGeometry,
  validateSerialGeometry,
} from "./viewmodel.js";

const vm = new ViewModel();
let socket: WebSocket | null = null;

function send(msg: ClientMessage): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(encodeClientMessage(msg));
  }
}

function connect(): void {
  const url = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  socket = new WebSocket(url);
  socket.onopen = () => {
    vm.connected = true;
    refreshBanner();
  };
  socket.onclose = () => {
    vm.connected = false;
    vm.staleSince = performance.now();
    refreshBanner();
    setTimeout(connect, 1000);
  };
  socket.onmessage = (ev) => {
    vm.applyServerMessage(decodeServerMessage(ev.data as string));
    if (vm.lastCsv) {
      downloadCsv(vm.lastCsv.mech, vm.lastCsv.data);
      vm.lastCsv = null;
    }
    refreshReadouts();
  };
}

function downloadCsv(mech: string, data: string): void {
  const blob = new Blob([data], { type: "text/csv" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `${mech}-trajectory.csv`;
  a.click();
  URL.revokeObjectURL(a.href);
}

// ----------------------------------------------------------- viewports

interface Viewport {
  mech: MechName;
  canvas: HTMLCanvasElement;
  ctx: CanvasRenderingContext2D;
  camera: Camera;
  drag: DragController;
}

function makeViewport(mech: MechName, id: string): Viewport {
  const canvas = document.getElementById(id) as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const camera = new Camera(canvas.width, canvas.height);
  if (mech === "serial") {
    camera.cx = 0;
  }
  const drag = new DragController();
  let panning = false;
  let last: [number, number] = [0, 0];

  const toWorld = (ev: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return camera.screenToWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  };

  canvas.addEventListener("pointerdown", (ev) => {
    if (ev.button === 1) {
      panning = true;
      last = [ev.clientX, ev.clientY];
      ev.preventDefault();
      return;
    }
    if (ev.button !== 0) return;
    canvas.setPointerCapture(ev.pointerId);
    for (const m of drag.pointerDown(toWorld(ev), vm.snapshot, vm.connected, [mech])) send(m);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (panning) {
      camera.pan(ev.clientX - last[0], ev.clientY - last[1]);
      last = [ev.clientX, ev.clientY];
      return;
    }
    for (const m of drag.pointerMove(toWorld(ev), vm.connected)) send(m);
  });
  const finish = (ev: PointerEvent) => {
    if (panning && ev.button === 1) {
      panning = false;
      return;
    }
    for (const m of drag.pointerUp(toWorld(ev), vm.connected)) send(m);
  };
  canvas.addEventListener("pointerup", finish);
  canvas.addEventListener("pointercancel", finish);
  canvas.addEventListener("wheel", (ev) => {
    const rect = canvas.getBoundingClientRect();
    camera.zoomAt(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      ev.deltaY < 0 ? 1.1 : 1 / 1.1,
    );
    ev.preventDefault();
  });
  return { mech, canvas, ctx, camera, drag };
}

// -------------------------------------------------------------- panels

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function inputValue(id: string): string {
  return byId<HTMLInputElement>(id).value;
}

function markErrors(prefix: string, errors: Record<string, string>): void {
  document.querySelectorAll(`[id^="${prefix}"]`).forEach((el) => {
    el.classList.remove("invalid");
    (el as HTMLElement).title = "";
  });
  for (const [field, text] of Object.entries(errors)) {
    const el = document.getElementById(`${prefix}${field}`);
    if (el) {
      el.classList.add("invalid");
      (el as HTMLElement).title = text;
    }
  }
}

function wirePanels(): void {
  for (const mech of ["serial", "fivebar"] as MechName[]) {
    byId<HTMLButtonElement>(`${mech}-friction-apply`).onclick = () => {
      const res = validateFriction(mech, {
        c: inputValue(`${mech}-c`),
        f1: inputValue(`${mech}-f1`),
        f2: inputValue(`${mech}-f2`),
      });
      markErrors(`${mech}-`, res.errors);
      if (res.message) send(res.message);
    };
    byId<HTMLSelectElement>(`${mech}-render-mode`).onchange = (ev) => {
      send({
        type: "set_render_mode",
        mech,
        mode: (ev.target as HTMLSelectElement).value,
      });
    };
    for (const action of ["show", "hide", "clear"] as const) {
      byId<HTMLButtonElement>(`${mech}-traj-${action}`).onclick = () =>
        send({ type: "trajectory", mech, action });
    }
    byId<HTMLButtonElement>(`${mech}-traj-dump`).onclick = () =>
      send({ type: "dump_trajectory", mech });
    byId<HTMLSelectElement>(`${mech}-case`).onchange = (ev) => {
      const id = Number((ev.target as HTMLSelectElement).value);
      if (id > 0) send({ type: "select_case", mech, id });
    };
  }

  byId<HTMLButtonElement>("serial-geometry-apply").onclick = () => {
    const res = validateSerialGeometry(
      { l1: inputValue("serial-l1"), l2: inputValue("serial-l2") },
      {
        enabled: byId<HTMLInputElement>("serial-limits-on").checked,
        lo1: inputValue("serial-lo1"),
        hi1: inputValue("serial-hi1"),
        lo2: inputValue("serial-lo2"),
        hi2: inputValue("serial-hi2"),
      },
    );
    markErrors("serial-", res.errors);
    if (res.message) send(res.message);
  };
  byId<HTMLButtonElement>("fivebar-geometry-apply").onclick = () => {
    const res = validateFivebarGeometry({
      l0: inputValue("fivebar-l0"),
      l1: inputValue("fivebar-l1"),
      l2: inputValue("fivebar-l2"),
      l3: inputValue("fivebar-l3"),
      l4: inputValue("fivebar-l4"),
    });
    markErrors("fivebar-", res.errors);
    if (res.message) send(res.message);
  };
  byId<HTMLSelectElement>("serial-posture").onchange = (ev) =>
    send({ type: "set_mode", mech: "serial", posture: (ev.target as HTMLSelectElement).value });
  byId<HTMLSelectElement>("fivebar-wm").onchange = (ev) =>
    send({ type: "set_mode", mech: "fivebar", working_mode: (ev.target as HTMLSelectElement).value });
  byId<HTMLSelectElement>("fivebar-am").onchange = (ev) =>
    send({ type: "set_mode", mech: "fivebar", assembly_mode: (ev.target as HTMLSelectElement).value });
}

// ------------------------------------------------------------ readouts

function fmt(v: number): string {
  return v.toFixed(4);
}

function refreshReadouts(): void {
  const snap = vm.snapshot;
  if (!snap) return;
  for (const mech of ["serial", "fivebar"] as MechName[]) {
    const m = snap[mech];
    byId(`${mech}-angles`).textContent = m.angles.map(fmt).join(", ");
    byId(`${mech}-pos`).textContent = `(${fmt(m.p[0])}, ${fmt(m.p[1])})`;
    byId(`${mech}-d`).textContent = fmt(m.d);
    byId(`${mech}-branch`).textContent =
      m.branch_labels.join(" / ") + (m.singular ? " (singular)" : "");
    byId(`${mech}-state`).textContent = m.record_state + (m.atlas_ready ? "" : " | atlas…");
    const metrics = m.metrics;
    byId(`${mech}-metrics`).textContent = metrics
      ? `t=${metrics.duration.toFixed(2)}s  d∈[${fmt(metrics.d_min)}, ${fmt(metrics.d_max)}]  switches=${metrics.mode_changes}`
      : "—";
  }
  if (vm.lastError) {
    byId("error-line").textContent = `${vm.lastError.code}: ${vm.lastError.detail}`;
  }
}

function refreshBanner(): void {
  byId("banner").classList.toggle("hidden", vm.connected);
}

// ---------------------------------------------------------------- main

export function start(): void {
  const viewports = [makeViewport("serial", "serial-canvas"), makeViewport("fivebar", "fivebar-canvas")];
  wirePanels();
  connect();
  const loop = () => {
    for (const vp of viewports) drawMechanism(vp.ctx, vp.camera, vm, vp.mech);
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

start();
