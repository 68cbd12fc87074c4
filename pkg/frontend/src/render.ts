// Canvas drawing. Geometry is drawn from the snapshot's angles and link
// lengths; colors, cursor size, index values and branch labels all come
// from the engine untouched.

import { Camera } from "./camera.js";
import { AtlasMessage, MechName, MechSnapshot, decodeAtlasValues } from "./protocol.js";
import { cursorStyle, trajectoryColor, ViewModel } from "./viewmodel.js";

const LINK_COLOR = "#3a4a6b";
const JOINT_COLOR = "#22304f";
const ORIGIN_COLOR = "#e8c511"; // yellow
const TARGET_COLOR = "#f268b0"; // pink

interface AtlasImage {
  canvas: HTMLCanvasElement;
  grid: AtlasMessage["grid"];
}

const atlasCache = new Map<string, AtlasImage>();

function atlasImage(msg: AtlasMessage): AtlasImage {
  const key = `${msg.mech}/${msg.kind}/${msg.mode}`;
  const cached = atlasCache.get(key);
  if (cached && cached.grid === msg.grid) return cached;
  const { nx, ny } = msg.grid;
  const values = decodeAtlasValues(msg);
  const canvas = document.createElement("canvas");
  canvas.width = nx;
  canvas.height = ny;
  const ctx = canvas.getContext("2d")!;
  const img = ctx.createImageData(nx, ny);
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const v = values[iy * nx + ix];
      const o = 4 * ((ny - 1 - iy) * nx + ix); // canvas rows top-down
      if (Number.isNaN(v)) {
        img.data[o] = 244;
        img.data[o + 1] = 245;
        img.data[o + 2] = 248;
        img.data[o + 3] = 255;
      } else {
        img.data[o] = Math.round(255 * (1 - v));
        img.data[o + 1] = Math.round(255 * v);
        img.data[o + 2] = 60;
        img.data[o + 3] = 90;
      }
    }
  }
  ctx.putImageData(img, 0, 0);
  const entry = { canvas, grid: msg.grid };
  atlasCache.set(key, entry);
  return entry;
}

function activeAtlasKey(mech: MechName, snap: MechSnapshot): string {
  if (mech === "serial") return `serial/serial_combined/${snap.branch_labels[0]}`;
  return `fivebar/fivebar_composed/${snap.branch_labels[0]}`;
}

function drawAtlas(ctx: CanvasRenderingContext2D, cam: Camera, vm: ViewModel, mech: MechName): void {
  const snap = vm.mech(mech);
  if (!snap) return;
  const msg = vm.atlas.get(activeAtlasKey(mech, snap));
  if (!msg) return;
  const img = atlasImage(msg);
  const [x0, x1] = msg.grid.x_range;
  const [y0, y1] = msg.grid.y_range;
  const [sx, sy] = cam.worldToScreen(x0, y1);
  const w = (x1 - x0) * cam.scale;
  const h = (y1 - y0) * cam.scale;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(img.canvas, sx, sy, w, h);
}

function line(ctx: CanvasRenderingContext2D, cam: Camera, a: [number, number], b: [number, number], width = 5): void {
  const [ax, ay] = cam.worldToScreen(a[0], a[1]);
  const [bx, by] = cam.worldToScreen(b[0], b[1]);
  ctx.lineWidth = width;
  ctx.lineCap = "round";
  ctx.beginPath();
  ctx.moveTo(ax, ay);
  ctx.lineTo(bx, by);
  ctx.stroke();
}

function dot(ctx: CanvasRenderingContext2D, cam: Camera, p: [number, number], r: number, fill: string): void {
  const [x, y] = cam.worldToScreen(p[0], p[1]);
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fillStyle = fill;
  ctx.fill();
}

function drawSerialLinks(ctx: CanvasRenderingContext2D, cam: Camera, snap: MechSnapshot): void {
  const g = snap.geometry as { l1: number; l2: number };
  const [t1] = snap.angles;
  const elbow: [number, number] = [g.l1 * Math.cos(t1), g.l1 * Math.sin(t1)];
  ctx.strokeStyle = LINK_COLOR;
  line(ctx, cam, [0, 0], elbow);
  line(ctx, cam, elbow, snap.p);
  dot(ctx, cam, [0, 0], 6, JOINT_COLOR);
  dot(ctx, cam, elbow, 4, JOINT_COLOR);
}

function drawFivebarLinks(ctx: CanvasRenderingContext2D, cam: Camera, snap: MechSnapshot): void {
  const g = snap.geometry as { l0: number; l1: number; l2: number };
  const [t1, t2] = snap.angles;
  const a2: [number, number] = [g.l0, 0];
  const e1: [number, number] = [g.l1 * Math.cos(t1), g.l1 * Math.sin(t1)];
  const e2: [number, number] = [g.l0 + g.l2 * Math.cos(t2), g.l2 * Math.sin(t2)];
  ctx.strokeStyle = LINK_COLOR;
  line(ctx, cam, [0, 0], e1);
  line(ctx, cam, e1, snap.p);
  line(ctx, cam, a2, e2);
  line(ctx, cam, e2, snap.p);
  dot(ctx, cam, [0, 0], 6, JOINT_COLOR);
  dot(ctx, cam, a2, 6, JOINT_COLOR);
  dot(ctx, cam, e1, 4, JOINT_COLOR);
  dot(ctx, cam, e2, 4, JOINT_COLOR);
}

function drawTrajectory(ctx: CanvasRenderingContext2D, cam: Camera, snap: MechSnapshot): void {
  if (!snap.trajectory || snap.trajectory.length < 2) return;
  for (let i = 1; i < snap.trajectory.length; i++) {
    const [, x0, y0] = snap.trajectory[i - 1];
    const [, x1, y1, d] = snap.trajectory[i];
    ctx.strokeStyle = trajectoryColor(d);
    line(ctx, cam, [x0, y0], [x1, y1], 2);
  }
}

export function drawMechanism(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  vm: ViewModel,
  mech: MechName,
): void {
  ctx.clearRect(0, 0, cam.width, cam.height);
  const snap = vm.mech(mech);
  if (!snap) return;
  drawAtlas(ctx, cam, vm, mech);
  drawTrajectory(ctx, cam, snap);
  if (snap.case) {
    dot(ctx, cam, snap.case.origin, 7, ORIGIN_COLOR);
    dot(ctx, cam, snap.case.target, 7, TARGET_COLOR);
  }
  if (mech === "serial") drawSerialLinks(ctx, cam, snap);
  else drawFivebarLinks(ctx, cam, snap);

  // Stretch line: visualizes the friction deficit between the user's
  // pointer target and the blocked proxy.
  if (snap.drag_active) {
    ctx.strokeStyle = snap.stuck ? "#d04040" : "#999999";
    ctx.setLineDash([4, 4]);
    line(ctx, cam, snap.target, snap.proxy, 1.5);
    ctx.setLineDash([]);
  }

  const style = cursorStyle(snap);
  const [px, py] = cam.worldToScreen(snap.proxy[0], snap.proxy[1]);
  ctx.beginPath();
  ctx.arc(px, py, style.diameter / 2, 0, 2 * Math.PI);
  ctx.fillStyle = style.fill;
  ctx.globalAlpha = 0.85;
  ctx.fill();
  ctx.globalAlpha = 1.0;
  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#222";
  ctx.stroke();
}
