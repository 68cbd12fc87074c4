// Connection-level state and panel-form validation. The view model never
// does kinematics: cursor color/size and all mechanism numbers come from
// the latest snapshot verbatim.

import {
  AtlasMessage,
  ClientMessage,
  ErrorMessage,
  MechName,
  MechSnapshot,
  ServerMessage,
  Snapshot,
  TrajectoryCsvMessage,
} from "./protocol.js";

export interface CursorStyle {
  fill: string; // CSS color straight from the snapshot blend
  diameter: number; // px straight from the snapshot
}

export function cursorStyle(mech: MechSnapshot): CursorStyle {
  const [r, g, b] = mech.color;
  const to255 = (v: number) => Math.round(255 * Math.min(1, Math.max(0, v)));
  return {
    fill: `rgb(${to255(r)},${to255(g)},${to255(b)})`,
    diameter: mech.cursor_diameter,
  };
}

export function trajectoryColor(d: number): string {
  // Same endpoints the engine uses for the cursor: green when safe,
  // red at a singularity; the per-sample d values come from the engine.
  const to255 = (v: number) => Math.round(255 * Math.min(1, Math.max(0, v)));
  return `rgb(${to255(1 - d)},${to255(d)},0)`;
}

export interface PanelErrors {
  [field: string]: string;
}

export class ViewModel {
  snapshot: Snapshot | null = null;
  connected = false;
  staleSince: number | null = null;
  lastError: ErrorMessage | null = null;
  lastCsv: TrajectoryCsvMessage | null = null;
  atlas = new Map<string, AtlasMessage>();
  panelErrors: { serial: PanelErrors; fivebar: PanelErrors } = {
    serial: {},
    fivebar: {},
  };

  applyServerMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "snapshot":
        this.snapshot = msg;
        this.staleSince = null;
        break;
      case "atlas":
        this.atlas.set(`${msg.mech}/${msg.kind}/${msg.mode}`, msg);
        break;
      case "error":
        this.lastError = msg;
        break;
      case "trajectory_csv":
        this.lastCsv = msg;
        break;
    }
  }

  mech(name: MechName): MechSnapshot | null {
    return this.snapshot ? this.snapshot[name] : null;
  }
}

// --- panel validation (mirrors the engine's invariants) ---------------

export interface FrictionForm {
  c: string;
  f1: string;
  f2: string;
}

export function validateFriction(
  mech: MechName,
  form: FrictionForm,
): { message?: ClientMessage; errors: PanelErrors } {
  const errors: PanelErrors = {};
  const c = Number(form.c);
  const f1 = Number(form.f1);
  const f2 = Number(form.f2);
  if (!Number.isFinite(c) || c < 0) errors.c = "c must be >= 0";
  if (!Number.isFinite(f1) || f1 <= 0 || f1 > 1) errors.f1 = "f1 must be in (0, 1]";
  if (!Number.isFinite(f2) || f2 < 0) errors.f2 = "f2 must be >= 0";
  if (!errors.f1 && !errors.f2 && f2 >= f1) errors.f2 = "f2 must be below f1";
  if (Object.keys(errors).length > 0) return { errors };
  return { message: { type: "set_friction", mech, c, f1, f2 }, errors };
}

export function validateSerialGeometry(
  lengths: { l1: string; l2: string },
  limits?: { lo1: string; hi1: string; lo2: string; hi2: string; enabled: boolean },
): { message?: ClientMessage; errors: PanelErrors } {
  const errors: PanelErrors = {};
  const l1 = Number(lengths.l1);
  const l2 = Number(lengths.l2);
  if (!Number.isFinite(l1) || l1 <= 0) errors.l1 = "length must be positive";
  if (!Number.isFinite(l2) || l2 <= 0) errors.l2 = "length must be positive";
  let jointLimits: (number[] | null)[] | undefined;
  if (limits && limits.enabled) {
    const vals = [limits.lo1, limits.hi1, limits.lo2, limits.hi2].map(Number);
    if (vals.some((v) => !Number.isFinite(v))) {
      errors.limits = "limits must be numbers";
    } else if (vals[0] >= vals[1] || vals[2] >= vals[3]) {
      errors.limits = "each interval needs lo < hi";
    } else {
      jointLimits = [
        [vals[0], vals[1]],
        [vals[2], vals[3]],
      ];
    }
  }
  if (Object.keys(errors).length > 0) return { errors };
  const message: ClientMessage = jointLimits
    ? { type: "set_geometry", mech: "serial", l1, l2, joint_limits: jointLimits }
    : { type: "set_geometry", mech: "serial", l1, l2 };
  return { message, errors };
}

export function validateFivebarGeometry(lengths: {
  l0: string;
  l1: string;
  l2: string;
  l3: string;
  l4: string;
}): { message?: ClientMessage; errors: PanelErrors } {
  const errors: PanelErrors = {};
  const out: Record<string, number> = {};
  for (const key of ["l0", "l1", "l2", "l3", "l4"] as const) {
    const v = Number(lengths[key]);
    if (!Number.isFinite(v) || v <= 0) errors[key] = "length must be positive";
    out[key] = v;
  }
  if (Object.keys(errors).length > 0) return { errors };
  return {
    message: { type: "set_geometry", mech: "fivebar", ...out },
    errors,
  };
}
