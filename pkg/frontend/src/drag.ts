// Pointer-to-drag state machine. Pure: callers feed pointer events in
// workspace coordinates plus the latest snapshot, and collect wire
// messages. Only one mechanism can be dragged at a time, and a press
// must land within the grab radius of an end-effector to start.

import { ClientMessage, MechName, Snapshot } from "./protocol.js";

export const GRAB_RADIUS_M = 0.15;

export class DragController {
  active: MechName | null = null;

  constructor(private grabRadius: number = GRAB_RADIUS_M) {}

  pointerDown(
    world: [number, number],
    snapshot: Snapshot | null,
    connected: boolean,
    allowed: MechName[] = ["serial", "fivebar"],
  ): ClientMessage[] {
    if (!connected || !snapshot || this.active !== null) return [];
    let best: MechName | null = null;
    let bestDist = this.grabRadius;
    for (const mech of allowed) {
      const proxy = snapshot[mech].proxy;
      const dist = Math.hypot(world[0] - proxy[0], world[1] - proxy[1]);
      if (dist <= bestDist) {
        best = mech;
        bestDist = dist;
      }
    }
    if (best === null) return [];
    this.active = best;
    return [{ type: "drag", mech: best, phase: "start", pointer: world }];
  }

  pointerMove(world: [number, number], connected: boolean): ClientMessage[] {
    if (!connected || this.active === null) return [];
    return [{ type: "drag", mech: this.active, phase: "move", pointer: world }];
  }

  pointerUp(world: [number, number], connected: boolean): ClientMessage[] {
    if (this.active === null) return [];
    const mech = this.active;
    this.active = null;
    if (!connected) return [];
    return [{ type: "drag", mech, phase: "end", pointer: world }];
  }
}
