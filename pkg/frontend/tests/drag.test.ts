import { describe, expect, it } from "vitest";
import { DragController } from "../src/drag.js";
import { Snapshot } from "../src/protocol.js";

function snapshotWithProxies(serial: [number, number], fivebar: [number, number]): Snapshot {
  const entry = (proxy: [number, number]) => ({
    angles: [0, 0],
    p: proxy,
    proxy,
    target: proxy,
    stuck: true,
    d: 1,
    color: [0, 1, 0] as [number, number, number],
    cursor_diameter: 10,
    branch_labels: ["elbow_plus"],
    singular: false,
    geometry: {},
    friction: { c: 1, f1: 0.3, f2: 0.05, render_mode: "composed" as const },
    drag_active: false,
    record_state: "idle" as const,
    trajectory_visible: false,
    atlas_ready: true,
    status: "",
  });
  return {
    type: "snapshot",
    tick: 1,
    time_s: 0.01,
    serial: entry(serial),
    fivebar: entry(fivebar),
  };
}

const SNAP = snapshotWithProxies([1, 1], [1, 2]);

describe("drag controller", () => {
  it("emits start/move/end for a grab near an end-effector", () => {
    const drag = new DragController();
    const msgs = [
      ...drag.pointerDown([1.05, 1.02], SNAP, true),
      ...drag.pointerMove([1.2, 1.1], true),
      ...drag.pointerMove([1.3, 1.2], true),
      ...drag.pointerUp([1.3, 1.2], true),
    ];
    expect(msgs.map((m) => (m.type === "drag" ? m.phase : "?"))).toEqual([
      "start",
      "move",
      "move",
      "end",
    ]);
    expect(msgs[0]).toMatchObject({ mech: "serial", pointer: [1.05, 1.02] });
  });

  it("ignores presses far from both end-effectors", () => {
    const drag = new DragController();
    expect(drag.pointerDown([0, -1], SNAP, true)).toEqual([]);
    expect(drag.pointerMove([0.1, -1], true)).toEqual([]);
  });

  it("silently drops events while disconnected", () => {
    const drag = new DragController();
    expect(drag.pointerDown([1.0, 1.0], SNAP, false)).toEqual([]);
    expect(drag.pointerMove([1.0, 1.0], false)).toEqual([]);
  });

  it("drags one mechanism at a time", () => {
    const drag = new DragController();
    expect(drag.pointerDown([1, 1], SNAP, true)).toHaveLength(1);
    // a second press (e.g. another button) cannot start a new drag
    expect(drag.pointerDown([1, 2], SNAP, true)).toEqual([]);
    expect(drag.active).toBe("serial");
  });

  it("grabs the nearest end-effector and honors the allowed filter", () => {
    const drag = new DragController();
    const msgs = drag.pointerDown([1.0, 1.9], SNAP, true);
    expect(msgs[0]).toMatchObject({ mech: "fivebar" });
    const restricted = new DragController();
    expect(restricted.pointerDown([1.0, 1.9], SNAP, true, ["serial"])).toEqual([]);
  });
});
