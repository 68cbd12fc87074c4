// Wire protocol: one JSON object per WebSocket text message.

export type MechName = "serial" | "fivebar";

export interface FrictionConfig {
  c: number;
  f1: number;
  f2: number;
  render_mode: "inside" | "outside" | "composed";
}

export interface CaseInfo {
  id: number;
  origin: [number, number];
  target: [number, number];
  required_mode_change: boolean;
}

export interface Metrics {
  duration: number;
  d_min: number;
  d_max: number;
  mode_changes: number;
}

export interface MechSnapshot {
  angles: number[];
  p: [number, number];
  proxy: [number, number];
  target: [number, number];
  stuck: boolean;
  d: number;
  color: [number, number, number];
  cursor_diameter: number;
  branch_labels: string[];
  singular: boolean;
  geometry: Record<string, unknown>;
  friction: FrictionConfig;
  drag_active: boolean;
  record_state: "idle" | "armed" | "running" | "finished";
  trajectory_visible: boolean;
  atlas_ready: boolean;
  status: string;
  trajectory?: [number, number, number, number][];
  case?: CaseInfo;
  metrics?: Metrics;
}

export interface Snapshot {
  type: "snapshot";
  tick: number;
  time_s: number;
  serial: MechSnapshot;
  fivebar: MechSnapshot;
}

export interface AtlasGrid {
  x_range: [number, number];
  y_range: [number, number];
  nx: number;
  ny: number;
}

export interface AtlasMessage {
  type: "atlas";
  mech: MechName;
  kind: string;
  mode: string;
  grid: AtlasGrid;
  raw_max: number;
  values: string; // base64 little-endian float32, row-major
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export interface TrajectoryCsvMessage {
  type: "trajectory_csv";
  mech: MechName;
  data: string;
}

export type ServerMessage = Snapshot | AtlasMessage | ErrorMessage | TrajectoryCsvMessage;

export type ClientMessage =
  | { type: "drag"; mech: MechName; phase: "start" | "move" | "end"; pointer: [number, number] }
  | { type: "set_geometry"; mech: MechName; [k: string]: unknown }
  | { type: "set_friction"; mech: MechName; c: number; f1: number; f2: number }
  | { type: "set_render_mode"; mech: MechName; mode: string }
  | { type: "set_mode"; mech: MechName; working_mode?: string; assembly_mode?: string; posture?: string }
  | { type: "select_case"; mech: MechName; id: number }
  | { type: "trajectory"; mech: MechName; action: "show" | "hide" | "clear" }
  | { type: "dump_trajectory"; mech: MechName };

export function decodeServerMessage(text: string): ServerMessage {
  const msg = JSON.parse(text);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed server message");
  }
  return msg as ServerMessage;
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

const B64_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
const B64_LOOKUP = (() => {
  const table = new Int8Array(128).fill(-1);
  for (let i = 0; i < B64_ALPHABET.length; i++) table[B64_ALPHABET.charCodeAt(i)] = i;
  return table;
})();

function base64ToBytes(s: string): Uint8Array {
  let len = s.length;
  while (len > 0 && s[len - 1] === "=") len--;
  const out = new Uint8Array(Math.floor((len * 3) / 4));
  let o = 0;
  for (let i = 0; i < len; i += 4) {
    const a = B64_LOOKUP[s.charCodeAt(i)];
    const b = B64_LOOKUP[s.charCodeAt(i + 1)];
    const c = i + 2 < len ? B64_LOOKUP[s.charCodeAt(i + 2)] : 0;
    const d = i + 3 < len ? B64_LOOKUP[s.charCodeAt(i + 3)] : 0;
    out[o++] = (a << 2) | (b >> 4);
    if (i + 2 < len) out[o++] = ((b & 15) << 4) | (c >> 2);
    if (i + 3 < len) out[o++] = ((c & 3) << 6) | d;
  }
  return out;
}

// Decode the packed atlas samples; NaN entries mark unreachable cells.
export function decodeAtlasValues(msg: AtlasMessage): Float32Array {
  const bytes = base64ToBytes(msg.values);
  const n = msg.grid.nx * msg.grid.ny;
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) out[i] = view.getFloat32(4 * i, true);
  return out;
}
