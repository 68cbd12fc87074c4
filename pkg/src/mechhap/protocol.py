"""Wire message schemas and serialization.

Transport framing is one JSON object per WebSocket text message. This
module owns client-message validation (strict: unknown types or fields
are rejected) and the binary packing of atlas fields (row-major
little-endian float32, base64).
"""
from __future__ import annotations

import base64
import json
from typing import Any, Dict

import numpy as np

from .atlas import IndexField
from .errors import BadMessage

# type -> (required fields, optional fields)
CLIENT_SCHEMAS: Dict[str, tuple] = {
    "drag": ({"mech", "phase", "pointer"}, set()),
    "set_geometry": ({"mech"}, {"l0", "l1", "l2", "l3", "l4", "joint_limits"}),
    "set_friction": ({"mech", "c", "f1", "f2"}, set()),
    "set_render_mode": ({"mech", "mode"}, set()),
    "set_mode": ({"mech"}, {"working_mode", "assembly_mode", "posture"}),
    "select_case": ({"mech", "id"}, set()),
    "trajectory": ({"mech", "action"}, set()),
    "dump_trajectory": ({"mech"}, set()),
}

_MECHS = {"serial", "fivebar"}
_DRAG_PHASES = {"start", "move", "end"}
_TRAJ_ACTIONS = {"show", "hide", "clear"}


def validate_client_message(msg: Any) -> None:
    """Raise BadMessage unless msg is a well-formed client message."""
    if not isinstance(msg, dict):
        raise BadMessage("message must be a JSON object")
    kind = msg.get("type")
    if kind not in CLIENT_SCHEMAS:
        raise BadMessage(f"unknown message type {kind!r}")
    required, optional = CLIENT_SCHEMAS[kind]
    keys = set(msg.keys()) - {"type"}
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise BadMessage(f"{kind}: missing fields {sorted(missing)}")
    if unknown:
        raise BadMessage(f"{kind}: unknown fields {sorted(unknown)}")
    if msg["mech"] not in _MECHS:
        raise BadMessage(f"unknown mechanism {msg['mech']!r}")
    if kind == "drag":
        if msg["phase"] not in _DRAG_PHASES:
            raise BadMessage(f"bad drag phase {msg['phase']!r}")
        ptr = msg["pointer"]
        if (
            not isinstance(ptr, (list, tuple))
            or len(ptr) != 2
            or not all(isinstance(v, (int, float)) for v in ptr)
        ):
            raise BadMessage("drag pointer must be [x, y]")
    elif kind == "trajectory" and msg["action"] not in _TRAJ_ACTIONS:
        raise BadMessage(f"bad trajectory action {msg['action']!r}")


def decode_client_message(text: str) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadMessage(f"not valid JSON: {exc}") from exc
    validate_client_message(msg)
    return msg


def encode_message(msg: dict) -> str:
    # allow_nan=False keeps the stream parseable by strict JSON clients;
    # snapshot fields are finite by construction and atlas NaNs travel
    # inside the base64 payload.
    return json.dumps(msg, separators=(",", ":"), allow_nan=False)


def pack_field_values(field: IndexField) -> str:
    """Row-major little-endian float32 samples, base64; NaN = OUTSIDE."""
    return base64.b64encode(
        np.ascontiguousarray(field.values, dtype="<f4").tobytes()
    ).decode("ascii")


def unpack_field_values(data: str, ny: int, nx: int) -> np.ndarray:
    buf = base64.b64decode(data.encode("ascii"))
    return np.frombuffer(buf, dtype="<f4").reshape(ny, nx)


def atlas_message(mech: str, kind: str, mode: str, field: IndexField) -> dict:
    return {
        "type": "atlas",
        "mech": mech,
        "kind": kind,
        "mode": mode,
        "grid": {
            "x_range": list(field.grid.x_range),
            "y_range": list(field.grid.y_range),
            "nx": field.grid.nx,
            "ny": field.grid.ny,
        },
        "raw_max": field.raw_max,
        "values": pack_field_values(field),
    }
