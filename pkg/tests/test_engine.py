import json
import math

import numpy as np
import pytest

from mechhap import atlas, protocol
from mechhap import fivebar as fb
from mechhap import serial as sr
from mechhap.engine import Engine, cursor_color, cursor_diameter
from mechhap.haptics import boundary_definer
from mechhap.session import Mech, RecState


@pytest.fixture()
def engine():
    return Engine(grid_n=100)


def drain_errors(engine):
    return [m for m in engine.take_outbox() if m["type"] == "error"]


def test_idle_tick_only_advances_counter(engine):
    before = engine.snapshot()
    after = engine.tick()
    assert after["tick"] == before["tick"] + 1
    for mech in ("serial", "fivebar"):
        b, a = dict(before[mech]), dict(after[mech])
        assert a == b


def test_time_advances_exactly(engine):
    for _ in range(100):
        snap = engine.tick()
    assert snap["time_s"] == 1.0
    assert snap["tick"] == 100


def test_snapshot_self_consistent(engine):
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [0.3, 1.4]})
    engine.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": [0.7, 1.2]})
    for _ in range(60):
        snap = engine.tick()
    s = snap["serial"]
    p = sr.fk(engine.mechs[Mech.SERIAL].geom, *s["angles"])
    assert np.allclose(p, s["p"], atol=1e-9)
    assert np.allclose(s["p"], s["proxy"], atol=1e-9)
    assert s["color"] == cursor_color(s["d"])
    assert s["cursor_diameter"] == cursor_diameter(s["d"])
    f = snap["fivebar"]
    sim = engine.mechs[Mech.FIVEBAR]
    assert np.allclose(fb.fk_points(sim.geom, f["angles"][0], f["angles"][1], sim.state.assembly_mode), f["p"], atol=1e-9)
    d = boundary_definer(sim.state, sim.geom, sim.norms, sim.haptic.render_mode)
    assert f["d"] == d


def test_drag_moves_serial_proxy_to_target(engine):
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [0.5, 1.2]})
    for _ in range(100):
        snap = engine.tick()
    assert np.allclose(snap["serial"]["proxy"], [0.5, 1.2], atol=1e-6)


def test_drag_outside_clamps_to_boundary_with_zero_index(engine):
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [5.0, 0.0]})
    for _ in range(400):
        snap = engine.tick()
    r = float(np.hypot(*snap["serial"]["proxy"]))
    assert r == pytest.approx(2.0, abs=1e-9)
    assert snap["serial"]["d"] < 0.02


def test_fivebar_drag_outside_clamps(engine):
    engine.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": [1.0, 9.0]})
    for _ in range(600):
        snap = engine.tick()
    p = snap["fivebar"]["proxy"]
    r1 = float(np.hypot(p[0], p[1]))
    r2 = float(np.hypot(p[0] - 2.0, p[1]))
    rmax = 1.0 + math.sqrt(2.0)
    assert r1 <= rmax + 1e-9 and r2 <= rmax + 1e-9
    assert max(r1, r2) == pytest.approx(rmax, abs=1e-6)
    assert snap["fivebar"]["d"] < 0.05


def test_set_friction_roundtrip_and_validation(engine):
    engine.post({"type": "set_friction", "mech": "serial", "c": 2.0, "f1": 0.4, "f2": 0.1})
    snap = engine.tick()
    assert snap["serial"]["friction"] == {
        "c": 2.0,
        "f1": 0.4,
        "f2": 0.1,
        "render_mode": "composed",
    }
    engine.post({"type": "set_friction", "mech": "serial", "c": 1.0, "f1": 0.1, "f2": 0.5})
    snap = engine.tick()
    errs = drain_errors(engine)
    assert len(errs) == 1 and errs[0]["code"] == "invalid_value"
    assert snap["serial"]["friction"]["f1"] == 0.4  # unchanged


def test_bad_messages_rejected(engine):
    engine.post({"type": "warp", "mech": "serial"})
    engine.post({"type": "set_friction", "mech": "serial", "c": 1, "f1": 0.3, "f2": 0.05, "bogus": 1})
    engine.post({"type": "set_friction", "mech": "serial", "c": 1})
    engine.tick()
    errs = drain_errors(engine)
    assert [e["code"] for e in errs] == ["bad_message"] * 3


def test_malformed_values_never_crash_the_tick(engine):
    engine.post({"type": "set_geometry", "mech": "serial"})  # missing lengths
    engine.post({"type": "set_geometry", "mech": "serial", "l1": "wide", "l2": 1})
    engine.post({"type": "select_case", "mech": "serial", "id": "nine"})
    engine.post({"type": "set_geometry", "mech": "fivebar", "l0": 2, "l1": 1, "l2": 1, "l3": 1.4, "l4": 1.4, "joint_limits": [[0, 1], None]})
    snap = engine.tick()
    codes = sorted(e["code"] for e in drain_errors(engine))
    assert codes == ["bad_message", "invalid_value", "invalid_value", "invalid_value"]
    assert snap["serial"]["geometry"]["l1"] == 1.0  # untouched


def test_set_mode_rejected_while_dragging(engine):
    engine.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": [1.0, 1.4]})
    engine.tick()
    engine.post({"type": "set_mode", "mech": "fivebar", "working_mode": "wm2"})
    snap = engine.tick()
    errs = drain_errors(engine)
    assert errs and errs[0]["code"] == "drag_active"
    assert snap["fivebar"]["branch_labels"][0] == "wm1"  # home pose mode kept


def test_set_mode_jumps_to_other_branch(engine):
    # Serial: at (1,1) the two postures are (0, pi/2) and (pi/2, 0).
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [1.0, 1.0]})
    for _ in range(50):
        engine.tick()
    engine.post({"type": "drag", "mech": "serial", "phase": "end", "pointer": [1.0, 1.0]})
    engine.tick()
    engine.post({"type": "set_mode", "mech": "serial", "posture": "elbow_minus"})
    snap = engine.tick()
    assert snap["serial"]["branch_labels"] == ["elbow_minus"]
    assert np.allclose(snap["serial"]["angles"], [math.pi / 2, 0.0], atol=1e-9)
    assert np.allclose(snap["serial"]["p"], [1.0, 1.0], atol=1e-9)


def test_set_mode_fivebar_working_mode_keeps_p(engine):
    sim = engine.mechs[Mech.FIVEBAR]
    p_before = list(sim.state.p)
    wm_before = sim.state.working_mode
    engine.post({"type": "set_mode", "mech": "fivebar", "working_mode": "wm2"})
    snap = engine.tick()
    assert snap["fivebar"]["branch_labels"][0] == "wm2"
    assert np.allclose(snap["fivebar"]["p"], p_before, atol=1e-9)
    assert wm_before is not fb.WorkingMode.WM2


def test_set_geometry_resets_and_recomputes_atlas(engine):
    engine.post({"type": "set_geometry", "mech": "serial", "l1": 1.5, "l2": 0.9})
    snap = engine.tick()
    assert not snap["serial"]["atlas_ready"]
    assert snap["serial"]["geometry"]["l1"] == 1.5
    engine.run_pending_atlas()
    snap = engine.tick()
    assert snap["serial"]["atlas_ready"]
    assert engine.take_atlas_updates() == [Mech.SERIAL]
    sim = engine.mechs[Mech.SERIAL]
    assert sim.norms["combined"] > 0


def test_set_geometry_invalid_rejected(engine):
    engine.post({"type": "set_geometry", "mech": "serial", "l1": -1.0, "l2": 1.0})
    engine.tick()
    errs = drain_errors(engine)
    assert errs and errs[0]["code"] == "invalid_value"
    assert engine.mechs[Mech.SERIAL].geom.l1 == 1.0


def test_select_case_and_run_to_finish(engine):
    engine.post({"type": "select_case", "mech": "serial", "id": 1})
    engine.post({"type": "trajectory", "mech": "serial", "action": "show"})
    snap = engine.tick()
    case = snap["serial"]["case"]
    assert case["id"] == 1 and snap["serial"]["record_state"] == "armed"
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": case["origin"]})
    for _ in range(120):
        snap = engine.tick()
    assert snap["serial"]["record_state"] == "running"
    engine.post({"type": "drag", "mech": "serial", "phase": "move", "pointer": case["target"]})
    for _ in range(200):
        snap = engine.tick()
    assert snap["serial"]["record_state"] == "finished"
    m = snap["serial"]["metrics"]
    assert m["duration"] > 0
    assert 0.0 <= m["d_min"] <= m["d_max"] <= 1.0
    assert m["mode_changes"] == 0
    assert snap["serial"]["trajectory"], "shown trajectory rides in the snapshot"


def test_unknown_case_rejected(engine):
    engine.post({"type": "select_case", "mech": "serial", "id": 9})
    engine.tick()
    errs = drain_errors(engine)
    assert errs and errs[0]["code"] == "invalid_value"


def test_dump_trajectory_emits_csv(engine):
    engine.post({"type": "dump_trajectory", "mech": "fivebar"})
    engine.tick()
    msgs = engine.take_outbox()
    csvs = [m for m in msgs if m["type"] == "trajectory_csv"]
    assert csvs and csvs[0]["mech"] == "fivebar"
    assert csvs[0]["data"].startswith("t,x,y,d,labels")


def test_blocked_proxy_never_moves(engine):
    # Pin the serial proxy at a singular pose (d = 0) and pull gently:
    # spring force k * |gap| = 100 * 0.008 = 0.4 < c = 1.
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [2.0, 0.0]})
    for _ in range(300):
        engine.tick()
    start = engine.snapshot()["serial"]["proxy"]
    assert engine.snapshot()["serial"]["d"] <= 0.05
    target = [start[0] - 0.008, start[1] + 0.004]
    engine.post({"type": "drag", "mech": "serial", "phase": "move", "pointer": target})
    for _ in range(1000):
        snap = engine.tick()
    assert snap["serial"]["proxy"] == start
    assert snap["serial"]["stuck"]


def test_replay_is_bit_identical():
    def run():
        e = Engine(grid_n=80)
        frames = []
        e.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [0.4, 1.3]})
        e.post({"type": "select_case", "mech": "fivebar", "id": 2})
        for i in range(200):
            if i == 40:
                e.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": [0.2, 0.9]})
            if i == 90:
                e.post({"type": "set_friction", "mech": "serial", "c": 0.5, "f1": 0.5, "f2": 0.2})
            if i == 140:
                e.post({"type": "drag", "mech": "serial", "phase": "move", "pointer": [-1.2, 0.4]})
            frames.append(protocol.encode_message(e.tick()))
        return frames
    assert run() == run()


def test_aspect_confinement_blocks_infeasible_case():
    e = Engine(grid_n=150, aspect_confine=True)
    e.post({"type": "select_case", "mech": "fivebar", "id": 3})
    snap = e.tick()
    case = snap["fivebar"]["case"]
    e.post({"type": "drag", "mech": "fivebar", "phase": "start", "pointer": case["origin"]})
    for _ in range(100):
        e.tick()
    assert e.snapshot()["fivebar"]["record_state"] == "running"
    e.post({"type": "drag", "mech": "fivebar", "phase": "move", "pointer": case["target"]})
    for _ in range(1000):
        snap = e.tick()
    # WM1 keeps origin and target in different aspects: never finished.
    assert snap["fivebar"]["record_state"] == "running"
    amap = e._aspect_map(e.mechs[Mech.FIVEBAR])
    assert atlas.aspect_of_point(amap, snap["fivebar"]["proxy"]) == atlas.aspect_of_point(amap, case["origin"])


def test_snapshots_are_strict_json(engine):
    engine.post({"type": "drag", "mech": "serial", "phase": "start", "pointer": [0.1, 1.9]})
    for _ in range(30):
        text = protocol.encode_message(engine.tick())
    json.loads(text)  # would raise on NaN/Infinity
