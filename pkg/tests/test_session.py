import math

import numpy as np
import pytest

from mechhap import atlas, session
from mechhap import fivebar as fb
from mechhap import serial as sr
from mechhap.errors import (
    JointLimitViolation,
    NonMonotonicTime,
    NotFinished,
    OutOfGrid,
    UnknownCase,
)
from mechhap.session import Mech, RecState, TrajectoryRecord


@pytest.fixture(scope="module")
def fivebar_maps():
    grid = atlas.GridSpec(*atlas.default_bounds(fb.DEFAULT_GEOMETRY), 300, 300)
    out = {}
    for wm in fb.WorkingMode:
        f = atlas.sample_index_field(
            fb.DEFAULT_GEOMETRY, grid, atlas.FieldKind.FIVEBAR_COMPOSED, wm
        )
        out[wm] = atlas.compute_aspects(f, 0.02)
    return out


@pytest.fixture(scope="module")
def serial_plus_map():
    grid = atlas.GridSpec((-2.1, 2.1), (-2.1, 2.1), 300, 300)
    f = atlas.sample_index_field(
        sr.DEFAULT_GEOMETRY, grid, atlas.FieldKind.SERIAL_COMBINED, sr.Posture.ELBOW_PLUS
    )
    return atlas.compute_aspects(f, 0.02)


def test_unknown_case():
    with pytest.raises(UnknownCase):
        session.load_case(Mech.SERIAL, 4)
    with pytest.raises(UnknownCase):
        session.load_case(Mech.FIVEBAR, 0)


def test_cases_have_distinct_reachable_endpoints():
    for mech, geom in ((Mech.SERIAL, sr.DEFAULT_GEOMETRY), (Mech.FIVEBAR, fb.DEFAULT_GEOMETRY)):
        for cid in (1, 2, 3):
            case = session.load_case(mech, cid)
            assert case.origin != case.target
            for p in (case.origin, case.target):
                if mech is Mech.SERIAL:
                    assert atlas.serial_workspace_contains(geom, p)
                else:
                    fb.ik(geom, p, fb.WorkingMode.WM1)  # raises if unreachable


def test_serial_case1_straight_segment_stays_safe(serial_plus_map):
    # Same aspect and the connecting segment keeps the index above f1.
    case = session.load_case(Mech.SERIAL, 1)
    assert session.feasibility(case, serial_plus_map)
    g = sr.DEFAULT_GEOMETRY
    for t in np.linspace(0.0, 1.0, 500):
        p = np.asarray(case.origin) + t * (np.asarray(case.target) - np.asarray(case.origin))
        s = sr.ik(g, p, sr.Posture.ELBOW_PLUS)
        d = abs(sr.det_j(g, s.theta1, s.theta2))  # field max is 1 for l1=l2=1
        assert d > 0.3


def test_serial_case2_direct_path_crosses_singularity():
    case = session.load_case(Mech.SERIAL, 2)
    g = sr.DEFAULT_GEOMETRY
    dmin = 1.0
    for t in np.linspace(0.0, 1.0, 1001):
        p = np.asarray(case.origin) + t * (np.asarray(case.target) - np.asarray(case.origin))
        s = sr.ik(g, p, sr.Posture.ELBOW_PLUS)
        dmin = min(dmin, abs(sr.det_j(g, s.theta1, s.theta2)))
    assert dmin < 0.02


def test_serial_case3_forces_posture_change():
    case = session.load_case(Mech.SERIAL, 3)
    assert case.required_mode_change
    g = sr.SerialGeometry(1.0, 1.0, joint_limits=session.SERIAL_CASE3_LIMITS)
    sr.ik(g, case.origin, sr.Posture.ELBOW_PLUS)  # graspable in plus only
    with pytest.raises(JointLimitViolation):
        sr.ik(g, case.origin, sr.Posture.ELBOW_MINUS)
    sr.ik(g, case.target, sr.Posture.ELBOW_MINUS)  # graspable in minus only
    with pytest.raises(JointLimitViolation):
        sr.ik(g, case.target, sr.Posture.ELBOW_PLUS)


def test_fivebar_case3_feasibility_flips_with_working_mode(fivebar_maps):
    case = session.load_case(Mech.FIVEBAR, 3)
    assert case.required_mode_change
    assert not session.feasibility(case, fivebar_maps[session.FIVEBAR_CASE3_DEFAULT_MODE])
    assert session.feasibility(case, fivebar_maps[session.FIVEBAR_CASE3_ALTERNATE_MODE])


def test_fivebar_case1_same_aspect(fivebar_maps):
    case = session.load_case(Mech.FIVEBAR, 1)
    assert not case.required_mode_change
    assert session.feasibility(case, fivebar_maps[fb.WorkingMode.WM1])


def test_feasibility_fails_on_singular_band(fivebar_maps):
    # Origin parked on the central singular band (label 0).
    case = session.StudyCase(9, Mech.FIVEBAR, (1.0, 0.0), (1.0, 0.6), False)
    amap = fivebar_maps[fb.WorkingMode.WM1]
    assert atlas.aspect_of_point(amap, case.origin) == 0
    assert not session.feasibility(case, amap)


def test_feasibility_propagates_out_of_grid(fivebar_maps):
    case = session.StudyCase(9, Mech.FIVEBAR, (99.0, 0.0), (1.0, 0.6), False)
    with pytest.raises(OutOfGrid):
        session.feasibility(case, fivebar_maps[fb.WorkingMode.WM1])


def run_through(rec, path):
    for t, p, d in path:
        rec = session.record_step(rec, t, p, d, ("elbow_plus",))
    return rec


def test_record_capture_and_metrics():
    case = session.load_case(Mech.SERIAL, 1)
    rec = session.arm(TrajectoryRecord(), case)
    assert rec.state is RecState.ARMED
    rec = run_through(
        rec,
        [
            (0.00, (0.0, 0.5), 0.9),                      # wandering, not captured
            (0.01, case.origin, 0.8),                     # origin capture: clock zeroes
            (0.02, (0.9, 0.6), 0.5),
            (0.03, (0.6, 0.9), 0.7),
            (0.04, case.target, 0.85),                    # target capture: finished
        ],
    )
    assert rec.state is RecState.FINISHED
    m = session.metrics(rec)
    assert m.duration == pytest.approx(0.03)
    assert m.d_min == 0.5
    assert m.d_max == 0.85
    assert m.mode_changes == 0


def test_record_degenerate_overlap_run():
    case = session.StudyCase(9, Mech.SERIAL, (1.0, 1.0), (1.0, 1.02), False)
    rec = session.arm(TrajectoryRecord(), case)
    rec = session.record_step(rec, 0.5, (1.0, 1.01), 0.75, ("elbow_plus",))
    assert rec.state is RecState.FINISHED
    m = session.metrics(rec)
    assert m.duration == 0.0
    assert m.d_min == m.d_max == 0.75


def test_record_non_monotonic_time():
    rec = session.arm(TrajectoryRecord(), session.load_case(Mech.SERIAL, 1))
    rec = session.record_step(rec, 1.0, (0.0, 0.5), 0.9, ())
    with pytest.raises(NonMonotonicTime):
        session.record_step(rec, 1.0, (0.0, 0.5), 0.9, ())


def test_metrics_requires_finished():
    rec = session.arm(TrajectoryRecord(), session.load_case(Mech.SERIAL, 1))
    with pytest.raises(NotFinished):
        session.metrics(rec)


def test_metrics_mode_change_count():
    case = session.StudyCase(9, Mech.SERIAL, (0.0, 1.0), (1.0, 0.0), True)
    rec = session.arm(TrajectoryRecord(), case)
    rec = session.record_step(rec, 0.0, (0.0, 1.0), 0.9, ("elbow_plus",))
    rec = session.record_step(rec, 0.1, (0.5, 0.5), 0.8, ("elbow_plus",))
    rec = session.record_step(rec, 0.2, (0.6, 0.4), 0.8, ("elbow_minus",))
    rec = session.record_step(rec, 0.3, (1.0, 0.0), 0.9, ("elbow_minus",))
    assert session.metrics(rec).mode_changes == 1


def test_extrema_monotone_under_appends():
    case = session.StudyCase(9, Mech.SERIAL, (0.0, 1.0), (9.0, 9.0), False)
    rec = session.arm(TrajectoryRecord(), case)
    rec = session.record_step(rec, 0.0, (0.0, 1.0), 0.5, ())
    lo, hi = 0.5, 0.5
    rng = np.random.default_rng(0)
    t = 0.0
    for _ in range(50):
        t += 0.01
        d = float(rng.uniform(0, 1))
        rec = session.record_step(rec, t, (0.0, 1.0), d, ())
        run = session.running_samples(rec)
        new_lo = min(s.d for s in run)
        new_hi = max(s.d for s in run)
        assert new_lo <= lo and new_hi >= hi
        lo, hi = new_lo, new_hi


def test_csv_dump_format():
    rec = session.arm(TrajectoryRecord(), session.load_case(Mech.FIVEBAR, 1))
    rec = session.record_step(rec, 0.25, (0.6, 0.8), 0.75, ("wm1", "am1"))
    text = session.to_csv(rec)
    lines = text.splitlines()
    assert lines[0] == "t,x,y,d,labels"
    assert lines[1] == "0.25,0.6,0.8,0.75,wm1|am1"
