import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechhap import fivebar as fb
from mechhap import haptics as hp
from mechhap import serial as sr
from mechhap.errors import NoAtlas
from mechhap.haptics import HapticConfig, ProxyState, RenderMode


def cfg(c=1.0, f1=0.3, f2=0.05, mode=RenderMode.COMPOSED):
    return HapticConfig(c=c, f1=f1, f2=f2, render_mode=mode)


def test_config_invariants():
    with pytest.raises(ValueError):
        HapticConfig(c=-1.0)
    with pytest.raises(ValueError):
        HapticConfig(f1=0.1, f2=0.5)
    with pytest.raises(ValueError):
        HapticConfig(f1=0.3, f2=0.3)
    with pytest.raises(ValueError):
        HapticConfig(f1=1.2)


def test_friction_magnitude_branches():
    c = cfg(c=2.0, f1=0.4, f2=0.1)
    assert hp.friction_magnitude(c, 1.0) == 0.0
    assert hp.friction_magnitude(c, 0.4) == 0.0
    assert hp.friction_magnitude(c, 0.1) == pytest.approx(2.0)
    assert hp.friction_magnitude(c, 0.0) == 2.0
    assert hp.friction_magnitude(c, 0.25) == pytest.approx(1.0)  # midpoint -> c/2


def test_friction_magnitude_continuous_at_knots():
    c = cfg(c=3.0, f1=0.5, f2=0.2)
    eps = 1e-13
    assert abs(hp.friction_magnitude(c, 0.5 + eps) - hp.friction_magnitude(c, 0.5 - eps)) < 1e-11
    assert abs(hp.friction_magnitude(c, 0.2 + eps) - hp.friction_magnitude(c, 0.2 - eps)) < 1e-11


@given(
    st.floats(0.01, 10.0),
    st.floats(0.02, 1.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
def test_friction_law_nonincreasing_with_range(c_val, f1, f2_frac, d):
    f2 = f2_frac * f1 * 0.99
    c = cfg(c=c_val, f1=f1, f2=f2)
    v = hp.friction_magnitude(c, d)
    assert 0.0 <= v <= c_val
    assert hp.friction_magnitude(c, min(d + 0.01, 1.0)) <= v + 1e-12
    assert hp.friction_magnitude(c, 0.0) == c_val
    assert hp.friction_magnitude(c, 1.0) == 0.0


def test_coulomb_force_examples():
    assert np.allclose(hp.coulomb_force((1.0, 0.0), 2.0), [-2.0, 0.0])
    assert np.allclose(hp.coulomb_force((0.0, 0.0), 2.0), [0.0, 0.0])
    assert np.allclose(hp.coulomb_force((3.0, 4.0), 5.0), [-3.0, -4.0])


def test_coulomb_force_opposes_motion():
    rng = np.random.default_rng(1)
    for _ in range(100):
        v = rng.normal(size=2)
        f = hp.coulomb_force(v, 1.5)
        assert float(f @ v) <= 0.0


def test_force_sample_invariants():
    c = cfg(c=2.0, f1=0.4, f2=0.1)
    rng = np.random.default_rng(2)
    for _ in range(100):
        d = float(rng.uniform(0, 1))
        v = rng.normal(size=2)
        s = hp.force_sample(c, d, v)
        assert 0.0 <= s.magnitude <= c.c
        assert float(s.direction @ v) <= 0.0
    rest = hp.force_sample(c, 0.0, (0.0, 0.0))
    assert np.array_equal(rest.direction, [0.0, 0.0])
    assert rest.magnitude == 2.0


def test_proxy_blocked_when_pull_below_friction():
    c = cfg(c=1.0, f1=0.3, f2=0.05)
    st0 = ProxyState(proxy=np.array([0.0, 0.0]), target=np.array([0.01, 0.0]))
    # d <= f2 -> full friction c = 1; pull = 50 * 0.01 = 0.5 < 1.
    out = st0
    for _ in range(1000):
        out = hp.proxy_step(out, c, d=0.02, dt=0.01, k_pull=50.0)
    assert np.array_equal(out.proxy, st0.proxy)
    assert out.stuck and np.all(out.v == 0.0)


def test_proxy_tracks_freely_in_safe_region():
    c = cfg()
    st0 = ProxyState(proxy=np.array([0.0, 0.0]), target=np.array([0.002, 0.001]))
    out = hp.proxy_step(st0, c, d=0.9, dt=0.01)  # d > f1: zero friction
    assert np.allclose(out.proxy, st0.target)


def test_proxy_zero_friction_constant_is_pure_tracking():
    c = cfg(c=0.0)
    st0 = ProxyState(proxy=np.array([0.0, 0.0]), target=np.array([0.3, -0.4]))
    out = hp.proxy_step(st0, c, d=0.0, dt=0.01)
    assert np.allclose(out.proxy, st0.target)


def test_proxy_partial_slide_leaves_friction_residual():
    c = cfg(c=1.0, f1=0.3, f2=0.05)
    st0 = ProxyState(proxy=np.array([0.0, 0.0]), target=np.array([0.1, 0.0]))
    out = hp.proxy_step(st0, c, d=0.0, dt=0.01, k_pull=50.0)
    # pull 5 N vs friction 1 N: residual gap = F/k = 0.02.
    assert out.proxy[0] == pytest.approx(0.08)
    assert not out.stuck
    assert out.v[0] == pytest.approx(0.08 / 0.01)


def test_proxy_monotone_blocking():
    c = cfg(c=1.0, f1=0.5, f2=0.1)
    start = ProxyState(proxy=np.array([0.0, 0.0]), target=np.array([0.05, 0.0]))
    moves = []
    for d in np.linspace(0.0, 1.0, 21):
        out = hp.proxy_step(start, c, d=float(d), dt=0.01, k_pull=50.0)
        moves.append(float(out.proxy[0]))
    assert all(a <= b + 1e-15 for a, b in zip(moves, moves[1:]))


def test_proxy_friction_work_is_dissipative():
    # Work done by the friction term along a proxied drag never adds energy.
    c = cfg(c=1.0, f1=0.4, f2=0.1)
    rng = np.random.default_rng(42)
    state = ProxyState(proxy=np.zeros(2), target=np.zeros(2))
    total = 0.0
    for _ in range(500):
        state = ProxyState(proxy=state.proxy, target=state.proxy + rng.normal(scale=0.03, size=2))
        d = float(rng.uniform(0, 1))
        new = hp.proxy_step(state, c, d=d, dt=0.01)
        disp = new.proxy - state.proxy
        f = hp.coulomb_force(new.v, hp.friction_magnitude(c, d))
        total += float(f @ disp)
        assert float(f @ disp) <= 1e-12
        state = new
    assert total <= 0.0


def test_proxy_projection_applies():
    c = cfg(c=0.0)
    st0 = ProxyState(proxy=np.array([0.9, 0.0]), target=np.array([2.0, 0.0]))
    out = hp.proxy_step(st0, c, d=1.0, dt=0.01, project=lambda p: np.clip(p, -1.0, 1.0))
    assert np.allclose(out.proxy, [1.0, 0.0])


SERIAL_NORMS = {"combined": 1.0}
FIVEBAR_NORMS = {"direct": 2.0, "inverse": 2.0}
GFB = fb.DEFAULT_GEOMETRY


def test_boundary_definer_serial_singular():
    g = sr.SerialGeometry(1.0, 1.0)
    state = sr.state_from_angles(g, 0.7, 0.7)
    assert hp.boundary_definer(state, g, SERIAL_NORMS, RenderMode.COMPOSED) == 0.0


def test_boundary_definer_serial_includes_limits():
    g = sr.SerialGeometry(1.0, 1.0, joint_limits=((-1.0, 1.0), None))
    state = sr.state_from_angles(g, 1.0, 1.0 + math.pi / 2)  # theta1 at its stop
    assert hp.boundary_definer(state, g, SERIAL_NORMS, RenderMode.COMPOSED) == 0.0


def test_boundary_definer_requires_norms():
    g = sr.SerialGeometry(1.0, 1.0)
    state = sr.state_from_angles(g, 0.0, 1.0)
    with pytest.raises(NoAtlas):
        hp.boundary_definer(state, g, {}, RenderMode.COMPOSED)


def test_boundary_definer_fivebar_modes():
    state = fb.fk(GFB, math.pi / 2, math.pi / 2, fb.AssemblyMode.AM1)
    norms = {"direct": 4.0, "inverse": 2.0}
    d_in = hp.boundary_definer(state, GFB, norms, RenderMode.INSIDE)
    d_out = hp.boundary_definer(state, GFB, norms, RenderMode.OUTSIDE)
    d_comp = hp.boundary_definer(state, GFB, norms, RenderMode.COMPOSED)
    assert d_in == pytest.approx(abs(fb.det_a(GFB, state.theta3, state.theta4)) / 4.0)
    assert d_out == pytest.approx(0.5)  # |det B| = 1 over max 2
    assert d_comp == pytest.approx(d_in * d_out)  # exact composition law


def test_boundary_definer_inside_ignores_outside_factor():
    # Leg 1 folded: det B = 0, but det A stays finite; INSIDE mode must
    # report the det-A value untouched.
    state = fb.FiveBarState(
        theta1=0.3,
        theta2=2.0,
        theta3=0.3,
        theta4=2.9,
        working_mode=fb.WorkingMode.WM1,
        assembly_mode=fb.AssemblyMode.AM1,
        p=np.zeros(2),
    )
    norms = {"direct": 4.0, "inverse": 2.0}
    d_in = hp.boundary_definer(state, GFB, norms, RenderMode.INSIDE)
    assert d_in == pytest.approx(abs(fb.det_a(GFB, 0.3, 2.9)) / 4.0)
    assert hp.boundary_definer(state, GFB, norms, RenderMode.OUTSIDE) == 0.0
    assert hp.boundary_definer(state, GFB, norms, RenderMode.COMPOSED) == 0.0


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_composed_is_product_of_components(a_frac, b_frac):
    t3 = a_frac * math.pi
    t4 = b_frac * math.pi
    state = fb.FiveBarState(
        theta1=0.5,
        theta2=2.5,
        theta3=t3,
        theta4=t4,
        working_mode=fb.WorkingMode.WM1,
        assembly_mode=fb.AssemblyMode.AM1,
        p=np.zeros(2),
    )
    norms = {"direct": 2.0, "inverse": 2.0}
    d_in = hp.boundary_definer(state, GFB, norms, RenderMode.INSIDE)
    d_out = hp.boundary_definer(state, GFB, norms, RenderMode.OUTSIDE)
    d_comp = hp.boundary_definer(state, GFB, norms, RenderMode.COMPOSED)
    assert d_comp == d_in * d_out
