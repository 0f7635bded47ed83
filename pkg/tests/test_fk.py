import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomik.fk import build_frames, fk, fk_planar, wrist_center
from geomik.model import FIXTURE, JointAngles, angle_between_axes, normalize_angle

from oracles import planar_complex, poe_fk

angle = st.floats(-math.pi, math.pi)
configs = st.tuples(*[angle] * 6).map(lambda t: JointAngles(*t))
P = FIXTURE


def test_frames_at_home():
    f = build_frames(JointAngles(0, 0, 0, 0, 0, 0))
    assert f.r0 == pytest.approx((0, -1, 0), abs=1e-15)
    assert f.r1 == pytest.approx((1, 0, 0), abs=1e-15)
    assert f.phi == pytest.approx(-math.pi / 2)
    assert f.k5 == pytest.approx((0, 0, -1), abs=1e-15)
    assert f.k6 == pytest.approx((0, -1, 0), abs=1e-15)
    assert f.m5 == pytest.approx((1, 0, 0), abs=1e-15)
    assert f.m6 == pytest.approx((1, 0, 0), abs=1e-15)


def test_frames_wrist_quarter_turn():
    # phi = 0 puts k5 on r1; k6 = r0 rotated +90 deg about k5
    f = build_frames(JointAngles(0, 0, 0, math.pi / 2, math.pi / 2, 0))
    assert f.phi == pytest.approx(0.0, abs=1e-15)
    assert f.k5 == pytest.approx((1, 0, 0), abs=1e-15)
    assert f.k6 == pytest.approx((0, 0, -1), abs=1e-15)
    assert f.m5 == pytest.approx((0, -1, 0), abs=1e-15)
    assert f.k6.dot(f.k5) == pytest.approx(0.0, abs=1e-15)
    assert f.k6.norm() == pytest.approx(1.0, abs=1e-15)


def test_frames_base_quarter_turn():
    f = build_frames(JointAngles(math.pi / 2, 0, 0, 0, 0, 0))
    assert f.r0 == pytest.approx((1, 0, 0), abs=1e-15)
    assert f.r1 == pytest.approx((0, 1, 0), abs=1e-15)


def test_fk_home():
    pose = fk(JointAngles(0, 0, 0, 0, 0, 0), P)
    assert pose.p == pytest.approx((0.55, -0.16, -0.08), abs=1e-15)


def test_fk_shoulder_up():
    # frozen from the product-of-exponentials oracle
    q = JointAngles(0, math.pi / 2, 0, 0, 0, 0)
    pose = fk(q, P)
    assert pose.p == pytest.approx((0.08, -0.16, 0.55), abs=1e-15)
    assert (pose.p - wrist_center(q, P)).norm() == pytest.approx(P.d6, abs=1e-15)


@pytest.mark.parametrize(
    "t2, t3, phi, expected",
    [
        (math.pi / 2, 0.0, math.pi / 2, (0.0, 0.63)),
        (0.0, 0.0, 0.0, (0.63, 0.0)),
        # a2 e^{j pi/3} + a3 e^{j pi/12} + d5 e^{0.2 j}, evaluated with complex arithmetic
        (math.pi / 3, -math.pi / 4, 0.2, (0.4698867827995664, 0.34040592887456667)),
    ],
)
def test_fk_planar(t2, t3, phi, expected):
    assert fk_planar(t2, t3, phi, P) == pytest.approx(expected, abs=1e-15)
    assert planar_complex(t2, t3, phi, P.a2, P.a3, P.d5) == pytest.approx(expected, abs=1e-15)


@settings(max_examples=300)
@given(configs)
def test_fk_matches_product_of_exponentials(q):
    pose = fk(q, P)
    p, x, z = poe_fk(q, P.a2, P.a3, P.d4, P.d5, P.d6)
    assert np.allclose(pose.p, p, atol=1e-13)
    assert np.allclose(pose.x_axis, x, atol=1e-13)
    assert np.allclose(pose.z_axis, z, atol=1e-13)


@settings(max_examples=300)
@given(configs)
def test_frame_orthonormality(q):
    f = build_frames(q)
    for v in (f.k5, f.k6, f.m5, f.m6):
        assert abs(v.norm() - 1) < 1e-12
    for a, b in ((f.k5, f.k6), (f.m5, f.k6), (f.m6, f.k6), (f.k5, f.r0)):
        assert abs(a.dot(b)) < 1e-12
    assert f.r0.dot(f.r1) == 0.0


@given(configs)
def test_theta5_recovered_from_r0_k6(q):
    f = build_frames(q)
    if not 1e-3 < q.theta5 < math.pi - 1e-3:
        q = q._replace(theta5=abs(q.theta5) % (math.pi - 2e-3) + 1e-3)
        f = build_frames(q)
    assert abs(angle_between_axes(f.r0, f.k6) - q.theta5) < 1e-12


@given(configs)
def test_phi_recovered_from_r1_k5(q):
    f = build_frames(q)
    got = math.atan2(f.r1.cross(f.k5).dot(f.r0), f.r1.dot(f.k5))
    assert abs(math.remainder(got - normalize_angle(f.phi), 2 * math.pi)) < 1e-12


@given(configs)
def test_wrist_offset_and_plane(q):
    pose = fk(q, P)
    f = build_frames(q)
    p5 = wrist_center(q, P)
    assert abs((pose.p - p5).norm() - P.d6) < 1e-14
    assert abs((p5 - f.r0 * P.d4).dot(f.r0)) < 1e-12
