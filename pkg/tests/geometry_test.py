import math

import numpy as np
import pytest
from pydantic import ValidationError

from marinesim.errors import SingularAttitude
from marinesim.models.geometry import BodyVelocity, Dof, Pose, wrap_angle
from marinesim.services.geometry import (
  euler_rate_map,
  euler_rate_map_inverse,
  kinematic_map,
  kinematic_map_derivative,
  kinematic_map_inverse,
  kinematic_map_inverse_derivative,
  kinematic_map_inverse_partials,
  kinematic_map_partials,
  pose_difference,
  pose_rate,
  rotation_zyx,
  skew,
  wrap_pose,
)

SPATIAL_POSE = np.array([1.0, -2.0, 3.0, 0.3, -0.4, 2.5])


def _central_partials(fn, eta, step=1e-6):
  out = []
  for k in range(eta.size):
    e = np.zeros(eta.size)
    e[k] = step
    out.append((fn(eta + e) - fn(eta - e)) / (2.0 * step))
  return np.array(out)


def test_wrap_angle_keeps_pi_and_maps_minus_pi():
  assert wrap_angle(math.pi) == pytest.approx(math.pi)
  assert wrap_angle(-math.pi) == pytest.approx(math.pi)
  assert wrap_angle(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)
  np.testing.assert_allclose(wrap_angle([0.1, 7.0]), [0.1, 7.0 - 2.0 * math.pi])


def test_pose_wraps_attitude_and_checks_sizes():
  pose = Pose.from_vector([1.0, 2.0, 4.0])
  assert pose.dof is Dof.PLANAR3
  assert pose.attitude[0] == pytest.approx(4.0 - 2.0 * math.pi)
  with pytest.raises(ValidationError):
    Pose(dof=Dof.FULL6, position=[0.0, 0.0], attitude=[0.0])
  with pytest.raises(ValueError):
    Pose.from_vector([1.0, 2.0, 3.0, 4.0])


def test_pose_flags_pitch_singularity():
  assert Pose.from_vector([0, 0, 0, 0, math.pi / 2, 0]).is_singular
  assert not Pose.from_vector([0, 0, 0, 0, 1.0, 0]).is_singular
  assert not Pose.from_vector([0, 0, 1.0]).is_singular


def test_body_velocity_round_trips_vector():
  nu = BodyVelocity.from_vector([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
  assert nu.dof is Dof.FULL6
  np.testing.assert_array_equal(nu.vector, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])


def test_skew_matches_cross_product(rng):
  a, b = rng.normal(size=3), rng.normal(size=3)
  np.testing.assert_allclose(skew(a) @ b, np.cross(a, b))
  np.testing.assert_allclose(skew(a), -skew(a).T)


def test_rotation_is_orthonormal():
  rot = rotation_zyx(0.3, -0.4, 2.5)
  np.testing.assert_allclose(rot @ rot.T, np.eye(3), atol=1e-14)
  assert np.linalg.det(rot) == pytest.approx(1.0)


def test_planar_map_at_quarter_turn():
  expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
  np.testing.assert_allclose(kinematic_map([0.0, 0.0, math.pi / 2]), expected, atol=1e-15)
  rate = pose_rate([0.0, 0.0, math.pi / 2], [1.0, 0.0, 0.2])
  np.testing.assert_allclose(rate, [0.0, 1.0, 0.2], atol=1e-15)


def test_inverse_maps_are_exact():
  jac = kinematic_map(SPATIAL_POSE)
  np.testing.assert_allclose(jac @ kinematic_map_inverse(SPATIAL_POSE), np.eye(6), atol=1e-13)
  t = euler_rate_map(0.3, -0.4)
  np.testing.assert_allclose(t @ euler_rate_map_inverse(0.3, -0.4), np.eye(3), atol=1e-14)


def test_singular_pitch_raises():
  with pytest.raises(SingularAttitude):
    kinematic_map([0.0, 0.0, 0.0, 0.0, math.pi / 2, 0.0])
  with pytest.raises(SingularAttitude):
    kinematic_map_partials([0.0, 0.0, 0.0, 0.1, -math.pi / 2 + 1e-4, 0.0])


@pytest.mark.parametrize('eta', [np.array([1.0, 2.0, 0.7]), SPATIAL_POSE])
def test_partials_match_central_differences(eta):
  np.testing.assert_allclose(
    kinematic_map_partials(eta), _central_partials(kinematic_map, eta), atol=1e-8
  )
  np.testing.assert_allclose(
    kinematic_map_inverse_partials(eta),
    _central_partials(kinematic_map_inverse, eta),
    atol=1e-8,
  )


def test_map_derivatives_follow_the_pose_rate(rng):
  eta_dot = rng.normal(size=6)
  step = 1e-6
  j_dot = kinematic_map(SPATIAL_POSE + step * eta_dot) - kinematic_map(
    SPATIAL_POSE - step * eta_dot
  )
  np.testing.assert_allclose(
    kinematic_map_derivative(SPATIAL_POSE, eta_dot), j_dot / (2.0 * step), atol=1e-7
  )
  inv_dot = kinematic_map_inverse(SPATIAL_POSE + step * eta_dot) - kinematic_map_inverse(
    SPATIAL_POSE - step * eta_dot
  )
  np.testing.assert_allclose(
    kinematic_map_inverse_derivative(SPATIAL_POSE, eta_dot), inv_dot / (2.0 * step), atol=1e-7
  )


def test_pose_difference_wraps_heading_only():
  diff = pose_difference([10.0, 0.0, 3.1], [0.0, 0.0, -3.1])
  assert diff[0] == pytest.approx(10.0)
  assert diff[2] == pytest.approx(6.2 - 2.0 * math.pi)
  np.testing.assert_allclose(wrap_pose([7.0, 7.0, 7.0]), [7.0, 7.0, 7.0 - 2.0 * math.pi])
