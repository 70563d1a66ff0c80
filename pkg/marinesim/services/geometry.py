"""Euler-angle kinematics and the body-to-NED frame map J(eta).

Attitude uses the ZYX (roll-pitch-yaw) convention: R = Rz(psi) Ry(theta) Rx(phi).
"""

import math

import numpy as np

from marinesim.errors import SingularAttitude
from marinesim.models.geometry import THETA_GUARD, BodyVelocity, Dof, Pose, wrap_angle

_E1, _E2, _E3 = np.eye(3)


def as_vector(value) -> np.ndarray:
  """Return a float vector from a Pose, BodyVelocity or array-like."""
  if isinstance(value, (Pose, BodyVelocity)):
    return value.vector
  return np.asarray(value, dtype=float)


def skew(a) -> np.ndarray:
  """Cross-product matrix S(a), so that ``skew(a) @ b == np.cross(a, b)``."""
  a = np.asarray(a, dtype=float)
  if a.shape != (3,):
    raise ValueError(f'skew expects 3 entries, got shape {a.shape}')
  return np.array(
    [
      [0.0, -a[2], a[1]],
      [a[2], 0.0, -a[0]],
      [-a[1], a[0], 0.0],
    ]
  )


def _rx(phi: float) -> np.ndarray:
  c, s = math.cos(phi), math.sin(phi)
  return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _ry(theta: float) -> np.ndarray:
  c, s = math.cos(theta), math.sin(theta)
  return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rz(psi: float) -> np.ndarray:
  c, s = math.cos(psi), math.sin(psi)
  return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_zyx(phi: float, theta: float, psi: float) -> np.ndarray:
  """Body-to-NED rotation matrix."""
  return _rz(psi) @ _ry(theta) @ _rx(phi)


def check_attitude(theta: float) -> None:
  """Raise SingularAttitude when pitch lies in the guard band around +-pi/2."""
  theta = float(wrap_angle(theta))
  if abs(abs(theta) - math.pi / 2.0) < THETA_GUARD:
    raise SingularAttitude(theta, THETA_GUARD)


def euler_rate_map(phi: float, theta: float) -> np.ndarray:
  """T(phi, theta) mapping body angular rates to Euler-angle rates."""
  check_attitude(theta)
  sp, cp = math.sin(phi), math.cos(phi)
  ct, tt = math.cos(theta), math.tan(theta)
  return np.array(
    [
      [1.0, sp * tt, cp * tt],
      [0.0, cp, -sp],
      [0.0, sp / ct, cp / ct],
    ]
  )


def euler_rate_map_inverse(phi: float, theta: float) -> np.ndarray:
  """Closed-form inverse of ``euler_rate_map``."""
  check_attitude(theta)
  sp, cp = math.sin(phi), math.cos(phi)
  st, ct = math.sin(theta), math.cos(theta)
  return np.array(
    [
      [1.0, 0.0, -st],
      [0.0, cp, ct * sp],
      [0.0, -sp, ct * cp],
    ]
  )


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
  n, m = a.shape[0], b.shape[0]
  out = np.zeros((n + m, n + m))
  out[:n, :n] = a
  out[n:, n:] = b
  return out


def kinematic_map(eta) -> np.ndarray:
  """J(eta) with ``eta_dot = J(eta) nu``.

  Args:
    eta: Pose or pose vector of length 3 (x, y, psi) or 6 (x, y, z, phi, theta, psi).

  Returns:
    The n x n frame map. Planar craft get the yaw rotation; spatial craft get
    blkdiag(R(Theta), T(Theta)).

  Raises:
    SingularAttitude: pitch is within the guard band of +-pi/2.
  """
  eta = as_vector(eta)
  if Dof.from_size(eta.size) is Dof.PLANAR3:
    return _rz(eta[2])
  phi, theta, psi = eta[3:]
  return _block_diag(rotation_zyx(phi, theta, psi), euler_rate_map(phi, theta))


def kinematic_map_inverse(eta) -> np.ndarray:
  """J(eta)^-1 in closed form."""
  eta = as_vector(eta)
  if Dof.from_size(eta.size) is Dof.PLANAR3:
    return _rz(eta[2]).T
  phi, theta, psi = eta[3:]
  return _block_diag(rotation_zyx(phi, theta, psi).T, euler_rate_map_inverse(phi, theta))


def _rotation_partials(phi: float, theta: float, psi: float) -> list[np.ndarray]:
  rx, ry, rz = _rx(phi), _ry(theta), _rz(psi)
  return [
    rz @ ry @ rx @ skew(_E1),
    rz @ skew(_E2) @ ry @ rx,
    skew(_E3) @ rz @ ry @ rx,
  ]


def _euler_rate_partials(phi: float, theta: float) -> list[np.ndarray]:
  sp, cp = math.sin(phi), math.cos(phi)
  st, ct, tt = math.sin(theta), math.cos(theta), math.tan(theta)
  c2 = ct * ct
  d_phi = np.array(
    [
      [0.0, cp * tt, -sp * tt],
      [0.0, -sp, -cp],
      [0.0, cp / ct, -sp / ct],
    ]
  )
  d_theta = np.array(
    [
      [0.0, sp / c2, cp / c2],
      [0.0, 0.0, 0.0],
      [0.0, sp * st / c2, cp * st / c2],
    ]
  )
  return [d_phi, d_theta, np.zeros((3, 3))]


def _euler_rate_inverse_partials(phi: float, theta: float) -> list[np.ndarray]:
  sp, cp = math.sin(phi), math.cos(phi)
  st, ct = math.sin(theta), math.cos(theta)
  d_phi = np.array(
    [
      [0.0, 0.0, 0.0],
      [0.0, -sp, ct * cp],
      [0.0, -cp, -ct * sp],
    ]
  )
  d_theta = np.array(
    [
      [0.0, 0.0, -ct],
      [0.0, 0.0, -st * sp],
      [0.0, 0.0, -st * cp],
    ]
  )
  return [d_phi, d_theta, np.zeros((3, 3))]


def _planar_yaw_partial(psi: float) -> np.ndarray:
  c, s = math.cos(psi), math.sin(psi)
  return np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def kinematic_map_partials(eta) -> np.ndarray:
  """Stack of dJ/d eta_k, shape (n, n, n) indexed by k first."""
  eta = as_vector(eta)
  n = eta.size
  partials = np.zeros((n, n, n))
  if Dof.from_size(n) is Dof.PLANAR3:
    partials[2] = _planar_yaw_partial(eta[2])
    return partials
  phi, theta, psi = eta[3:]
  check_attitude(theta)
  for k, (d_rot, d_rate) in enumerate(
    zip(_rotation_partials(phi, theta, psi), _euler_rate_partials(phi, theta))
  ):
    partials[3 + k] = _block_diag(d_rot, d_rate)
  return partials


def kinematic_map_inverse_partials(eta) -> np.ndarray:
  """Stack of dJ^-1/d eta_k, shape (n, n, n) indexed by k first."""
  eta = as_vector(eta)
  n = eta.size
  partials = np.zeros((n, n, n))
  if Dof.from_size(n) is Dof.PLANAR3:
    partials[2] = _planar_yaw_partial(eta[2]).T
    return partials
  phi, theta, psi = eta[3:]
  check_attitude(theta)
  for k, (d_rot, d_rate) in enumerate(
    zip(_rotation_partials(phi, theta, psi), _euler_rate_inverse_partials(phi, theta))
  ):
    partials[3 + k] = _block_diag(d_rot.T, d_rate)
  return partials


def kinematic_map_derivative(eta, eta_dot) -> np.ndarray:
  """J_dot = sum_k dJ/d eta_k * eta_dot_k."""
  eta, eta_dot = as_vector(eta), as_vector(eta_dot)
  if eta.size == 3:
    return eta_dot[2] * _planar_yaw_partial(eta[2])
  return np.einsum('kij,k->ij', kinematic_map_partials(eta), eta_dot)


def kinematic_map_inverse_derivative(eta, eta_dot) -> np.ndarray:
  """Time derivative of J^-1 along eta_dot."""
  eta, eta_dot = as_vector(eta), as_vector(eta_dot)
  if eta.size == 3:
    return eta_dot[2] * _planar_yaw_partial(eta[2]).T
  return np.einsum('kij,k->ij', kinematic_map_inverse_partials(eta), eta_dot)


def pose_rate(eta, nu) -> np.ndarray:
  """eta_dot = J(eta) nu."""
  return kinematic_map(eta) @ as_vector(nu)


def pose_difference(eta_a, eta_b) -> np.ndarray:
  """eta_a - eta_b with attitude components wrapped to (-pi, pi]."""
  diff = as_vector(eta_a) - as_vector(eta_b)
  split = 2 if Dof.from_size(diff.size) is Dof.PLANAR3 else 3
  diff[split:] = wrap_angle(diff[split:])
  return diff


def wrap_pose(eta) -> np.ndarray:
  """Copy of eta with attitude components wrapped to (-pi, pi]."""
  eta = np.array(as_vector(eta), dtype=float)
  split = 2 if Dof.from_size(eta.size) is Dof.PLANAR3 else 3
  eta[split:] = wrap_angle(eta[split:])
  return eta
