"""Pose and body-velocity types for planar (3-DOF) and spatial (6-DOF) craft."""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from marinesim.models.arrays import Vector

# Band around theta = +-pi/2 in which J(eta) is treated as singular.
THETA_GUARD = 1e-3


class Dof(Enum):
  """Supported degrees of freedom."""

  PLANAR3 = 'planar3'
  FULL6 = 'full6'

  @property
  def n(self) -> int:
    return 3 if self is Dof.PLANAR3 else 6

  @classmethod
  def from_size(cls, n: int) -> 'Dof':
    """Infer the DOF tag from a vector length."""
    if n == 3:
      return cls.PLANAR3
    if n == 6:
      return cls.FULL6
    raise ValueError(f'vector length {n} matches neither planar3 (3) nor full6 (6)')


def wrap_angle(angle):
  """Wrap angles to (-pi, pi]."""
  return math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2.0 * math.pi)


class Pose(BaseModel):
  """Craft position (NED, meters) and Euler attitude (ZYX, radians)."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  dof: Dof
  position: Vector
  attitude: Vector

  @field_validator('attitude')
  @classmethod
  def _wrap(cls, v: np.ndarray) -> np.ndarray:
    wrapped = np.atleast_1d(wrap_angle(v))
    wrapped.flags.writeable = False
    return wrapped

  @model_validator(mode='after')
  def _check_sizes(self) -> 'Pose':
    expected = (2, 1) if self.dof is Dof.PLANAR3 else (3, 3)
    if (self.position.size, self.attitude.size) != expected:
      raise ValueError(
        f'{self.dof.value} pose needs {expected[0]} position and {expected[1]} attitude entries'
      )
    return self

  @classmethod
  def from_vector(cls, eta) -> 'Pose':
    """Build a pose from ``[x, y, psi]`` or ``[x, y, z, phi, theta, psi]``."""
    eta = np.asarray(eta, dtype=float)
    dof = Dof.from_size(eta.size)
    split = 2 if dof is Dof.PLANAR3 else 3
    return cls(dof=dof, position=eta[:split], attitude=eta[split:])

  @property
  def vector(self) -> np.ndarray:
    return np.concatenate([self.position, self.attitude])

  @property
  def is_singular(self) -> bool:
    """True when pitch lies inside the guard band around +-pi/2."""
    if self.dof is Dof.PLANAR3:
      return False
    return abs(abs(float(self.attitude[1])) - math.pi / 2.0) < THETA_GUARD


class BodyVelocity(BaseModel):
  """Body-fixed quasi-velocity nu = (nu_1, nu_2)."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  linear: Vector
  angular: Vector

  @model_validator(mode='after')
  def _check_sizes(self) -> 'BodyVelocity':
    if (self.linear.size, self.angular.size) not in ((2, 1), (3, 3)):
      raise ValueError('body velocity must be (u, v | r) or (u, v, w | p, q, r)')
    return self

  @classmethod
  def from_vector(cls, nu) -> 'BodyVelocity':
    nu = np.asarray(nu, dtype=float)
    split = 2 if Dof.from_size(nu.size) is Dof.PLANAR3 else 3
    return cls(linear=nu[:split], angular=nu[split:])

  @property
  def vector(self) -> np.ndarray:
    return np.concatenate([self.linear, self.angular])

  @property
  def dof(self) -> Dof:
    return Dof.from_size(self.linear.size + self.angular.size)
