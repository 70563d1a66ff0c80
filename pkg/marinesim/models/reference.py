"""Reference trajectories eta_d(t) with analytic first and second derivatives."""

import math
from abc import ABC, abstractmethod
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from marinesim.models.arrays import Vector
from marinesim.models.geometry import Dof, wrap_angle


class ReferenceSample(BaseModel):
  """eta_d, eta_d_dot and eta_d_ddot at one instant."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  t: float
  eta: Vector
  eta_dot: Vector
  eta_ddot: Vector


class ReferenceTrajectory(BaseModel, ABC):
  """Smooth desired pose over time.

  Planar paths (x, y, psi) are lifted to full6 at constant depth with zero roll and
  pitch. Evaluation is pure, so one reference can be shared across threads.
  """

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  dof: Dof = Dof.PLANAR3
  depth: float = 0.0

  @abstractmethod
  def planar(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, y, psi) with its first and second derivatives at time t."""

  def _lift(self, q: np.ndarray, rate: bool) -> np.ndarray:
    if self.dof is Dof.PLANAR3:
      return q
    z = 0.0 if rate else self.depth
    return np.array([q[0], q[1], z, 0.0, 0.0, q[2]])

  def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """eta_d, eta_d_dot and eta_d_ddot at time t."""
    q, q_dot, q_ddot = self.planar(float(t))
    q = q.copy()
    q[2] = float(wrap_angle(q[2]))
    return self._lift(q, False), self._lift(q_dot, True), self._lift(q_ddot, True)

  def eta_d(self, t: float) -> np.ndarray:
    return self.evaluate(t)[0]

  def eta_d_dot(self, t: float) -> np.ndarray:
    return self.evaluate(t)[1]

  def eta_d_ddot(self, t: float) -> np.ndarray:
    return self.evaluate(t)[2]

  def sample(self, t: float) -> ReferenceSample:
    eta, eta_dot, eta_ddot = self.evaluate(t)
    return ReferenceSample(t=t, eta=eta, eta_dot=eta_dot, eta_ddot=eta_ddot)


def _tangent_heading(
  vel: np.ndarray, acc: np.ndarray, jerk: np.ndarray
) -> tuple[float, float, float]:
  """Heading along a planar path and its first two derivatives."""
  speed_sq = float(vel @ vel)
  psi = math.atan2(vel[1], vel[0])
  cross = vel[0] * acc[1] - vel[1] * acc[0]
  cross_dot = vel[0] * jerk[1] - vel[1] * jerk[0]
  psi_dot = cross / speed_sq
  psi_ddot = cross_dot / speed_sq - 2.0 * cross * float(vel @ acc) / speed_sq**2
  return psi, psi_dot, psi_ddot


class ConstantReference(ReferenceTrajectory):
  """Station keeping at a fixed planar pose (x, y, psi)."""

  kind: Literal['constant'] = 'constant'
  pose: Vector = Field(default_factory=lambda: np.zeros(3))

  @model_validator(mode='after')
  def _check(self) -> 'ConstantReference':
    if self.pose.shape != (3,):
      raise ValueError('constant reference pose is (x, y, psi)')
    return self

  def planar(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.array(self.pose), np.zeros(3), np.zeros(3)


class RestToRestReference(ReferenceTrajectory):
  """Quintic blend from start to goal over duration, holding the goal afterwards."""

  kind: Literal['rest_to_rest'] = 'rest_to_rest'
  start: Vector
  goal: Vector
  duration: float = Field(gt=0.0)

  @model_validator(mode='after')
  def _check(self) -> 'RestToRestReference':
    if self.start.shape != (3,) or self.goal.shape != (3,):
      raise ValueError('rest-to-rest endpoints are (x, y, psi)')
    return self

  def planar(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    delta = self.goal - self.start
    delta[2] = float(wrap_angle(delta[2]))
    tau = min(max(t / self.duration, 0.0), 1.0)
    s = tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)
    if tau <= 0.0 or tau >= 1.0:
      s_dot = s_ddot = 0.0
    else:
      s_dot = 30.0 * tau**2 * (1.0 - tau) ** 2 / self.duration
      s_ddot = 60.0 * tau * (1.0 - 3.0 * tau + 2.0 * tau**2) / self.duration**2
    return self.start + s * delta, s_dot * delta, s_ddot * delta


class CircleReference(ReferenceTrajectory):
  """Constant-rate circle with the heading tangent to the path."""

  kind: Literal['circle'] = 'circle'
  center: Vector = Field(default_factory=lambda: np.zeros(2))
  radius: float = Field(gt=0.0)
  rate: float
  phase: float = 0.0

  @model_validator(mode='after')
  def _check(self) -> 'CircleReference':
    if self.center.shape != (2,):
      raise ValueError('circle center is (x, y)')
    if self.rate == 0.0:
      raise ValueError('circle rate must be nonzero')
    return self

  def planar(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    angle = self.rate * t + self.phase
    c, s = math.cos(angle), math.sin(angle)
    r, w = self.radius, self.rate
    psi = angle + math.copysign(math.pi / 2.0, w)
    pos = np.array([self.center[0] + r * c, self.center[1] + r * s, psi])
    vel = np.array([-r * w * s, r * w * c, w])
    acc = np.array([-r * w * w * c, -r * w * w * s, 0.0])
    return pos, vel, acc


class LawnmowerReference(ReferenceTrajectory):
  """Sinusoidal sweep y = A sin(2 pi x / L) traversed at constant surge speed in x."""

  kind: Literal['lawnmower'] = 'lawnmower'
  speed: float = Field(gt=0.0)
  amplitude: float = Field(ge=0.0)
  wavelength: float = Field(gt=0.0)
  origin: Vector = Field(default_factory=lambda: np.zeros(2))

  def planar(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = 2.0 * math.pi / self.wavelength
    u, a = self.speed, self.amplitude
    phase = k * u * t
    c, s = math.cos(phase), math.sin(phase)
    vel = np.array([u, a * k * u * c])
    acc = np.array([0.0, -a * (k * u) ** 2 * s])
    jerk = np.array([0.0, -a * (k * u) ** 3 * c])
    psi, psi_dot, psi_ddot = _tangent_heading(vel, acc, jerk)
    pos = np.array([self.origin[0] + u * t, self.origin[1] + a * s, psi])
    return pos, np.append(vel, psi_dot), np.append(acc, psi_ddot)


AnyReference = Union[ConstantReference, RestToRestReference, CircleReference, LawnmowerReference]
