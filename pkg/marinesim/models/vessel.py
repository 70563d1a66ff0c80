"""Craft parameters and phase-space states."""

from functools import cached_property
from typing import Callable, Literal, Optional, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from marinesim.models.arrays import Matrix, Vector, is_symmetric
from marinesim.models.geometry import Dof, Pose


class NoRestoring(BaseModel):
  """No gravity or buoyancy work: g(eta) = 0, P(eta) = 0."""

  model_config = ConfigDict(frozen=True)

  kind: Literal['none'] = 'none'


class HydrostaticRestoring(BaseModel):
  """Weight and buoyancy acting at the centers of gravity and buoyancy.

  P(eta) = (B - W) z + e3^T R(Theta) (B r_bb - W r_gb), so that J^T dP/d eta is the
  usual hydrostatic restoring vector g(eta). The center of gravity r_gb is the
  craft's own ``VesselParams.r_gb``.
  """

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  kind: Literal['hydrostatic'] = 'hydrostatic'
  weight: float = Field(ge=0.0)
  buoyancy: float = Field(ge=0.0)
  r_bb: Vector = Field(default_factory=lambda: np.zeros(3))

  @field_validator('r_bb')
  @classmethod
  def _three_vector(cls, v: np.ndarray) -> np.ndarray:
    if v.shape != (3,):
      raise ValueError('r_bb needs 3 entries')
    return v


class CustomRestoring(BaseModel):
  """User-supplied potential P(eta) and its gradient dP/d eta."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  kind: Literal['custom'] = 'custom'
  potential: Callable[[np.ndarray], float]
  gradient: Callable[[np.ndarray], np.ndarray]


Restoring = Union[NoRestoring, HydrostaticRestoring, CustomRestoring]


class VesselParams(BaseModel):
  """One craft: inertia, damping model and restoring model.

  Damping is diagonal, D(nu)[i, i] = d_lin[i] + sum_j d_quad[i, j] |nu_j|.
  """

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  name: str = 'vessel'
  dof: Dof
  mass_matrix: Matrix
  damping_linear: Vector
  damping_quadratic: Optional[Matrix] = None
  restoring: Restoring = Field(default_factory=NoRestoring, discriminator='kind')
  # Center of gravity in the body frame; lever arm of the weight.
  r_gb: Vector = Field(default_factory=lambda: np.zeros(3))

  @model_validator(mode='after')
  def _check_invariants(self) -> 'VesselParams':
    n = self.dof.n
    if self.mass_matrix.shape != (n, n):
      raise ValueError(f'mass matrix M must be {n}x{n} for {self.dof.value}')
    if not is_symmetric(self.mass_matrix):
      raise ValueError('mass matrix M must be symmetric')
    lowest = float(scipy.linalg.eigh(self.mass_matrix, eigvals_only=True)[0])
    if lowest <= 0.0:
      raise ValueError(f'mass matrix M must be positive definite (min eigenvalue {lowest:.9g})')
    if self.damping_linear.shape != (n,):
      raise ValueError(f'damping_linear needs {n} entries')
    if self.damping_quadratic is not None and self.damping_quadratic.shape != (n, n):
      raise ValueError(f'damping_quadratic must be {n}x{n}')
    if np.any(self.damping_linear < 0.0) or np.any(self.d_quad < 0.0):
      raise ValueError('damping D(nu) must be positive semidefinite (negative coefficient)')
    if self.dof is Dof.PLANAR3 and not isinstance(self.restoring, NoRestoring):
      raise ValueError('planar3 craft carry no restoring forces')
    if self.r_gb.shape != (3,):
      raise ValueError('r_gb needs 3 entries')
    return self

  @property
  def n(self) -> int:
    return self.dof.n

  @property
  def d_quad(self) -> np.ndarray:
    if self.damping_quadratic is None:
      return np.zeros((self.n, self.n))
    return self.damping_quadratic

  @cached_property
  def mass_inverse(self) -> np.ndarray:
    inverse = np.linalg.inv(self.mass_matrix)
    return 0.5 * (inverse + inverse.T)

  @cached_property
  def mass_eigenvalues(self) -> np.ndarray:
    return scipy.linalg.eigh(self.mass_matrix, eigvals_only=True)

  @computed_field
  @property
  def d_min(self) -> float:
    """Lower bound on the eigenvalues of D(nu) over all nu."""
    return float(np.min(self.damping_linear))

  @property
  def mass_norm(self) -> float:
    """Spectral norm of M."""
    return float(self.mass_eigenvalues[-1])


def _as_pose(value) -> Pose:
  if isinstance(value, Pose):
    return value
  return Pose.from_vector(value)


class BodyState(BaseModel):
  """Body-frame phase-space point (eta, p_b) with p_b = M nu."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  eta: Pose
  p_b: Vector

  @field_validator('eta', mode='before')
  @classmethod
  def _pose(cls, v) -> Pose:
    return _as_pose(v)

  @model_validator(mode='after')
  def _check_sizes(self) -> 'BodyState':
    if self.p_b.size != self.eta.dof.n:
      raise ValueError('momentum and pose dimensions disagree')
    return self

  @classmethod
  def from_vector(cls, z) -> 'BodyState':
    z = np.asarray(z, dtype=float)
    n = z.size // 2
    return cls(eta=z[:n], p_b=z[n:])

  @property
  def vector(self) -> np.ndarray:
    return np.concatenate([self.eta.vector, self.p_b])


class InertialState(BaseModel):
  """Inertial-frame phase-space point (eta, p) with p = J^-T(eta) p_b."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  eta: Pose
  p: Vector

  @field_validator('eta', mode='before')
  @classmethod
  def _pose(cls, v) -> Pose:
    return _as_pose(v)

  @model_validator(mode='after')
  def _check_state(self) -> 'InertialState':
    if self.p.size != self.eta.dof.n:
      raise ValueError('momentum and pose dimensions disagree')
    if self.eta.is_singular:
      raise ValueError('inertial states need a nonsingular attitude')
    return self

  @classmethod
  def from_vector(cls, z) -> 'InertialState':
    z = np.asarray(z, dtype=float)
    n = z.size // 2
    return cls(eta=z[:n], p=z[n:])

  @property
  def vector(self) -> np.ndarray:
    return np.concatenate([self.eta.vector, self.p])


class InertialMatrices(BaseModel):
  """Inertial-frame matrices evaluated at one phase-space point."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  m_eta: Matrix
  m_eta_inv: Matrix
  d_h: Matrix
  s_h: Matrix
  m_eta_dot: Matrix
  e_eta: Matrix
  g_eta: Vector
