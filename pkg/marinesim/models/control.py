"""Controller gains and error coordinates."""

from enum import Enum
from functools import cached_property

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, model_validator

from marinesim.models.arrays import Matrix, Vector, is_symmetric

# Eigenvalues above -PSD_TOL * scale count as nonnegative.
PSD_TOL = 1e-12


class Frame(Enum):
  """Coordinate frame a model or controller is written in."""

  BODY = 'body'
  INERTIAL = 'inertial'


def _min_eig(a: np.ndarray) -> float:
  return float(scipy.linalg.eigh(0.5 * (a + a.T), eigvals_only=True)[0])


class ControllerGains(BaseModel):
  """Gains of the tracking controller.

  Attributes:
    Lambda: Slope of phi(eta~) = Lambda eta~.
    Pi: Constant position metric.
    Kd: Damping injection.
  """

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  Lambda: Matrix
  Pi: Matrix
  Kd: Matrix

  @model_validator(mode='after')
  def _check_invariants(self) -> 'ControllerGains':
    n = self.Pi.shape[0]
    for name in ('Lambda', 'Pi', 'Kd'):
      value = getattr(self, name)
      if value.shape != (n, n):
        raise ValueError(f'{name} must be {n}x{n} like Pi')
      if not is_symmetric(value):
        raise ValueError(f'{name} must be symmetric')
    if _min_eig(self.Pi) <= 0.0:
      raise ValueError('Pi must be positive definite')
    for name in ('Lambda', 'Kd'):
      value = getattr(self, name)
      if _min_eig(value) < -PSD_TOL * max(1.0, float(np.max(np.abs(value)))):
        raise ValueError(f'{name} must be positive semidefinite')
    if not is_symmetric(self.Lambda @ np.linalg.inv(self.Pi), rtol=1e-9):
      raise ValueError('Lambda Pi^-1 must be symmetric (Lambda and Pi must commute)')
    return self

  @property
  def n(self) -> int:
    return self.Pi.shape[0]

  @cached_property
  def Pi_inv(self) -> np.ndarray:
    inverse = np.linalg.inv(self.Pi)
    return 0.5 * (inverse + inverse.T)

  @property
  def is_strict(self) -> bool:
    """True when Lambda and Kd are positive definite, so the loop contracts."""
    return _min_eig(self.Lambda) > 0.0 and _min_eig(self.Kd) > 0.0


class ErrorState(BaseModel):
  """Error coordinates (eta~, sigma) = (eta_v - eta_d, p_v - p_r)."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  eta_tilde: Vector
  sigma: Vector

  @model_validator(mode='after')
  def _check(self) -> 'ErrorState':
    if self.eta_tilde.shape != self.sigma.shape:
      raise ValueError('eta_tilde and sigma dimensions disagree')
    if not (np.all(np.isfinite(self.eta_tilde)) and np.all(np.isfinite(self.sigma))):
      raise ValueError('error coordinates must be finite')
    return self

  @property
  def vector(self) -> np.ndarray:
    return np.concatenate([self.eta_tilde, self.sigma])
