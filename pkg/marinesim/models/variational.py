"""Variational samples, structured variational matrices and verification reports."""

from typing import Optional

import pandas as pd
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from marinesim.models.arrays import Matrix, Series, Vector, is_skew, is_symmetric


class VariationalSample(BaseModel):
  """Nominal state, tangent and differential storage at one instant."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  t: float
  x: Vector
  delta_x: Vector
  W: float
  W_dot: float
  delta_u: Vector
  delta_y: Vector

  @model_validator(mode='after')
  def _check(self) -> 'VariationalSample':
    if self.W < -1e-12 * max(1.0, abs(self.W)):
      raise ValueError('differential storage W must be nonnegative')
    if self.x.shape != self.delta_x.shape:
      raise ValueError('x and delta_x dimensions disagree')
    if self.delta_u.shape != self.delta_y.shape:
      raise ValueError('delta_u and delta_y dimensions disagree')
    return self


def samples_frame(samples: list[VariationalSample]) -> pd.DataFrame:
  """W, W_dot and the passivity gap W_dot - delta_u^T delta_y per sample."""
  return pd.DataFrame(
    {
      'W': [s.W for s in samples],
      'W_dot': [s.W_dot for s in samples],
      'gap': [s.W_dot - float(s.delta_u @ s.delta_y) for s in samples],
    }
  )


class StructuredVariational(BaseModel):
  """Matrices of d/dt dx~ = (Xi - Upsilon) Pi dx~ + Psi du."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  Xi: Matrix
  Upsilon: Matrix
  Pi_full: Matrix
  Psi: Matrix

  @model_validator(mode='after')
  def _check(self) -> 'StructuredVariational':
    size = self.Pi_full.shape[0]
    for name in ('Xi', 'Upsilon', 'Pi_full'):
      if getattr(self, name).shape != (size, size):
        raise ValueError(f'{name} must be {size}x{size}')
    if self.Psi.shape[0] != size:
      raise ValueError(f'Psi must have {size} rows')
    if not is_skew(self.Xi):
      raise ValueError('Xi must be skew-symmetric')
    if not is_symmetric(self.Upsilon):
      raise ValueError('Upsilon must be symmetric')
    if not is_symmetric(self.Pi_full):
      raise ValueError('Pi must be symmetric')
    if float(scipy.linalg.eigh(self.Pi_full, eigvals_only=True)[0]) <= 0.0:
      raise ValueError('Pi must be positive definite')
    return self


class InequalityCheck(BaseModel):
  """Outcome of Pi_dot - 2 Pi Upsilon Pi <= -alpha Pi."""

  model_config = ConfigDict(frozen=True)

  holds: bool
  margin: float


class PassivityReport(BaseModel):
  """Summary of W_dot <= delta_u^T delta_y along a variational run."""

  model_config = ConfigDict(frozen=True)

  samples: int = Field(ge=1)
  violations: int = Field(ge=0)
  max_gap: float
  max_abs_gap: float
  max_storage: float
  fitted_decay: Optional[float] = None

  @computed_field
  @property
  def relative_gap(self) -> float:
    """max |W_dot - delta_u^T delta_y| over max W."""
    if self.max_storage == 0.0:
      return 0.0
    return self.max_abs_gap / self.max_storage

  def is_lossless(self, rel_tol: float = 1e-5) -> bool:
    return self.relative_gap <= rel_tol


class ContractionReport(BaseModel):
  """Distance between two virtual copies in the differential storage metric."""

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  times: Series
  distance: Series
  fitted_rate: Optional[float] = None

  def to_frame(self) -> pd.DataFrame:
    return pd.DataFrame({'t': self.times, 'distance': self.distance})
