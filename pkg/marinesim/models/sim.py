"""Simulation settings and trajectory logs."""

import math
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from marinesim.models.arrays import Series
from marinesim.models.control import Frame

# All numeric output carries 9 significant digits.
FLOAT_FORMAT = '%.9g'


class Integrator(Enum):
  """Fixed-step integration schemes."""

  RK4 = 'rk4'
  EULER = 'euler'


class SimConfig(BaseModel):
  """Fixed-step integration settings."""

  model_config = ConfigDict(frozen=True)

  h: float = Field(default=1e-3, gt=0.0, le=0.1)
  t_end: float = Field(gt=0.0)
  integrator: Integrator = Integrator.RK4
  record_every: int = Field(default=1, ge=1)

  @property
  def steps(self) -> int:
    """Number of steps; the final time is ``steps * h``."""
    return max(1, int(math.ceil(self.t_end / self.h - 1e-9)))


class TrajectoryLog(BaseModel):
  """Time-indexed record of one simulated trajectory.

  Row k holds the state (eta, momentum) at ``times[k]``, the body velocity nu, the
  body-frame input tau, the Hamiltonian H, the error norms and the storage V.
  Open-loop runs carry NaN error columns.
  """

  model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

  frame: Frame = Frame.BODY
  times: Series
  eta: Series
  momentum: Series
  nu: Series
  tau: Series
  H: Series
  err_eta: Series
  err_sigma: Series
  V: Series

  @model_validator(mode='after')
  def _check_series(self) -> 'TrajectoryLog':
    k = self.times.shape[0]
    for name in ('eta', 'momentum', 'nu', 'tau', 'H', 'err_eta', 'err_sigma', 'V'):
      if getattr(self, name).shape[0] != k:
        raise ValueError(f'series {name} has {getattr(self, name).shape[0]} rows, expected {k}')
    if k > 1 and np.any(np.diff(self.times) <= 0.0):
      raise ValueError('times must be strictly increasing')
    return self

  def __len__(self) -> int:
    return int(self.times.shape[0])

  @property
  def n(self) -> int:
    return int(self.eta.shape[1])

  @property
  def states(self) -> np.ndarray:
    """Stacked (eta, momentum) rows."""
    return np.hstack([self.eta, self.momentum])

  def to_frame(self) -> pd.DataFrame:
    """Tabular view with the stable CSV column order."""
    columns: dict[str, np.ndarray] = {'t': self.times}
    for prefix, block in (('eta', self.eta), ('nu', self.nu), ('tau', self.tau)):
      for i in range(self.n):
        columns[f'{prefix}_{i + 1}'] = block[:, i]
    columns.update(H=self.H, err_eta=self.err_eta, err_sigma=self.err_sigma, V=self.V)
    return pd.DataFrame(columns)

  def to_csv(self, path: Path, extra: Optional[pd.DataFrame] = None) -> Path:
    """Write the log, with optional extra columns appended, at 9 significant digits."""
    frame = self.to_frame()
    if extra is not None:
      frame = pd.concat([frame, extra.reset_index(drop=True)], axis=1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='nan')
    return path
