"""Experiment outcomes and the summary report lines built from them."""

import math
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field


class Experiment(Enum):
  """Experiments a scenario may list."""

  TRACK_BODY = 'track_body'
  TRACK_INERTIAL = 'track_inertial'
  CONTRACTION = 'contraction'
  PASSIVITY = 'passivity'
  EQUIVALENCE = 'equivalence'
  RATES = 'rates'
  INVARIANTS = 'invariants'


class Comparison(Enum):
  """How a measured value is held against its threshold."""

  LE = 'le'
  GE = 'ge'


class CheckResult(BaseModel):
  """One measured invariant with its threshold."""

  model_config = ConfigDict(frozen=True)

  name: str
  value: float
  threshold: float
  comparison: Comparison = Comparison.LE
  # Restricted setting the check runs on, when not the scenario itself.
  scope: Optional[str] = None

  @computed_field
  @property
  def passed(self) -> bool:
    if math.isnan(self.value):
      return False
    if self.comparison is Comparison.LE:
      return self.value <= self.threshold
    return self.value >= self.threshold

  @property
  def margin(self) -> float:
    """Signed distance to the threshold; positive when the check passes."""
    if self.comparison is Comparison.LE:
      return self.threshold - self.value
    return self.value - self.threshold

  def line(self, experiment: str) -> str:
    status = 'pass' if self.passed else 'fail'
    line = (
      f'{experiment}.{self.name}={self.value:.9g} threshold={self.threshold:.9g} '
      f'op={self.comparison.value} margin={self.margin:.9g} status={status}'
    )
    return line if self.scope is None else f'{line} scope={self.scope}'


class ExperimentResult(BaseModel):
  """Checks, key figures and written files of one experiment."""

  model_config = ConfigDict(frozen=True)

  experiment: Experiment
  checks: list[CheckResult] = Field(default_factory=list)
  metrics: dict[str, float] = Field(default_factory=dict)
  csv: Optional[Path] = None
  figures: list[Path] = Field(default_factory=list)

  @property
  def passed(self) -> bool:
    return all(check.passed for check in self.checks)

  @property
  def failures(self) -> list[CheckResult]:
    return [check for check in self.checks if not check.passed]

  def summary_lines(self) -> list[str]:
    name = self.experiment.value
    lines = [check.line(name) for check in self.checks]
    lines.extend(f'{name}.{key}={value:.9g}' for key, value in self.metrics.items())
    return lines
