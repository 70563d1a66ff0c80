"""Exception hierarchy for marinesim."""

from typing import Any


class MarineSimError(Exception):
  """Base class for every error raised by marinesim."""


class SingularAttitude(MarineSimError, ValueError):
  """Pitch is inside the guard band around +-pi/2 where J(eta) is undefined."""

  def __init__(self, theta: float, guard: float):
    super().__init__(
      f'pitch {theta:.9g} rad lies within {guard:.3g} rad of the Euler-angle singularity'
    )
    self.theta = theta
    self.guard = guard


class NonFiniteState(MarineSimError):
  """An integrator stage produced NaN or inf.

  When raised from a simulation, ``log`` holds the trajectory recorded up to the last
  finite step.
  """

  def __init__(self, message: str, t: float, log: Any = None):
    super().__init__(message)
    self.t = t
    self.log = log


class DivergedPerturbation(MarineSimError):
  """The finite-difference tangent grew beyond the admissible bound."""


class EmptySampleSet(MarineSimError, ValueError):
  """An estimator was handed no samples."""


class ConfigError(MarineSimError, ValueError):
  """Scenario file is missing, malformed, or inconsistent."""


class GainError(MarineSimError, ValueError):
  """Controller gains do not certify a positive convergence rate."""


class InvariantViolation(MarineSimError):
  """A verification check failed."""
