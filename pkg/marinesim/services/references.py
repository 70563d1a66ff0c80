"""Reference construction and load-time sanity checks."""

import logging

import numpy as np

from marinesim.errors import ConfigError, SingularAttitude
from marinesim.models.geometry import Dof
from marinesim.models.reference import (
  CircleReference,
  ConstantReference,
  LawnmowerReference,
  ReferenceTrajectory,
  RestToRestReference,
)
from marinesim.services.geometry import check_attitude, pose_difference

logger = logging.getLogger(__name__)

REFERENCE_KINDS = {
  'constant': ConstantReference,
  'rest_to_rest': RestToRestReference,
  'circle': CircleReference,
  'lawnmower': LawnmowerReference,
}

# Central-difference step and tolerance for the derivative check.
FD_STEP = 1e-5
FD_TOL = 1e-5


def build_reference(kind: str, dof: Dof, **params) -> ReferenceTrajectory:
  """Instantiate a named reference from the library."""
  try:
    cls = REFERENCE_KINDS[kind]
  except KeyError:
    raise ConfigError(
      f'unknown reference {kind!r}; choose one of {", ".join(sorted(REFERENCE_KINDS))}'
    ) from None
  return cls(dof=dof, **params)


def validate_reference(ref: ReferenceTrajectory, t_end: float, samples: int = 200) -> None:
  """Check analytic derivatives against central differences and the attitude band.

  Raises:
    ConfigError: a derivative disagrees with its finite difference or the reference
      enters the pitch singularity band.
  """
  h = FD_STEP
  for t in np.linspace(h, t_end, samples):
    eta, eta_dot, eta_ddot = ref.evaluate(t)
    if eta.size == 6:
      try:
        check_attitude(eta[4])
      except SingularAttitude as e:
        raise ConfigError(f'reference at t={t:.9g}: {e}') from e
    before, after = ref.evaluate(t - h), ref.evaluate(t + h)
    fd_rate = pose_difference(after[0], before[0]) / (2.0 * h)
    fd_accel = (after[1] - before[1]) / (2.0 * h)
    checks = (('eta_d_dot', eta_dot, fd_rate), ('eta_d_ddot', eta_ddot, fd_accel))
    for label, analytic, numeric in checks:
      scale = max(1.0, float(np.max(np.abs(analytic))))
      gap = float(np.max(np.abs(analytic - numeric)))
      if gap > FD_TOL * scale:
        raise ConfigError(
          f'reference {label} disagrees with its finite difference at t={t:.9g} (gap {gap:.3g})'
        )
  logger.debug('Reference %s validated on [0, %.9g]', type(ref).__name__, t_end)
