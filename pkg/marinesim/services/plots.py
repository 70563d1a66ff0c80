"""Static SVG figures of tracking runs and verification experiments."""

import logging
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from marinesim.models.reference import ReferenceTrajectory
from marinesim.models.sim import TrajectoryLog
from marinesim.models.variational import ContractionReport

logger = logging.getLogger(__name__)

AXIS_LABELS = {
  3: ['x [m]', 'y [m]', 'psi [rad]'],
  6: ['x [m]', 'y [m]', 'z [m]', 'phi [rad]', 'theta [rad]', 'psi [rad]'],
}


def _save(fig, path: Path) -> Path:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  fig.savefig(path, format='svg', bbox_inches='tight')
  logger.debug('Wrote %s', path)
  return path


def tracking_figure(log: TrajectoryLog, ref: ReferenceTrajectory, path: Path) -> Path:
  """Pose eta against the reference eta_d, one panel per axis."""
  n = log.n
  desired = np.array([ref.eta_d(t) for t in log.times])
  fig = Figure(figsize=(8, 2.0 * n))
  axes = fig.subplots(n, 1, sharex=True)
  for i, ax in enumerate(np.atleast_1d(axes)):
    ax.plot(log.times, log.eta[:, i], 'b-', linewidth=1.5, label='eta')
    ax.plot(log.times, desired[:, i], 'r--', linewidth=1.2, label='eta_d')
    ax.set_ylabel(AXIS_LABELS[n][i])
    ax.grid(True, alpha=0.3)
  np.atleast_1d(axes)[0].legend(loc='upper right')
  np.atleast_1d(axes)[-1].set_xlabel('Time (s)')
  fig.suptitle(f'Position vector against reference ({log.frame.value} frame)')
  return _save(fig, path)


def error_figure(log: TrajectoryLog, path: Path) -> Path:
  """Error norms and the storage V on a log scale."""
  fig = Figure(figsize=(8, 4))
  ax = fig.subplots()
  for series, label in ((log.err_eta, '|eta~|'), (log.err_sigma, '|sigma|'), (log.V, 'V')):
    positive = np.where(series > 0.0, series, np.nan)
    ax.semilogy(log.times, positive, linewidth=1.5, label=label)
  ax.set_xlabel('Time (s)')
  ax.set_ylabel('Error')
  ax.set_title('Tracking error norms')
  ax.legend()
  ax.grid(True, alpha=0.3)
  return _save(fig, path)


def storage_figure(times, storage, path: Path, title: str = 'Differential storage W') -> Path:
  """Decay of the differential storage along a variational run."""
  fig = Figure(figsize=(8, 4))
  ax = fig.subplots()
  storage = np.asarray(storage, dtype=float)
  ax.semilogy(times, np.where(storage > 0.0, storage, np.nan), 'b-', linewidth=1.5)
  ax.set_xlabel('Time (s)')
  ax.set_ylabel('W')
  ax.set_title(title)
  ax.grid(True, alpha=0.3)
  return _save(fig, path)


def contraction_figure(report: ContractionReport, path: Path) -> Path:
  fig = Figure(figsize=(8, 4))
  ax = fig.subplots()
  distance = np.where(report.distance > 0.0, report.distance, np.nan)
  ax.semilogy(report.times, distance, 'b-', linewidth=1.5, label='distance')
  if report.fitted_rate is not None and report.distance[0] > 0.0:
    fit = report.distance[0] * np.exp(-report.fitted_rate * (report.times - report.times[0]))
    ax.semilogy(report.times, fit, 'k:', label=f'rate {report.fitted_rate:.3g}')
  ax.set_xlabel('Time (s)')
  ax.set_ylabel('Storage-metric distance')
  ax.set_title('Virtual copies converging')
  ax.legend()
  ax.grid(True, alpha=0.3)
  return _save(fig, path)
