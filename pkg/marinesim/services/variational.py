"""Prolonged dynamics, differential passivity and contraction checks.

Everything here works in error coordinates (eta~, sigma) of the virtual system,
where the closed loop carries the structured variational form directly.
"""

import logging
from typing import Callable, Optional, Protocol, Sequence

import numpy as np
import scipy.linalg

from marinesim.errors import DivergedPerturbation, EmptySampleSet
from marinesim.models.control import ControllerGains, Frame
from marinesim.models.reference import ReferenceTrajectory
from marinesim.models.sim import SimConfig
from marinesim.models.variational import (
  ContractionReport,
  InequalityCheck,
  PassivityReport,
  StructuredVariational,
  VariationalSample,
)
from marinesim.models.vessel import VesselParams
from marinesim.services.control import (
  body_control_law,
  virtual_closed_loop_body,
  virtual_closed_loop_inertial,
)
from marinesim.services.geometry import (
  as_vector,
  kinematic_map,
  kinematic_map_inverse,
  pose_difference,
)
from marinesim.services.sim import integrate, pair_field, state_vector
from marinesim.services.vessel import coriolis_body, damping_body

logger = logging.getLogger(__name__)

# Tangent growth beyond this bound means the perturbed copy left the linear regime.
DIVERGENCE_BOUND = 1e6

VariationalDynamics = Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Signal = Callable[[float], np.ndarray]


class DifferentialStorage(Protocol):
  """Quadratic storage W(x, delta_x) with its port output delta_y."""

  def storage(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> float: ...

  def output(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> np.ndarray: ...


class EuclideanStorage:
  """W = 1/2 |delta_x|^2 with no port output."""

  def __init__(self, inputs: int):
    self.inputs = inputs

  def storage(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> float:
    return 0.5 * float(delta_x @ delta_x)

  def output(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> np.ndarray:
    return np.zeros(self.inputs)


class ErrorMetricStorage:
  """Differential storage of the virtual system in error coordinates.

  For a tangent (delta_eta, delta_p) at the state x, delta_eta~ = delta_eta and
  delta_sigma = delta_p + M J^-1(eta) Lambda delta_eta (M_eta(eta) Lambda delta_eta in the
  inertial frame). Then W = 1/2 delta_eta~^T Pi delta_eta~ + 1/2 delta_sigma^T G delta_sigma
  with G = M^-1 (or M_eta^-1) and delta_y = G delta_sigma.
  """

  def __init__(self, params: VesselParams, gains: ControllerGains, frame: Frame = Frame.BODY):
    self.params = params
    self.gains = gains
    self.frame = frame

  def _metric(self, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j_inv = kinematic_map_inverse(eta)
    if self.frame is Frame.BODY:
      return self.params.mass_matrix @ j_inv, self.params.mass_inverse
    jac = kinematic_map(eta)
    return (
      j_inv.T @ self.params.mass_matrix @ j_inv,
      jac @ self.params.mass_inverse @ jac.T,
    )

  def error_tangent(self, x: np.ndarray, delta_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = x.size // 2
    shaping, _ = self._metric(x[:n])
    delta_eta = delta_x[:n]
    return delta_eta, delta_x[n:] + shaping @ self.gains.Lambda @ delta_eta

  def storage(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> float:
    n = x.size // 2
    _, inverse_metric = self._metric(x[:n])
    delta_eta, delta_sigma = self.error_tangent(x, delta_x)
    return 0.5 * float(delta_eta @ self.gains.Pi @ delta_eta) + 0.5 * float(
      delta_sigma @ inverse_metric @ delta_sigma
    )

  def output(self, t: float, x: np.ndarray, delta_x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    _, inverse_metric = self._metric(x[:n])
    return inverse_metric @ self.error_tangent(x, delta_x)[1]


def structured_matrices_body(
  params: VesselParams, gains: ControllerGains, x, t: float = 0.0
) -> StructuredVariational:
  """Xi, Upsilon, Pi and Psi of the body-frame closed loop at the actual state x.

  Pi = blkdiag(Pi_eta, M^-1), Upsilon = blkdiag(Lambda Pi_eta^-1, D(nu) + Kd),
  Xi = [[0, J], [-J^T, -C(nu)]], Psi = [0; I].

  Raises:
    SingularAttitude: the pose lies in the pitch guard band.
  """
  z = state_vector(x)
  n = z.size // 2
  eta, p_b = z[:n], z[n:]
  nu = params.mass_inverse @ p_b
  jac = kinematic_map(eta)
  zero = np.zeros((n, n))

  upsilon_eta = gains.Lambda @ gains.Pi_inv
  upsilon_eta = 0.5 * (upsilon_eta + upsilon_eta.T)
  return StructuredVariational(
    Xi=np.block([[zero, jac], [-jac.T, -coriolis_body(params, nu)]]),
    Upsilon=np.block([[upsilon_eta, zero], [zero, damping_body(params, nu) + gains.Kd]]),
    Pi_full=np.block([[gains.Pi, zero], [zero, params.mass_inverse]]),
    Psi=np.vstack([zero, np.eye(n)]),
  )


def structured_vector_field(sv: StructuredVariational, delta_x_tilde, delta_u) -> np.ndarray:
  """(Xi - Upsilon) Pi delta_x~ + Psi delta_u."""
  return (sv.Xi - sv.Upsilon) @ sv.Pi_full @ as_vector(delta_x_tilde) + sv.Psi @ as_vector(
    delta_u
  )


def _dissipation_matrix(sv: StructuredVariational, Pi_dot) -> np.ndarray:
  pi = sv.Pi_full
  pi_dot = np.zeros_like(pi) if Pi_dot is None else np.asarray(Pi_dot, dtype=float)
  dissipation = 2.0 * pi @ sv.Upsilon @ pi - pi_dot
  return 0.5 * (dissipation + dissipation.T)


def dpbc_inequality_check(sv: StructuredVariational, Pi_dot, alpha: float) -> InequalityCheck:
  """Whether Pi_dot - 2 Pi Upsilon Pi <= -alpha Pi; margin is the top eigenvalue of the gap."""
  gap = -_dissipation_matrix(sv, Pi_dot) + alpha * sv.Pi_full
  margin = float(scipy.linalg.eigh(gap, eigvals_only=True)[-1])
  scale = max(1.0, float(np.max(np.abs(gap))))
  return InequalityCheck(holds=margin <= 1e-12 * scale, margin=margin)


def max_dissipation_rate(sv: StructuredVariational, Pi_dot=None) -> float:
  """Largest alpha accepted by ``dpbc_inequality_check`` (generalized eigenvalue)."""
  return float(
    scipy.linalg.eigh(_dissipation_matrix(sv, Pi_dot), sv.Pi_full, eigvals_only=True)[0]
  )


def variational_flow_fd(
  closed_loop_dynamics: VariationalDynamics,
  x0,
  delta_x0,
  omega: Optional[Signal],
  delta_omega: Optional[Signal],
  horizon: float,
  h: float,
  eps: float = 1e-6,
  storage: Optional[DifferentialStorage] = None,
  inputs: Optional[int] = None,
) -> list[VariationalSample]:
  """Prolonged dynamics by co-integrating a nominal and a perturbed copy.

  ``closed_loop_dynamics(t, x, u, x_nominal)`` is the vector field with input u; the
  nominal state is passed along so virtual systems can be driven by it. The perturbed
  copy starts at x0 + eps delta_x0 with input omega + eps delta_omega, and
  delta_x(t) = (x_pert(t) - x(t)) / eps. W_dot is the time derivative of W on the grid.

  Raises:
    ValueError: eps outside [1e-8, 1e-4] or h not positive.
    DivergedPerturbation: |x_pert - x| / eps exceeded 1e6.
  """
  if not 1e-8 <= eps <= 1e-4:
    raise ValueError(f'eps must lie in [1e-8, 1e-4], got {eps:.3g}')
  if h <= 0.0:
    raise ValueError('step h must be positive')
  x0 = np.array(as_vector(x0), dtype=float)
  delta_x0 = as_vector(delta_x0)
  width = x0.size
  m = inputs if inputs is not None else width // 2
  nominal_input = omega if omega is not None else (lambda t: np.zeros(m))
  tangent_input = delta_omega if delta_omega is not None else (lambda t: np.zeros(m))
  storage = storage if storage is not None else EuclideanStorage(m)

  def field(t, z):
    x, x_pert = z[:width], z[width:]
    u = nominal_input(t)
    return np.concatenate(
      [
        closed_loop_dynamics(t, x, u, x),
        closed_loop_dynamics(t, x_pert, u + eps * tangent_input(t), x),
      ]
    )

  cfg = SimConfig(h=h, t_end=horizon)
  times, states = integrate(field, np.concatenate([x0, x0 + eps * delta_x0]), cfg)

  nominal = states[:, :width]
  tangents = (states[:, width:] - nominal) / eps
  growth = np.max(np.linalg.norm(tangents, axis=1))
  if growth > DIVERGENCE_BOUND:
    raise DivergedPerturbation(f'tangent norm reached {growth:.3g} (bound {DIVERGENCE_BOUND:.0e})')
  storages = np.array([storage.storage(t, x, d) for t, x, d in zip(times, nominal, tangents)])
  rates = np.gradient(storages, times, edge_order=2) if times.size > 2 else np.zeros_like(storages)
  samples = [
    VariationalSample(
      t=t,
      x=x,
      delta_x=d,
      W=w,
      W_dot=w_dot,
      delta_u=tangent_input(t),
      delta_y=storage.output(t, x, d),
    )
    for t, x, d, w, w_dot in zip(times, nominal, tangents, storages, rates)
  ]
  logger.debug('Variational flow: %d samples, max tangent %.3g', len(samples), growth)
  return samples


def fit_exponential_rate(t, y, skip_fraction: float = 0.1, floor: float = 1e-20) -> float:
  """Decay rate -d(log y)/dt by least squares after the first ``skip_fraction`` of the span.

  Samples below ``floor * max(y)`` are dropped as round-off.

  Raises:
    EmptySampleSet: fewer than two usable samples remain.
  """
  t = np.asarray(t, dtype=float)
  y = np.asarray(y, dtype=float)
  if t.size == 0:
    raise EmptySampleSet('no samples to fit')
  start = t[0] + skip_fraction * (t[-1] - t[0])
  peak = float(np.max(np.abs(y)))
  keep = (t >= start) & (y > floor * peak) & (y > 0.0)
  if np.count_nonzero(keep) < 2:
    raise EmptySampleSet('fewer than two positive samples in the fit window')
  slope, _ = np.polyfit(t[keep], np.log(y[keep]), 1)
  return float(-slope)


def differential_passivity_report(
  samples: Sequence[VariationalSample], rel_tol: float = 1e-6
) -> PassivityReport:
  """Count samples with W_dot > delta_u^T delta_y + tol, tol = rel_tol * max |W|.

  The decay rate of W is fitted when delta_u vanishes throughout.

  Raises:
    EmptySampleSet: no samples were given.
  """
  if not samples:
    raise EmptySampleSet('passivity report needs at least one sample')
  storage = np.array([s.W for s in samples])
  gaps = np.array([s.W_dot - float(s.delta_u @ s.delta_y) for s in samples])
  peak = float(np.max(np.abs(storage)))
  tol = rel_tol * peak
  fitted = None
  if all(not np.any(s.delta_u) for s in samples):
    try:
      fitted = fit_exponential_rate([s.t for s in samples], storage)
    except EmptySampleSet:
      fitted = None
  return PassivityReport(
    samples=len(samples),
    violations=int(np.count_nonzero(gaps > tol)),
    max_gap=float(np.max(gaps)),
    max_abs_gap=float(np.max(np.abs(gaps))),
    max_storage=peak,
    fitted_decay=fitted,
  )


def virtual_dynamics(
  params: VesselParams, gains: ControllerGains, ref: ReferenceTrajectory, frame: Frame
) -> VariationalDynamics:
  """Virtual closed loop as ``f(t, x_v, omega, x)`` for ``variational_flow_fd``."""
  virtual = virtual_closed_loop_body if frame is Frame.BODY else virtual_closed_loop_inertial

  def field(t, x_v, u, x):
    return virtual(params, gains, ref, x_v, x, t, u)

  return field


def error_difference(params, gains, ref, frame: Frame, t: float, x, x_a, x_b) -> np.ndarray:
  """Error-coordinate difference of two virtual states driven by the actual state x."""
  n = x.size // 2
  j_inv = kinematic_map_inverse(x[:n])
  shaping = params.mass_matrix @ j_inv
  if frame is Frame.INERTIAL:
    shaping = j_inv.T @ shaping
  eta_d, eta_d_dot, _ = ref.evaluate(t)
  p_ra = shaping @ (eta_d_dot - gains.Lambda @ pose_difference(x_a[:n], eta_d))
  p_rb = shaping @ (eta_d_dot - gains.Lambda @ pose_difference(x_b[:n], eta_d))
  return np.concatenate(
    [pose_difference(x_a[:n], x_b[:n]), (x_a[n:] - p_ra) - (x_b[n:] - p_rb)]
  )


def storage_distance(params, gains, frame: Frame, x, delta) -> float:
  """sqrt(delta^T blkdiag(Pi, G) delta) with G = M^-1 or M_eta^-1(eta)."""
  n = delta.size // 2
  if frame is Frame.BODY:
    inverse_metric = params.mass_inverse
  else:
    jac = kinematic_map(x[:n])
    inverse_metric = jac @ params.mass_inverse @ jac.T
  d_eta, d_sigma = delta[:n], delta[n:]
  return float(np.sqrt(d_eta @ gains.Pi @ d_eta + d_sigma @ inverse_metric @ d_sigma))


def contraction_experiment(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  x0_actual,
  x_v0_a,
  x_v0_b,
  cfg: SimConfig,
  frame: Frame = Frame.BODY,
) -> ContractionReport:
  """Integrate two virtual copies driven by one actual trajectory and fit their convergence.

  Raises:
    SingularAttitude: an initial pose lies in the pitch guard band.
  """
  z0 = state_vector(x0_actual)
  za, zb = state_vector(x_v0_a), state_vector(x_v0_b)
  width = z0.size
  field = pair_field(params, gains, ref, frame, copies=2)
  times, states = integrate(field, np.concatenate([z0, za, zb]), cfg)
  distance = np.array(
    [
      storage_distance(
        params,
        gains,
        frame,
        z[:width],
        error_difference(
          params, gains, ref, frame, t, z[:width], z[width : 2 * width], z[2 * width :]
        ),
      )
      for t, z in zip(times, states)
    ]
  )
  try:
    rate = fit_exponential_rate(times, distance)
  except EmptySampleSet:
    rate = None
  logger.info('Contraction: initial distance %.9g, fitted rate %s', distance[0], rate)
  return ContractionReport(times=times, distance=distance, fitted_rate=rate)


def structured_field_residual(params, gains, ref, x, x_v, t: float, omega=None) -> float:
  """Largest gap between the structured form and the virtual error dynamics at (x, x_v)."""
  z, zv = state_vector(x), state_vector(x_v)
  n = z.size // 2
  law = body_control_law(params, gains, ref, zv, z, t, omega)
  rate = virtual_closed_loop_body(params, gains, ref, zv, z, t, omega)
  direct = np.concatenate([rate[:n] - ref.eta_d_dot(t), rate[n:] - law.p_r_dot])
  sv = structured_matrices_body(params, gains, z, t)
  w = np.zeros(n) if omega is None else as_vector(omega)
  structured = structured_vector_field(sv, np.concatenate([law.eta_tilde, law.sigma]), w)
  return float(np.max(np.abs(structured - direct)))
