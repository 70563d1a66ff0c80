"""Virtual-differential-passivity tracking controllers in the body and inertial frames.

The virtual system of each frame is the craft model with the state-dependent
matrices (J, C, D or E_eta, D_H, M_eta) frozen on the actual state x and the
gradients taken at the virtual state x_v. Substituting x_v = x recovers the
actual closed loop.
"""

import logging
from typing import NamedTuple, Optional, Union

import numpy as np
import scipy.linalg

from marinesim.errors import EmptySampleSet
from marinesim.models.control import ControllerGains, ErrorState, Frame
from marinesim.models.reference import ReferenceTrajectory
from marinesim.models.vessel import BodyState, InertialState, VesselParams
from marinesim.services.geometry import (
  as_vector,
  kinematic_map,
  kinematic_map_inverse,
  kinematic_map_inverse_derivative,
  pose_difference,
  wrap_pose,
)
from marinesim.services.vessel import (
  InertialTerms,
  coriolis_body,
  damping_body,
  inertial_terms,
  restoring_gradient,
)

logger = logging.getLogger(__name__)

Desired = tuple[np.ndarray, np.ndarray, np.ndarray]


class ControlLaw(NamedTuple):
  """One evaluation of a tracking controller."""

  tau: np.ndarray
  eta_tilde: np.ndarray
  sigma: np.ndarray
  p_r: np.ndarray
  p_r_dot: np.ndarray


class BodyTerms(NamedTuple):
  """Body-frame matrices that depend on the actual state only."""

  jac: np.ndarray
  j_inv: np.ndarray
  j_inv_dot: np.ndarray
  nu: np.ndarray
  j2: np.ndarray


LoopTerms = Union[BodyTerms, InertialTerms]


def _split(x) -> tuple[np.ndarray, np.ndarray]:
  z = x.vector if isinstance(x, (BodyState, InertialState)) else as_vector(x)
  n = z.size // 2
  return z[:n], z[n:]


def _omega(omega, n: int) -> np.ndarray:
  return np.zeros(n) if omega is None else as_vector(omega)


# Body frame


def body_terms(params: VesselParams, x) -> BodyTerms:
  """J, J^-1, J^-1_dot, nu and C(nu) + D(nu) at the actual state x.

  Raises:
    SingularAttitude: the pose lies in the pitch guard band.
  """
  eta, p_b = _split(x)
  jac = kinematic_map(eta)
  nu = params.mass_inverse @ p_b
  return BodyTerms(
    jac=jac,
    j_inv=kinematic_map_inverse(eta),
    j_inv_dot=kinematic_map_inverse_derivative(eta, jac @ nu),
    nu=nu,
    j2=coriolis_body(params, nu) + damping_body(params, nu),
  )


def aux_momentum_body(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  eta_v,
  t: float,
  eta=None,
) -> np.ndarray:
  """p_r = M J^-1(eta) (eta_d_dot - Lambda eta~_v).

  Args:
    params: Craft parameters.
    gains: Controller gains.
    ref: Reference trajectory.
    eta_v: Virtual pose.
    t: Time in seconds.
    eta: Actual pose the frame map is evaluated on. Defaults to eta_v.
  """
  eta_d, eta_d_dot, _ = ref.evaluate(t)
  eta_v = as_vector(eta_v)
  pose = eta_v if eta is None else as_vector(eta)
  eta_tilde = pose_difference(eta_v, eta_d)
  return params.mass_matrix @ kinematic_map_inverse(pose) @ (eta_d_dot - gains.Lambda @ eta_tilde)


def _body_law(
  params: VesselParams,
  gains: ControllerGains,
  eta_v: np.ndarray,
  p_v: np.ndarray,
  terms: BodyTerms,
  desired: Desired,
  omega: np.ndarray,
) -> tuple[ControlLaw, np.ndarray]:
  """Control law and the body restoring force J^T dP/d eta at the virtual pose.

  The position feedback is -J^T(eta) Pi eta~ rather than -Pi eta~, so the error
  pair (eta~, sigma) keeps the skew coupling J of the craft model.
  """
  eta_d, eta_d_dot, eta_d_ddot = desired
  m, m_inv = params.mass_matrix, params.mass_inverse
  eta_v_dot = terms.jac @ (m_inv @ p_v)

  eta_tilde = pose_difference(eta_v, eta_d)
  shaped = eta_d_dot - gains.Lambda @ eta_tilde
  p_r = m @ (terms.j_inv @ shaped)
  sigma = p_v - p_r
  p_r_dot = m @ (
    terms.j_inv_dot @ shaped
    + terms.j_inv @ (eta_d_ddot - gains.Lambda @ (eta_v_dot - eta_d_dot))
  )

  restoring = terms.jac.T @ restoring_gradient(params, eta_v)
  feedforward = p_r_dot + restoring + terms.j2 @ (m_inv @ p_r)
  feedback = -terms.jac.T @ (gains.Pi @ eta_tilde) - gains.Kd @ (m_inv @ sigma)
  law = ControlLaw(
    tau=feedforward + feedback + omega, eta_tilde=eta_tilde, sigma=sigma, p_r=p_r, p_r_dot=p_r_dot
  )
  return law, restoring


def _virtual_body(params, gains, eta_v, p_v, terms: BodyTerms, desired, omega):
  law, restoring = _body_law(params, gains, eta_v, p_v, terms, desired, omega)
  nu_v = params.mass_inverse @ p_v
  p_dot = -restoring - terms.j2 @ nu_v + law.tau
  return np.concatenate([terms.jac @ nu_v, p_dot]), law


def body_control_law(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  x_v,
  x,
  t: float,
  omega=None,
) -> ControlLaw:
  """Body-frame control law with its error coordinates."""
  eta_v, p_v = _split(x_v)
  law, _ = _body_law(
    params, gains, eta_v, p_v, body_terms(params, x), ref.evaluate(t), _omega(omega, eta_v.size)
  )
  return law


def control_body(params, gains, ref, x_v, x, t: float, omega=None) -> np.ndarray:
  """Body-frame generalized force tau = tau_ff + tau_fb + omega.

  Raises:
    SingularAttitude: either pose lies in the pitch guard band.
  """
  return body_control_law(params, gains, ref, x_v, x, t, omega).tau


def virtual_closed_loop_body(params, gains, ref, x_v, x, t: float, omega=None) -> np.ndarray:
  """Vector field of the body-frame virtual system closed with ``control_body``.

  Returns:
    d/dt (eta_v, p_v) as one stacked vector.
  """
  eta_v, p_v = _split(x_v)
  rate, _ = _virtual_body(
    params, gains, eta_v, p_v, body_terms(params, x), ref.evaluate(t), _omega(omega, eta_v.size)
  )
  return rate


def closed_loop_body(params, gains, ref, x, t: float, omega=None) -> np.ndarray:
  """Actual body-frame closed loop: the virtual system evaluated at x_v = x."""
  return virtual_closed_loop_body(params, gains, ref, x, x, t, omega)


# Inertial frame


def _inertial_law(
  params: VesselParams,
  gains: ControllerGains,
  eta_v: np.ndarray,
  p_v: np.ndarray,
  mats: InertialTerms,
  desired: Desired,
  omega: np.ndarray,
) -> tuple[ControlLaw, np.ndarray]:
  eta_d, eta_d_dot, eta_d_ddot = desired
  eta_v_dot = mats.m_eta_inv @ p_v
  eta_tilde = pose_difference(eta_v, eta_d)
  shaped = eta_d_dot - gains.Lambda @ eta_tilde
  p_r = mats.m_eta @ shaped
  sigma = p_v - p_r
  p_r_dot = mats.m_eta_dot @ shaped + mats.m_eta @ (
    eta_d_ddot - gains.Lambda @ (eta_v_dot - eta_d_dot)
  )

  restoring = restoring_gradient(params, eta_v)
  feedforward = p_r_dot + restoring + (mats.e_eta + mats.d_h) @ (mats.m_eta_inv @ p_r)
  feedback = -gains.Pi @ eta_tilde - gains.Kd @ (mats.m_eta_inv @ sigma)
  law = ControlLaw(
    tau=feedforward + feedback + omega, eta_tilde=eta_tilde, sigma=sigma, p_r=p_r, p_r_dot=p_r_dot
  )
  return law, restoring


def _virtual_inertial(params, gains, eta_v, p_v, mats: InertialTerms, desired, omega):
  law, restoring = _inertial_law(params, gains, eta_v, p_v, mats, desired, omega)
  eta_v_dot = mats.m_eta_inv @ p_v
  p_dot = -restoring - (mats.e_eta + mats.d_h) @ eta_v_dot + law.tau
  return np.concatenate([eta_v_dot, p_dot]), law


def inertial_control_law(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  x_v,
  x,
  t: float,
  omega=None,
) -> ControlLaw:
  """Inertial-frame control law; ``tau`` is the inertial force tau_eta."""
  eta_v, p_v = _split(x_v)
  eta, p = _split(x)
  law, _ = _inertial_law(
    params,
    gains,
    eta_v,
    p_v,
    inertial_terms(params, eta, p),
    ref.evaluate(t),
    _omega(omega, eta_v.size),
  )
  return law


def control_inertial(params, gains, ref, x_v, x, t: float, omega=None) -> np.ndarray:
  """Inertial-frame force tau_eta; the actuator command is ``actuator_command``."""
  return inertial_control_law(params, gains, ref, x_v, x, t, omega).tau


def actuator_command(eta, tau_eta) -> np.ndarray:
  """Body-frame thrust tau = J^T(eta) tau_eta."""
  return kinematic_map(eta).T @ as_vector(tau_eta)


def virtual_closed_loop_inertial(params, gains, ref, x_v, x, t: float, omega=None) -> np.ndarray:
  """Vector field of the inertial-frame virtual system closed with ``control_inertial``."""
  eta_v, p_v = _split(x_v)
  eta, p = _split(x)
  rate, _ = _virtual_inertial(
    params,
    gains,
    eta_v,
    p_v,
    inertial_terms(params, eta, p),
    ref.evaluate(t),
    _omega(omega, eta_v.size),
  )
  return rate


def closed_loop_inertial(params, gains, ref, x, t: float, omega=None) -> np.ndarray:
  return virtual_closed_loop_inertial(params, gains, ref, x, x, t, omega)


# Shared evaluation


def loop_terms(params: VesselParams, frame: Frame, x) -> LoopTerms:
  """State-dependent matrices of the chosen frame at the actual state x."""
  if frame is Frame.BODY:
    return body_terms(params, x)
  eta, p = _split(x)
  return inertial_terms(params, eta, p)


def virtual_rate(
  params: VesselParams,
  gains: ControllerGains,
  frame: Frame,
  x_v: np.ndarray,
  terms: LoopTerms,
  desired: Desired,
  omega: np.ndarray,
) -> tuple[np.ndarray, ControlLaw]:
  """Virtual-system rate and control law on precomputed ``loop_terms`` and reference sample.

  One actual-state evaluation then serves the actual loop and every virtual copy
  driven by it.
  """
  n = x_v.size // 2
  virtual = _virtual_body if frame is Frame.BODY else _virtual_inertial
  return virtual(params, gains, x_v[:n], x_v[n:], terms, desired, omega)


# Error coordinates


def aux_momentum(params, gains, ref, eta_v, t, eta, frame: Frame) -> np.ndarray:
  if frame is Frame.BODY:
    return aux_momentum_body(params, gains, ref, eta_v, t, eta)
  eta_d, eta_d_dot, _ = ref.evaluate(t)
  pose = as_vector(eta_v if eta is None else eta)
  j_inv = kinematic_map_inverse(pose)
  m_eta = j_inv.T @ params.mass_matrix @ j_inv
  return m_eta @ (eta_d_dot - gains.Lambda @ pose_difference(eta_v, eta_d))


def error_coordinates(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  x_v,
  t: float,
  frame: Frame = Frame.BODY,
  eta=None,
) -> ErrorState:
  """(eta~_v, sigma_v) = (eta_v - eta_d(t), p_v - p_r) with wrapped attitude errors."""
  eta_v, p_v = _split(x_v)
  eta_d = ref.eta_d(t)
  p_r = aux_momentum(params, gains, ref, eta_v, t, eta, frame)
  return ErrorState(eta_tilde=pose_difference(eta_v, eta_d), sigma=p_v - p_r)


def momentum_from_error(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  err: ErrorState,
  t: float,
  frame: Frame = Frame.BODY,
) -> np.ndarray:
  """Invert ``error_coordinates``: the stacked state (eta_v, p_v)."""
  eta_v = wrap_pose(ref.eta_d(t) + err.eta_tilde)
  p_r = aux_momentum(params, gains, ref, eta_v, t, None, frame)
  return np.concatenate([eta_v, err.sigma + p_r])


def storage_function(
  params: VesselParams,
  gains: ControllerGains,
  err: ErrorState,
  frame: Frame = Frame.BODY,
  eta=None,
) -> float:
  """V = 1/2 eta~^T Pi eta~ + 1/2 sigma^T M^-1 sigma (M_eta^-1(eta) in the inertial frame)."""
  eta_tilde, sigma = err.eta_tilde, err.sigma
  if frame is Frame.BODY:
    m_inv = params.mass_inverse
  else:
    jac = kinematic_map(eta)
    m_inv = jac @ params.mass_inverse @ jac.T
  return 0.5 * float(eta_tilde @ gains.Pi @ eta_tilde) + 0.5 * float(sigma @ m_inv @ sigma)


# Rates


def position_rate(gains: ControllerGains) -> float:
  """Largest beta with Pi Lambda + Lambda^T Pi >= 2 beta Pi (generalized eigenvalue)."""
  lhs = gains.Pi @ gains.Lambda + gains.Lambda.T @ gains.Pi
  lhs = 0.5 * (lhs + lhs.T)
  return 0.5 * float(scipy.linalg.eigh(lhs, gains.Pi, eigvals_only=True)[0])


def momentum_rate(params: VesselParams, gains: ControllerGains, velocities) -> float:
  """min over samples of lambda_min(D(nu) + Kd) lambda_min(M^-1).

  Raises:
    EmptySampleSet: no velocity samples were given.
  """
  velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
  if velocities.size == 0:
    raise EmptySampleSet('tracking rate needs at least one velocity sample')
  inv_lambda_min = 1.0 / params.mass_norm
  damping_floor = min(
    float(scipy.linalg.eigh(damping_body(params, nu) + gains.Kd, eigvals_only=True)[0])
    for nu in velocities
  )
  return damping_floor * inv_lambda_min


def tracking_rate(params: VesselParams, gains: ControllerGains, traj_samples) -> float:
  """Guaranteed exponential rate of the body-frame closed loop.

  The momentum branch is an infimum over the sampled body velocities, so the
  returned rate holds along the sampled trajectory.
  """
  beta = min(position_rate(gains), momentum_rate(params, gains, traj_samples))
  logger.debug('Tracking rate %.9g', beta)
  return beta


def tracking_rate_inertial(params: VesselParams, gains: ControllerGains, states) -> float:
  """Inertial-frame rate from D_H + Kd and M_eta^-1 sampled at (eta, p) states.

  Raises:
    EmptySampleSet: no states were given.
  """
  states = np.atleast_2d(np.asarray(states, dtype=float))
  if states.size == 0:
    raise EmptySampleSet('tracking rate needs at least one state sample')
  n = states.shape[1] // 2
  branch = np.inf
  for z in states:
    mats = inertial_terms(params, z[:n], z[n:])
    damping = float(scipy.linalg.eigh(mats.d_h + gains.Kd, eigvals_only=True)[0])
    inverse_mass = float(scipy.linalg.eigh(mats.m_eta_inv, eigvals_only=True)[0])
    branch = min(branch, damping * inverse_mass)
  return min(position_rate(gains), branch)


def initial_state_on_reference(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  frame: Frame = Frame.BODY,
  t: float = 0.0,
  offset: Optional[np.ndarray] = None,
) -> np.ndarray:
  """Stacked state with sigma = 0 at eta_d(t) + offset."""
  n = ref.eta_d(t).size
  eta_tilde = np.zeros(n) if offset is None else as_vector(offset)
  return momentum_from_error(
    params, gains, ref, ErrorState(eta_tilde=eta_tilde, sigma=np.zeros(n)), t, frame
  )
