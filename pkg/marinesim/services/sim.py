"""Fixed-step integration of open-loop, closed-loop and paired virtual systems."""

import logging
from typing import Any, Callable, Optional, Union

import numpy as np

from marinesim.errors import NonFiniteState
from marinesim.models.control import ControllerGains, Frame
from marinesim.models.reference import ReferenceTrajectory
from marinesim.models.sim import Integrator, SimConfig, TrajectoryLog
from marinesim.models.vessel import BodyState, InertialState, VesselParams
from marinesim.services.control import (
  ControlLaw,
  actuator_command,
  body_control_law,
  inertial_control_law,
  loop_terms,
  virtual_rate,
)
from marinesim.services.geometry import as_vector, kinematic_map, wrap_pose
from marinesim.services.vessel import (
  body_ph_dynamics,
  check_pose,
  hamiltonian_body,
  hamiltonian_inertial,
  inertial_input,
  inertial_ph_dynamics,
)

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]
AnnotatedField = Callable[[float, np.ndarray], tuple[np.ndarray, Any]]
Input = Union[None, np.ndarray, Callable[[float, np.ndarray], np.ndarray]]


def _check_finite(value: np.ndarray, t: float, what: str) -> np.ndarray:
  if not np.isfinite(value).all():
    raise NonFiniteState(f'{what} became non-finite at t={t:.9g}', t)
  return value


def rk4_step(
  f: VectorField, x: np.ndarray, t: float, h: float, k1: Optional[np.ndarray] = None
) -> np.ndarray:
  """Classical fourth-order Runge-Kutta step.

  Args:
    f: Vector field f(t, x).
    x: State at t.
    t: Time in seconds.
    h: Step in seconds.
    k1: f(t, x) when the caller already evaluated it.

  Raises:
    NonFiniteState: a stage or the update is not finite.
  """
  if k1 is None:
    k1 = _check_finite(f(t, x), t, 'RK4 stage 1')
  k2 = _check_finite(f(t + 0.5 * h, x + 0.5 * h * k1), t, 'RK4 stage 2')
  k3 = _check_finite(f(t + 0.5 * h, x + 0.5 * h * k2), t, 'RK4 stage 3')
  k4 = _check_finite(f(t + h, x + h * k3), t, 'RK4 stage 4')
  return _check_finite(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + h, 'state')


def euler_step(
  f: VectorField, x: np.ndarray, t: float, h: float, k1: Optional[np.ndarray] = None
) -> np.ndarray:
  """Explicit Euler step."""
  if k1 is None:
    k1 = _check_finite(f(t, x), t, 'Euler stage')
  return _check_finite(x + h * k1, t + h, 'state')


STEPPERS = {Integrator.RK4: rk4_step, Integrator.EULER: euler_step}


def _integrate(
  f: VectorField, x0, cfg: SimConfig, annotated: Optional[AnnotatedField] = None
) -> tuple[np.ndarray, np.ndarray, list]:
  step = STEPPERS[cfg.integrator]
  x = np.array(as_vector(x0), dtype=float)
  times, states, rows = [0.0], [x.copy()], []
  steps = cfg.steps
  for k in range(steps):
    t = k * cfg.h
    try:
      k1 = None
      if annotated is not None:
        k1, row = annotated(t, x)
        if k % cfg.record_every == 0:
          rows.append(row)
        k1 = _check_finite(k1, t, 'stage 1')
      x = step(f, x, t, cfg.h, k1)
    except NonFiniteState as e:
      logger.error('Integration aborted after %d of %d steps: %s', k, steps, e)
      raise NonFiniteState(str(e), e.t, log=(np.array(times), np.array(states))) from e
    if (k + 1) % cfg.record_every == 0 or k + 1 == steps:
      times.append((k + 1) * cfg.h)
      states.append(x.copy())
  if annotated is not None:
    rows.append(annotated(times[-1], x)[1])
  logger.debug('Integrated %d %s steps of h=%.9g', steps, cfg.integrator.value, cfg.h)
  return np.array(times), np.array(states), rows


def integrate(f: VectorField, x0, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
  """Integrate from t = 0 on the grid t_k = k h.

  Returns:
    Recorded times and states (every ``record_every`` steps plus the final step).

  Raises:
    NonFiniteState: carries the recorded prefix as ``(times, states)`` in ``log``.
  """
  times, states, _ = _integrate(f, x0, cfg)
  return times, states


def integrate_annotated(
  f: AnnotatedField, x0, cfg: SimConfig
) -> tuple[np.ndarray, np.ndarray, list]:
  """Integrate a field f(t, x) -> (x_dot, row) and keep the rows of the recorded states.

  The first stage of every step is f(t_k, x_k), so its row describes the state
  recorded at t_k without a second evaluation.

  Returns:
    Recorded times, states and one row per recorded state.

  Raises:
    NonFiniteState: carries the recorded prefix as ``(times, states)`` in ``log``.
  """
  return _integrate(lambda t, x: f(t, x)[0], x0, cfg, annotated=f)


def _input(tau: Input, n: int) -> Callable[[float, np.ndarray], np.ndarray]:
  if tau is None:
    zero = np.zeros(n)
    return lambda t, x: zero
  if callable(tau):
    return tau
  constant = as_vector(tau)
  return lambda t, x: constant


def state_vector(x) -> np.ndarray:
  z = x.vector if isinstance(x, (BodyState, InertialState)) else as_vector(x)
  check_pose(z[: z.size // 2])
  return z


def open_loop_log(params, frame, times, states, forcing) -> TrajectoryLog:
  n = states.shape[1] // 2
  rows_nu, rows_tau, energy = [], [], []
  for t, z in zip(times, states):
    eta, p = z[:n], z[n:]
    p_b = p if frame is Frame.BODY else kinematic_map(eta).T @ p
    rows_nu.append(params.mass_inverse @ p_b)
    rows_tau.append(forcing(t, z))
    hamiltonian = hamiltonian_body if frame is Frame.BODY else hamiltonian_inertial
    energy.append(hamiltonian(params, z))
  nan = np.full(len(times), np.nan)
  return TrajectoryLog(
    frame=frame,
    times=times,
    eta=np.array([wrap_pose(z[:n]) for z in states]),
    momentum=states[:, n:],
    nu=np.array(rows_nu),
    tau=np.array(rows_tau),
    H=np.array(energy),
    err_eta=nan,
    err_sigma=nan,
    V=nan,
  )


def simulate_open_loop(
  params: VesselParams,
  x0,
  cfg: SimConfig,
  frame: Frame = Frame.BODY,
  tau: Input = None,
) -> TrajectoryLog:
  """Integrate the uncontrolled craft under a body-frame input tau(t, x).

  The inertial model receives the same physical input as tau_eta = J^-T tau.
  """
  z0 = state_vector(x0)
  n = z0.size // 2
  forcing = _input(tau, n)
  if frame is Frame.BODY:

    def field(t, z):
      return body_ph_dynamics(params, z, forcing(t, z))

  else:

    def field(t, z):
      return inertial_ph_dynamics(params, z, inertial_input(z[:n], forcing(t, z)))

  try:
    times, states = integrate(field, z0, cfg)
  except NonFiniteState as e:
    raise _with_log(e, lambda ts, xs: open_loop_log(params, frame, ts, xs, forcing)) from e
  return open_loop_log(params, frame, times, states, forcing)


def _with_log(error: NonFiniteState, build) -> NonFiniteState:
  times, states = error.log
  log = build(times, states) if len(times) else None
  return NonFiniteState(str(error), error.t, log=log)


def closed_loop_log(
  params,
  gains,
  ref,
  frame,
  times,
  states,
  actual=None,
  omega=None,
  laws: Optional[list[ControlLaw]] = None,
) -> TrajectoryLog:
  """Log rows of a closed-loop run.

  ``laws`` holds the control law of every row when the integrator already produced
  it; otherwise the law is evaluated again on each recorded state.
  """
  n = states.shape[1] // 2
  m_inv = params.mass_inverse
  forcing = _input(omega, n)
  rows_nu, rows_tau, energy, err_eta, err_sigma, storage = [], [], [], [], [], []
  for k, (t, z) in enumerate(zip(times, states)):
    x = z if actual is None else actual[k]
    eta = x[:n]
    if laws is not None:
      law = laws[k]
    elif frame is Frame.BODY:
      law = body_control_law(params, gains, ref, z, x, t, forcing(t, x))
    else:
      law = inertial_control_law(params, gains, ref, z, x, t, forcing(t, x))
    if frame is Frame.BODY:
      p_b = z[n:]
      tau = law.tau
      metric = m_inv
      energy.append(hamiltonian_body(params, z))
    else:
      jac = kinematic_map(eta)
      p_b = kinematic_map(z[:n]).T @ z[n:]
      tau = actuator_command(eta, law.tau)
      metric = jac @ m_inv @ jac.T
      energy.append(hamiltonian_inertial(params, z))
    rows_nu.append(m_inv @ p_b)
    rows_tau.append(tau)
    err_eta.append(float(np.linalg.norm(law.eta_tilde)))
    err_sigma.append(float(np.linalg.norm(law.sigma)))
    storage.append(
      0.5 * float(law.eta_tilde @ gains.Pi @ law.eta_tilde)
      + 0.5 * float(law.sigma @ metric @ law.sigma)
    )
  return TrajectoryLog(
    frame=frame,
    times=times,
    eta=np.array([wrap_pose(z[:n]) for z in states]),
    momentum=states[:, n:],
    nu=np.array(rows_nu),
    tau=np.array(rows_tau),
    H=np.array(energy),
    err_eta=np.array(err_eta),
    err_sigma=np.array(err_sigma),
    V=np.array(storage),
  )


def annotated_loop_field(params, gains, ref, frame: Frame, omega: Input = None) -> AnnotatedField:
  """Actual closed loop as f(t, x) -> (x_dot, control law)."""
  n = ref.eta_d(0.0).size
  forcing = _input(omega, n)

  def field(t, x):
    terms = loop_terms(params, frame, x)
    return virtual_rate(params, gains, frame, x, terms, ref.evaluate(t), forcing(t, x))

  return field


def closed_loop_field(params, gains, ref, frame: Frame, omega: Input = None) -> VectorField:
  """Actual closed-loop vector field f(t, x) of the chosen frame."""
  field = annotated_loop_field(params, gains, ref, frame, omega)
  return lambda t, x: field(t, x)[0]


def pair_field(params, gains, ref, frame: Frame, omega: Input = None, copies: int = 1):
  """Vector field of the actual closed loop stacked with virtual copies driven by it.

  The augmented state is (x, x_v1, ..., x_vk) and every copy shares the actual x(t),
  so the frame matrices and the reference sample are evaluated once per call.
  """
  n = ref.eta_d(0.0).size
  forcing = _input(omega, n)
  width = 2 * n

  def field(t, z):
    x = z[:width]
    terms = loop_terms(params, frame, x)
    desired = ref.evaluate(t)
    w = forcing(t, x)
    return np.concatenate(
      [
        virtual_rate(params, gains, frame, z[j * width : (j + 1) * width], terms, desired, w)[0]
        for j in range(copies + 1)
      ]
    )

  return field


def simulate_closed_loop(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  frame: Frame,
  x0,
  cfg: SimConfig,
  omega: Input = None,
) -> TrajectoryLog:
  """Integrate the actual craft under its tracking controller tau(x, x, t).

  Raises:
    NonFiniteState: the run diverged; ``log`` holds the valid prefix.
    SingularAttitude: the pose entered the pitch guard band.
  """
  z0 = state_vector(x0)
  field = annotated_loop_field(params, gains, ref, frame, omega)
  logger.debug('Closed loop (%s frame) over %.9g s', frame.value, cfg.t_end)
  try:
    times, states, laws = integrate_annotated(field, z0, cfg)
  except NonFiniteState as e:
    raise _with_log(
      e, lambda ts, xs: closed_loop_log(params, gains, ref, frame, ts, xs, omega=omega)
    ) from e
  return closed_loop_log(params, gains, ref, frame, times, states, omega=omega, laws=laws)


def simulate_virtual_pair(
  params: VesselParams,
  gains: ControllerGains,
  ref: ReferenceTrajectory,
  x0_actual,
  x_v0,
  cfg: SimConfig,
  frame: Frame = Frame.BODY,
  omega: Input = None,
) -> tuple[TrajectoryLog, TrajectoryLog]:
  """Co-integrate the actual closed loop and one virtual copy on one step schedule."""
  z0 = state_vector(x0_actual)
  zv0 = state_vector(x_v0)
  width = z0.size
  field = pair_field(params, gains, ref, frame, omega)

  def build(times, states):
    actual = states[:, :width]
    virtual = states[:, width:]
    return (
      closed_loop_log(params, gains, ref, frame, times, actual, omega=omega),
      closed_loop_log(params, gains, ref, frame, times, virtual, actual=actual, omega=omega),
    )

  try:
    times, states = integrate(field, np.concatenate([z0, zv0]), cfg)
  except NonFiniteState as e:
    raise _with_log(e, lambda ts, xs: build(ts, xs)[0]) from e
  return build(times, states)


def trapezoid(values: np.ndarray, times: np.ndarray) -> np.ndarray:
  """Cumulative trapezoid integral starting at zero."""
  increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
  return np.concatenate([[0.0], np.cumsum(increments)])


def state_at(log: TrajectoryLog, k: int = -1) -> np.ndarray:
  """Stacked state of row k."""
  return np.concatenate([log.eta[k], log.momentum[k]])


def first_time_below(values: np.ndarray, times: np.ndarray, threshold: float) -> Optional[float]:
  """First time from which ``values`` stays below threshold, or None."""
  above = np.nonzero(values >= threshold)[0]
  if above.size == 0:
    return float(times[0])
  if above[-1] + 1 >= values.size:
    return None
  return float(times[above[-1] + 1])
