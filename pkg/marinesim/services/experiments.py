"""Verification experiments run against a scenario.

Every experiment is a pure function of the scenario and returns an ExperimentResult
carrying its checks, key figures and the files it wrote. Experiments share nothing
mutable, so ``run_experiments`` may run them on a thread pool.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from marinesim.config.scenario_loader import Scenario
from marinesim.errors import EmptySampleSet, GainError
from marinesim.models.control import ControllerGains, Frame
from marinesim.models.reference import RestToRestReference
from marinesim.models.report import CheckResult, Comparison, Experiment, ExperimentResult
from marinesim.models.sim import FLOAT_FORMAT, SimConfig
from marinesim.models.variational import samples_frame
from marinesim.models.vessel import BodyState
from marinesim.services import plots
from marinesim.services.control import (
  initial_state_on_reference,
  momentum_rate,
  position_rate,
  tracking_rate,
  tracking_rate_inertial,
)
from marinesim.services.geometry import (
  kinematic_map,
  kinematic_map_derivative,
  kinematic_map_inverse,
  pose_difference,
  wrap_pose,
)
from marinesim.services.sim import (
  closed_loop_log,
  first_time_below,
  integrate,
  simulate_closed_loop,
  simulate_open_loop,
  trapezoid,
)
from marinesim.services.variational import (
  ErrorMetricStorage,
  contraction_experiment,
  differential_passivity_report,
  dpbc_inequality_check,
  fit_exponential_rate,
  max_dissipation_rate,
  structured_field_residual,
  structured_matrices_body,
  variational_flow_fd,
  virtual_dynamics,
)
from marinesim.services.vessel import (
  body_to_inertial,
  coriolis_body,
  coriolis_inertial,
  dissipated_power,
  inertial_terms,
  kinetic_energy_body,
  mass_matrix_inertial,
  workless_matrix_christoffel,
  workless_matrix_kinematic,
)

logger = logging.getLogger(__name__)

TRACKING_RATIO = 1e-3
RATE_FRACTION = 0.9
STORAGE_RATE_FRACTION = 1.8
IDENTICAL_TOL = 1e-12
SCALED_RATE_TOL = 0.05
PASSIVITY_REL_TOL = 1e-6
LOSSLESS_REL_TOL = 1e-5
STRUCTURE_TOL = 1e-6
EQUIVALENCE_TOL = 1e-6
CROSS_FRAME_TOL = 1e-4
CORIOLIS_TOL = 1e-10
WORKLESS_TOL = 1e-8
SKEW_TOL = 1e-8
KINEMATIC_RATE_TOL = 1e-6
ENERGY_TOL = 1e-5
RK4_RATIO_BOUNDS = (12.0, 20.0)
# alpha_min and 2 beta coincide when Lambda = Pi; compare them up to round-off.
RATE_RTOL = 1e-9

# Central-difference step for M_eta_dot and J_dot.
FD_STEP = 1e-5
ENERGY_STEP = 1e-3
ENERGY_HORIZON = 10.0
IDENTICAL_HORIZON = 5.0
STRUCTURE_SAMPLES = 20


class RunContext(NamedTuple):
  """Inputs shared by every experiment of one invocation."""

  scenario: Scenario
  out_dir: Path
  plots: bool = False


def _require_strict(gains: ControllerGains, experiment: Experiment) -> None:
  if not gains.is_strict:
    raise GainError(
      f'{experiment.value} needs positive definite Lambda and Kd; these gains only '
      'certify a zero convergence rate'
    )


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
  path.parent.mkdir(parents=True, exist_ok=True)
  frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='nan')
  return path


def _fitted(times, values) -> float:
  try:
    return fit_exponential_rate(times, values)
  except EmptySampleSet:
    return math.nan


def _reference_velocities(scenario: Scenario, samples: int = 200) -> np.ndarray:
  """Body velocities of the reference and the initial state, for rate bounds."""
  ref = scenario.reference
  rows = [scenario.vessel.mass_inverse @ scenario.initial_state()[scenario.n :]]
  for t in np.linspace(0.0, scenario.sim.t_end, samples):
    eta_d, eta_d_dot, _ = ref.evaluate(t)
    rows.append(kinematic_map_inverse(eta_d) @ eta_d_dot)
  return np.array(rows)


def _with_horizon(cfg: SimConfig, t_end: float) -> SimConfig:
  return cfg.model_copy(update={'t_end': t_end})


# Tracking


def _track(ctx: RunContext, frame: Frame, experiment: Experiment) -> ExperimentResult:
  sc = ctx.scenario
  params, gains, ref, cfg = sc.vessel, sc.gains, sc.reference, sc.sim
  _require_strict(gains, experiment)

  log = simulate_closed_loop(params, gains, ref, frame, sc.initial_state(frame), cfg)
  if frame is Frame.BODY:
    beta = tracking_rate(params, gains, log.nu)
  else:
    beta = tracking_rate_inertial(params, gains, log.states)

  initial = float(log.err_eta[0])
  if initial > 0.0:
    ratio = float(log.err_eta[-1]) / initial
    # V decays at twice the tracking rate.
    beta_hat = 0.5 * _fitted(log.times, log.V)
    settle = first_time_below(log.err_eta, log.times, TRACKING_RATIO * initial)
  else:
    ratio, beta_hat, settle = 0.0, math.inf, 0.0

  name = experiment.value
  csv = log.to_csv(ctx.out_dir / f'{name}.csv')
  figures = []
  if ctx.plots:
    figures = [
      plots.tracking_figure(log, ref, ctx.out_dir / f'{name}_eta.svg'),
      plots.error_figure(log, ctx.out_dir / f'{name}_errors.svg'),
    ]
  metrics = {'beta': beta, 'final_error': float(log.err_eta[-1]), 'steps': float(cfg.steps)}
  if settle is not None:
    metrics['settle_time'] = settle
  return ExperimentResult(
    experiment=experiment,
    checks=[
      CheckResult(name='error_ratio', value=ratio, threshold=TRACKING_RATIO),
      CheckResult(
        name='fitted_rate',
        value=beta_hat,
        threshold=RATE_FRACTION * beta,
        comparison=Comparison.GE,
      ),
    ],
    metrics=metrics,
    csv=csv,
    figures=figures,
  )


def track_body(ctx: RunContext) -> ExperimentResult:
  """Body-frame controller on the scenario reference."""
  return _track(ctx, Frame.BODY, Experiment.TRACK_BODY)


def track_inertial(ctx: RunContext) -> ExperimentResult:
  """Inertial-frame controller on the scenario reference."""
  return _track(ctx, Frame.INERTIAL, Experiment.TRACK_INERTIAL)


# Contraction


def contraction(ctx: RunContext) -> ExperimentResult:
  """Two virtual copies driven by one actual trajectory, offset in pose."""
  sc = ctx.scenario
  params, gains, ref = sc.vessel, sc.gains, sc.reference
  _require_strict(gains, Experiment.CONTRACTION)
  n = sc.n
  cfg = _with_horizon(sc.sim, sc.contraction_horizon)
  beta = tracking_rate(params, gains, _reference_velocities(sc))

  x0 = sc.initial_state(Frame.BODY)

  def shifted(scale: float) -> np.ndarray:
    z = x0.copy()
    z[:n] = wrap_pose(x0[:n] + scale * sc.contraction_offset)
    return z

  report = contraction_experiment(params, gains, ref, x0, x0, shifted(1.0), cfg)
  scaled = contraction_experiment(params, gains, ref, x0, x0, shifted(0.1), cfg)
  identical = contraction_experiment(
    params,
    gains,
    ref,
    x0,
    shifted(1.0),
    shifted(1.0),
    _with_horizon(sc.sim, min(IDENTICAL_HORIZON, sc.contraction_horizon)),
  )

  rate = report.fitted_rate if report.fitted_rate is not None else math.nan
  scaled_rate = scaled.fitted_rate if scaled.fitted_rate is not None else math.nan
  name = Experiment.CONTRACTION.value
  frame = report.to_frame()
  frame['distance_scaled'] = scaled.distance
  csv = _write_frame(frame, ctx.out_dir / f'{name}.csv')
  figures = []
  if ctx.plots:
    figures = [plots.contraction_figure(report, ctx.out_dir / f'{name}_distance.svg')]
  return ExperimentResult(
    experiment=Experiment.CONTRACTION,
    checks=[
      CheckResult(
        name='fitted_rate', value=rate, threshold=RATE_FRACTION * beta, comparison=Comparison.GE
      ),
      CheckResult(
        name='scaled_rate_mismatch',
        value=abs(scaled_rate / rate - 1.0),
        threshold=SCALED_RATE_TOL,
      ),
      CheckResult(
        name='identical_distance',
        value=float(np.max(identical.distance)),
        threshold=IDENTICAL_TOL,
      ),
    ],
    metrics={'beta': beta, 'initial_distance': float(report.distance[0])},
    csv=csv,
    figures=figures,
  )


# Differential passivity


def passivity(ctx: RunContext) -> ExperimentResult:
  """Finite-difference variational flow of the body-frame virtual system.

  With strict gains the tangent input is zero and W must decay; otherwise the loop
  is differentially lossless and W_dot must match delta_u^T delta_y under a
  sinusoidal tangent input.
  """
  sc = ctx.scenario
  params, gains, ref = sc.vessel, sc.gains, sc.reference
  n = sc.n
  x0 = sc.initial_state(Frame.BODY)
  delta_x0 = np.concatenate([sc.contraction_offset, np.zeros(n)])
  lossless = not gains.is_strict

  delta_omega = None
  if lossless:
    amplitude, frequency = sc.delta_omega_amplitude, sc.delta_omega_frequency

    def delta_omega(t: float) -> np.ndarray:
      return amplitude * math.sin(frequency * t) * np.ones(n)

  samples = variational_flow_fd(
    virtual_dynamics(params, gains, ref, Frame.BODY),
    x0,
    delta_x0,
    None,
    delta_omega,
    sc.variational_horizon,
    sc.variational_h,
    eps=sc.variational_eps,
    storage=ErrorMetricStorage(params, gains, Frame.BODY),
  )
  report = differential_passivity_report(samples, rel_tol=PASSIVITY_REL_TOL)

  stride = max(1, len(samples) // STRUCTURE_SAMPLES)
  residual = max(
    structured_field_residual(params, gains, ref, s.x, s.x + s.delta_x, s.t)
    for s in samples[::stride]
  )

  checks = [CheckResult(name='structure_residual', value=residual, threshold=STRUCTURE_TOL)]
  metrics = {'max_storage': report.max_storage, 'max_gap': report.max_gap}
  if lossless:
    checks.append(
      CheckResult(name='relative_gap', value=report.relative_gap, threshold=LOSSLESS_REL_TOL)
    )
  else:
    beta = tracking_rate(params, gains, np.array([params.mass_inverse @ s.x[n:] for s in samples]))
    decay = report.fitted_decay if report.fitted_decay is not None else math.nan
    checks.extend(
      [
        CheckResult(name='violations', value=float(report.violations), threshold=0.0),
        CheckResult(
          name='fitted_decay',
          value=decay,
          threshold=STORAGE_RATE_FRACTION * beta,
          comparison=Comparison.GE,
        ),
      ]
    )
    metrics['beta'] = beta

  name = Experiment.PASSIVITY.value
  times = np.array([s.t for s in samples])
  states = np.array([s.x for s in samples])
  log = closed_loop_log(params, gains, ref, Frame.BODY, times, states)
  extra = samples_frame(samples)
  csv = log.to_csv(ctx.out_dir / f'{name}.csv', extra=extra)
  figures = []
  if ctx.plots:
    figures = [plots.storage_figure(times, extra['W'], ctx.out_dir / f'{name}_storage.svg')]
  return ExperimentResult(
    experiment=Experiment.PASSIVITY, checks=checks, metrics=metrics, csv=csv, figures=figures
  )


# Frame equivalence


def _excitation_input(n: int) -> Callable[[float, np.ndarray], np.ndarray]:
  """Smooth time-only body-frame force shared by both models."""
  phases = np.linspace(0.0, math.pi, n)
  return lambda t, z: 20.0 * np.sin(0.5 * t + phases)


def _pose_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
  return np.array([np.max(np.abs(pose_difference(x, y))) for x, y in zip(a, b)])


def _cross_frame_gap(sc: Scenario, ref, x0: np.ndarray, cfg: SimConfig) -> np.ndarray:
  params, gains = sc.vessel, sc.gains
  x0_inertial = body_to_inertial(params, BodyState.from_vector(x0)).vector
  body = simulate_closed_loop(params, gains, ref, Frame.BODY, x0, cfg)
  inertial = simulate_closed_loop(params, gains, ref, Frame.INERTIAL, x0_inertial, cfg)
  return _pose_gap(body.eta, inertial.eta)


def equivalence(ctx: RunContext) -> ExperimentResult:
  """Body and inertial models under one physical input, then the two controllers.

  The controller check runs on a straight line at zero heading from a small offset,
  where both laws agree to first order. The gap on the scenario's own reference and
  initial state is reported as ``scenario_cross_frame_gap``: with a non-isotropic Kd,
  Kd M_eta^-1 sigma does not commute with the frame rotation and the laws differ.
  """
  sc = ctx.scenario
  params, gains = sc.vessel, sc.gains
  n = sc.n

  cfg = _with_horizon(sc.sim, sc.equivalence_horizon)
  tau = _excitation_input(n)
  body = simulate_open_loop(params, sc.initial_state(Frame.BODY), cfg, Frame.BODY, tau)
  inertial = simulate_open_loop(
    params, sc.initial_state(Frame.INERTIAL), cfg, Frame.INERTIAL, tau
  )
  open_gap = _pose_gap(body.eta, inertial.eta)

  line = RestToRestReference(
    dof=sc.dof,
    start=np.zeros(3),
    goal=np.array([10.0, 0.0, 0.0]),
    duration=0.5 * sc.cross_frame_horizon,
  )
  offset = sc.cross_frame_offset * np.ones(n)
  cross_cfg = _with_horizon(sc.sim, sc.cross_frame_horizon)
  cross_gap = _cross_frame_gap(
    sc, line, initial_state_on_reference(params, gains, line, Frame.BODY, offset=offset), cross_cfg
  )
  scenario_gap = _cross_frame_gap(sc, sc.reference, sc.initial_state(Frame.BODY), cross_cfg)
  scenario_max = float(np.max(scenario_gap))
  if scenario_max > CROSS_FRAME_TOL:
    logger.info('Body and inertial controllers differ by %.9g on %s', scenario_max, sc.name)

  name = Experiment.EQUIVALENCE.value
  csv = body.to_csv(
    ctx.out_dir / f'{name}.csv',
    extra=pd.DataFrame(
      {'eta_gap': open_gap, 'nu_gap': np.max(np.abs(body.nu - inertial.nu), axis=1)}
    ),
  )
  return ExperimentResult(
    experiment=Experiment.EQUIVALENCE,
    checks=[
      CheckResult(
        name='open_loop_pose_gap', value=float(np.max(open_gap)), threshold=EQUIVALENCE_TOL
      ),
      CheckResult(
        name='cross_frame_pose_gap',
        value=float(np.max(cross_gap)),
        threshold=CROSS_FRAME_TOL,
        scope='straight_line',
      ),
    ],
    metrics={
      'open_loop_velocity_gap': float(np.max(np.abs(body.nu - inertial.nu))),
      'scenario_cross_frame_gap': scenario_max,
    },
    csv=csv,
  )



# Rates


def rates(ctx: RunContext) -> ExperimentResult:
  """Tracking rate and the dPBC dissipation inequality along the body closed loop."""
  sc = ctx.scenario
  params, gains, ref = sc.vessel, sc.gains, sc.reference
  _require_strict(gains, Experiment.RATES)

  log = simulate_closed_loop(
    params, gains, ref, Frame.BODY, sc.initial_state(Frame.BODY), sc.sim
  )
  beta_eta = position_rate(gains)
  beta_p = momentum_rate(params, gains, log.nu)
  beta = min(beta_eta, beta_p)

  alphas, failures = [], 0
  for z in log.states:
    sv = structured_matrices_body(params, gains, z)
    alphas.append(max_dissipation_rate(sv))
    if not dpbc_inequality_check(sv, None, 2.0 * beta).holds:
      failures += 1
  alphas = np.array(alphas)

  inertial_states = np.array(
    [body_to_inertial(params, BodyState.from_vector(z)).vector for z in log.states]
  )
  name = Experiment.RATES.value
  csv = log.to_csv(ctx.out_dir / f'{name}.csv', extra=pd.DataFrame({'alpha_max': alphas}))
  return ExperimentResult(
    experiment=Experiment.RATES,
    checks=[
      CheckResult(
        name='alpha_min',
        value=float(np.min(alphas)),
        threshold=2.0 * beta * (1.0 - RATE_RTOL),
        comparison=Comparison.GE,
      ),
      CheckResult(name='dpbc_failures', value=float(failures), threshold=0.0),
    ],
    metrics={
      'beta': beta,
      'beta_position': beta_eta,
      'beta_momentum': beta_p,
      'beta_inertial': tracking_rate_inertial(params, gains, inertial_states),
    },
    csv=csv,
  )


# Structural invariants


def _random_pose(rng: np.random.Generator, n: int) -> np.ndarray:
  if n == 3:
    return np.array([rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-np.pi, np.pi)])
  return np.concatenate(
    [
      rng.uniform(-10, 10, 3),
      [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-np.pi, np.pi)],
    ]
  )


def _invariant_row(params, eta: np.ndarray, nu: np.ndarray) -> dict[str, float]:
  scale = params.mass_norm
  p_b = params.mass_matrix @ nu
  jac = kinematic_map(eta)
  eta_dot = jac @ nu
  speed_sq = float(eta_dot @ eta_dot)
  terms = inertial_terms(params, eta, kinematic_map_inverse(eta).T @ p_b)

  m_eta_dot = (
    mass_matrix_inertial(params, eta + FD_STEP * eta_dot)
    - mass_matrix_inertial(params, eta - FD_STEP * eta_dot)
  ) / (2.0 * FD_STEP)
  c_eta = coriolis_inertial(params, eta, eta_dot)
  workless = max(
    abs(float(eta_dot @ workless_matrix_christoffel(params, eta, eta_dot) @ eta_dot)),
    abs(float(eta_dot @ workless_matrix_kinematic(params, eta, eta_dot) @ eta_dot)),
  )

  j_dot = kinematic_map_derivative(eta, eta_dot)
  j_dot_fd = (
    kinematic_map(eta + FD_STEP * eta_dot) - kinematic_map(eta - FD_STEP * eta_dot)
  ) / (2.0 * FD_STEP)
  return {
    'coriolis_power': abs(float(nu @ coriolis_body(params, nu) @ nu)) / (scale * float(nu @ nu)),
    's_h_power': abs(float(eta_dot @ terms.s_h @ eta_dot)) / (scale * speed_sq),
    'workless_s_l': workless / (scale * speed_sq),
    'skew_identity': abs(float(eta_dot @ (m_eta_dot - 2.0 * c_eta) @ eta_dot))
    / (scale * speed_sq),
    'j_dot_error': float(np.max(np.abs(j_dot - j_dot_fd))) / max(1.0, float(np.max(np.abs(j_dot)))),
  }


def _energy_balance(sc: Scenario) -> float:
  """max |H(t) - H(0) + int nu^T D nu| relative to the initial energy, tau = 0."""
  params, n = sc.vessel, sc.n
  nu0 = np.linspace(1.0, 0.2, n)
  x0 = np.concatenate([sc.initial_state()[:n], params.mass_matrix @ nu0])
  cfg = SimConfig(h=ENERGY_STEP, t_end=ENERGY_HORIZON)
  log = simulate_open_loop(params, x0, cfg, Frame.BODY)
  dissipated = trapezoid(np.array([dissipated_power(params, nu) for nu in log.nu]), log.times)
  balance = log.H - log.H[0] + dissipated
  scale = max(abs(float(log.H[0])), kinetic_energy_body(params, x0[n:]))
  return float(np.max(np.abs(balance))) / scale


def rk4_error_ratio() -> float:
  """Global error ratio of RK4 on x' = -x at t = 1 between h = 0.1 and h = 0.05."""
  errors = []
  for h in (0.1, 0.05):
    times, states = integrate(lambda t, x: -x, [1.0], SimConfig(h=h, t_end=1.0))
    errors.append(abs(float(states[-1, 0]) - math.exp(-times[-1])))
  return errors[0] / errors[1]


def invariants(ctx: RunContext) -> ExperimentResult:
  """Worklessness, skew identity, J_dot, energy balance and integrator order."""
  sc = ctx.scenario
  params, n = sc.vessel, sc.n
  rng = np.random.default_rng(sc.seed)
  rows = [
    _invariant_row(params, _random_pose(rng, n), rng.uniform(-2.0, 2.0, n))
    for _ in range(sc.invariant_samples)
  ]
  table = pd.DataFrame(rows)
  energy = _energy_balance(sc)
  ratio = rk4_error_ratio()
  low, high = RK4_RATIO_BOUNDS

  name = Experiment.INVARIANTS.value
  csv = _write_frame(table, ctx.out_dir / f'{name}.csv')
  return ExperimentResult(
    experiment=Experiment.INVARIANTS,
    checks=[
      CheckResult(
        name='coriolis_power', value=float(table['coriolis_power'].max()), threshold=CORIOLIS_TOL
      ),
      CheckResult(name='s_h_power', value=float(table['s_h_power'].max()), threshold=WORKLESS_TOL),
      CheckResult(
        name='workless_s_l', value=float(table['workless_s_l'].max()), threshold=CORIOLIS_TOL
      ),
      CheckResult(
        name='skew_identity', value=float(table['skew_identity'].max()), threshold=SKEW_TOL
      ),
      CheckResult(
        name='j_dot_error', value=float(table['j_dot_error'].max()), threshold=KINEMATIC_RATE_TOL
      ),
      CheckResult(name='energy_balance', value=energy, threshold=ENERGY_TOL),
      CheckResult(name='rk4_ratio_low', value=ratio, threshold=low, comparison=Comparison.GE),
      CheckResult(name='rk4_ratio_high', value=ratio, threshold=high),
    ],
    metrics={'samples': float(len(rows))},
    csv=csv,
  )


EXPERIMENTS: dict[Experiment, Callable[[RunContext], ExperimentResult]] = {
  Experiment.TRACK_BODY: track_body,
  Experiment.TRACK_INERTIAL: track_inertial,
  Experiment.CONTRACTION: contraction,
  Experiment.PASSIVITY: passivity,
  Experiment.EQUIVALENCE: equivalence,
  Experiment.RATES: rates,
  Experiment.INVARIANTS: invariants,
}


def run_experiment(experiment: Experiment, ctx: RunContext) -> ExperimentResult:
  logger.info('Running %s on %s', experiment.value, ctx.scenario.name)
  result = EXPERIMENTS[experiment](ctx)
  for failure in result.failures:
    logger.warning('Check failed: %s', failure.line(experiment.value))
  logger.info('%s finished: %s', experiment.value, 'pass' if result.passed else 'fail')
  return result


def run_experiments(
  scenario: Scenario,
  out_dir: Path,
  with_plots: bool = False,
  jobs: int = 1,
  experiments: Optional[Sequence[Experiment]] = None,
) -> list[ExperimentResult]:
  """Run the chosen experiments (default: the scenario's list) in scenario order.

  Raises:
    ConfigError: the scenario is inconsistent.
    GainError: an experiment needs a positive rate the gains cannot certify.
    NonFiniteState: a simulation diverged.
  """
  out_dir = Path(out_dir)
  out_dir.mkdir(parents=True, exist_ok=True)
  ctx = RunContext(scenario=scenario.validate(), out_dir=out_dir, plots=with_plots)
  chosen = list(experiments) if experiments is not None else scenario.experiments
  if jobs <= 1 or len(chosen) <= 1:
    return [run_experiment(e, ctx) for e in chosen]
  with ThreadPoolExecutor(max_workers=jobs) as pool:
    futures = [pool.submit(run_experiment, e, ctx) for e in chosen]
    return [future.result() for future in futures]


def summary_text(scenario: Scenario, results: Sequence[ExperimentResult]) -> str:
  """One ``name=value`` line per check and metric, closed by the overall status."""
  lines = [f'scenario={scenario.name}']
  for result in results:
    lines.extend(result.summary_lines())
  status = 'pass' if all(r.passed for r in results) else 'fail'
  lines.append(f'status={status}')
  return '\n'.join(lines) + '\n'


def write_summary(scenario: Scenario, results: Sequence[ExperimentResult], out_dir: Path) -> Path:
  path = Path(out_dir) / 'summary.txt'
  path.parent.mkdir(parents=True, exist_ok=True)
  path.write_text(summary_text(scenario, results), encoding='utf-8')
  return path
