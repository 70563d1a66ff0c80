import math

import numpy as np
import pytest

from marinesim.errors import DivergedPerturbation, EmptySampleSet
from marinesim.models.control import Frame
from marinesim.models.sim import SimConfig
from marinesim.models.variational import PassivityReport, samples_frame
from marinesim.services.control import initial_state_on_reference
from marinesim.services.variational import (
  ErrorMetricStorage,
  EuclideanStorage,
  contraction_experiment,
  differential_passivity_report,
  dpbc_inequality_check,
  fit_exponential_rate,
  max_dissipation_rate,
  structured_field_residual,
  structured_matrices_body,
  structured_vector_field,
  variational_flow_fd,
  virtual_dynamics,
)

OFFSET = np.array([-0.5, 0.5, 0.1])
TANGENT = np.array([0.5, -0.5, 0.1, 0.0, 0.0, 0.0])


def _pendulum(t, x, u, x_nominal):
  return np.array([x[1], -math.sin(x[0]) - 0.1 * x[1] + u[0]])


def _sine_input(t):
  return np.array([math.sin(0.5 * t)] * 3)


def test_structured_matrices_have_the_expected_symmetry(uuv, gains, circle):
  x = initial_state_on_reference(uuv, gains, circle, offset=OFFSET)
  sv = structured_matrices_body(uuv, gains, x)
  np.testing.assert_allclose(sv.Xi, -sv.Xi.T, atol=1e-12)
  np.testing.assert_allclose(sv.Upsilon, sv.Upsilon.T)
  np.testing.assert_allclose(sv.Psi[3:], np.eye(3))


def test_dissipation_rate_at_rest_is_twice_the_position_rate(uuv, gains):
  sv = structured_matrices_body(uuv, gains, np.zeros(6))
  assert max_dissipation_rate(sv) == pytest.approx(0.4)
  assert dpbc_inequality_check(sv, None, 0.4).holds
  check = dpbc_inequality_check(sv, None, 0.5)
  assert not check.holds
  assert check.margin == pytest.approx(0.02)


@pytest.mark.parametrize(
  'craft,craft_gains', [('uuv', 'gains'), ('lossless_uuv', 'lossless_gains')]
)
def test_closed_loop_matches_its_structured_form(craft, craft_gains, circle, rng, request):
  params = request.getfixturevalue(craft)
  g = request.getfixturevalue(craft_gains)
  for t in (0.0, 3.0, 17.0):
    x = initial_state_on_reference(params, g, circle, t=t, offset=rng.normal(size=3) * 0.3)
    x_v = x + rng.normal(size=6) * np.array([0.3, 0.3, 0.1, 20.0, 20.0, 5.0])
    omega = rng.normal(size=3)
    assert structured_field_residual(params, g, circle, x, x_v, t, omega) < 1e-9


def test_finite_difference_tangent_is_first_order_in_eps():
  finals = []
  for eps in (1e-4, 5e-5, 2.5e-5):
    samples = variational_flow_fd(
      _pendulum, [1.0, 0.0], [1.0, 0.0], None, None, horizon=5.0, h=0.01, eps=eps, inputs=1
    )
    finals.append(samples[-1].delta_x)
  ratio = np.linalg.norm(finals[2] - finals[1]) / np.linalg.norm(finals[1] - finals[0])
  assert 0.3 <= ratio <= 0.7


def test_eps_outside_the_admissible_range_is_rejected():
  with pytest.raises(ValueError, match='eps'):
    variational_flow_fd(_pendulum, [1.0, 0.0], [1.0, 0.0], None, None, 1.0, 0.01, eps=1e-3)


def test_growing_tangent_is_reported():
  def unstable(t, x, u, x_nominal):
    return 3.0 * x

  with pytest.raises(DivergedPerturbation):
    variational_flow_fd(unstable, [1.0, 0.0], [1.0, 1.0], None, None, horizon=6.0, h=0.01)


def test_samples_frame_lists_storage_columns():
  samples = variational_flow_fd(
    _pendulum, [0.2, 0.0], [1.0, 0.0], None, None, 10.0, 0.01, storage=EuclideanStorage(1)
  )
  frame = samples_frame(samples)
  assert list(frame.columns) == ['W', 'W_dot', 'gap']
  assert frame['W'].iloc[0] == pytest.approx(0.5)


def test_strict_loop_storage_decays(uuv, gains, circle):
  x0 = initial_state_on_reference(uuv, gains, circle, offset=OFFSET)
  samples = variational_flow_fd(
    virtual_dynamics(uuv, gains, circle, Frame.BODY),
    x0,
    TANGENT,
    None,
    None,
    horizon=5.0,
    h=0.005,
    storage=ErrorMetricStorage(uuv, gains),
  )
  report = differential_passivity_report(samples)
  assert report.violations == 0
  assert report.max_gap < 0.0
  assert report.fitted_decay >= 1.8 * 0.2


def test_lossless_loop_balances_storage_and_supply(lossless_uuv, lossless_gains, circle):
  x0 = initial_state_on_reference(lossless_uuv, lossless_gains, circle)
  samples = variational_flow_fd(
    virtual_dynamics(lossless_uuv, lossless_gains, circle, Frame.BODY),
    x0,
    TANGENT,
    None,
    _sine_input,
    horizon=5.0,
    h=0.005,
    storage=ErrorMetricStorage(lossless_uuv, lossless_gains),
  )
  report = differential_passivity_report(samples)
  assert report.fitted_decay is None
  assert report.relative_gap <= 1e-5
  assert report.is_lossless()


def test_fit_exponential_rate():
  t = np.linspace(0.0, 10.0, 101)
  assert fit_exponential_rate(t, 3.0 * np.exp(-0.7 * t)) == pytest.approx(0.7)
  with pytest.raises(EmptySampleSet):
    fit_exponential_rate(t, np.zeros_like(t))
  with pytest.raises(EmptySampleSet):
    fit_exponential_rate([], [])


def test_passivity_report_needs_samples():
  with pytest.raises(EmptySampleSet):
    differential_passivity_report([])
  report = PassivityReport(samples=3, violations=0, max_gap=0.0, max_abs_gap=1e-3, max_storage=10.0)
  assert report.relative_gap == pytest.approx(1e-4)
  assert not report.is_lossless()


def test_virtual_copies_contract(uuv, gains, circle):
  x0 = initial_state_on_reference(uuv, gains, circle, offset=OFFSET)
  shifted = x0.copy()
  shifted[:3] += np.array([0.5, -0.5, 0.1])
  cfg = SimConfig(h=0.01, t_end=8.0)
  report = contraction_experiment(uuv, gains, circle, x0, x0, shifted, cfg)
  assert report.distance[0] > 0.0
  assert np.all(np.diff(report.distance) <= 0.0)
  assert report.fitted_rate >= 0.9 * 0.2
  assert list(report.to_frame().columns) == ['t', 'distance']

  swapped = contraction_experiment(uuv, gains, circle, x0, shifted, x0, cfg)
  np.testing.assert_allclose(swapped.distance, report.distance, rtol=1e-9)

  identical = contraction_experiment(uuv, gains, circle, x0, shifted, shifted, cfg)
  np.testing.assert_array_equal(identical.distance, 0.0)
  assert identical.fitted_rate is None


def test_structured_field_routes_input_to_momentum(uuv, gains):
  sv = structured_matrices_body(uuv, gains, np.zeros(6))
  delta_u = np.array([1.0, -2.0, 0.5])
  np.testing.assert_allclose(
    structured_vector_field(sv, np.zeros(6), delta_u), np.concatenate([np.zeros(3), delta_u])
  )
  tangent = np.array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
  # A position error alone decays through Lambda and pushes back through Pi.
  np.testing.assert_allclose(
    structured_vector_field(sv, tangent, np.zeros(3)), [-0.06, 0.0, 0.0, -0.06, 0.0, 0.0]
  )
