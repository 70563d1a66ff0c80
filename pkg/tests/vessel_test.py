import numpy as np
import pytest
from pydantic import ValidationError

from marinesim.models.geometry import Dof
from marinesim.models.vessel import (
  BodyState,
  CustomRestoring,
  HydrostaticRestoring,
  InertialState,
  VesselParams,
)
from marinesim.services.geometry import (
  kinematic_map,
  kinematic_map_inverse_derivative,
  rotation_zyx,
)
from marinesim.services.vessel import (
  body_ph_dynamics,
  body_to_inertial,
  coriolis_body,
  coriolis_inertial,
  damping_body,
  dissipated_power,
  hamiltonian_body,
  hamiltonian_inertial,
  inertial_input,
  inertial_matrices,
  inertial_ph_dynamics,
  inertial_to_body,
  kinetic_energy_body,
  mass_matrix_inertial,
  mass_matrix_inertial_rate,
  restoring_force,
  restoring_gradient,
  restoring_potential,
  rigid_body_mass_matrix,
  workless_matrix_christoffel,
  workless_matrix_kinematic,
)

SPATIAL_ETA = np.array([1.0, -2.0, 3.0, 0.2, -0.3, 1.1])
SPATIAL_NU = np.array([1.2, -0.4, 0.3, 0.1, -0.2, 0.25])


def test_hamiltonian_of_pure_surge(uuv):
  x = np.concatenate([np.zeros(3), uuv.mass_matrix @ [1.0, 0.0, 0.0]])
  assert hamiltonian_body(uuv, x) == pytest.approx(145.0)


def test_quadratic_damping_adds_cross_terms(uuv):
  np.testing.assert_allclose(damping_body(uuv, [1.0, 1.0, 0.0]), np.diag([363.0, 777.0, 105.0]))
  np.testing.assert_allclose(damping_body(uuv, [-1.0, -1.0, 0.0]), np.diag([363.0, 777.0, 105.0]))
  assert uuv.d_min == pytest.approx(95.0)
  assert dissipated_power(uuv, [1.0, 0.0, 0.0]) == pytest.approx(95.0)


@pytest.mark.parametrize('craft', ['uuv', 'spatial_craft'])
def test_coriolis_is_skew_and_workless(craft, request, rng):
  params = request.getfixturevalue(craft)
  nu = rng.normal(size=params.n)
  c = coriolis_body(params, nu)
  np.testing.assert_allclose(c, -c.T, atol=1e-12)
  assert abs(nu @ c @ nu) < 1e-10 * params.mass_norm


def test_mass_matrix_must_be_positive_definite():
  with pytest.raises(ValidationError, match='positive definite'):
    VesselParams(
      dof=Dof.PLANAR3,
      mass_matrix=[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
      damping_linear=[1.0, 1.0, 1.0],
    )


def test_mass_matrix_must_be_symmetric():
  with pytest.raises(ValidationError, match='symmetric'):
    VesselParams(
      dof=Dof.PLANAR3,
      mass_matrix=[[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
      damping_linear=[1.0, 1.0, 1.0],
    )


def test_negative_damping_and_planar_restoring_are_rejected():
  with pytest.raises(ValidationError, match='semidefinite'):
    VesselParams(dof=Dof.PLANAR3, mass_matrix=[1.0, 1.0, 1.0], damping_linear=[1.0, -1.0, 1.0])
  with pytest.raises(ValidationError, match='restoring'):
    VesselParams(
      dof=Dof.PLANAR3,
      mass_matrix=[1.0, 1.0, 1.0],
      damping_linear=[1.0, 1.0, 1.0],
      restoring=HydrostaticRestoring(weight=1.0, buoyancy=1.0),
    )


def test_rigid_body_inertia_is_symmetric():
  m = rigid_body_mass_matrix(10.0, np.diag([1.0, 2.0, 3.0]), [0.1, 0.0, 0.2])
  np.testing.assert_allclose(m, m.T)
  assert np.all(np.linalg.eigvalsh(m) > 0.0)


def test_restoring_gradient_matches_potential(spatial_craft):
  step = 1e-6
  numeric = np.array(
    [
      (
        restoring_potential(spatial_craft, SPATIAL_ETA + step * e)
        - restoring_potential(spatial_craft, SPATIAL_ETA - step * e)
      )
      / (2.0 * step)
      for e in np.eye(6)
    ]
  )
  np.testing.assert_allclose(restoring_gradient(spatial_craft, SPATIAL_ETA), numeric, atol=1e-5)
  upright = restoring_force(spatial_craft, np.zeros(6))
  assert upright[2] == pytest.approx(spatial_craft.restoring.buoyancy - 1177.0)
  np.testing.assert_allclose(upright[3:], 0.0, atol=1e-12)


def test_weight_acts_at_the_craft_center_of_gravity(spatial_craft):
  centered = spatial_craft.model_copy(update={'r_gb': np.zeros(3)})
  lever = rotation_zyx(*SPATIAL_ETA[3:])[2] @ spatial_craft.r_gb
  gap = restoring_potential(spatial_craft, SPATIAL_ETA) - restoring_potential(centered, SPATIAL_ETA)
  assert gap == pytest.approx(-spatial_craft.restoring.weight * lever)
  assert 'r_gb' not in HydrostaticRestoring.model_fields


def test_body_energy_rate_is_dissipated_power(spatial_craft):
  x = np.concatenate([SPATIAL_ETA, spatial_craft.mass_matrix @ SPATIAL_NU])
  rate = body_ph_dynamics(spatial_craft, x, np.zeros(6))
  h_dot = restoring_gradient(spatial_craft, SPATIAL_ETA) @ rate[:6] + SPATIAL_NU @ rate[6:]
  assert h_dot == pytest.approx(-dissipated_power(spatial_craft, SPATIAL_NU), rel=1e-10)


def test_frame_change_preserves_energy(spatial_craft):
  body = BodyState(eta=SPATIAL_ETA, p_b=spatial_craft.mass_matrix @ SPATIAL_NU)
  inertial = body_to_inertial(spatial_craft, body)
  assert isinstance(inertial, InertialState)
  assert hamiltonian_inertial(spatial_craft, inertial) == pytest.approx(
    hamiltonian_body(spatial_craft, body), rel=1e-12
  )
  np.testing.assert_allclose(inertial_to_body(spatial_craft, inertial).p_b, body.p_b, atol=1e-10)


@pytest.mark.parametrize('craft', ['uuv', 'spatial_craft'])
def test_inertial_model_is_the_body_model_in_new_coordinates(craft, request, rng):
  params = request.getfixturevalue(craft)
  n = params.n
  eta = SPATIAL_ETA if n == 6 else np.array([1.0, 2.0, 0.8])
  nu = SPATIAL_NU if n == 6 else np.array([0.7, -0.2, 0.15])
  tau = rng.normal(size=n) * 10.0
  p_b = params.mass_matrix @ nu
  body = body_ph_dynamics(params, np.concatenate([eta, p_b]), tau)
  inertial = body_to_inertial(params, BodyState(eta=eta, p_b=p_b))
  rate = inertial_ph_dynamics(params, inertial, inertial_input(eta, tau))

  eta_dot = kinematic_map(eta) @ nu
  j_inv_dot = kinematic_map_inverse_derivative(eta, eta_dot)
  j_inv = np.linalg.inv(kinematic_map(eta))
  expected_p_dot = j_inv.T @ body[n:] + j_inv_dot.T @ p_b
  np.testing.assert_allclose(rate[:n], body[:n], atol=1e-10)
  np.testing.assert_allclose(rate[n:], expected_p_dot, rtol=1e-9, atol=1e-9)


def test_inertial_matrices_structure(spatial_craft):
  p = body_to_inertial(
    spatial_craft, BodyState(eta=SPATIAL_ETA, p_b=spatial_craft.mass_matrix @ SPATIAL_NU)
  ).p
  mats = inertial_matrices(spatial_craft, SPATIAL_ETA, p)
  np.testing.assert_allclose(mats.s_h, -mats.s_h.T, atol=1e-12)
  np.testing.assert_allclose(mats.m_eta @ mats.m_eta_inv, np.eye(6), atol=1e-9)
  np.testing.assert_allclose(mats.e_eta + mats.e_eta.T, -mats.m_eta_dot, atol=1e-9)
  assert np.all(np.linalg.eigvalsh(mats.d_h) > 0.0)


def test_inertial_mass_rate_matches_finite_difference(spatial_craft):
  eta_dot = kinematic_map(SPATIAL_ETA) @ SPATIAL_NU
  step = 1e-6
  numeric = (
    mass_matrix_inertial(spatial_craft, SPATIAL_ETA + step * eta_dot)
    - mass_matrix_inertial(spatial_craft, SPATIAL_ETA - step * eta_dot)
  ) / (2.0 * step)
  np.testing.assert_allclose(
    mass_matrix_inertial_rate(spatial_craft, SPATIAL_ETA, eta_dot), numeric, atol=1e-6
  )


def test_workless_matrices_and_skew_identity(spatial_craft):
  eta_dot = kinematic_map(SPATIAL_ETA) @ SPATIAL_NU
  scale = spatial_craft.mass_norm * float(eta_dot @ eta_dot)
  for workless in (workless_matrix_christoffel, workless_matrix_kinematic):
    s = workless(spatial_craft, SPATIAL_ETA, eta_dot)
    assert abs(eta_dot @ s @ eta_dot) < 1e-12 * scale
  m_dot = mass_matrix_inertial_rate(spatial_craft, SPATIAL_ETA, eta_dot)
  c_eta = coriolis_inertial(spatial_craft, SPATIAL_ETA, eta_dot)
  assert abs(eta_dot @ (m_dot - 2.0 * c_eta) @ eta_dot) < 1e-10 * scale


def test_custom_restoring_enters_energy_and_forces(spatial_craft):
  spring = CustomRestoring(
    potential=lambda eta: 50.0 * eta[2] ** 2,
    gradient=lambda eta: np.array([0.0, 0.0, 100.0 * eta[2], 0.0, 0.0, 0.0]),
  )
  craft = spatial_craft.model_copy(update={'restoring': spring})
  eta = np.array([1.0, 2.0, 0.3, 0.0, 0.0, 0.4])
  p_b = craft.mass_matrix @ np.array([0.5, 0.0, 0.0, 0.0, 0.0, 0.1])
  x = BodyState(eta=eta, p_b=p_b)
  assert hamiltonian_body(craft, x) == pytest.approx(kinetic_energy_body(craft, p_b) + 4.5)
  np.testing.assert_allclose(restoring_force(craft, eta), [0.0, 0.0, 30.0, 0.0, 0.0, 0.0])
