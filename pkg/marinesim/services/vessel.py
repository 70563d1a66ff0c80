"""Port-Hamiltonian craft dynamics in the body and inertial frames."""

import logging
from typing import NamedTuple

import numpy as np

from marinesim.models.geometry import Dof
from marinesim.models.vessel import (
  BodyState,
  CustomRestoring,
  HydrostaticRestoring,
  InertialMatrices,
  InertialState,
  VesselParams,
)
from marinesim.services.geometry import (
  as_vector,
  check_attitude,
  kinematic_map,
  kinematic_map_inverse,
  kinematic_map_inverse_partials,
  kinematic_map_partials,
  rotation_zyx,
  skew,
)

logger = logging.getLogger(__name__)

_E3 = np.array([0.0, 0.0, 1.0])


def rigid_body_mass_matrix(mass: float, inertia, r_g) -> np.ndarray:
  """6-DOF rigid-body inertia [[m I, -m S(r_g)], [m S(r_g), I_b]].

  Args:
    mass: Dry mass in kg.
    inertia: 3x3 inertia tensor about the body origin.
    r_g: Center of gravity relative to the body origin.
  """
  s = skew(r_g)
  out = np.zeros((6, 6))
  out[:3, :3] = mass * np.eye(3)
  out[:3, 3:] = -mass * s
  out[3:, :3] = mass * s
  out[3:, 3:] = np.asarray(inertia, dtype=float)
  return out


def _split(x) -> tuple[np.ndarray, np.ndarray]:
  z = as_vector(x) if not isinstance(x, (BodyState, InertialState)) else x.vector
  n = z.size // 2
  return z[:n], z[n:]


# Restoring


def restoring_potential(params: VesselParams, eta) -> float:
  """P(eta)."""
  r = params.restoring
  eta = as_vector(eta)
  if isinstance(r, HydrostaticRestoring):
    rot = rotation_zyx(*eta[3:])
    lever = r.buoyancy * r.r_bb - r.weight * params.r_gb
    return float((r.buoyancy - r.weight) * eta[2] + _E3 @ rot @ lever)
  if isinstance(r, CustomRestoring):
    return float(r.potential(eta))
  return 0.0


def restoring_gradient(params: VesselParams, eta) -> np.ndarray:
  """dP/d eta, analytic for the hydrostatic model."""
  r = params.restoring
  eta = as_vector(eta)
  if isinstance(r, HydrostaticRestoring):
    grad = np.zeros(6)
    grad[2] = r.buoyancy - r.weight
    lever = r.buoyancy * r.r_bb - r.weight * params.r_gb
    partials = kinematic_map_partials(eta)
    for k in range(3, 6):
      grad[k] = _E3 @ partials[k][:3, :3] @ lever
    return grad
  if isinstance(r, CustomRestoring):
    return np.asarray(r.gradient(eta), dtype=float)
  return np.zeros(eta.size)


def restoring_force(params: VesselParams, eta) -> np.ndarray:
  """Body-frame restoring vector g(eta) = J^T(eta) dP/d eta."""
  return kinematic_map(eta).T @ restoring_gradient(params, eta)


# Body frame


def coriolis_body(params: VesselParams, nu) -> np.ndarray:
  """Skew-symmetric Coriolis-centripetal matrix from Kirchhoff's equations."""
  nu = as_vector(nu)
  a = params.mass_matrix @ nu
  if params.dof is Dof.PLANAR3:
    return np.array(
      [
        [0.0, 0.0, -a[1]],
        [0.0, 0.0, a[0]],
        [a[1], -a[0], 0.0],
      ]
    )
  s1, s2 = skew(a[:3]), skew(a[3:])
  out = np.zeros((6, 6))
  out[:3, 3:] = -s1
  out[3:, :3] = -s1
  out[3:, 3:] = -s2
  return out


def damping_body(params: VesselParams, nu) -> np.ndarray:
  """Diagonal damping D(nu) = diag(d_lin + d_quad |nu|)."""
  nu = as_vector(nu)
  return np.diag(params.damping_linear + params.d_quad @ np.abs(nu))


def dissipated_power(params: VesselParams, nu) -> float:
  """nu^T D(nu) nu."""
  nu = as_vector(nu)
  return float(nu @ damping_body(params, nu) @ nu)


def body_velocity(params: VesselParams, p_b) -> np.ndarray:
  """nu = M^-1 p_b."""
  return params.mass_inverse @ as_vector(p_b)


def body_ph_dynamics(params: VesselParams, x, tau) -> np.ndarray:
  """Vector field of the body-frame model.

  eta_dot = J(eta) M^-1 p_b and
  p_b_dot = -J^T dP/d eta - (C(nu) + D(nu)) nu + tau.

  Args:
    params: Craft parameters.
    x: BodyState or stacked vector (eta, p_b).
    tau: Body-frame generalized force.

  Returns:
    The stacked time derivative (eta_dot, p_b_dot).
  """
  eta, p_b = _split(x)
  nu = params.mass_inverse @ p_b
  jac = kinematic_map(eta)
  p_dot = (
    -jac.T @ restoring_gradient(params, eta)
    - (coriolis_body(params, nu) + damping_body(params, nu)) @ nu
    + as_vector(tau)
  )
  return np.concatenate([jac @ nu, p_dot])


def kinetic_energy_body(params: VesselParams, p_b) -> float:
  p_b = as_vector(p_b)
  return 0.5 * float(p_b @ params.mass_inverse @ p_b)


def hamiltonian_body(params: VesselParams, x) -> float:
  """H = 1/2 p_b^T M^-1 p_b + P(eta)."""
  eta, p_b = _split(x)
  return kinetic_energy_body(params, p_b) + restoring_potential(params, eta)


# Frame change


def body_to_inertial(params: VesselParams, x: BodyState) -> InertialState:
  """Map (eta, p_b) to (eta, J^-T(eta) p_b)."""
  eta, p_b = _split(x)
  return InertialState(eta=eta, p=kinematic_map_inverse(eta).T @ p_b)


def inertial_to_body(params: VesselParams, x: InertialState) -> BodyState:
  """Map (eta, p) to (eta, J^T(eta) p)."""
  eta, p = _split(x)
  return BodyState(eta=eta, p_b=kinematic_map(eta).T @ p)


def inertial_input(eta, tau) -> np.ndarray:
  """tau_eta = J^-T(eta) tau for a body-frame force tau."""
  return kinematic_map_inverse(eta).T @ as_vector(tau)


# Inertial frame


def mass_matrix_inertial(params: VesselParams, eta) -> np.ndarray:
  """M_eta = J^-T M J^-1."""
  j_inv = kinematic_map_inverse(eta)
  m_eta = j_inv.T @ params.mass_matrix @ j_inv
  return 0.5 * (m_eta + m_eta.T)


def mass_matrix_inertial_partials(params: VesselParams, eta) -> np.ndarray:
  """Stack of dM_eta/d eta_k."""
  j_inv = kinematic_map_inverse(eta)
  d_j_inv = kinematic_map_inverse_partials(eta)
  half = np.einsum('kji,jl,lm->kim', d_j_inv, params.mass_matrix, j_inv)
  return half + np.transpose(half, (0, 2, 1))


def mass_matrix_inertial_rate(params: VesselParams, eta, eta_dot) -> np.ndarray:
  """Analytic M_eta_dot along eta_dot."""
  return np.einsum('kij,k->ij', mass_matrix_inertial_partials(params, eta), as_vector(eta_dot))


class InertialTerms(NamedTuple):
  """Array-only counterpart of InertialMatrices for the integration loop."""

  m_eta: np.ndarray
  m_eta_inv: np.ndarray
  d_h: np.ndarray
  s_h: np.ndarray
  m_eta_dot: np.ndarray
  e_eta: np.ndarray
  g_eta: np.ndarray


def inertial_terms(params: VesselParams, eta, p) -> InertialTerms:
  """Inertial-frame matrices of the alternative port-Hamiltonian form.

  S_H is J^-T C J^-1 + 1/2 (A^T - A) with A = (dJ^-T/d eta) J^T p, plus the workless
  rank-two term 1/2 (r eta_dot^T - eta_dot r^T) / |eta_dot|^2 where
  r = M_eta_dot eta_dot - (A + A^T) eta_dot. E_eta = S_H - 1/2 M_eta_dot.

  Note: the rank-two term is an addition to the two-term S_H; without it the
  inertial model drifts from the body model along eta_dot.

  Raises:
    SingularAttitude: eta lies in the pitch guard band.
  """
  eta = as_vector(eta)
  p = as_vector(p)
  jac = kinematic_map(eta)
  j_inv = kinematic_map_inverse(eta)
  d_j_inv = kinematic_map_inverse_partials(eta)
  m_eta = j_inv.T @ params.mass_matrix @ j_inv
  m_eta = 0.5 * (m_eta + m_eta.T)
  m_eta_inv = jac @ params.mass_inverse @ jac.T
  m_eta_inv = 0.5 * (m_eta_inv + m_eta_inv.T)
  eta_dot = m_eta_inv @ p
  p_b = jac.T @ p
  nu = params.mass_inverse @ p_b

  d_h = j_inv.T @ damping_body(params, nu) @ j_inv
  half = np.transpose(d_j_inv, (0, 2, 1)) @ (params.mass_matrix @ j_inv)
  m_eta_dot = np.einsum('kij,k->ij', half + np.transpose(half, (0, 2, 1)), eta_dot)
  a = np.einsum('kji,j->ik', d_j_inv, p_b)
  s_h = j_inv.T @ coriolis_body(params, nu) @ j_inv + 0.5 * (a.T - a)
  speed_sq = float(eta_dot @ eta_dot)
  if speed_sq > 0.0:
    r = m_eta_dot @ eta_dot - (a + a.T) @ eta_dot
    s_h = s_h + 0.5 * (np.outer(r, eta_dot) - np.outer(eta_dot, r)) / speed_sq
  s_h = 0.5 * (s_h - s_h.T)
  return InertialTerms(
    m_eta=m_eta,
    m_eta_inv=m_eta_inv,
    d_h=0.5 * (d_h + d_h.T),
    s_h=s_h,
    m_eta_dot=m_eta_dot,
    e_eta=s_h - 0.5 * m_eta_dot,
    g_eta=restoring_gradient(params, eta),
  )


def inertial_matrices(params: VesselParams, eta, p) -> InertialMatrices:
  """Validated inertial-frame matrices at (eta, p); see ``inertial_terms``."""
  return InertialMatrices(**inertial_terms(params, eta, p)._asdict())


def inertial_ph_dynamics(params: VesselParams, x, tau_eta) -> np.ndarray:
  """Vector field of the inertial-frame model.

  eta_dot = M_eta^-1 p and p_dot = -dP/d eta - (E_eta + D_H) M_eta^-1 p + tau_eta.
  """
  eta, p = _split(x)
  mats = inertial_terms(params, eta, p)
  eta_dot = mats.m_eta_inv @ p
  p_dot = -mats.g_eta - (mats.e_eta + mats.d_h) @ eta_dot + as_vector(tau_eta)
  return np.concatenate([eta_dot, p_dot])


def hamiltonian_inertial(params: VesselParams, x) -> float:
  """H_eta = 1/2 p^T M_eta^-1 p + P(eta)."""
  eta, p = _split(x)
  eta_dot = kinematic_map(eta) @ params.mass_inverse @ kinematic_map(eta).T @ p
  return 0.5 * float(p @ eta_dot) + restoring_potential(params, eta)


def coriolis_inertial(params: VesselParams, eta, eta_dot) -> np.ndarray:
  """C_eta = J^-T [C(J^-1 eta_dot) - M J^-1 J_dot] J^-1 of the Lagrange form."""
  eta = as_vector(eta)
  eta_dot = as_vector(eta_dot)
  j_inv = kinematic_map_inverse(eta)
  nu = j_inv @ eta_dot
  j_dot = np.einsum('kij,k->ij', kinematic_map_partials(eta), eta_dot)
  inner = coriolis_body(params, nu) - params.mass_matrix @ j_inv @ j_dot
  return j_inv.T @ inner @ j_inv


def workless_matrix_christoffel(params: VesselParams, eta, eta_dot) -> np.ndarray:
  """S^L from the Christoffel symbols of M_eta.

  S_kj = 1/2 sum_i (dM_ki/d eta_j - dM_ij/d eta_k) eta_dot_i.
  """
  d_m = mass_matrix_inertial_partials(params, eta)
  eta_dot = as_vector(eta_dot)
  first = np.einsum('jki,i->kj', d_m, eta_dot)
  second = np.einsum('kij,i->kj', d_m, eta_dot)
  return 0.5 * (first - second)


def workless_matrix_kinematic(params: VesselParams, eta, eta_dot) -> np.ndarray:
  """S^L = J^-T C J^-1 + 1/2 [J^-T M J^-1_dot - (J^-T M J^-1_dot)^T]."""
  eta = as_vector(eta)
  eta_dot = as_vector(eta_dot)
  j_inv = kinematic_map_inverse(eta)
  j_inv_dot = np.einsum('kij,k->ij', kinematic_map_inverse_partials(eta), eta_dot)
  nu = j_inv @ eta_dot
  cross = j_inv.T @ params.mass_matrix @ j_inv_dot
  return j_inv.T @ coriolis_body(params, nu) @ j_inv + 0.5 * (cross - cross.T)


def check_pose(eta) -> None:
  """Raise SingularAttitude for full6 poses in the pitch guard band."""
  eta = as_vector(eta)
  if eta.size == 6:
    check_attitude(eta[4])
