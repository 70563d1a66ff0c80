"""Shared fixtures: the open-frame UUV, its gains and a few references."""

import numpy as np
import pytest

from marinesim.config.scenario_loader import Scenario
from marinesim.models.control import ControllerGains
from marinesim.models.geometry import Dof
from marinesim.models.reference import CircleReference
from marinesim.models.vessel import HydrostaticRestoring, VesselParams
from marinesim.services.vessel import rigid_body_mass_matrix

UUV_MASS = [[290.0, 0.0, 0.0], [0.0, 404.0, 50.0], [0.0, 50.0, 132.0]]
UUV_D_LIN = [95.0, 613.0, 105.0]
UUV_D_QUAD = [[0.0, 268.0, 0.0], [164.0, 0.0, 0.0], [0.0, 0.0, 0.0]]


@pytest.fixture
def uuv() -> VesselParams:
  return VesselParams(
    name='open-frame UUV',
    dof=Dof.PLANAR3,
    mass_matrix=UUV_MASS,
    damping_linear=UUV_D_LIN,
    damping_quadratic=UUV_D_QUAD,
  )


@pytest.fixture
def gains() -> ControllerGains:
  return ControllerGains(Lambda=[0.6, 0.8, 0.2], Pi=[0.6, 0.8, 0.2], Kd=[300.0, 100.0, 200.0])


@pytest.fixture
def lossless_uuv() -> VesselParams:
  return VesselParams(dof=Dof.PLANAR3, mass_matrix=UUV_MASS, damping_linear=[0.0, 0.0, 0.0])


@pytest.fixture
def lossless_gains() -> ControllerGains:
  return ControllerGains(Lambda=[0.0, 0.0, 0.0], Pi=[0.6, 0.8, 0.2], Kd=[0.0, 0.0, 0.0])


@pytest.fixture
def circle() -> CircleReference:
  return CircleReference(radius=5.0, rate=0.1)


@pytest.fixture
def rng() -> np.random.Generator:
  return np.random.default_rng(7)


@pytest.fixture
def spatial_craft() -> VesselParams:
  """6-DOF craft with off-diagonal added mass and a righting lever."""
  r_g = np.array([0.0, 0.0, 0.05])
  rigid = rigid_body_mass_matrix(120.0, np.diag([8.0, 12.0, 10.0]), r_g)
  added = np.diag([20.0, 40.0, 60.0, 2.0, 3.0, 4.0])
  added[1, 5] = added[5, 1] = 1.5
  return VesselParams(
    name='spatial',
    dof=Dof.FULL6,
    mass_matrix=rigid + added,
    damping_linear=[30.0, 50.0, 60.0, 8.0, 9.0, 10.0],
    damping_quadratic=[40.0, 60.0, 70.0, 5.0, 6.0, 7.0],
    restoring=HydrostaticRestoring(weight=1177.0, buoyancy=1190.0, r_bb=[0.0, 0.0, -0.02]),
    r_gb=r_g,
  )


@pytest.fixture
def spatial_gains() -> ControllerGains:
  diag = [0.5, 0.5, 0.5, 0.4, 0.4, 0.4]
  return ControllerGains(Lambda=diag, Pi=diag, Kd=[80.0, 80.0, 80.0, 20.0, 20.0, 20.0])


@pytest.fixture
def quick_scenario() -> Scenario:
  """The bundled circle scenario cut down to a few seconds of simulated time."""
  scenario = Scenario.bundled('uuv_sec5')
  scenario.set('sim', 'h', 0.01)
  scenario.set('sim', 't_end', 4.0)
  scenario.set('experiments', 'variational_horizon', 4.0)
  scenario.set('experiments', 'cross_frame_horizon', 4.0)
  scenario.set('experiments', 'equivalence_horizon', 2.0)
  scenario.set('experiments', 'invariant_samples', 20)
  return scenario
