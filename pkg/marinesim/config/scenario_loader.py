"""Scenario files: INI sections read with configparser and typed through properties."""

import configparser
import difflib
import io
import json
import logging
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from marinesim.errors import ConfigError
from marinesim.models.control import ControllerGains, Frame
from marinesim.models.geometry import Dof
from marinesim.models.reference import ReferenceTrajectory
from marinesim.models.report import Experiment
from marinesim.models.sim import FLOAT_FORMAT, Integrator, SimConfig
from marinesim.models.vessel import (
  BodyState,
  HydrostaticRestoring,
  NoRestoring,
  VesselParams,
)
from marinesim.services.control import initial_state_on_reference
from marinesim.services.references import build_reference, validate_reference
from marinesim.services.vessel import body_to_inertial

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'scenarios'
SCENARIO_SUFFIX = '.ini'

SECTIONS = (
  'scenario',
  'vessel',
  'restoring',
  'gains',
  'reference',
  'initial',
  'sim',
  'experiments',
  'logging',
)


def _parse_value(raw: str, where: str) -> Any:
  """Bracketed lists become nested float lists, numbers become floats, anything else stays text."""
  text = raw.strip()
  if text.startswith('['):
    try:
      value = json.loads(text)
    except json.JSONDecodeError as e:
      raise ConfigError(f'{where}: malformed list {text!r} ({e.msg})') from None
    return _as_floats(value, where)
  try:
    return float(text)
  except ValueError:
    return text


def _as_floats(value: Any, where: str) -> Any:
  if isinstance(value, list):
    return [_as_floats(v, where) for v in value]
  if isinstance(value, bool) or not isinstance(value, (int, float)):
    raise ConfigError(f'{where}: lists may only hold numbers, got {value!r}')
  return float(value)


def format_value(value: Any) -> str:
  """Render numbers at 9 significant digits and lists in bracket notation."""
  if isinstance(value, np.ndarray):
    value = value.tolist()
  if isinstance(value, (list, tuple)):
    return '[' + ', '.join(format_value(v) for v in value) + ']'
  if isinstance(value, bool):
    return 'true' if value else 'false'
  if isinstance(value, int):
    return str(value)
  if isinstance(value, float):
    # Adding zero folds -0.0 into 0.0 so output is stable under re-parsing.
    return FLOAT_FORMAT % (value + 0.0)
  if hasattr(value, 'value'):
    return str(value.value)
  return str(value)


def list_scenarios() -> list[str]:
  """Names of the bundled scenarios."""
  return sorted(path.stem for path in SCENARIO_DIR.glob(f'*{SCENARIO_SUFFIX}'))


class Scenario:
  """A scenario file with typed access to its sections.

  Every accessor falls back to a default when its key is absent, so a minimal file only
  needs the vessel, the gains and the reference.
  """

  def __init__(self, parser: configparser.ConfigParser, source: str = '<string>'):
    self.config = parser
    self.source = source
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
      raise ConfigError(f'{source}: unknown section(s) {", ".join(unknown)}')

  @staticmethod
  def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    # Gain names are case sensitive (Lambda, Pi, Kd).
    parser.optionxform = str
    return parser

  @classmethod
  def from_string(cls, text: str, source: str = '<string>') -> 'Scenario':
    parser = cls._parser()
    try:
      parser.read_string(text, source=source)
    except configparser.Error as e:
      raise ConfigError(f'{source}: {e}') from None
    return cls(parser, source)

  @classmethod
  def from_path(cls, path: Union[str, Path]) -> 'Scenario':
    path = Path(path)
    try:
      text = path.read_text(encoding='utf-8')
    except OSError as e:
      raise ConfigError(f'cannot read scenario {path}: {e.strerror}') from None
    scenario = cls.from_string(text, source=str(path))
    if not scenario.config.has_option('scenario', 'name'):
      scenario.set('scenario', 'name', path.stem)
    return scenario

  @classmethod
  def bundled(cls, name: str) -> 'Scenario':
    """Load a bundled scenario by name.

    Raises:
      ConfigError: no bundled scenario has that name; close matches are suggested.
    """
    path = SCENARIO_DIR / f'{name}{SCENARIO_SUFFIX}'
    if not path.is_file():
      names = list_scenarios()
      close = difflib.get_close_matches(name, names, n=3)
      hint = f'did you mean {", ".join(close)}? ' if close else ''
      raise ConfigError(f'unknown scenario {name!r}; {hint}available: {", ".join(names)}')
    return cls.from_path(path)

  @classmethod
  def load(cls, name_or_path: Union[str, Path]) -> 'Scenario':
    """A path to an INI file, or the name of a bundled scenario."""
    path = Path(name_or_path)
    if path.suffix == SCENARIO_SUFFIX or path.is_file():
      return cls.from_path(path)
    return cls.bundled(str(name_or_path))

  def set(self, section: str, key: str, value: Any) -> None:
    """Override one key; cached sections built from it are dropped."""
    if not self.config.has_section(section):
      self.config.add_section(section)
    self.config.set(section, key, format_value(value))
    for attr in ('vessel', 'gains', 'reference', 'sim'):
      self.__dict__.pop(attr, None)

  # Typed access

  def _where(self, section: str, key: str) -> str:
    return f'{self.source} [{section}] {key}'

  def _raw(self, section: str, key: str) -> Optional[str]:
    return self.config.get(section, key, fallback=None)

  def _float(self, section: str, key: str, fallback: Optional[float] = None) -> float:
    raw = self._raw(section, key)
    if raw is None:
      if fallback is None:
        raise ConfigError(f'{self._where(section, key)} is required')
      return fallback
    try:
      return float(raw)
    except ValueError:
      raise ConfigError(f'{self._where(section, key)}: expected a number, got {raw!r}') from None

  def _int(self, section: str, key: str, fallback: int) -> int:
    try:
      return self.config.getint(section, key, fallback=fallback)
    except ValueError:
      raise ConfigError(f'{self._where(section, key)}: expected an integer') from None

  def _array(self, section: str, key: str, fallback: Any = None) -> Optional[np.ndarray]:
    raw = self._raw(section, key)
    if raw is None:
      if fallback is None:
        return None
      return np.asarray(fallback, dtype=float)
    value = _parse_value(raw, self._where(section, key))
    if isinstance(value, str):
      raise ConfigError(f'{self._where(section, key)}: expected a bracketed list, got {raw!r}')
    return np.asarray(value, dtype=float)

  def _required_array(self, section: str, key: str) -> np.ndarray:
    value = self._array(section, key)
    if value is None:
      raise ConfigError(f'{self._where(section, key)} is required')
    return value

  # [scenario]

  @property
  def name(self) -> str:
    return self.config.get('scenario', 'name', fallback='scenario')

  @property
  def description(self) -> str:
    return self.config.get('scenario', 'description', fallback='')

  @property
  def experiments(self) -> list[Experiment]:
    """Listed experiments in file order; all of them when the key is absent."""
    raw = self._raw('scenario', 'experiments')
    if raw is None:
      return list(Experiment)
    chosen = []
    for item in (part.strip() for part in raw.split(',')):
      if not item:
        continue
      try:
        chosen.append(Experiment(item))
      except ValueError:
        valid = ', '.join(e.value for e in Experiment)
        raise ConfigError(
          f'{self._where("scenario", "experiments")}: unknown experiment {item!r}; '
          f'choose from {valid}'
        ) from None
    return chosen

  # [vessel] and [restoring]

  @property
  def dof(self) -> Dof:
    raw = self.config.get('vessel', 'dof', fallback=Dof.PLANAR3.value)
    try:
      return Dof(raw)
    except ValueError:
      raise ConfigError(f'{self._where("vessel", "dof")}: expected planar3 or full6') from None

  @property
  def n(self) -> int:
    return self.dof.n

  @cached_property
  def vessel(self) -> VesselParams:
    """Vessel parameters; invariant violations surface as pydantic ValidationError."""
    return VesselParams(
      name=self.config.get('vessel', 'name', fallback=self.name),
      dof=self.dof,
      mass_matrix=self._required_array('vessel', 'mass_matrix'),
      damping_linear=self._array('vessel', 'damping_linear', np.zeros(self.n)),
      damping_quadratic=self._array('vessel', 'damping_quadratic'),
      restoring=self.restoring,
      r_gb=self._array('vessel', 'r_gb', np.zeros(3)),
    )

  @property
  def restoring(self) -> Union[NoRestoring, HydrostaticRestoring]:
    kind = self.config.get('restoring', 'kind', fallback='none')
    if kind == 'none':
      return NoRestoring()
    if kind == 'hydrostatic':
      if self.config.has_option('restoring', 'r_gb'):
        where = self._where('restoring', 'r_gb')
        raise ConfigError(f'{where}: the center of gravity belongs in [vessel] r_gb')
      return HydrostaticRestoring(
        weight=self._float('restoring', 'weight'),
        buoyancy=self._float('restoring', 'buoyancy'),
        r_bb=self._array('restoring', 'r_bb', np.zeros(3)),
      )
    raise ConfigError(f'{self._where("restoring", "kind")}: expected none or hydrostatic')

  # [gains]

  @cached_property
  def gains(self) -> ControllerGains:
    return ControllerGains(
      Lambda=self._required_array('gains', 'Lambda'),
      Pi=self._required_array('gains', 'Pi'),
      Kd=self._required_array('gains', 'Kd'),
    )

  # [reference]

  @cached_property
  def reference(self) -> ReferenceTrajectory:
    """The reference, checked against finite differences over [0, t_end].

    Raises:
      ConfigError: the section is missing or the reference is malformed.
    """
    if not self.config.has_section('reference'):
      raise ConfigError(f'{self.source}: section [reference] is required')
    kind = self.config.get('reference', 'kind', fallback='constant')
    params = {
      key: _parse_value(raw, self._where('reference', key))
      for key, raw in self.config.items('reference')
      if key != 'kind'
    }
    ref = build_reference(kind, self.dof, **params)
    try:
      validate_reference(ref, self.sim.t_end)
    except ConfigError as e:
      raise ConfigError(f'{self.source} [reference]: {e}') from e
    return ref


  # [initial]

  @property
  def initial_offset(self) -> np.ndarray:
    return self._array('initial', 'offset', np.zeros(self.n))

  def initial_pose_velocity(self) -> tuple[np.ndarray, np.ndarray]:
    """Initial pose and body velocity.

    An explicit ``eta`` (with optional body velocity ``nu``) wins; otherwise the craft
    starts at eta_d(0) + offset with zero momentum error.
    """
    eta = self._array('initial', 'eta')
    if eta is not None:
      return eta, self._array('initial', 'nu', np.zeros(self.n))
    z = initial_state_on_reference(
      self.vessel, self.gains, self.reference, Frame.BODY, offset=self.initial_offset
    )
    return z[: self.n], self.vessel.mass_inverse @ z[self.n :]

  def initial_state(self, frame: Frame = Frame.BODY) -> np.ndarray:
    """Stacked (eta, momentum) at t = 0 in the given frame."""
    eta, nu = self.initial_pose_velocity()
    body = BodyState(eta=eta, p_b=self.vessel.mass_matrix @ nu)
    if frame is Frame.BODY:
      return body.vector
    return body_to_inertial(self.vessel, body).vector

  # [sim]

  @cached_property
  def sim(self) -> SimConfig:
    raw = self.config.get('sim', 'integrator', fallback=Integrator.RK4.value)
    try:
      integrator = Integrator(raw)
    except ValueError:
      raise ConfigError(f'{self._where("sim", "integrator")}: expected rk4 or euler') from None
    return SimConfig(
      h=self._float('sim', 'h', 1e-3),
      t_end=self._float('sim', 't_end', 60.0),
      integrator=integrator,
      record_every=self._int('sim', 'record_every', 1),
    )

  # [experiments]

  @property
  def contraction_offset(self) -> np.ndarray:
    default = np.zeros(self.n)
    default[:2] = [0.5, -0.5]
    default[-1] = 0.1
    return self._array('experiments', 'contraction_offset', default)

  @property
  def contraction_horizon(self) -> float:
    return self._float('experiments', 'contraction_horizon', self.sim.t_end)

  @property
  def variational_eps(self) -> float:
    return self._float('experiments', 'variational_eps', 1e-6)

  @property
  def variational_horizon(self) -> float:
    return self._float('experiments', 'variational_horizon', 20.0)

  @property
  def variational_h(self) -> float:
    return self._float('experiments', 'variational_h', self.sim.h)

  @property
  def delta_omega_amplitude(self) -> float:
    return self._float('experiments', 'delta_omega_amplitude', 1.0)

  @property
  def delta_omega_frequency(self) -> float:
    """Angular frequency of the sinusoidal tangent input, rad/s."""
    return self._float('experiments', 'delta_omega_frequency', 0.5)

  @property
  def cross_frame_offset(self) -> float:
    return self._float('experiments', 'cross_frame_offset', 1e-3)

  @property
  def cross_frame_horizon(self) -> float:
    return self._float('experiments', 'cross_frame_horizon', 30.0)

  @property
  def equivalence_horizon(self) -> float:
    return self._float('experiments', 'equivalence_horizon', 10.0)

  @property
  def invariant_samples(self) -> int:
    return self._int('experiments', 'invariant_samples', 1000)

  @property
  def seed(self) -> int:
    return self._int('experiments', 'seed', 0)

  # [logging]

  @property
  def log_level(self) -> str:
    return self.config.get('logging', 'log_level', fallback='INFO').upper()

  def validate(self) -> 'Scenario':
    """Build every section once so errors surface before any experiment runs."""
    _ = (self.experiments, self.vessel, self.gains, self.reference, self.sim)
    if self.gains.n != self.n:
      raise ConfigError(
        f'{self.source}: gains are {self.gains.n}x{self.gains.n} but the vessel has {self.n} DOF'
      )
    self.initial_state()
    return self

  def resolved(self) -> dict[str, dict[str, Any]]:
    """Every setting after defaults and derivations, section by section."""
    vessel = self.vessel
    restoring: dict[str, Any] = {'kind': vessel.restoring.kind}
    if isinstance(vessel.restoring, HydrostaticRestoring):
      restoring.update(
        weight=vessel.restoring.weight,
        buoyancy=vessel.restoring.buoyancy,
        r_bb=vessel.restoring.r_bb,
      )
    reference = {'kind': self.reference.kind}
    reference.update(self.reference.model_dump(exclude={'kind', 'dof'}))
    eta, nu = self.initial_pose_velocity()
    return {
      'scenario': {
        'name': self.name,
        'description': self.description,
        'experiments': ', '.join(e.value for e in self.experiments),
      },
      'vessel': {
        'name': vessel.name,
        'dof': vessel.dof,
        'mass_matrix': vessel.mass_matrix,
        'damping_linear': vessel.damping_linear,
        'damping_quadratic': vessel.d_quad,
        'r_gb': vessel.r_gb,
      },
      'restoring': restoring,
      'gains': {'Lambda': self.gains.Lambda, 'Pi': self.gains.Pi, 'Kd': self.gains.Kd},
      'reference': reference,
      'initial': {
        'eta': eta,
        'nu': nu,
      },
      'sim': {
        'h': self.sim.h,
        't_end': self.sim.t_end,
        'integrator': self.sim.integrator,
        'record_every': self.sim.record_every,
      },
      'experiments': {
        'contraction_offset': self.contraction_offset,
        'contraction_horizon': self.contraction_horizon,
        'variational_eps': self.variational_eps,
        'variational_horizon': self.variational_horizon,
        'variational_h': self.variational_h,
        'delta_omega_amplitude': self.delta_omega_amplitude,
        'delta_omega_frequency': self.delta_omega_frequency,
        'cross_frame_offset': self.cross_frame_offset,
        'cross_frame_horizon': self.cross_frame_horizon,
        'equivalence_horizon': self.equivalence_horizon,
        'invariant_samples': self.invariant_samples,
        'seed': self.seed,
      },
      'logging': {'log_level': self.log_level},
    }

  def to_ini(self) -> str:
    """The resolved scenario as INI text; loading and resolving it again is a fixed point."""
    out = self._parser()
    for section, values in self.resolved().items():
      out.add_section(section)
      for key, value in values.items():
        out.set(section, key, format_value(value))
    buffer = io.StringIO()
    out.write(buffer)
    return buffer.getvalue()
