import pytest

from marinesim.config.scenario_loader import Scenario
from marinesim.errors import GainError
from marinesim.models.report import Experiment
from marinesim.services.experiments import (
  RunContext,
  contraction,
  rk4_error_ratio,
  run_experiments,
  summary_text,
  track_body,
  write_summary,
)


@pytest.fixture
def lossless_scenario() -> Scenario:
  scenario = Scenario.bundled('uuv_sec5_lossless')
  scenario.set('experiments', 'variational_horizon', 4.0)
  scenario.set('experiments', 'equivalence_horizon', 2.0)
  scenario.set('experiments', 'cross_frame_horizon', 4.0)
  scenario.set('experiments', 'invariant_samples', 20)
  return scenario


@pytest.mark.parametrize(
  'experiment',
  [
    Experiment.INVARIANTS,
    Experiment.RATES,
    Experiment.CONTRACTION,
    Experiment.PASSIVITY,
    Experiment.EQUIVALENCE,
  ],
)
def test_verification_experiments_pass(quick_scenario, tmp_path, experiment):
  (result,) = run_experiments(quick_scenario, tmp_path, experiments=[experiment])
  assert result.experiment is experiment
  assert result.passed, [check.line(experiment.value) for check in result.failures]
  assert result.csv.is_file()
  assert result.csv.parent == tmp_path


@pytest.mark.parametrize('experiment', [Experiment.TRACK_BODY, Experiment.TRACK_INERTIAL])
def test_tracking_converges(quick_scenario, tmp_path, experiment):
  quick_scenario.set('sim', 't_end', 40.0)
  quick_scenario.set('sim', 'h', 0.02)
  (result,) = run_experiments(quick_scenario, tmp_path, with_plots=True, experiments=[experiment])
  assert result.passed, [check.line(experiment.value) for check in result.failures]
  assert result.metrics['beta'] == pytest.approx(0.2)
  assert result.metrics['settle_time'] > 0.0
  assert [path.name for path in result.figures] == [
    f'{experiment.value}_eta.svg',
    f'{experiment.value}_errors.svg',
  ]


def test_lossless_loop_is_differentially_passive(lossless_scenario, tmp_path):
  (result,) = run_experiments(lossless_scenario, tmp_path, experiments=[Experiment.PASSIVITY])
  assert result.passed, [check.line('passivity') for check in result.failures]
  assert [check.name for check in result.checks] == ['structure_residual', 'relative_gap']


def test_rate_experiments_refuse_lossless_gains(lossless_scenario, tmp_path):
  ctx = RunContext(scenario=lossless_scenario.validate(), out_dir=tmp_path)
  with pytest.raises(GainError, match='track_body'):
    track_body(ctx)
  with pytest.raises(GainError, match='contraction'):
    contraction(ctx)


def test_parallel_run_keeps_scenario_order(quick_scenario, tmp_path):
  chosen = [Experiment.RATES, Experiment.INVARIANTS]
  results = run_experiments(quick_scenario, tmp_path, jobs=2, experiments=chosen)
  assert [r.experiment for r in results] == chosen

  text = summary_text(quick_scenario, results)
  lines = text.splitlines()
  assert lines[0] == 'scenario=uuv_sec5'
  assert lines[-1] == 'status=pass'
  assert any(line.startswith('rates.alpha_min=') for line in lines)
  assert any(line.startswith('invariants.samples=20') for line in lines)
  path = write_summary(quick_scenario, results, tmp_path)
  assert path.read_text(encoding='utf-8') == text


def test_rk4_error_ratio_is_near_sixteen():
  assert rk4_error_ratio() == pytest.approx(16.0, abs=1.0)


def test_equivalence_reports_the_scenario_gap(quick_scenario, tmp_path):
  (result,) = run_experiments(quick_scenario, tmp_path, experiments=[Experiment.EQUIVALENCE])
  assert 0.0 < result.metrics['scenario_cross_frame_gap'] < 1e-2
  lines = result.summary_lines()
  restricted = [line for line in lines if line.startswith('equivalence.cross_frame_pose_gap=')]
  assert len(restricted) == 1
  assert restricted[0].endswith('scope=straight_line')
  assert any(line.startswith('equivalence.scenario_cross_frame_gap=') for line in lines)


def test_same_scenario_writes_identical_files(quick_scenario, tmp_path):
  chosen = [Experiment.TRACK_BODY, Experiment.INVARIANTS]
  first = run_experiments(quick_scenario, tmp_path / 'first', experiments=chosen)
  second = run_experiments(quick_scenario, tmp_path / 'second', experiments=chosen)
  for a, b in zip(first, second):
    assert a.csv.read_bytes() == b.csv.read_bytes()
  assert summary_text(quick_scenario, first) == summary_text(quick_scenario, second)
