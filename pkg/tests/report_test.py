import math

import pytest

from marinesim.models.report import CheckResult, Comparison, Experiment, ExperimentResult


def test_upper_bound_check():
  check = CheckResult(name='error_ratio', value=0.0005, threshold=0.001)
  assert check.passed
  assert check.margin == pytest.approx(0.0005)
  assert check.line('track_body') == (
    'track_body.error_ratio=0.0005 threshold=0.001 op=le margin=0.0005 status=pass'
  )


def test_lower_bound_check():
  check = CheckResult(name='fitted_rate', value=0.15, threshold=0.18, comparison=Comparison.GE)
  assert not check.passed
  assert check.margin == pytest.approx(-0.03)
  assert check.line('contraction').endswith('op=ge margin=-0.03 status=fail')


def test_restricted_check_names_its_scope():
  check = CheckResult(
    name='cross_frame_pose_gap', value=1e-7, threshold=1e-4, scope='straight_line'
  )
  assert check.line('equivalence').endswith('status=pass scope=straight_line')


def test_nan_never_passes():
  for comparison in Comparison:
    assert not CheckResult(name='x', value=math.nan, threshold=1.0, comparison=comparison).passed


def test_experiment_result_collects_failures():
  good = CheckResult(name='violations', value=0.0, threshold=0.0)
  bad = CheckResult(name='max_gap', value=1e-3, threshold=1e-9)
  result = ExperimentResult(
    experiment=Experiment.PASSIVITY, checks=[good, bad], metrics={'samples': 2001.0}
  )
  assert not result.passed
  assert result.failures == [bad]
  lines = result.summary_lines()
  assert lines[0].startswith('passivity.violations=0 threshold=0 op=le')
  assert lines[-1] == 'passivity.samples=2001'
  assert result.model_dump()['checks'][1]['passed'] is False


def test_experiment_without_checks_passes():
  assert ExperimentResult(experiment=Experiment.RATES).passed
