import pytest
from click.testing import CliRunner

from marinesim import __version__
from marinesim.cli import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, main

CRAFT = """
[vessel]
mass_matrix = [[290, 0, 0], [0, 404, 50], [0, 50, 132]]
damping_linear = [95, 613, 105]

[gains]
Lambda = [0.6, 0.8, 0.2]
Pi = [0.6, 0.8, 0.2]
Kd = [300, 100, 200]

[reference]
kind = circle
radius = 5
rate = 0.1

[initial]
offset = [-0.5, 0.5, 0.1]
"""

SHORT_TRACK = (
  CRAFT
  + """
[scenario]
experiments = track_body

[sim]
h = 0.02
t_end = 2
"""
)

LOSSLESS = """
[scenario]
experiments = passivity

[vessel]
mass_matrix = [[290, 0, 0], [0, 404, 50], [0, 50, 132]]

[gains]
Lambda = [0, 0, 0]
Pi = [0.6, 0.8, 0.2]
Kd = [0, 0, 0]

[reference]
kind = circle
radius = 5
rate = 0.1

[sim]
h = 0.005

[experiments]
variational_horizon = 4
"""


@pytest.fixture
def runner(monkeypatch, tmp_path):
  monkeypatch.chdir(tmp_path)
  monkeypatch.delenv('MARINESIM_LOG_LEVEL', raising=False)
  return CliRunner()


def _flat(output: str) -> str:
  return ' '.join(output.split())


def _write(tmp_path, name, text):
  path = tmp_path / name
  path.write_text(text, encoding='utf-8')
  return str(path)


def test_version(runner):
  result = runner.invoke(main, ['--version'])
  assert result.exit_code == EXIT_OK
  assert __version__ in result.output


def test_list_shows_bundled_scenarios(runner):
  result = runner.invoke(main, ['list'])
  assert result.exit_code == EXIT_OK
  for name in ('uuv_sec5', 'uuv_sec5_lossless', 'uuv_lawnmower'):
    assert name in result.output


def test_describe_output_reloads_to_itself(runner, tmp_path):
  first = runner.invoke(main, ['describe', 'uuv_sec5'])
  assert first.exit_code == EXIT_OK
  assert first.output.startswith('[scenario]')
  path = _write(tmp_path, 'resolved.ini', first.output)
  second = runner.invoke(main, ['describe', path])
  assert second.exit_code == EXIT_OK
  assert second.output == first.output


def test_unknown_scenario_is_a_config_error(runner):
  result = runner.invoke(main, ['describe', 'uuv_sec'])
  assert result.exit_code == EXIT_CONFIG
  assert 'did you mean' in _flat(result.output)


def test_invalid_mass_matrix_is_reported(runner, tmp_path):
  path = _write(tmp_path, 'bad.ini', CRAFT.replace('[0, 404, 50]', '[0, -404, 50]'))
  result = runner.invoke(main, ['run', path, '--out', str(tmp_path / 'out')])
  assert result.exit_code == EXIT_CONFIG
  assert 'positive definite' in _flat(result.output)


def test_failed_checks_exit_nonzero_only_under_verify(runner, tmp_path):
  path = _write(tmp_path, 'short.ini', SHORT_TRACK)
  ran = runner.invoke(main, ['run', path, '--out', str(tmp_path / 'run')])
  assert ran.exit_code == EXIT_OK
  summary = (tmp_path / 'run' / 'summary.txt').read_text(encoding='utf-8')
  assert summary.splitlines()[0] == 'scenario=short'
  assert summary.splitlines()[-1] == 'status=fail'
  assert (tmp_path / 'run' / 'track_body.csv').is_file()

  verified = runner.invoke(main, ['verify', path, '--out', str(tmp_path / 'verify')])
  assert verified.exit_code == EXIT_INVARIANT
  assert 'error_ratio' in _flat(verified.output)


def test_lossless_passivity_run(runner, tmp_path):
  path = _write(tmp_path, 'lossless.ini', LOSSLESS)
  result = runner.invoke(main, ['run', path, '--out', str(tmp_path / 'out'), '--plots'])
  assert result.exit_code == EXIT_OK, result.output
  summary = (tmp_path / 'out' / 'summary.txt').read_text(encoding='utf-8')
  assert summary.splitlines()[-1] == 'status=pass'
  assert (tmp_path / 'out' / 'passivity_storage.svg').is_file()


def test_default_output_directory_comes_from_the_environment(runner, monkeypatch, tmp_path):
  monkeypatch.setenv('MARINESIM_OUT', str(tmp_path / 'runs'))
  path = _write(tmp_path, 'lossless.ini', LOSSLESS)
  result = runner.invoke(main, ['run', path])
  assert result.exit_code == EXIT_OK, result.output
  assert (tmp_path / 'runs' / 'lossless' / 'summary.txt').is_file()
