"""marinesim command-line entry point."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Sequence

import click
from pydantic import ValidationError
from rich.markup import escape
from rich.table import Table

from marinesim import __version__
from marinesim.config.scenario_loader import Scenario, list_scenarios
from marinesim.config.settings import Settings, configure_logging, console
from marinesim.errors import (
  ConfigError,
  DivergedPerturbation,
  GainError,
  InvariantViolation,
  MarineSimError,
  NonFiniteState,
  SingularAttitude,
)
from marinesim.models.report import ExperimentResult
from marinesim.services.experiments import run_experiments, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_INVARIANT = 3


def validation_messages(error: ValidationError) -> str:
  """Failed invariants of a pydantic error, one clause each."""
  parts = []
  for item in error.errors():
    message = item['msg'].removeprefix('Value error, ')
    location = '.'.join(str(p) for p in item['loc'])
    parts.append(f'{message} ({location})' if location else message)
  return '; '.join(parts)


def _fail(code: int, label: str, message: str) -> None:
  console.print(f'[bold red]{label}:[/bold red] {escape(message)}')
  raise click.exceptions.Exit(code)


@contextmanager
def exit_codes() -> Iterator[None]:
  """Map marinesim errors onto the documented exit codes."""
  try:
    yield
  except ValidationError as e:
    _fail(EXIT_CONFIG, 'invalid scenario', validation_messages(e))
  except (ConfigError, GainError) as e:
    _fail(EXIT_CONFIG, 'configuration error', str(e))
  except NonFiniteState as e:
    _fail(EXIT_DIVERGED, 'simulation diverged', f'{e} (t={e.t:.9g})')
  except (DivergedPerturbation, SingularAttitude) as e:
    _fail(EXIT_DIVERGED, 'simulation diverged', str(e))
  except InvariantViolation as e:
    _fail(EXIT_INVARIANT, 'invariant violated', str(e))
  except MarineSimError as e:
    _fail(EXIT_DIVERGED, 'run failed', str(e))


def _load(name: str, settings: Settings, seed: Optional[int] = None) -> Scenario:
  scenario = Scenario.load(name)
  configure_logging(settings.log_level or scenario.log_level)
  if seed is not None:
    scenario.set('experiments', 'seed', seed)
  return scenario


def _print_results(results: Sequence[ExperimentResult]) -> None:
  table = Table(title='Checks')
  table.add_column('Experiment')
  table.add_column('Check')
  table.add_column('Value', justify='right')
  table.add_column('Threshold', justify='right')
  table.add_column('Status')
  for result in results:
    for check in result.checks:
      status = '[green]pass[/green]' if check.passed else '[red]fail[/red]'
      op = '<=' if check.comparison.value == 'le' else '>='
      table.add_row(
        result.experiment.value,
        check.name,
        f'{check.value:.4g}',
        f'{op} {check.threshold:.4g}',
        status,
      )
  console.print(table)


def _execute(
  scenario_name: str, out: Optional[str], plots: bool, seed: Optional[int], jobs: int
) -> list[ExperimentResult]:
  settings = Settings()
  configure_logging(settings.log_level or 'INFO')
  scenario = _load(scenario_name, settings, seed)
  out_dir = Path(out) if out else settings.out_dir / scenario.name
  results = run_experiments(scenario, out_dir, with_plots=plots, jobs=jobs)
  summary = write_summary(scenario, results, out_dir)
  _print_results(results)
  console.print(f'Summary written to {escape(str(summary))}')
  return results


@click.group()
@click.version_option(__version__, prog_name='marinesim')
def main() -> None:
  """Marine-craft simulator and verification harness."""


@main.command()
@click.argument('scenario')
@click.option('--out', help='Output directory (default: $MARINESIM_OUT/<scenario>)')
@click.option('--plots', is_flag=True, help='Also write SVG figures')
@click.option('--seed', type=click.IntRange(0, 2**64 - 1), help='Seed for sampled checks')
@click.option('--jobs', type=click.IntRange(min=1), default=1, help='Experiments run in parallel')
def run(scenario: str, out: Optional[str], plots: bool, seed: Optional[int], jobs: int) -> None:
  """Run the experiments a scenario lists and write CSV logs plus a summary."""
  with exit_codes():
    _execute(scenario, out, plots, seed, jobs)


@main.command()
@click.argument('scenario')
@click.option('--out', help='Output directory (default: $MARINESIM_OUT/<scenario>)')
@click.option('--seed', type=click.IntRange(0, 2**64 - 1), help='Seed for sampled checks')
@click.option('--jobs', type=click.IntRange(min=1), default=1, help='Experiments run in parallel')
def verify(scenario: str, out: Optional[str], seed: Optional[int], jobs: int) -> None:
  """Run the experiments and exit 3 if any check fails."""
  with exit_codes():
    results = _execute(scenario, out, False, seed, jobs)
    failed = [
      check.line(result.experiment.value) for result in results for check in result.failures
    ]
    if failed:
      for line in failed:
        logger.error('Check failed: %s', line)
      raise InvariantViolation(f'{len(failed)} check(s) failed: ' + '; '.join(failed))
    console.print('[green]all checks passed[/green]')


@main.command(name='list')
def list_command() -> None:
  """List the bundled scenarios."""
  table = Table(title='Bundled scenarios')
  table.add_column('Name', no_wrap=True)
  table.add_column('Description')
  for name in list_scenarios():
    table.add_row(name, escape(Scenario.bundled(name).description))
  console.print(table)


@main.command()
@click.argument('scenario')
def describe(scenario: str) -> None:
  """Print the fully resolved scenario as INI."""
  with exit_codes():
    click.echo(Scenario.load(scenario).validate().to_ini(), nl=False)


if __name__ == '__main__':
  main()
