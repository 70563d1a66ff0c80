"""Process settings read from the environment and local .env files."""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

DEFAULT_OUT_DIR = 'out'

console = Console()


class Settings:
  """Environment-backed settings; ``.env.local`` takes precedence over ``.env``."""

  def __init__(self, load_env_files: bool = True):
    if load_env_files:
      load_dotenv('.env')
      load_dotenv('.env.local', override=True)

  @property
  def out_dir(self) -> Path:
    """Default output directory for ``marinesim run``."""
    return Path(os.getenv('MARINESIM_OUT', DEFAULT_OUT_DIR))

  @property
  def log_level(self) -> Optional[str]:
    """Log level override; None defers to the scenario."""
    level = os.getenv('MARINESIM_LOG_LEVEL')
    return level.upper() if level else None


def configure_logging(level: str = 'INFO') -> None:
  """Route the root logger through rich at the given level."""
  logging.basicConfig(
    level=level.upper(),
    format='%(message)s',
    datefmt='[%X]',
    handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
    force=True,
  )
