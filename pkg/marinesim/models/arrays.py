"""Pydantic-compatible numpy array field types."""

from typing import Annotated

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


def _float_array(value) -> np.ndarray:
  try:
    return np.array(value, dtype=float)
  except (TypeError, ValueError) as e:
    raise ValueError(f'not a numeric array: {e}') from e


def _freeze(array: np.ndarray) -> np.ndarray:
  array.flags.writeable = False
  return array


def _vector(value) -> np.ndarray:
  array = _float_array(value)
  if array.ndim != 1:
    raise ValueError(f'expected a vector, got shape {array.shape}')
  return _freeze(array)


def _matrix(value) -> np.ndarray:
  array = _float_array(value)
  # A flat list stands for the diagonal.
  if array.ndim == 1:
    array = np.diag(array)
  if array.ndim != 2:
    raise ValueError(f'expected a matrix, got shape {array.shape}')
  return _freeze(array)


def _series(value) -> np.ndarray:
  array = _float_array(value)
  if array.ndim not in (1, 2):
    raise ValueError(f'expected a 1- or 2-dimensional series, got shape {array.shape}')
  return _freeze(array)


_to_list = PlainSerializer(lambda a: a.tolist(), return_type=list)

Vector = Annotated[np.ndarray, BeforeValidator(_vector), _to_list]
Matrix = Annotated[np.ndarray, BeforeValidator(_matrix), _to_list]
Series = Annotated[np.ndarray, BeforeValidator(_series), _to_list]


def is_symmetric(a: np.ndarray, rtol: float = 1e-10) -> bool:
  """Check ``a == a.T`` relative to the largest entry."""
  scale = max(float(np.max(np.abs(a))), 1.0)
  return bool(np.allclose(a, a.T, rtol=0.0, atol=rtol * scale))


def is_skew(a: np.ndarray, rtol: float = 1e-10) -> bool:
  """Check ``a == -a.T`` relative to the largest entry."""
  scale = max(float(np.max(np.abs(a))), 1.0)
  return bool(np.allclose(a, -a.T, rtol=0.0, atol=rtol * scale))
