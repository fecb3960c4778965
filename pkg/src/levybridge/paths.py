"""Sampled path container shared by the bridge and process samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["SamplePath"]


@dataclass(frozen=True, eq=False)
class SamplePath:
    """A path observed on a strictly increasing time grid.

    ``values[k]`` is the state at ``times[k]``. Arrays are stored as float64
    and should be treated as immutable.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times and values must be 1-d arrays of equal length")
        if times.size == 0:
            raise DomainError("a path needs at least one grid point")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.times.size)
