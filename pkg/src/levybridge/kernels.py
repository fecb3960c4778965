"""Increment-law families used to build bridges.

A kernel is the time-indexed family of increment distributions of a process
with stationary independent increments: a density ``f_t`` for the continuous
families, a lattice mass function ``Q_t`` on the nonnegative integers for the
counting family. Each kernel also exposes its exact CDF, quantile function,
and an increment sampler, which is what the bridge and path-sampling layers
build on.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import special as _sp
from scipy import stats as _st

from .errors import DomainError, KernelClassError

__all__ = ["Kernel", "BrownianKernel", "GammaKernel", "PoissonKernel"]


def _check_time(t: float) -> float:
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise DomainError(f"elapsed time must be positive and finite, got {t}")
    return t


class Kernel(abc.ABC):
    """Common surface of the increment-law families.

    ``discrete`` kernels live on the integer lattice and implement
    ``mass``/``log_mass``; continuous kernels implement ``density``/
    ``log_density``. Asking the wrong one raises KernelClassError so class
    mixups fail loudly rather than silently returning zeros.
    """

    discrete: ClassVar[bool]
    nondecreasing: ClassVar[bool]

    def density(self, t, x):
        raise KernelClassError(f"{type(self).__name__} has no density; use mass()")

    def log_density(self, t, x):
        raise KernelClassError(f"{type(self).__name__} has no density; use mass()")

    def mass(self, t, i):
        raise KernelClassError(f"{type(self).__name__} has no lattice mass; use density()")

    def log_mass(self, t, i):
        raise KernelClassError(f"{type(self).__name__} has no lattice mass; use density()")

    @abc.abstractmethod
    def cdf(self, t, x):
        """P[increment over elapsed time t <= x]."""

    @abc.abstractmethod
    def quantile(self, t, q):
        """Inverse of `cdf` in x (generalized inverse for lattice kernels)."""

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, t, size=None):
        """Draw increments over elapsed time t."""

    @abc.abstractmethod
    def mean(self, t) -> float: ...

    @abc.abstractmethod
    def variance(self, t) -> float: ...

    @abc.abstractmethod
    def increment_support(self, t) -> tuple[float, float]:
        """Open support of the increment law (lattice hull for discrete)."""


@dataclass(frozen=True)
class BrownianKernel(Kernel):
    """Standard Brownian increment family: N(0, t)."""

    discrete: ClassVar[bool] = False
    nondecreasing: ClassVar[bool] = False

    def log_density(self, t, x):
        t = _check_time(t)
        x = np.asarray(x, dtype=float)
        out = -0.5 * x * x / t - 0.5 * math.log(2.0 * math.pi * t)
        return out if out.ndim else float(out)

    def density(self, t, x):
        return np.exp(self.log_density(t, x))

    def cdf(self, t, x):
        t = _check_time(t)
        x = np.asarray(x, dtype=float)
        out = _sp.ndtr(x / math.sqrt(t))
        return out if out.ndim else float(out)

    def quantile(self, t, q):
        t = _check_time(t)
        q = np.asarray(q, dtype=float)
        out = math.sqrt(t) * _sp.ndtri(q)
        return out if out.ndim else float(out)

    def sample(self, rng, t, size=None):
        t = _check_time(t)
        return rng.normal(0.0, math.sqrt(t), size=size)

    def mean(self, t):
        _check_time(t)
        return 0.0

    def variance(self, t):
        return _check_time(t)

    def increment_support(self, t):
        _check_time(t)
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class GammaKernel(Kernel):
    """Gamma subordinator increments at unit rate: Gamma(shape m*t, scale 1).

    ``m`` is the mean increment per unit time. The density vanishes for
    x <= 0 (the zero endpoint included, even where the mt < 1 pole would
    diverge; the pole is integrable and quadrature splits there).
    """

    m: float

    discrete: ClassVar[bool] = False
    nondecreasing: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise DomainError(f"gamma kernel rate m must be positive, got {self.m}")

    def log_density(self, t, x):
        t = _check_time(t)
        a = self.m * t
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(
                x > 0.0,
                (a - 1.0) * np.log(np.where(x > 0.0, x, 1.0)) - x - _sp.gammaln(a),
                -np.inf,
            )
        return out if out.ndim else float(out)

    def density(self, t, x):
        with np.errstate(over="ignore"):
            out = np.exp(self.log_density(t, x))
        return out

    def cdf(self, t, x):
        t = _check_time(t)
        a = self.m * t
        x = np.asarray(x, dtype=float)
        out = _sp.gammainc(a, np.maximum(x, 0.0))
        return out if out.ndim else float(out)

    def quantile(self, t, q):
        t = _check_time(t)
        a = self.m * t
        q = np.asarray(q, dtype=float)
        out = _sp.gammaincinv(a, q)
        return out if out.ndim else float(out)

    def sample(self, rng, t, size=None):
        t = _check_time(t)
        return rng.gamma(self.m * t, 1.0, size=size)

    def mean(self, t):
        return self.m * _check_time(t)

    def variance(self, t):
        return self.m * _check_time(t)

    def increment_support(self, t):
        _check_time(t)
        return (0.0, math.inf)


@dataclass(frozen=True)
class PoissonKernel(Kernel):
    """Poisson counting increments on the unit lattice, rate ``intensity``."""

    intensity: float

    discrete: ClassVar[bool] = True
    nondecreasing: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.intensity > 0 and math.isfinite(self.intensity)):
            raise DomainError(f"poisson intensity must be positive, got {self.intensity}")

    @staticmethod
    def _lattice(i):
        i = np.asarray(i)
        if not np.all(np.equal(np.mod(i, 1), 0)):
            raise DomainError("lattice points must be integers")
        return i.astype(np.int64)

    def log_mass(self, t, i):
        t = _check_time(t)
        i = self._lattice(i)
        lam = self.intensity * t
        with np.errstate(divide="ignore"):
            out = np.where(
                i >= 0,
                i * math.log(lam) - lam - _sp.gammaln(np.maximum(i, 0) + 1.0),
                -np.inf,
            )
        return out if out.ndim else float(out)

    def mass(self, t, i):
        return np.exp(self.log_mass(t, i))

    def cdf(self, t, x):
        t = _check_time(t)
        x = np.floor(np.asarray(x, dtype=float))
        out = np.where(x < 0, 0.0, _sp.pdtr(np.maximum(x, 0), self.intensity * t))
        return out if out.ndim else float(out)

    def quantile(self, t, q):
        t = _check_time(t)
        out = _st.poisson.ppf(q, self.intensity * t)
        out = np.asarray(out)
        return out if out.ndim else float(out)

    def sample(self, rng, t, size=None):
        t = _check_time(t)
        return rng.poisson(self.intensity * t, size=size)

    def mean(self, t):
        return self.intensity * _check_time(t)

    def variance(self, t):
        return self.intensity * _check_time(t)

    def increment_support(self, t):
        _check_time(t)
        return (0.0, math.inf)
