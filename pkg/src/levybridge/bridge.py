"""Bridges of the kernel families: laws pinned to hit a value at a horizon.

The pinned transition law from state (s, x) to the horizon (T, z), observed
at an intermediate time t, has density (mass, on the lattice)

    f(t - s, y - x) * f(T - t, z - y) / f(T - s, z - x)

with f the kernel's increment density. Everything here is conditional-law
machinery for a single pinned endpoint; randomized endpoints live one layer
up, in `core`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import numerics
from .errors import DomainError, InvalidPinError, KernelClassError
from .kernels import BrownianKernel, GammaKernel, Kernel, PoissonKernel
from .paths import SamplePath

__all__ = ["BridgeSpec", "transition_density", "transition_mass", "transition_cdf",
           "sample_step", "sample_path"]


@dataclass(frozen=True)
class BridgeSpec:
    """A kernel bridge from (start_time, start_value) to (end_time, end_value).

    The pin must be attainable: the kernel's increment weight over the full
    span has to be positive and finite, otherwise the conditional law does
    not exist and construction raises InvalidPinError. Lattice kernels
    require integer start and end values.
    """

    kernel: Kernel
    end_time: float
    end_value: float
    start_time: float = 0.0
    start_value: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.start_time < self.end_time) or not math.isfinite(self.end_time):
            raise DomainError(
                f"need 0 <= start_time < end_time, got [{self.start_time}, {self.end_time}]"
            )
        span = self.end_time - self.start_time
        jump = self.end_value - self.start_value
        if self.kernel.discrete:
            if jump != int(jump) or self.start_value != int(self.start_value):
                raise DomainError("lattice bridge endpoints must be integers")
            lw = float(self.kernel.log_mass(span, int(jump)))
        else:
            lw = float(self.kernel.log_density(span, jump))
        # judged in log space: a far pin whose density underflows the float
        # range is still attainable, only a true zero (or blowup) is not
        if not math.isfinite(lw):
            raise InvalidPinError(
                f"pin {self.end_value} at horizon {self.end_time} has log "
                f"increment weight {lw}; the bridge law does not exist"
            )

    def _check_interior(self, t: float) -> float:
        t = float(t)
        if not (self.start_time < t < self.end_time):
            raise DomainError(
                f"intermediate time {t} must lie strictly inside "
                f"({self.start_time}, {self.end_time})"
            )
        return t


def transition_density(spec: BridgeSpec, t: float, y) -> np.ndarray | float:
    """Density of the bridge state at time t, vectorized over y."""
    if spec.kernel.discrete:
        raise KernelClassError("lattice bridge has mass, not density; use transition_mass")
    t = spec._check_interior(t)
    y = np.asarray(y, dtype=float)
    log_num = spec.kernel.log_density(t - spec.start_time, y - spec.start_value)
    log_num = log_num + spec.kernel.log_density(spec.end_time - t, spec.end_value - y)
    log_den = spec.kernel.log_density(
        spec.end_time - spec.start_time, spec.end_value - spec.start_value
    )
    with np.errstate(over="ignore"):
        out = np.exp(log_num - log_den)
    return out if np.ndim(out) else float(out)


def transition_mass(spec: BridgeSpec, t: float, j) -> np.ndarray | float:
    """Mass of the lattice bridge at time t on lattice points j."""
    if not spec.kernel.discrete:
        raise KernelClassError("continuous bridge has density, not mass; use transition_density")
    t = spec._check_interior(t)
    j = np.asarray(j)
    log_num = spec.kernel.log_mass(t - spec.start_time, j - int(spec.start_value))
    log_num = log_num + spec.kernel.log_mass(spec.end_time - t, int(spec.end_value) - j)
    log_den = spec.kernel.log_mass(
        spec.end_time - spec.start_time, int(spec.end_value - spec.start_value)
    )
    out = np.exp(log_num - log_den)
    return out if np.ndim(out) else float(out)


def _pinned_step_params(spec: BridgeSpec, t: float) -> tuple[float, float]:
    """(elapsed, remaining) time around the intermediate point t."""
    return t - spec.start_time, spec.end_time - t


def transition_cdf(spec: BridgeSpec, t: float, y, *, method: str = "exact"):
    """P[bridge state at t <= y].

    ``exact`` dispatches on the kernel family (normal / beta / binomial);
    ``quadrature`` integrates the transition density and exists as an
    independent check route.
    """
    t = spec._check_interior(t)
    dt, rem = _pinned_step_params(spec, t)
    x, z = spec.start_value, spec.end_value
    if method == "exact":
        k = spec.kernel
        if isinstance(k, BrownianKernel):
            mean = x + dt / (dt + rem) * (z - x)
            var = dt * rem / (dt + rem)
            out = _sp.ndtr((np.asarray(y, dtype=float) - mean) / math.sqrt(var))
            return out if np.ndim(out) else float(out)
        if isinstance(k, GammaKernel):
            ratio = (np.asarray(y, dtype=float) - x) / (z - x)
            out = _sp.betainc(k.m * dt, k.m * rem, np.clip(ratio, 0.0, 1.0))
            return out if np.ndim(out) else float(out)
        if isinstance(k, PoissonKernel):
            n = int(z - x)
            p = dt / (dt + rem)
            kk = np.floor(np.asarray(y, dtype=float) - x)
            out = np.where(kk < 0, 0.0, _sp.bdtr(np.clip(kk, 0, n), n, p))
            return out if np.ndim(out) else float(out)
        raise KernelClassError(f"no exact bridge CDF for {type(spec.kernel).__name__}")
    if method == "quadrature":
        if spec.kernel.discrete:
            j = int(math.floor(float(y) - x))
            if j < 0:
                return 0.0
            pts = np.arange(0, min(j, int(z - x)) + 1) + int(x)
            return float(np.sum(transition_mass(spec, t, pts)))
        lo, hi = _bridge_interval(spec, t)
        y = float(y)
        if y <= lo:
            return 0.0
        if y >= hi:
            return 1.0
        val, _ = numerics._quad_segment(
            lambda v: float(transition_density(spec, t, v)), lo, y, 1e-12, 1e-11
        )
        return min(max(val, 0.0), 1.0)
    raise DomainError(f"unknown method {method!r}")


def _bridge_interval(spec: BridgeSpec, t: float) -> tuple[float, float]:
    """Interval carrying (essentially) all bridge mass at time t."""
    dt, rem = _pinned_step_params(spec, t)
    x, z = spec.start_value, spec.end_value
    if isinstance(spec.kernel, BrownianKernel):
        mean = x + dt / (dt + rem) * (z - x)
        sd = math.sqrt(dt * rem / (dt + rem))
        return mean - 13.5 * sd, mean + 13.5 * sd
    if spec.kernel.nondecreasing:
        return min(x, z), max(x, z)
    raise KernelClassError(f"no support rule for {type(spec.kernel).__name__}")


def sample_step(kernel: Kernel, dt: float, remaining: float, x, z, rng, size=None):
    """Exact one-step draw of a pinned kernel at elapsed dt, pin remaining away.

    Vectorized over (x, z); this is the primitive both bridge paths and the
    terminal-conditioned process sampler are built from.
    """
    if dt <= 0 or remaining <= 0:
        raise DomainError("step and remaining times must be positive")
    if isinstance(kernel, BrownianKernel):
        frac = dt / (dt + remaining)
        mean = np.asarray(x, dtype=float) + frac * (np.asarray(z, dtype=float) - x)
        sd = math.sqrt(dt * remaining / (dt + remaining))
        return rng.normal(mean, sd, size=size)
    if isinstance(kernel, GammaKernel):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if size is None:
            # beta() does not broadcast scalar parameters over x and z
            size = np.broadcast(x, z).shape or None
        frac = rng.beta(kernel.m * dt, kernel.m * remaining, size=size)
        return x + frac * (z - x)
    if isinstance(kernel, PoissonKernel):
        n = np.asarray(np.asarray(z) - np.asarray(x), dtype=np.int64)
        p = dt / (dt + remaining)
        return np.asarray(x) + rng.binomial(n, p, size=size)
    raise KernelClassError(f"no exact bridge sampler for {type(kernel).__name__}")


def _sample_step_inverse_cdf(spec: BridgeSpec, t: float, rng) -> float:
    """One bridge draw through the numeric inverse-CDF fallback."""
    u = float(rng.uniform())
    if spec.kernel.discrete:
        n = int(spec.end_value - spec.start_value)
        pts = np.arange(n + 1) + int(spec.start_value)
        masses = np.asarray(transition_mass(spec, t, pts), dtype=float)
        cum = np.cumsum(masses)
        cum /= cum[-1]
        return float(pts[int(np.searchsorted(cum, u, side="left"))])
    lo, hi = _bridge_interval(spec, t)
    pdf = lambda y: float(transition_density(spec, t, y))
    return numerics.inverse_cdf(pdf, lo, hi, u, tol=1e-10)


def sample_path(spec: BridgeSpec, times, rng, *, method: str = "exact") -> SamplePath:
    """Sample the bridge on a strictly increasing grid inside (start, end].

    The walk re-pins after every step, so draws at successive grid points
    have the correct joint law. A grid point equal to the horizon is set to
    the pinned value exactly. ``method`` is ``exact`` (kernel-specific
    conditionals) or ``inverse_cdf`` (generic numeric fallback).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("need a non-empty 1-d grid")
    if np.any(np.diff(times) <= 0):
        raise DomainError("grid must be strictly increasing")
    if times[0] <= spec.start_time or times[-1] > spec.end_time:
        raise DomainError(
            f"grid must lie inside ({spec.start_time}, {spec.end_time}]"
        )
    if method not in ("exact", "inverse_cdf"):
        raise DomainError(f"unknown method {method!r}")
    values = np.empty_like(times)
    cur_t, cur_x = spec.start_time, spec.start_value
    for k, t in enumerate(times):
        if t == spec.end_time:
            values[k] = spec.end_value
        elif method == "exact":
            values[k] = sample_step(
                spec.kernel, t - cur_t, spec.end_time - t, cur_x, spec.end_value, rng
            )
        else:
            step_spec = BridgeSpec(
                kernel=spec.kernel,
                end_time=spec.end_time,
                end_value=spec.end_value,
                start_time=cur_t,
                start_value=cur_x,
            )
            values[k] = _sample_step_inverse_cdf(step_spec, t, rng)
        cur_t, cur_x = t, values[k]
    return SamplePath(times=times, values=values)
