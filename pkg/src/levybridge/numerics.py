"""Quadrature over mixed measures, monotone root finding, special functions.

Everything downstream (conditional laws, pricing, samplers) funnels its
numerical work through this module so that tolerances live in one place.
Measures are represented as an atom list plus an optional absolutely
continuous component; there is deliberately no way to express a singular
continuous part.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import optimize as _sci_optimize
from scipy import special as _sci_special

from .errors import DomainError, NoRootError, NonMonotoneError, NumericError

__all__ = [
    "DensityComponent",
    "MixedMeasure",
    "integrate",
    "find_root_monotone",
    "inverse_cdf",
    "composite_quad_batch",
    "norm_cdf",
    "norm_ppf",
    "log_gamma",
    "beta_fn",
    "reg_inc_beta",
    "reg_lower_gamma",
    "reg_lower_gamma_inv",
]

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-9

_TAIL_CLASSES = ("gaussian", "exponential", "power", "compact")


# ---------------------------------------------------------------------------
# special functions (Cephes via scipy; accuracy contract pinned by tests)


def norm_cdf(x):
    """Standard normal CDF."""
    return _sci_special.ndtr(x)


def norm_ppf(q):
    """Standard normal quantile function."""
    return _sci_special.ndtri(q)


def log_gamma(x):
    return _sci_special.gammaln(x)


def beta_fn(a: float, b: float) -> float:
    """Euler beta function B(a, b)."""
    return float(math.exp(_sci_special.betaln(a, b)))


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta I(x; a, b)."""
    return _sci_special.betainc(a, b, x)


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    return _sci_special.gammainc(a, x)


def reg_lower_gamma_inv(a, q):
    """Inverse of `reg_lower_gamma` in its second argument."""
    return _sci_special.gammaincinv(a, q)


# ---------------------------------------------------------------------------
# mixed measures


@dataclass(frozen=True)
class DensityComponent:
    """Absolutely continuous component of a measure.

    Parameters
    ----------
    pdf:
        Density with respect to Lebesgue measure. Must accept floats and
        numpy arrays, and is allowed to integrate to any finite positive
        mass (a component of weight w carries a pdf integrating to w).
    lower, upper:
        Support interval; either end may be infinite. The pdf must vanish
        outside.
    breakpoints:
        Interior points where the pdf is non-smooth; quadrature splits there.
    tail:
        Decay class hint, one of ``gaussian | exponential | power | compact``.
    sampler:
        Optional exact draw, ``sampler(rng, size) -> ndarray`` returning
        variates of the normalized density.
    cdf:
        Optional normalized CDF of the component (values in [0, 1]); used for
        tail localisation and as a sampling fallback.
    """

    pdf: Callable
    lower: float
    upper: float
    breakpoints: tuple[float, ...] = ()
    tail: str = "exponential"
    sampler: Callable | None = None
    cdf: Callable | None = None

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"density support [{self.lower}, {self.upper}] is empty")
        if self.tail not in _TAIL_CLASSES:
            raise DomainError(f"unknown tail class {self.tail!r}")
        pts = tuple(sorted(p for p in self.breakpoints if self.lower < p < self.upper))
        object.__setattr__(self, "breakpoints", pts)

    def effective_interval(self, eps: float = 1e-16) -> tuple[float, float]:
        """Finite interval carrying all but ~eps of the component's mass.

        Finite supports are returned as-is. Infinite tails need a `cdf`; with
        one, quantiles are bracketed by doubling and bisection.
        """
        lo, hi = self.lower, self.upper
        if math.isinf(lo):
            lo = self._quantile(eps)
        if math.isinf(hi):
            hi = self._quantile(1.0 - eps)
        return lo, hi

    def _quantile(self, q: float) -> float:
        if self.cdf is None:
            raise NumericError(
                "density component has an infinite tail and no cdf; "
                "cannot localise its mass"
            )
        anchor = 0.0
        if not math.isinf(self.lower):
            anchor = self.lower
        elif not math.isinf(self.upper):
            anchor = self.upper
        step = 1.0
        lo, hi = anchor - step, anchor + step
        for _ in range(200):
            if float(self.cdf(lo)) <= q:
                break
            lo -= step
            step *= 2.0
        step = 1.0
        for _ in range(200):
            if float(self.cdf(hi)) >= q:
                break
            hi += step
            step *= 2.0
        f = lambda x: float(self.cdf(x)) - q
        if f(lo) > 0 or f(hi) < 0:
            raise NumericError("cdf quantile bracketing failed", q=q, lo=lo, hi=hi)
        return float(_sci_optimize.brentq(f, lo, hi, xtol=1e-9, rtol=1e-12))


def mass_interval(component: DensityComponent, eps: float = 1e-14) -> tuple[float, float]:
    """Finite interval carrying all but ~eps of the component's mass.

    With a cdf this is `effective_interval`. Without one, infinite tails are
    cut by integrating the pdf outward and doubling the cut point until the
    remaining tail mass drops below eps of the total.
    """
    d = component
    if (math.isfinite(d.lower) and math.isfinite(d.upper)) or d.cdf is not None:
        return d.effective_interval(eps)
    total, _ = _quad_segment(lambda z: float(d.pdf(z)), d.lower, d.upper, 1e-12, 1e-10)
    lo, hi = d.lower, d.upper
    anchor = 0.0
    for b in (d.lower, d.upper, *d.breakpoints):
        if math.isfinite(b):
            anchor = b
            break
    if math.isinf(hi):
        r = abs(anchor) + 1.0
        for _ in range(200):
            rem, _ = _quad_segment(lambda z: float(d.pdf(z)), r, math.inf, 1e-14, 1e-10)
            if rem <= eps * total:
                break
            r *= 2.0
        hi = r
    if math.isinf(lo):
        r = -abs(anchor) - 1.0
        for _ in range(200):
            rem, _ = _quad_segment(lambda z: float(d.pdf(z)), -math.inf, r, 1e-14, 1e-10)
            if rem <= eps * total:
                break
            r *= 2.0
        lo = r
    return lo, hi


@dataclass(frozen=True)
class MixedMeasure:
    """Finite measure made of point masses plus a density component."""

    atoms: tuple[tuple[float, float], ...] = ()
    density: DensityComponent | None = None

    def __post_init__(self):
        cleaned = []
        for loc, w in self.atoms:
            loc, w = float(loc), float(w)
            if not math.isfinite(loc):
                raise DomainError(f"atom location {loc} is not finite")
            if w < 0 or not math.isfinite(w):
                raise DomainError(f"atom weight {w} must be finite and >= 0")
            cleaned.append((loc, w))
        cleaned.sort(key=lambda p: p[0])
        locs = [p[0] for p in cleaned]
        if len(set(locs)) != len(locs):
            raise DomainError("duplicate atom locations")
        object.__setattr__(self, "atoms", tuple(cleaned))

    @property
    def atom_mass(self) -> float:
        return sum(w for _, w in self.atoms)


def integrate(
    measure: MixedMeasure,
    fn: Callable,
    *,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    extra_breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``fn`` against a mixed measure.

    Atom contributions are summed exactly; the density part goes through
    adaptive quadrature split at declared breakpoints. Raises NumericError
    (with solver diagnostics attached) instead of returning nan.
    """
    total = 0.0
    for loc, w in measure.atoms:
        if w == 0.0:
            continue
        v = float(fn(loc))
        if not math.isfinite(v):
            raise NumericError(f"integrand not finite at atom {loc}", value=v)
        total += w * v
    d = measure.density
    if d is not None:
        total += _quad_density(d, fn, abs_tol, rel_tol, extra_breakpoints)
    return total


def _quad_density(d, fn, abs_tol, rel_tol, extra_breakpoints):
    pts = sorted({float(p) for p in (*d.breakpoints, *extra_breakpoints) if d.lower < p < d.upper})
    edges = [d.lower, *pts, d.upper]
    total = 0.0
    g = lambda z: float(fn(z)) * float(d.pdf(z))
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = _quad_segment(g, a, b, abs_tol, rel_tol)
        total += val
    return total


def _quad_segment(g, a, b, abs_tol, rel_tol):
    out = _sci_integrate.quad(
        g, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=400, full_output=1
    )
    val, abserr = out[0], out[1]
    if not math.isfinite(val):
        raise NumericError(
            f"quadrature over [{a}, {b}] returned {val}", segment=(a, b)
        )
    if len(out) > 3:
        # QUADPACK flagged trouble; accept only if the error estimate still
        # meets the requested budget with some slack.
        if abserr > 50 * max(abs_tol, rel_tol * abs(val)):
            raise NumericError(
                f"quadrature over [{a}, {b}] failed: {out[3]}",
                segment=(a, b),
                estimate=val,
                abserr=abserr,
            )
    return val, abserr


# ---------------------------------------------------------------------------
# root finding


def find_root_monotone(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-10,
    samples: int = 17,
) -> float:
    """Root of a monotone function on a bracketing interval.

    The bracket must straddle a sign change (NoRootError otherwise), and a
    sampled scan must not reveal a reversal of direction (NonMonotoneError).
    The scan is a guard against misuse, not a proof of monotonicity.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    f_lo, f_hi = float(fn(lo)), float(fn(hi))
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoRootError(f"no sign change on bracket: f({lo})={f_lo}, f({hi})={f_hi}")
    xs = np.linspace(lo, hi, samples)
    vals = np.array([float(fn(x)) for x in xs])
    direction = 1.0 if f_hi > f_lo else -1.0
    slack = 1e-12 * float(np.max(np.abs(vals)))
    if np.any(direction * np.diff(vals) < -slack):
        raise NonMonotoneError(
            f"sampled values on [{lo}, {hi}] are not monotone; "
            "refusing to treat the root as unique"
        )
    return float(_sci_optimize.brentq(fn, lo, hi, xtol=tol, rtol=8.9e-16))


def inverse_cdf(
    pdf: Callable[[float], float],
    lo: float,
    hi: float,
    u: float,
    *,
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
) -> float:
    """u-quantile of an unnormalized density on a finite interval.

    Root-finds on the cumulative integral; the kernel-agnostic (and slow)
    correctness baseline for samplers.
    """
    if not (0.0 < u < 1.0):
        raise DomainError(f"u={u} must lie in (0, 1)")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"invalid support [{lo}, {hi}]")
    pts = sorted({float(p) for p in breakpoints if lo < p < hi})
    edges = [lo, *pts, hi]
    cum = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = _quad_segment(pdf, a, b, tol * 1e-2, 1e-12)
        cum.append(cum[-1] + val)
    total = cum[-1]
    if not total > 0:
        raise NumericError("density integrates to zero on the support")
    target = u * total

    def cumulative(y: float) -> float:
        j = 0
        for k in range(len(edges) - 1):
            if edges[k + 1] < y:
                j = k + 1
            else:
                break
        val, _ = _quad_segment(pdf, edges[j], y, tol * 1e-2, 1e-12)
        return cum[j] + val - target

    return float(_sci_optimize.brentq(cumulative, lo, hi, xtol=tol, rtol=8.9e-16))


# ---------------------------------------------------------------------------
# vectorized composite quadrature (for MC-scale batch evaluation)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def composite_quad_batch(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    init_panels: int = 8,
    max_doublings: int = 8,
) -> np.ndarray:
    """Integrate a batch of smooth integrands over a finite interval.

    ``fn`` maps a node vector of shape (k,) to values of shape (..., k);
    the return value has shape (...,). Panels are doubled until the result
    stabilizes, which suits the smooth decaying integrands produced by the
    conditional-law machinery. Not adaptive per batch row by design: every
    row sees the same nodes, so results do not depend on how rows are
    batched together.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise DomainError(f"invalid interval [{a}, {b}]")
    panels = init_panels
    prev = None
    for _ in range(max_doublings + 1):
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
        wts = (half[:, None] * _GL_WEIGHTS).ravel()
        vals = np.asarray(fn(nodes))
        cur = vals @ wts
        if prev is not None:
            diff = float(np.max(np.abs(cur - prev)))
            scale = float(np.max(np.abs(cur))) if np.ndim(cur) else abs(float(cur))
            if diff <= max(abs_tol, rel_tol * scale):
                return cur
        prev = cur
        panels *= 2
    raise NumericError(
        "composite quadrature did not stabilize",
        interval=(a, b),
        panels=panels // 2,
    )
