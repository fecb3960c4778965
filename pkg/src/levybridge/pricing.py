"""Pricing of cash flows driven by a terminal-conditioned information process.

The price of a claim paying the terminal value X at the horizon is the
discounted conditional mean given the current information state. A European
call on that price reduces to an integral of bridge exceedance weights
against the current posterior of X, with the exercise region delimited by a
critical information level whenever the price is monotone in the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bridge as _bridge
from . import core as _core
from . import numerics
from .errors import (
    DomainError,
    NonMonotoneError,
    NumericError,
    UnsupportedKernelError,
)
from .kernels import BrownianKernel, GammaKernel
from .laws import TerminalLaw

__all__ = [
    "RateCurve",
    "CallSpec",
    "BinaryBondSpec",
    "ExerciseBoundary",
    "price",
    "price_many",
    "critical_information",
    "call_price",
    "binary_bond_posterior",
    "sde_coefficients",
]


@dataclass(frozen=True)
class RateCurve:
    """Deterministic piecewise-constant short rate.

    ``times`` are segment start points beginning at 0; ``rates[i]`` applies
    on [times[i], times[i+1]).
    """

    times: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        rates = tuple(float(r) for r in self.rates)
        if not times or times[0] != 0.0:
            raise DomainError("rate segments must start at time 0")
        if any(b <= a for a, b in zip(times[:-1], times[1:])):
            raise DomainError("segment times must be strictly increasing")
        if len(times) != len(rates):
            raise DomainError("times and rates must have equal length")
        if any(not math.isfinite(r) for r in rates):
            raise DomainError("rates must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def flat(cls, r: float) -> "RateCurve":
        return cls(times=(0.0,), rates=(float(r),))

    def short_rate(self, t: float) -> float:
        if t < 0:
            raise DomainError(f"time {t} is negative")
        idx = 0
        for i, start in enumerate(self.times):
            if start <= t:
                idx = i
        return self.rates[idx]

    def integral(self, s: float, t: float) -> float:
        """Integral of the short rate over [s, t]."""
        if not 0.0 <= s <= t:
            raise DomainError(f"need 0 <= s <= t, got [{s}, {t}]")
        edges = [*self.times, math.inf]
        total = 0.0
        for i, r in enumerate(self.rates):
            a, b = max(edges[i], s), min(edges[i + 1], t)
            if b > a:
                total += r * (b - a)
        return total

    def discount(self, s: float, t: float) -> float:
        """Discount factor from t back to s."""
        return math.exp(-self.integral(s, t))


@dataclass(frozen=True)
class CallSpec:
    """European call terms on the horizon cash flow's price process.

    ``xi`` is the information state observed at the valuation time.
    """

    strike: float
    maturity: float
    valuation_time: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        if not (self.strike >= 0 and math.isfinite(self.strike)):
            raise DomainError(f"strike must be finite and >= 0, got {self.strike}")
        if not 0.0 <= self.valuation_time < self.maturity:
            raise DomainError("need 0 <= valuation_time < maturity")
        if not math.isfinite(self.xi):
            raise DomainError("information state must be finite")


@dataclass(frozen=True)
class BinaryBondSpec:
    """Two-point cash flow: pays high or low at the horizon."""

    low: float
    high: float
    low_prob: float

    def __post_init__(self):
        if not self.low < self.high:
            raise DomainError("need low < high")
        if not 0.0 < self.low_prob < 1.0:
            raise DomainError("low_prob must be in (0, 1)")

    def terminal_law(self) -> TerminalLaw:
        return TerminalLaw.binary(self.low, self.high, self.low_prob)


@dataclass(frozen=True)
class ExerciseBoundary:
    """Exercise region of a call in information-state space.

    kind ``threshold`` means the region is (threshold, +inf); ``all`` and
    ``empty`` are the degenerate regions; ``intervals`` carries an explicit
    union of open intervals (endpoints may be infinite), produced when the
    price map is not monotone and set mode was requested.
    """

    kind: str
    threshold: float | None = None
    intervals: tuple[tuple[float, float], ...] = ()


# ---------------------------------------------------------------------------
# the price of the terminal cash flow


def price(spec: _core.LRBSpec, curve: RateCurve, t: float, xi: float) -> float:
    """Discounted conditional mean of the terminal cash flow at state (t, xi)."""
    t = spec._check_time(t)
    df = curve.discount(t, spec.horizon)
    return df * _core.conditional_moment(spec, t, xi, 1)


def price_many(spec: _core.LRBSpec, curve: RateCurve, t: float, xis) -> np.ndarray:
    """Vectorized `price` over an array of states."""
    t = spec._check_time(t)
    df = curve.discount(t, spec.horizon)
    return df * _core.posterior_mean_many(spec, t, xis)


# ---------------------------------------------------------------------------
# exercise boundary


def _reachable_interval(spec: _core.LRBSpec) -> tuple[float, float]:
    if isinstance(spec.kernel, BrownianKernel):
        return (-math.inf, math.inf)
    if spec.kernel.nondecreasing:
        _, hi = spec.terminal.support()
        return (0.0, hi)
    raise UnsupportedKernelError(
        f"no reachable-state rule for {type(spec.kernel).__name__}"
    )


def _toward(bound: float, x: float, up: bool) -> float:
    """Step x outward toward an open or infinite bound."""
    if math.isinf(bound):
        return 2.0 * x + 1.0 if up else 2.0 * x - 1.0
    return bound - 0.25 * (bound - x)


def _scan_range(spec: _core.LRBSpec, t: float) -> tuple[float, float]:
    """Finite state interval outside which the price sign cannot change.

    Past these bounds the posterior is pinned to an edge of the terminal
    support, so the price sits within any strike that passed the entry
    support checks. Subordinator states fill (0, sup support) outright; for
    the Brownian kernel the bounds scale the support by t/T plus a bridge
    deviation allowance.
    """
    if spec.kernel.nondecreasing:
        b_lo, b_hi = _reachable_interval(spec)
        inset = 1e-9 * (b_hi - b_lo)
        return b_lo + inset, b_hi - inset
    los, his = [], []
    for z, _ in spec.terminal.atoms:
        los.append(z)
        his.append(z)
    if spec.terminal.density is not None:
        e_lo, e_hi = spec.terminal.density.effective_interval()
        los.append(e_lo)
        his.append(e_hi)
    frac = t / spec.horizon
    sd = math.sqrt(t * (spec.horizon - t) / spec.horizon)
    return frac * min(los) - 14.0 * sd, frac * max(his) + 14.0 * sd


def critical_information(
    spec: _core.LRBSpec,
    curve: RateCurve,
    t: float,
    strike: float,
    *,
    mode: str = "monotone",
) -> ExerciseBoundary:
    """Boundary of {xi : price(t, xi) > strike} in the information state.

    In ``monotone`` mode the price map is re-verified to be nondecreasing on
    the bracketing interval each call (raising NonMonotoneError otherwise)
    and the region is a single threshold. ``set`` mode drops the assumption
    and returns a union of intervals found by sign scanning plus root
    polishing.
    """
    if spec.kernel.discrete:
        raise UnsupportedKernelError("exercise boundaries need a continuous kernel")
    t = float(t)
    if not 0.0 < t < spec.horizon:
        raise DomainError(f"option maturity {t} must lie inside (0, {spec.horizon})")
    if mode not in ("monotone", "set"):
        raise DomainError(f"unknown mode {mode!r}")
    df = curve.discount(t, spec.horizon)
    z_lo, z_hi = spec.terminal.support()
    if strike <= df * z_lo:
        return ExerciseBoundary(kind="all")
    if strike >= df * z_hi:
        return ExerciseBoundary(kind="empty")

    def g(xi: float) -> float:
        return df * _core.conditional_moment(spec, t, xi, 1) - strike

    b_lo, b_hi = _reachable_interval(spec)
    if mode == "monotone":
        # interior starting bracket around the mean interpolation of the
        # state, which always lies strictly inside the reachable interval
        mid = (t / spec.horizon) * spec.terminal.mean()
        lo = b_lo + 0.5 * (mid - b_lo) if math.isfinite(b_lo) else mid - max(1.0, abs(mid))
        hi = b_hi - 0.5 * (b_hi - mid) if math.isfinite(b_hi) else mid + max(1.0, abs(mid))
        g_lo, g_hi = g(lo), g(hi)
        for _ in range(120):
            if g_lo <= 0.0:
                break
            lo = _toward(b_lo, lo, up=False)
            g_lo = g(lo)
        for _ in range(120):
            if g_hi >= 0.0:
                break
            hi = _toward(b_hi, hi, up=True)
            g_hi = g(hi)
        if g_lo > 0.0:
            # under monotonicity a positive sign at the far low edge settles it
            return ExerciseBoundary(kind="all")
        if g_hi < 0.0:
            return ExerciseBoundary(kind="empty")
        root = numerics.find_root_monotone(g, lo, hi, tol=1e-13, samples=33)
        resid = abs(g(root))
        if resid > 1e-10 * max(1.0, strike):
            raise NumericError(
                "critical information root residual too large",
                residual=resid,
                threshold=root,
            )
        return ExerciseBoundary(kind="threshold", threshold=root)

    # set mode has no monotonicity to lean on: the price can exceed the
    # strike at both edges yet dip below in between, so the whole range in
    # which the sign is not yet settled is scanned, and edge pieces extend
    # to the reachable bounds
    lo, hi = _scan_range(spec, t)
    xs = np.linspace(lo, hi, 257)
    vals = np.array([g(float(x)) for x in xs])
    crossings: list[float] = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            crossings.append(float(a))
        elif (fa < 0) != (fb < 0):
            crossings.append(
                float(numerics.find_root_monotone(g, float(a), float(b), tol=1e-13, samples=2))
            )
    pieces: list[tuple[float, float]] = []
    edges = [float(lo), *crossings, float(hi)]
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a and g(0.5 * (a + b)) > 0.0:
            pieces.append((a, b))
    if not pieces:
        return ExerciseBoundary(kind="empty")
    if pieces[0][0] == edges[0] and vals[0] > 0:
        pieces[0] = (b_lo, pieces[0][1])
    if pieces[-1][1] == edges[-1] and vals[-1] > 0:
        pieces[-1] = (pieces[-1][0], b_hi)
    return ExerciseBoundary(kind="intervals", intervals=tuple(pieces))


# ---------------------------------------------------------------------------
# European call on the cash-flow price


def _region_weight(spec, boundary, s, xi_s, t, z, method):
    """P[state at t lies in the exercise region | state (s, xi_s), pin z]."""
    if boundary.kind == "all":
        return 1.0
    if boundary.kind == "empty":
        return 0.0
    pin = _bridge.BridgeSpec(
        kernel=spec.kernel,
        end_time=spec.horizon,
        end_value=float(z),
        start_time=s,
        start_value=xi_s,
    )
    how = "exact" if method == "closed" else "quadrature"
    if boundary.kind == "threshold":
        return 1.0 - float(_bridge.transition_cdf(pin, t, boundary.threshold, method=how))
    total = 0.0
    for a, b in boundary.intervals:
        cdf_b = 1.0 if math.isinf(b) else float(_bridge.transition_cdf(pin, t, b, method=how))
        cdf_a = 0.0 if math.isinf(a) else float(_bridge.transition_cdf(pin, t, a, method=how))
        total += cdf_b - cdf_a
    return total


def call_price(
    spec: _core.LRBSpec,
    curve: RateCurve,
    call: CallSpec,
    *,
    method: str = "closed",
    boundary: ExerciseBoundary | None = None,
) -> float:
    """Price at (call.valuation_time, call.xi) of a call on the cash-flow price.

    ``closed`` evaluates the bridge exceedance weights with the kernel's
    exact CDF (normal / regularized incomplete beta); ``quadrature``
    integrates the bridge transition density instead and exists as the
    independent route the coherence tests compare against. A precomputed
    ``boundary`` skips the critical-information solve.
    """
    if spec.kernel.discrete:
        raise UnsupportedKernelError("call pricing needs a continuous kernel")
    if method not in ("closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    s, t, xi_s = call.valuation_time, call.maturity, call.xi
    if not t < spec.horizon:
        raise DomainError(f"option maturity {t} must precede the horizon {spec.horizon}")
    if boundary is None:
        boundary = critical_information(spec, curve, t, call.strike)
    if boundary.kind == "empty":
        return 0.0
    post_s = _core.terminal_posterior(spec, s, xi_s)
    df_st = curve.discount(s, t)
    df_t = curve.discount(t, spec.horizon)

    def discounted_exercise_payoff(z: float) -> float:
        return (df_t * z - call.strike) * _region_weight(spec, boundary, s, xi_s, t, z, method)

    return df_st * numerics.integrate(post_s.measure, discounted_exercise_payoff)


# ---------------------------------------------------------------------------
# two-point cash flows


def binary_bond_posterior(spec: _core.LRBSpec, t: float, xi):
    """Posterior weights (rho_low, rho_high) of a two-atom terminal law.

    Vectorized over the information state xi; computed from kernel
    log-weights, so it holds for every kernel family.
    """
    atoms = spec.terminal.atoms
    if spec.terminal.density is not None or len(atoms) != 2:
        raise DomainError("binary bond posterior needs exactly two atoms and no density")
    t = spec._check_time(t)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if t == 0.0:
        rho1 = np.full_like(xi_arr, atoms[1][1])
    else:
        logs = _core._atom_log_terms(spec, t, xi_arr)
        with np.errstate(over="ignore"):
            rho1 = 1.0 / (1.0 + np.exp(logs[:, 0] - logs[:, 1]))
        rho1 = np.where(np.isneginf(logs[:, 0]) & np.isneginf(logs[:, 1]), np.nan, rho1)
        if np.any(np.isnan(rho1)):
            raise NumericError("binary posterior undefined: both atoms have zero weight")
    rho0 = 1.0 - rho1
    if np.ndim(xi) == 0:
        return float(rho0[0]), float(rho1[0])
    return rho0, rho1


# ---------------------------------------------------------------------------
# price dynamics


def sde_coefficients(spec: _core.LRBSpec, curve: RateCurve, t: float, xi: float):
    """(drift, diffusion) of the price process at state (t, xi).

    Valid for the Brownian-kernel construction: drift is rate times price,
    diffusion is the discounted conditional variance of the terminal value
    scaled by the remaining time.
    """
    if not isinstance(spec.kernel, BrownianKernel):
        raise UnsupportedKernelError("price SDE coefficients need the Brownian kernel")
    t = spec._check_time(t)
    x_t = price(spec, curve, t, xi)
    post = _core.terminal_posterior(spec, t, xi)
    m1 = numerics.integrate(post.measure, lambda z: z)
    m2 = numerics.integrate(post.measure, lambda z: z * z)
    var = max(m2 - m1 * m1, 0.0)
    df = curve.discount(t, spec.horizon)
    return curve.short_rate(t) * x_t, df * var / (spec.horizon - t)
