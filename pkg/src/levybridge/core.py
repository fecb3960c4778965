"""Conditional laws of processes pinned to a randomized terminal value.

The central object is the aggregate

    psi_t(xi) = sum_i w_i f(T-t, z_i - xi) / f(T, z_i)
              + integral  f(T-t, z - xi) / f(T, z) p(z) dz

over the terminal law nu = sum w_i delta_{z_i} + p(z) dz. It normalizes the
posterior of the terminal value given the state xi at time t, drives the
Markov transition density, and its reciprocal is the density of the plain
increment law with respect to the conditioned one. All operations here are
exact-in-principle quadratures or sums; sampling lives in `sampler`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import special as _sp

from . import numerics
from .errors import (
    DomainError,
    InfiniteMomentError,
    InvalidPinError,
    NumericError,
    UnreachableStateError,
)
from .kernels import BrownianKernel, GammaKernel, Kernel
from .laws import TerminalLaw
from .numerics import DensityComponent, MixedMeasure

__all__ = [
    "LRBSpec",
    "psi_total",
    "psi_total_many",
    "rn_derivative",
    "transition_density",
    "transition_mass",
    "terminal_posterior",
    "posterior_mean_many",
    "conditional_moment",
    "restart",
    "increment_joint_density",
    "reordered_increment_conditional",
]


@dataclass(frozen=True)
class LRBSpec:
    """A process pinned at ``horizon`` to a terminal value drawn from ``terminal``.

    Validation enforces absolute continuity of the terminal law with respect
    to the kernel's increment law at the horizon: every atom needs a positive
    finite kernel weight there, a density component must live inside the
    kernel's support, and lattice kernels take purely atomic integer laws.
    """

    kernel: Kernel
    horizon: float
    terminal: TerminalLaw

    def __post_init__(self):
        T = self.horizon
        if not (T > 0 and math.isfinite(T)):
            raise DomainError(f"horizon must be positive and finite, got {T}")
        if self.kernel.discrete:
            if self.terminal.density is not None:
                raise DomainError("lattice kernels take purely atomic terminal laws")
            for z, _ in self.terminal.atoms:
                if z != int(z):
                    raise DomainError(f"terminal atom {z} is not a lattice point")
                if not float(self.kernel.mass(T, int(z))) > 0.0:
                    raise InvalidPinError(
                        f"terminal atom {z} has zero lattice mass at the horizon"
                    )
            return
        for z, _ in self.terminal.atoms:
            w = float(self.kernel.density(T, z))
            if not (w > 0.0 and math.isfinite(w)):
                raise InvalidPinError(
                    f"terminal atom {z} has kernel weight {w} at the horizon"
                )
        if self.terminal.density is not None:
            lo, hi = self.kernel.increment_support(T)
            d = self.terminal.density
            if d.lower < lo or d.upper > hi:
                raise InvalidPinError(
                    f"terminal density support [{d.lower}, {d.upper}] leaves the "
                    f"kernel support ({lo}, {hi})"
                )

    def _check_time(self, t: float, *, terminal_ok: bool = False) -> float:
        t = float(t)
        hi_ok = t <= self.horizon if terminal_ok else t < self.horizon
        if not (0.0 <= t and hi_ok):
            raise DomainError(f"time {t} outside [0, {self.horizon})")
        return t


# ---------------------------------------------------------------------------
# the psi aggregate


def _atom_log_terms(spec: LRBSpec, t: float, xi) -> np.ndarray:
    """log of w_i * f(T-t, z_i - xi) / f(T, z_i), shape (n_xi, n_atoms)."""
    locs = np.array([z for z, _ in spec.terminal.atoms])
    logw = np.log([w for _, w in spec.terminal.atoms])
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if spec.kernel.discrete:
        base = spec.kernel.log_mass(spec.horizon, locs.astype(int))
        steps = spec.kernel.log_mass(
            spec.horizon - t, (locs[None, :] - xi[:, None]).astype(int)
        )
    else:
        base = spec.kernel.log_density(spec.horizon, locs)
        steps = spec.kernel.log_density(spec.horizon - t, locs[None, :] - xi[:, None])
    return steps + (logw - base)[None, :]


def _weight_values(kernel: Kernel, T: float, t: float, xi: float, z) -> np.ndarray:
    """f(T-t, z - xi) / f(T, z) with 0 outside the kernel support, vectorized."""
    z = np.asarray(z, dtype=float)
    ld_step = kernel.log_density(T - t, z - xi)
    ld_base = kernel.log_density(T, z)
    ok = np.isfinite(ld_base)
    arg = np.where(ok, ld_step - np.where(ok, ld_base, 0.0), -np.inf)
    with np.errstate(over="ignore"):
        return np.exp(arg)


def psi_total(
    spec: LRBSpec,
    t: float,
    xi: float,
    *,
    abs_tol: float = numerics.DEFAULT_ABS_TOL,
    rel_tol: float = numerics.DEFAULT_REL_TOL,
) -> float:
    """Total mass of the unnormalized conditional terminal measure at (t, xi).

    Equals 1 at t = 0 identically. This is the Radon-Nikodym density of the
    conditioned path law with respect to the plain one on information up to
    t, and therefore a martingale of the state; tests lean on that.
    """
    t = spec._check_time(t)
    if t == 0.0:
        return 1.0
    xi = float(xi)
    total = 0.0
    if spec.terminal.atoms:
        with np.errstate(over="ignore"):
            terms = np.exp(_atom_log_terms(spec, t, xi)[0])
        total += float(np.sum(terms))
    if spec.terminal.density is not None:
        fn = partial(_weight_values, spec.kernel, spec.horizon, t, xi)
        extra = (xi,) if spec.kernel.nondecreasing else ()
        total += numerics.integrate(
            MixedMeasure(density=spec.terminal.density),
            fn,
            abs_tol=abs_tol,
            rel_tol=rel_tol,
            extra_breakpoints=extra,
        )
    if not math.isfinite(total):
        raise NumericError(f"psi at (t={t}, xi={xi}) is not finite", value=total)
    return total


def rn_derivative(spec: LRBSpec, t: float, xi: float) -> float:
    """Density of the plain increment law w.r.t. the conditioned one at (t, xi)."""
    psi = psi_total(spec, t, xi)
    if psi <= 0.0:
        raise UnreachableStateError(f"state xi={xi} at t={t} has zero mass")
    return 1.0 / psi


# ---------------------------------------------------------------------------
# batched psi / posterior-mean evaluation (shared nodes per call, so results
# are independent of how callers batch their states)

_CHUNK = 16384


def _effective_interval(d: DensityComponent) -> tuple[float, float]:
    # posterior components built by terminal_posterior carry no cdf, so the
    # localisation must work from the pdf alone
    return numerics.mass_interval(d, 1e-16)


def _log_integrand_probe(spec, t, sub, plo, phi, d):
    """Locate where the weight-times-density integrand actually lives.

    The weight can amplify the density's far tail (its log is convex minus
    the pinning term), so the density's own effective interval is not a safe
    window. A coarse log-space scan per block finds, for every state, the
    node set within e^-60 of that state's peak; the union is the window.
    """
    probe = np.linspace(plo, phi, 513)
    T = spec.horizon
    with np.errstate(divide="ignore"):
        lp = np.log(np.asarray(d.pdf(probe), dtype=float))
    lw = spec.kernel.log_density(T - t, probe[None, :] - sub[:, None])
    lbase = spec.kernel.log_density(T, probe)
    total = lw + np.where(np.isfinite(lbase), lp - lbase, -np.inf)[None, :]
    row_max = np.max(total, axis=1)
    keep = total >= row_max[:, None] - 60.0
    alive = np.isfinite(row_max)
    keep &= alive[:, None]
    cols = np.nonzero(np.any(keep, axis=0))[0]
    if cols.size == 0:
        return None
    step = probe[1] - probe[0]
    lo = max(plo, float(probe[cols[0]]) - step)
    hi = min(phi, float(probe[cols[-1]]) + step)
    narrow = max(3, int(np.min(np.sum(keep[alive], axis=1))))
    return lo, hi, narrow * step


def _brownian_density_sums(spec, t, xis, powers):
    d = spec.terminal.density
    T = spec.horizon
    lo_p, hi_p = _effective_interval(d)
    sd = math.sqrt(T * (T - t) / t)
    centers = xis * (T / t)
    order = np.argsort(centers)
    out = {q: np.zeros_like(xis) for q in powers}
    # sorting keeps each block's union window tight, so the shared-node rule
    # (batch results must not depend on how rows are grouped) stays cheap
    block = 2048
    for start in range(0, xis.size, block):
        idx = order[start : start + block]
        sub = xis[idx]
        plo = max(d.lower, min(lo_p, float(centers[idx[0]]) - 12.0 * sd))
        phi = min(d.upper, max(hi_p, float(centers[idx[-1]]) + 12.0 * sd))
        if not plo < phi:
            continue
        window = _log_integrand_probe(spec, t, sub, plo, phi, d)
        if window is None:
            # every integrand in the block underflows: no resolvable mass
            continue
        lo, hi, feature = window

        def rows(nodes, sub=sub):
            w = _weight_many(spec.kernel, T, t, sub, nodes)
            base = w * np.asarray(d.pdf(nodes))[None, :]
            return np.stack([base * nodes[None, :] ** q for q in powers])

        panels = int(min(max(16, 4 * math.ceil((hi - lo) / feature)), 384))
        res = numerics.composite_quad_batch(
            rows, lo, hi, abs_tol=1e-13, rel_tol=1e-11, init_panels=panels, max_doublings=5
        )
        for i, q in enumerate(powers):
            out[q][idx] = res[i]
    return out


def _weight_many(kernel, T, t, xis, z_nodes):
    """Weight matrix f(T-t, z - xi)/f(T, z), shape (n_xi, n_nodes)."""
    ld_base = kernel.log_density(T, z_nodes)
    ld_step = kernel.log_density(T - t, z_nodes[None, :] - xis[:, None])
    ok = np.isfinite(ld_base)[None, :]
    arg = np.where(ok, ld_step - np.where(np.isfinite(ld_base), ld_base, 0.0)[None, :], -np.inf)
    with np.errstate(over="ignore"):
        return np.exp(arg)


_JACOBI_CACHE: dict[tuple[int, float], tuple[np.ndarray, np.ndarray]] = {}


def _jacobi_rule(n: int, beta: float):
    key = (n, beta)
    if key not in _JACOBI_CACHE:
        _JACOBI_CACHE[key] = _sp.roots_jacobi(n, 0.0, beta)
    return _JACOBI_CACHE[key]


def _gamma_density_sums(spec, t, xis, powers):
    """Tilted integrals for the gamma kernel.

    Written as e^xi * C * integral_0^W w^(a-1) h(xi + w) dw with h smooth;
    the w^(a-1) endpoint factor is absorbed by a Gauss-Jacobi rule, which
    keeps the nodes shared across the whole batch.
    """
    d = spec.terminal.density
    k: GammaKernel = spec.kernel
    T = spec.horizon
    a = k.m * (T - t)
    mT = k.m * T
    lo_p, hi_p = _effective_interval(d)
    log_c = _sp.gammaln(mT) - _sp.gammaln(a)

    def h(z, q):
        # (z)^(1-mT+q) * p(z), with the kernel-support guard
        z = np.maximum(z, 1e-300)
        return z ** (1.0 - mT + q) * np.asarray(d.pdf(z))

    out = {q: np.zeros_like(xis) for q in powers}
    inside = xis >= lo_p
    for group, from_zero in ((np.nonzero(inside)[0], True), (np.nonzero(~inside)[0], False)):
        if group.size == 0:
            continue
        xg = xis[group]
        W = hi_p - xg
        live = W > 0
        if from_zero:
            res = _jacobi_tilted(h, xg[live], W[live], a, powers)
        else:
            w0 = lo_p - xg[live]
            res = _plain_tilted(h, xg[live], w0, W[live], a, powers)
        scale = np.exp(xg[live] + log_c)
        for q in powers:
            vals = np.zeros(xg.shape)
            vals[live] = res[q] * scale
            out[q][group] = vals
    return out


def _jacobi_tilted(h, xg, W, a, powers):
    prev = None
    for n in (64, 128, 256, 512):
        x, wts = _jacobi_rule(n, a - 1.0)
        w_nodes = W[:, None] * (1.0 + x[None, :]) / 2.0
        z = xg[:, None] + w_nodes
        cur = {}
        for q in powers:
            cur[q] = (W / 2.0) ** a * (h(z, q) @ wts)
        if prev is not None:
            diff = max(float(np.max(np.abs(cur[q] - prev[q]))) for q in powers)
            scale = max(float(np.max(np.abs(cur[q]))) for q in powers)
            if diff <= max(1e-12, 1e-9 * scale):
                return cur
        prev = cur
    return prev


def _plain_tilted(h, xg, w0, W, a, powers):
    def rows(s):
        span = (W - w0)[:, None]
        w = w0[:, None] + span * s[None, :]
        z = xg[:, None] + w
        base = w ** (a - 1.0) * span
        return np.stack([base * h(z, q) for q in powers])

    out = numerics.composite_quad_batch(rows, 0.0, 1.0, init_panels=32, max_doublings=6)
    return {q: out[i] for i, q in enumerate(powers)}


def _tilted_sums(spec: LRBSpec, t: float, xis: np.ndarray, powers=(0,)) -> dict[int, np.ndarray]:
    """sum/integral of z^q f(T-t, z-xi)/f(T, z) nu(dz) for each q, batched over xi."""
    xis = np.asarray(xis, dtype=float)
    out = {q: np.zeros_like(xis) for q in powers}
    if spec.terminal.atoms:
        locs = np.array([z for z, _ in spec.terminal.atoms])
        with np.errstate(over="ignore"):
            e = np.exp(_atom_log_terms(spec, t, xis))
        for q in powers:
            out[q] += e @ (locs**q)
    if spec.terminal.density is not None:
        for start in range(0, xis.size, _CHUNK):
            sl = slice(start, min(start + _CHUNK, xis.size))
            if isinstance(spec.kernel, BrownianKernel):
                part = _brownian_density_sums(spec, t, xis[sl], powers)
            elif isinstance(spec.kernel, GammaKernel):
                part = _gamma_density_sums(spec, t, xis[sl], powers)
            else:
                part = {
                    q: np.array([
                        numerics.integrate(
                            MixedMeasure(density=spec.terminal.density),
                            lambda z, _x=x, _q=q: (z**_q)
                            * _weight_values(spec.kernel, spec.horizon, t, _x, z),
                            extra_breakpoints=(x,) if spec.kernel.nondecreasing else (),
                        )
                        for x in xis[sl]
                    ])
                    for q in powers
                }
            for q in powers:
                out[q][sl] += part[q]
    return out


def psi_total_many(spec: LRBSpec, t: float, xis) -> np.ndarray:
    """Vectorized `psi_total` on an array of states (t = 0 gives all ones)."""
    xis = np.asarray(xis, dtype=float)
    t = spec._check_time(t)
    if t == 0.0:
        return np.ones_like(xis)
    return _tilted_sums(spec, t, xis, powers=(0,))[0]


def posterior_mean_many(spec: LRBSpec, t: float, xis) -> np.ndarray:
    """Vectorized conditional mean of the terminal value given the state."""
    xis = np.asarray(xis, dtype=float)
    t = spec._check_time(t)
    if t == 0.0:
        return np.full_like(xis, spec.terminal.mean())
    sums = _tilted_sums(spec, t, xis, powers=(0, 1))
    bad = sums[0] <= 0.0
    if np.any(bad):
        raise UnreachableStateError(
            f"{int(np.count_nonzero(bad))} states carry zero posterior mass"
        )
    return sums[1] / sums[0]


# ---------------------------------------------------------------------------
# transition law and terminal posterior


def transition_density(spec: LRBSpec, s: float, x: float, t: float, y):
    """Markov transition density from state x at s to y at t (s < t < horizon).

    At t = horizon the law has atoms; that direction is served by
    `terminal_posterior`, and asking for it here raises DomainError.
    """
    if spec.kernel.discrete:
        raise DomainError("lattice spec: use transition_mass")
    s, t = float(s), float(t)
    if t >= spec.horizon:
        raise DomainError("t at or beyond the horizon: use terminal_posterior")
    if not 0.0 <= s < t:
        raise DomainError(f"need 0 <= s < t, got s={s}, t={t}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    psi_t = psi_total_many(spec, t, y_arr)
    psi_s = psi_total(spec, s, x)
    if psi_s <= 0.0:
        raise UnreachableStateError(f"state x={x} at s={s} has zero mass")
    out = psi_t / psi_s * spec.kernel.density(t - s, y_arr - x)
    return out if np.ndim(y) else float(out[0])


def transition_mass(spec: LRBSpec, s: float, x: int, t: float, j):
    """Lattice analogue of `transition_density` on lattice points j."""
    if not spec.kernel.discrete:
        raise DomainError("continuous spec: use transition_density")
    s, t = float(s), float(t)
    if t >= spec.horizon:
        raise DomainError("t at or beyond the horizon: use terminal_posterior")
    if not 0.0 <= s < t:
        raise DomainError(f"need 0 <= s < t, got s={s}, t={t}")
    j_arr = np.atleast_1d(np.asarray(j))
    psi_t = np.array([psi_total(spec, t, float(jj)) for jj in j_arr])
    psi_s = psi_total(spec, s, float(x))
    if psi_s <= 0.0:
        raise UnreachableStateError(f"state x={x} at s={s} has zero mass")
    out = psi_t / psi_s * spec.kernel.mass(t - s, j_arr - int(x))
    return out if np.ndim(j) else float(out[0])


def terminal_posterior(spec: LRBSpec, s: float, xi: float) -> TerminalLaw:
    """Conditional law of the terminal value given state xi at time s.

    s = 0 returns the prior unchanged. The result is a full TerminalLaw, so
    its normalization is re-validated on construction.
    """
    s = spec._check_time(s)
    if s == 0.0:
        return spec.terminal
    xi = float(xi)
    psi = psi_total(spec, s, xi)
    if psi <= 0.0:
        raise UnreachableStateError(f"state xi={xi} at s={s} has zero mass")
    atoms = []
    if spec.terminal.atoms:
        with np.errstate(over="ignore"):
            terms = np.exp(_atom_log_terms(spec, s, xi)[0])
        for (z, _), w_new in zip(spec.terminal.atoms, terms / psi):
            if w_new > 0.0:
                atoms.append((z, float(w_new)))
    comp = None
    if spec.terminal.density is not None:
        d = spec.terminal.density
        lo = d.lower
        if spec.kernel.nondecreasing:
            lo = max(lo, xi)
        if lo < d.upper:
            comp = DensityComponent(
                pdf=partial(_posterior_pdf, spec.kernel, spec.horizon, s, xi, d.pdf, psi),
                lower=lo,
                upper=d.upper,
                breakpoints=d.breakpoints,
                tail=d.tail,
            )
    return TerminalLaw(atoms=tuple(atoms), density=comp)


def _posterior_pdf(kernel, T, s, xi, base_pdf, norm, z):
    z = np.asarray(z, dtype=float)
    w = _weight_values(kernel, T, s, xi, z)
    out = np.asarray(base_pdf(z)) * w / norm
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# conditional moments


def conditional_moment(spec: LRBSpec, s: float, xi: float, q: int) -> float:
    """q-th conditional moment of the terminal value given state xi at s.

    A geometric tail scan of z^q against the posterior density must certify
    integrability first; tails that decay too slowly to certify raise
    InfiniteMomentError rather than returning a quadrature artefact.
    """
    if not (isinstance(q, (int, np.integer)) and q >= 1):
        raise DomainError(f"moment order must be an integer >= 1, got {q}")
    post = terminal_posterior(spec, s, xi)
    if post.density is not None:
        _certify_moment_tail(post.density, q)
    return numerics.integrate(post.measure, lambda z: z**q)


def _certify_moment_tail(d: DensityComponent, q: int) -> None:
    for sign, edge in ((1.0, d.upper), (-1.0, d.lower)):
        if math.isfinite(edge):
            continue
        ref = [abs(b) for b in (d.lower, d.upper, *d.breakpoints) if math.isfinite(b)]
        z = max(1.0, *(ref or [1.0])) * 2.0
        scale = 0.0
        ok = False
        for _ in range(50):
            v = abs(z) ** (q + 1) * float(d.pdf(sign * z))
            scale = max(scale, v)
            if v <= 1e-13 * max(1.0, scale):
                ok = True
                break
            z *= 2.0
        if not ok:
            raise InfiniteMomentError(
                f"cannot certify the order-{q} tail at {sign * math.inf}; "
                f"last scan value {v} at |z|={z}"
            )


# ---------------------------------------------------------------------------
# dynamic consistency


def restart(spec: LRBSpec, s: float, xi: float) -> LRBSpec:
    """Spec of the re-based process eta_u = L_(s+u) - xi given state xi at s.

    The result lives on its own clock: horizon (T - s), terminal law equal to
    the posterior translated by -xi. restart(spec, 0, 0) is spec itself.
    """
    s = spec._check_time(s)
    post = terminal_posterior(spec, s, xi)
    return LRBSpec(
        kernel=spec.kernel,
        horizon=spec.horizon - s,
        terminal=post.translate(-float(xi)),
    )


# ---------------------------------------------------------------------------
# increment (partition) laws


def _check_partition(spec: LRBSpec, alphas) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise DomainError("partition must be a non-empty 1-d sequence")
    if np.any(alphas <= 0):
        raise DomainError("partition durations must be positive")
    if abs(float(np.sum(alphas)) - spec.horizon) > 1e-12 * max(1.0, spec.horizon):
        raise DomainError(
            f"partition sums to {float(np.sum(alphas))}, horizon is {spec.horizon}"
        )
    return alphas


def _ftilde(spec: LRBSpec, total: float) -> float:
    """(p(z) + atom hits) / f(T, z) at z = total; atom hits enter additively."""
    T = spec.horizon
    if spec.kernel.discrete:
        if total != int(total):
            return 0.0
        base = float(spec.kernel.mass(T, int(total)))
        for z, w in spec.terminal.atoms:
            if int(z) == int(total):
                return w / base
        return 0.0
    base = float(spec.kernel.density(T, total))
    val = 0.0
    if spec.terminal.density is not None:
        val += float(spec.terminal.density.pdf(total))
    for z, w in spec.terminal.atoms:
        if math.isclose(z, total, rel_tol=1e-12, abs_tol=1e-12):
            val += w
    if val == 0.0:
        return 0.0
    if not (base > 0.0 and math.isfinite(base)):
        raise UnreachableStateError(
            f"terminal value {total} carries mass but kernel weight {base}"
        )
    return val / base


def increment_joint_density(spec: LRBSpec, alphas, increments) -> float:
    """Joint density of the path increments over a partition of the horizon.

    Evaluated at (y_1, ..., y_n) for durations (a_1, ..., a_n) summing to the
    horizon. When the increment total lands exactly on a terminal atom the
    returned value is the joint density of the first n-1 increments jointly
    with that terminal event (the atom weight enters in place of a density
    value). Lattice kernels use masses throughout. The value is symmetric
    under simultaneous permutation of durations and increments.
    """
    alphas = _check_partition(spec, alphas)
    ys = np.asarray(increments, dtype=float)
    if ys.shape != alphas.shape:
        raise DomainError("increments and partition must have equal length")
    mix = _ftilde(spec, float(np.sum(ys)))
    if mix == 0.0:
        return 0.0
    if spec.kernel.discrete:
        logs = sum(float(spec.kernel.log_mass(a, int(y))) for a, y in zip(alphas, ys))
    else:
        logs = sum(float(spec.kernel.log_density(a, y)) for a, y in zip(alphas, ys))
    if logs == -math.inf:
        return 0.0
    return mix * math.exp(logs)


def reordered_increment_conditional(spec: LRBSpec, observed, query) -> float:
    """Conditional joint density of further increments given observed ones.

    ``observed`` and ``query`` are sequences of (duration, increment) pairs;
    together the durations must partition the horizon. The value depends on
    the observed set only through its total duration and total increment,
    which is the exchangeability property tests exercise. With no observed
    pairs this reduces to `increment_joint_density` of the query.
    """
    observed = [(float(a), float(y)) for a, y in observed]
    query = [(float(a), float(y)) for a, y in query]
    if not query:
        raise DomainError("query must contain at least one increment")
    _check_partition(spec, [a for a, _ in (*observed, *query)])
    t_obs = sum(a for a, _ in observed)
    s_obs = sum(y for _, y in observed)
    if t_obs == 0.0:
        psi = 1.0
    else:
        psi = psi_total(spec, t_obs, s_obs)
        if psi <= 0.0:
            raise UnreachableStateError(
                f"observed state ({t_obs}, {s_obs}) has zero mass"
            )
    total = s_obs + sum(y for _, y in query)
    mix = _ftilde(spec, total)
    if mix == 0.0:
        return 0.0
    if spec.kernel.discrete:
        logs = sum(float(spec.kernel.log_mass(a, int(y))) for a, y in query)
    else:
        logs = sum(float(spec.kernel.log_density(a, y)) for a, y in query)
    if logs == -math.inf:
        return 0.0
    return mix * math.exp(logs) / psi
