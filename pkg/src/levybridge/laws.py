"""Terminal (horizon) laws: atoms plus an optional density component.

Construction validates total mass 1 by quadrature, so every law handed to
the conditional-law machinery is an honest probability measure. Density
callables are built from module-level functions via functools.partial and
therefore pickle cleanly, which the worker pool relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import special as _sp

from . import numerics
from .errors import DomainError
from .numerics import DensityComponent, MixedMeasure

__all__ = ["TerminalLaw"]

MASS_TOL = 1e-10


def _normal_pdf(mu, sigma, weight, z):
    z = np.asarray(z, dtype=float)
    out = weight * np.exp(-0.5 * ((z - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    return out if out.ndim else float(out)


def _normal_cdf(mu, sigma, z):
    return _sp.ndtr((np.asarray(z, dtype=float) - mu) / sigma)


def _normal_draw(mu, sigma, rng, size=None):
    return rng.normal(mu, sigma, size=size)


def _gamma_pdf(shape, scale, weight, z):
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = (
            (shape - 1.0) * np.log(np.where(z > 0, z, 1.0))
            - z / scale
            - _sp.gammaln(shape)
            - shape * math.log(scale)
        )
        out = np.where(z > 0, weight * np.exp(logpdf), 0.0)
    return out if out.ndim else float(out)


def _gamma_cdf(shape, scale, z):
    return _sp.gammainc(shape, np.maximum(np.asarray(z, dtype=float), 0.0) / scale)


def _gamma_draw(shape, scale, rng, size=None):
    return rng.gamma(shape, scale, size=size)


def _uniform_pdf(a, b, weight, z):
    z = np.asarray(z, dtype=float)
    out = np.where((z >= a) & (z <= b), weight / (b - a), 0.0)
    return out if out.ndim else float(out)


def _uniform_cdf(a, b, z):
    return np.clip((np.asarray(z, dtype=float) - a) / (b - a), 0.0, 1.0)


def _uniform_draw(a, b, rng, size=None):
    return rng.uniform(a, b, size=size)


def _shifted_pdf(base, dx, z):
    return base(np.asarray(z, dtype=float) - dx)


def _shifted_cdf(base, dx, z):
    return base(np.asarray(z, dtype=float) - dx)


def _shifted_draw(base, dx, rng, size=None):
    return np.asarray(base(rng, size=size)) + dx


@dataclass(frozen=True)
class TerminalLaw:
    """Probability law of the pinned terminal value.

    ``atoms`` are (location, weight) point masses; ``density`` carries the
    absolutely continuous rest. Weights plus density mass must total 1
    within 1e-10 (checked by quadrature at construction). There is no way
    to represent a singular continuous part, on purpose.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: DensityComponent | None = None
    density_mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        measure = MixedMeasure(atoms=self.atoms, density=self.density)
        object.__setattr__(self, "atoms", measure.atoms)
        for _, w in self.atoms:
            if w <= 0:
                raise DomainError("atom weights must be strictly positive")
        d_mass = 0.0
        if self.density is not None:
            d_mass = numerics.integrate(
                MixedMeasure(density=self.density), lambda z: 1.0
            )
        object.__setattr__(self, "density_mass", d_mass)
        total = measure.atom_mass + d_mass
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"total mass {total} differs from 1 beyond {MASS_TOL}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_atoms(cls, pairs) -> "TerminalLaw":
        return cls(atoms=tuple((float(z), float(w)) for z, w in pairs))

    @classmethod
    def point(cls, z: float) -> "TerminalLaw":
        return cls.from_atoms([(z, 1.0)])

    @classmethod
    def binary(cls, low: float, high: float, low_prob: float) -> "TerminalLaw":
        if not 0.0 < low_prob < 1.0:
            raise DomainError(f"low_prob must be in (0, 1), got {low_prob}")
        if not low < high:
            raise DomainError("need low < high")
        return cls.from_atoms([(low, low_prob), (high, 1.0 - low_prob)])

    @classmethod
    def normal(cls, mu: float, sigma2: float, *, weight: float = 1.0, atoms=()) -> "TerminalLaw":
        if sigma2 <= 0:
            raise DomainError(f"sigma2 must be positive, got {sigma2}")
        sigma = math.sqrt(sigma2)
        comp = DensityComponent(
            pdf=partial(_normal_pdf, mu, sigma, weight),
            lower=-math.inf,
            upper=math.inf,
            tail="gaussian",
            sampler=partial(_normal_draw, mu, sigma),
            cdf=partial(_normal_cdf, mu, sigma),
        )
        return cls(atoms=tuple(atoms), density=comp)

    @classmethod
    def gamma(cls, shape: float, scale: float, *, weight: float = 1.0, atoms=()) -> "TerminalLaw":
        if shape <= 0 or scale <= 0:
            raise DomainError("shape and scale must be positive")
        comp = DensityComponent(
            pdf=partial(_gamma_pdf, shape, scale, weight),
            lower=0.0,
            upper=math.inf,
            tail="exponential",
            sampler=partial(_gamma_draw, shape, scale),
            cdf=partial(_gamma_cdf, shape, scale),
        )
        return cls(atoms=tuple(atoms), density=comp)

    @classmethod
    def uniform(cls, a: float, b: float, *, weight: float = 1.0, atoms=()) -> "TerminalLaw":
        if not a < b:
            raise DomainError("need a < b")
        comp = DensityComponent(
            pdf=partial(_uniform_pdf, a, b, weight),
            lower=float(a),
            upper=float(b),
            tail="compact",
            sampler=partial(_uniform_draw, a, b),
            cdf=partial(_uniform_cdf, a, b),
        )
        return cls(atoms=tuple(atoms), density=comp)

    # -- views ---------------------------------------------------------------

    @property
    def measure(self) -> MixedMeasure:
        return MixedMeasure(atoms=self.atoms, density=self.density)

    @property
    def is_atomic(self) -> bool:
        return self.density is None

    def support(self) -> tuple[float, float]:
        los, his = [], []
        if self.atoms:
            los.append(self.atoms[0][0])
            his.append(self.atoms[-1][0])
        if self.density is not None:
            los.append(self.density.lower)
            his.append(self.density.upper)
        return min(los), max(his)

    def mean(self) -> float:
        return numerics.integrate(self.measure, lambda z: z)

    def translate(self, dx: float) -> "TerminalLaw":
        """The law of Z + dx."""
        if dx == 0.0:
            return self
        atoms = tuple((z + dx, w) for z, w in self.atoms)
        comp = None
        if self.density is not None:
            d = self.density
            comp = DensityComponent(
                pdf=partial(_shifted_pdf, d.pdf, dx),
                lower=d.lower + dx,
                upper=d.upper + dx,
                breakpoints=tuple(p + dx for p in d.breakpoints),
                tail=d.tail,
                sampler=partial(_shifted_draw, d.sampler, dx) if d.sampler else None,
                cdf=partial(_shifted_cdf, d.cdf, dx) if d.cdf else None,
            )
        return TerminalLaw(atoms=atoms, density=comp)
