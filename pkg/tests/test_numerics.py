import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sci_integrate

from levybridge import numerics
from levybridge.errors import DomainError, NoRootError, NonMonotoneError, NumericError
from levybridge.numerics import DensityComponent, MixedMeasure


# ---------------------------------------------------------------------------
# special functions


def test_norm_cdf_pins():
    assert numerics.norm_cdf(0.0) == 0.5
    # classic two-sided 5% quantile
    assert abs(numerics.norm_cdf(1.959963984540054) - 0.975) < 1e-15
    assert abs(numerics.norm_ppf(0.975) - 1.959963984540054) < 1e-12


def test_log_gamma_pin():
    # Gamma(1/2) = sqrt(pi)
    assert abs(numerics.log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-15


@given(
    a=st.floats(0.1, 20.0),
    b=st.floats(0.1, 20.0),
)
def test_beta_fn_matches_log_gamma_identity(a, b):
    want = math.exp(numerics.log_gamma(a) + numerics.log_gamma(b) - numerics.log_gamma(a + b))
    assert abs(numerics.beta_fn(a, b) - want) <= 1e-13 * want


@given(
    x=st.floats(0.0, 1.0),
    a=st.floats(0.2, 10.0),
    b=st.floats(0.2, 10.0),
)
def test_reg_inc_beta_symmetry(x, a, b):
    lhs = numerics.reg_inc_beta(x, a, b)
    rhs = 1.0 - numerics.reg_inc_beta(1.0 - x, b, a)
    assert abs(lhs - rhs) < 1e-13


@given(a=st.floats(0.3, 15.0), q=st.floats(1e-6, 1.0 - 1e-6))
def test_reg_lower_gamma_roundtrip(a, q):
    x = numerics.reg_lower_gamma_inv(a, q)
    assert abs(numerics.reg_lower_gamma(a, x) - q) < 1e-10


# ---------------------------------------------------------------------------
# mixed measures


def _unit_uniform():
    return DensityComponent(
        pdf=lambda z: np.where((np.asarray(z) >= 0) & (np.asarray(z) <= 1), 1.0, 0.0),
        lower=0.0,
        upper=1.0,
        tail="compact",
    )


def test_density_component_validation():
    with pytest.raises(DomainError):
        DensityComponent(pdf=lambda z: 1.0, lower=1.0, upper=0.0)
    with pytest.raises(DomainError):
        DensityComponent(pdf=lambda z: 1.0, lower=0.0, upper=1.0, tail="weird")


def test_density_component_breakpoints_filtered_and_sorted():
    d = DensityComponent(
        pdf=lambda z: 1.0, lower=0.0, upper=1.0, breakpoints=(0.9, -3.0, 0.2, 2.0)
    )
    assert d.breakpoints == (0.2, 0.9)


def test_effective_interval_finite_support_passthrough():
    assert _unit_uniform().effective_interval() == (0.0, 1.0)


def test_effective_interval_requires_cdf_for_infinite_tails():
    d = DensityComponent(
        pdf=lambda z: np.exp(-np.abs(z)) / 2.0, lower=-math.inf, upper=math.inf
    )
    with pytest.raises(NumericError):
        d.effective_interval()


def test_effective_interval_gaussian_tail():
    d = DensityComponent(
        pdf=lambda z: np.exp(-0.5 * np.asarray(z) ** 2) / math.sqrt(2 * math.pi),
        lower=-math.inf,
        upper=math.inf,
        tail="gaussian",
        cdf=lambda z: numerics.norm_cdf(z),
    )
    lo, hi = d.effective_interval(1e-16)
    # the 1e-16 normal quantile sits near 8.2 standard deviations
    assert 7.5 < hi < 9.5
    assert -9.5 < lo < -7.5


def test_mixed_measure_atom_validation():
    with pytest.raises(DomainError):
        MixedMeasure(atoms=((0.0, -0.5),))
    with pytest.raises(DomainError):
        MixedMeasure(atoms=((0.0, 0.5), (0.0, 0.5)))
    with pytest.raises(DomainError):
        MixedMeasure(atoms=((math.inf, 0.5),))


def test_mixed_measure_sorts_atoms():
    m = MixedMeasure(atoms=((2.0, 0.25), (-1.0, 0.75)))
    assert m.atoms == ((-1.0, 0.75), (2.0, 0.25))
    assert m.atom_mass == 1.0


def test_integrate_atoms_plus_density():
    m = MixedMeasure(atoms=((2.0, 0.3),), density=_unit_uniform())
    # first moment: 0.3 * 2 + 1.0 * 0.5 (the uniform component has mass 1 here)
    got = numerics.integrate(m, lambda z: z)
    assert abs(got - (0.6 + 0.5)) < 1e-12


def test_integrate_skips_zero_weight_atoms():
    m = MixedMeasure(atoms=((5.0, 0.0), (1.0, 1.0)))
    # the integrand is not even evaluated at the weightless atom
    def fn(z):
        if z == 5.0:
            raise AssertionError("should not be called")
        return z

    assert numerics.integrate(m, fn) == 1.0


def test_integrate_rejects_nonfinite_atom_values():
    m = MixedMeasure(atoms=((0.0, 1.0),))
    with pytest.raises(NumericError):
        numerics.integrate(m, lambda z: math.inf)


def test_integrate_kink_with_breakpoint():
    d = DensityComponent(
        pdf=lambda z: np.ones_like(np.asarray(z, dtype=float)),
        lower=0.0,
        upper=1.0,
        breakpoints=(0.3,),
        tail="compact",
    )
    got = numerics.integrate(MixedMeasure(density=d), lambda z: abs(z - 0.3))
    want = 0.5 * 0.3**2 + 0.5 * 0.7**2
    assert abs(got - want) < 1e-12


# ---------------------------------------------------------------------------
# root finding


def test_find_root_monotone_basic():
    root = numerics.find_root_monotone(lambda x: x**3 - 2.0, 0.0, 2.0)
    assert abs(root - 2.0 ** (1.0 / 3.0)) < 1e-10


def test_find_root_monotone_decreasing():
    root = numerics.find_root_monotone(lambda x: 1.0 - x, -3.0, 5.0)
    assert abs(root - 1.0) < 1e-10


def test_find_root_monotone_endpoint_hit():
    assert numerics.find_root_monotone(lambda x: x, 0.0, 1.0) == 0.0


def test_find_root_monotone_no_sign_change():
    with pytest.raises(NoRootError):
        numerics.find_root_monotone(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_monotone_rejects_wiggles():
    with pytest.raises(NonMonotoneError):
        numerics.find_root_monotone(lambda x: math.sin(x), -1.0, 20.0)


def test_find_root_monotone_bad_bracket():
    with pytest.raises(DomainError):
        numerics.find_root_monotone(lambda x: x, 1.0, 0.0)


@given(
    a=st.floats(0.1, 5.0),
    b=st.floats(0.1, 5.0),
    c=st.floats(-10.0, 10.0),
)
def test_find_root_monotone_cubic_family(a, b, c):
    f = lambda x: a * x**3 + b * x - c
    root = numerics.find_root_monotone(f, -50.0, 50.0)
    assert abs(f(root)) < 1e-7 * max(1.0, abs(c))


def test_inverse_cdf_uniform_quantiles():
    pdf = lambda z: 1.0
    for u in (0.1, 0.5, 0.9):
        got = numerics.inverse_cdf(pdf, 0.0, 1.0, u)
        assert abs(got - u) < 1e-9


def test_inverse_cdf_validates_u():
    with pytest.raises(DomainError):
        numerics.inverse_cdf(lambda z: 1.0, 0.0, 1.0, 1.5)


def test_inverse_cdf_unnormalized_density():
    # density 2z on [0, 1]: quantile is sqrt(u)
    got = numerics.inverse_cdf(lambda z: 2.0 * z, 0.0, 1.0, 0.25)
    assert abs(got - 0.5) < 1e-9


# ---------------------------------------------------------------------------
# batch quadrature


def test_composite_quad_batch_matches_quad():
    fns = [
        lambda x: np.exp(-0.5 * x**2),
        lambda x: np.cos(x) * np.exp(-np.abs(x) / 3.0),
    ]

    def rows(nodes):
        return np.stack([f(nodes) for f in fns])

    got = numerics.composite_quad_batch(rows, -8.0, 8.0, abs_tol=1e-12, rel_tol=1e-12)
    for i, f in enumerate(fns):
        want, _ = sci_integrate.quad(f, -8.0, 8.0, epsabs=1e-13, epsrel=1e-13)
        assert abs(got[i] - want) < 1e-10


def test_composite_quad_batch_row_grouping_consistency():
    """Batching rows together must not move any result beyond tolerance."""
    f = lambda x: np.exp(-(x**2))
    g = lambda x: 1.0 / (1.0 + x**2)
    tol = 1e-11
    both = numerics.composite_quad_batch(
        lambda x: np.stack([f(x), g(x)]), -6.0, 6.0, abs_tol=tol, rel_tol=tol
    )
    alone_f = numerics.composite_quad_batch(
        lambda x: f(x)[None, :], -6.0, 6.0, abs_tol=tol, rel_tol=tol
    )
    alone_g = numerics.composite_quad_batch(
        lambda x: g(x)[None, :], -6.0, 6.0, abs_tol=tol, rel_tol=tol
    )
    assert abs(both[0] - alone_f[0]) < 50 * tol
    assert abs(both[1] - alone_g[0]) < 50 * tol


def test_composite_quad_batch_interval_validation():
    with pytest.raises(DomainError):
        numerics.composite_quad_batch(lambda x: x, 1.0, 1.0)
    with pytest.raises(DomainError):
        numerics.composite_quad_batch(lambda x: x, 0.0, math.inf)


def test_composite_quad_batch_reports_non_convergence():
    # one level is never enough to claim stabilization
    with pytest.raises(NumericError):
        numerics.composite_quad_batch(
            lambda x: np.cos(40.0 * x)[None, :], 0.0, 10.0, init_panels=1, max_doublings=0
        )
