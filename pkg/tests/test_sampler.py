import math

import numpy as np
import pytest
from scipy import stats

from levybridge import sampler
from levybridge.core import LRBSpec
from levybridge.errors import DomainError
from levybridge.kernels import BrownianKernel, GammaKernel, PoissonKernel
from levybridge.laws import TerminalLaw
from levybridge.sampler import RandomStream


def drift_spec():
    return LRBSpec(
        kernel=BrownianKernel(), horizon=1.0, terminal=TerminalLaw.normal(0.5, 1.0)
    )


def gamma_scaled_spec():
    return LRBSpec(
        kernel=GammaKernel(2.0), horizon=1.0, terminal=TerminalLaw.gamma(2.0, 1.5)
    )


def gamma_atom_spec():
    return LRBSpec(
        kernel=GammaKernel(2.0),
        horizon=1.0,
        terminal=TerminalLaw.from_atoms([(1.0, 0.5), (2.5, 0.5)]),
    )


def poisson_spec():
    return LRBSpec(
        kernel=PoissonKernel(1.0),
        horizon=1.0,
        terminal=TerminalLaw.from_atoms([(0.0, 0.3), (2.0, 0.4), (5.0, 0.3)]),
    )


# ---------------------------------------------------------------------------
# streams


def test_stream_is_reproducible():
    a = RandomStream(123, 4).generator().normal(size=8)
    b = RandomStream(123, 4).generator().normal(size=8)
    assert np.array_equal(a, b)


def test_substreams_differ():
    a = RandomStream(123, 0).generator().normal(size=8)
    b = RandomStream(123, 1).generator().normal(size=8)
    assert not np.array_equal(a, b)


def test_substreams_do_not_depend_on_neighbors():
    # stream i is the same whether or not stream i+1 is ever created
    a = RandomStream(9, 2).generator().uniform(size=4)
    RandomStream(9, 3).generator().uniform(size=4)
    b = RandomStream(9, 2).generator().uniform(size=4)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# terminal draws


def test_draw_terminal_atom_frequencies():
    spec = poisson_spec()
    rng = RandomStream(12, 0).generator()
    draws = sampler.draw_terminal(spec, rng, size=20000)
    for z, w in spec.terminal.atoms:
        freq = float(np.mean(draws == z))
        se = math.sqrt(w * (1 - w) / draws.size)
        assert abs(freq - w) < 4.0 * se


def test_draw_terminal_density_moments():
    spec = gamma_scaled_spec()
    rng = RandomStream(13, 0).generator()
    draws = sampler.draw_terminal(spec, rng, size=20000)
    se = math.sqrt(2.0 * 1.5**2 / draws.size)
    assert abs(draws.mean() - 3.0) < 4.0 * se


def test_draw_terminal_scalar():
    spec = gamma_atom_spec()
    z = sampler.draw_terminal(spec, RandomStream(14, 0).generator())
    assert z in (1.0, 2.5)


# ---------------------------------------------------------------------------
# plain paths


def test_sample_levy_paths_shape_and_increments():
    rng = RandomStream(20, 0).generator()
    times = np.array([0.25, 0.5, 1.0])
    paths = sampler.sample_levy_paths(GammaKernel(2.0), times, 500, rng)
    assert paths.shape == (500, 3)
    assert np.all(np.diff(paths, axis=1) > 0)
    # increment over (0.5, 1.0] has mean m * dt = 1.0
    inc = paths[:, 2] - paths[:, 1]
    assert abs(inc.mean() - 1.0) < 4.0 * math.sqrt(1.0 / 500)


def test_sample_levy_paths_grid_validated():
    rng = RandomStream(20, 1).generator()
    with pytest.raises(DomainError):
        sampler.sample_levy_paths(BrownianKernel(), [0.0, 0.5], 10, rng)
    with pytest.raises(DomainError):
        sampler.sample_levy_paths(BrownianKernel(), [0.5, 0.5], 10, rng)


# ---------------------------------------------------------------------------
# conditioned paths


def test_terminal_first_path_ends_on_terminal_support():
    spec = gamma_atom_spec()
    rng = RandomStream(30, 0).generator()
    p = sampler.sample_lrb_terminal_first(spec, [0.25, 0.5, 1.0], rng)
    assert p.values[-1] in (1.0, 2.5)
    assert np.all(np.diff(np.concatenate([[0.0], p.values])) >= 0)


def test_grid_validation():
    spec = drift_spec()
    rng = RandomStream(31, 0).generator()
    for bad in ([], [0.0, 0.5], [0.5, 0.4], [0.5, 1.5]):
        with pytest.raises(DomainError):
            sampler.sample_lrb_terminal_first(spec, bad, rng)
    with pytest.raises(DomainError):
        sampler.sample_marginals(spec, [0.5], 10, rng, method="nope")
    with pytest.raises(DomainError):
        sampler.sample_marginals(spec, [0.5], 0, rng)


def test_marginal_means_track_conditioning():
    # the conditioned gamma process with a scaled terminal drifts away from
    # the plain m*t mean; 20000 paths pin the first two moments loosely
    spec = gamma_scaled_spec()
    rng = RandomStream(7, 0).generator()
    vals = sampler.sample_marginals(spec, [0.5, 1.0], 20000, rng)
    want_mid = 1.5  # E[Z]/2 by the linear interpolation property of the mean
    se_mid = vals[:, 0].std() / math.sqrt(vals.shape[0])
    assert abs(vals[:, 0].mean() - want_mid) < 4.0 * se_mid
    se_end = vals[:, 1].std() / math.sqrt(vals.shape[0])
    assert abs(vals[:, 1].mean() - 3.0) < 4.0 * se_end


def test_markov_one_step_law():
    # one markov step of the drifted Brownian spec has the exact marginal
    # N(theta t^2 / T + 0, ...) -- for matching variance it is N(theta*t*t/T + 0.. )
    # easier: marginal of the conditioned process at t is N(theta t, t) here
    spec = drift_spec()
    vals = np.array(
        [
            sampler.sample_lrb_markov(spec, [0.5], RandomStream(41, i).generator()).values[0]
            for i in range(400)
        ]
    )
    d = stats.kstest(vals, lambda x: stats.norm.cdf(x, 0.25, math.sqrt(0.5)))
    assert d.pvalue > 0.01


def test_two_routes_agree_in_law():
    from levybridge.checks import ks_critical_value

    spec = gamma_atom_spec()
    t = [0.5]
    a = np.array(
        [
            sampler.sample_lrb_terminal_first(spec, t, RandomStream(42, i).generator()).values[0]
            for i in range(400)
        ]
    )
    b = np.array(
        [
            sampler.sample_lrb_markov(spec, t, RandomStream(43, i).generator()).values[0]
            for i in range(400)
        ]
    )
    stat = stats.ks_2samp(a, b, method="asymp").statistic
    assert stat < ks_critical_value(400, 400, 0.01)


def test_point_mass_terminal_is_a_pure_bridge():
    spec = LRBSpec(
        kernel=BrownianKernel(), horizon=1.0, terminal=TerminalLaw.point(0.7)
    )
    rng = RandomStream(44, 0).generator()
    vals = sampler.sample_marginals(spec, [0.5, 1.0], 64, rng)
    assert np.all(vals[:, 1] == 0.7)
    assert vals[:, 0].std() > 0.1


def test_markov_lattice_route():
    spec = poisson_spec()
    vals = np.array(
        [
            sampler.sample_lrb_markov(spec, [0.4, 1.0], RandomStream(45, i).generator()).values
            for i in range(200)
        ]
    )
    assert np.all(vals == np.round(vals))
    assert np.all(vals[:, 1] >= vals[:, 0])
    assert set(np.unique(vals[:, 1])) <= {0.0, 2.0, 5.0}


# ---------------------------------------------------------------------------
# bulk driver


def test_simulate_paths_deterministic_in_seed():
    spec = drift_spec()
    times = [0.25, 0.5, 0.75, 1.0]
    a = sampler.simulate_paths(spec, times, 6, seed=2025)
    b = sampler.simulate_paths(spec, times, 6, seed=2025)
    c = sampler.simulate_paths(spec, times, 6, seed=2026)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_simulate_paths_worker_count_is_invisible():
    spec = gamma_atom_spec()
    times = [0.5, 1.0]
    one = sampler.simulate_paths(spec, times, 8, seed=7, workers=1)
    two = sampler.simulate_paths(spec, times, 8, seed=7, workers=2)
    assert np.array_equal(one, two)


def test_simulate_paths_path_count_prefix_stable():
    # asking for more paths must not change the ones already drawn
    spec = drift_spec()
    times = [0.5, 1.0]
    small = sampler.simulate_paths(spec, times, 3, seed=11)
    big = sampler.simulate_paths(spec, times, 5, seed=11)
    assert np.array_equal(big[:3], small)


def test_simulate_paths_methods_and_validation():
    spec = drift_spec()
    with pytest.raises(DomainError):
        sampler.simulate_paths(spec, [0.5, 1.0], 4, seed=0, method="nope")
    with pytest.raises(DomainError):
        sampler.simulate_paths(spec, [0.5, 1.0], -1, seed=0)
    out = sampler.simulate_paths(spec, [0.5, 1.0], 4, seed=0, method="markov")
    assert out.shape == (4, 2)
