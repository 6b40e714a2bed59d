"""Test pylgs.diagnostics."""
import math

import numpy as np
import pytest

import pylgs
from pylgs import diagnostics
from pylgs.diagnostics import TransitionMatrix, build_mtmk_matrix, \
    coupling_rate, detailed_balance_residual, empirical_tv_trace, \
    mixing_time_mtm, pickup_gap, tv_decay_exact

TRIANGULAR = np.array([[2.0, 1.0], [0.0, 1.0]])

# (id, B, sigma, c) of small 2-D instances.
INSTANCES = [
    ('triangular', TRIANGULAR, 0.8, [0.5, 0.5]),
    ('sheared', np.array([[1.0, 0.5], [0.0, 1.0]]), 0.6, [0.2, 0.7]),
    ('wide', np.array([[3.0, 1.0], [0.0, 2.0]]), 1.2, [0.1, -0.4]),
]


def space_of(B, sigma, c, mass=1 - 1e-9):
    basis = pylgs.Basis.from_matrix(B)
    spec = pylgs.GaussianSpec(sigma, c)
    return pylgs.exact_target(basis, spec, mass)


@pytest.fixture(scope='module')
def triangular():
    space = space_of(TRIANGULAR, 0.8, [0.5, 0.5])
    return space, pylgs.build_mhk_matrix(space)


@pytest.fixture(scope='module')
def wide():
    # Klein is far from exact here: tau_1 is about 0.045.
    _, B, sigma, c = INSTANCES[2]
    space = space_of(B, sigma, c)
    return space, pylgs.build_mhk_matrix(space)


def test_target_one_dimension():
    space = space_of([[1.0]], 1.0, [0.0])
    pi = {x: space.pi[space.lookup([x])] for x in range(-2, 3)}
    assert pi[0] > pi[1] > pi[2]
    assert math.isclose(pi[1], pi[-1], rel_tol=1e-12)
    assert math.isclose(pi[2], pi[-2], rel_tol=1e-12)


def test_target_factorizes():
    space = space_of(np.eye(2), 0.9, [0.3, -0.2])
    zgs = [pylgs.ZGaussian(0.9, 0.3), pylgs.ZGaussian(0.9, -0.2)]
    for x, pi in zip(space.states, space.pi):
        expected = pylgs.pmf_z(x[0], zgs[0]) * pylgs.pmf_z(x[1], zgs[1])
        assert abs(pi - expected) < 1e-9


def test_target_normalized(triangular):
    space, _ = triangular
    assert abs(space.pi.sum() - 1.0) < 1e-9
    assert space.covered_mass >= 1 - 1e-9
    assert space.q.sum() >= 1 - 1e-9
    log_w = space.log_w
    assert np.all(np.diff(log_w) <= 1e-12)
    assert space.lookup([10**6, 0]) is None


def test_mhk_matrix_one_dimension():
    space = space_of([[1.0]], 0.7, [0.25])
    P = pylgs.build_mhk_matrix(space).P
    assert np.allclose(P, np.tile(space.pi, (len(space), 1)), atol=1e-8)


def test_mhk_matrix_stationary(triangular):
    space, P = triangular
    assert np.allclose(P.P.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(space.pi @ P.P, space.pi, atol=1e-8)
    assert detailed_balance_residual(P, space.pi) < 1e-10


def test_rejection_mass_ordering(triangular):
    space, P = triangular
    rejection = np.diag(P.P) - space.q
    assert np.all(np.diff(rejection) <= 1e-12)


def test_mtmk_matrix_single_trial(triangular):
    space, P = triangular
    small = space.restrict(30)
    assert np.allclose(build_mtmk_matrix(small, 1).P,
                       pylgs.build_mhk_matrix(small).P, atol=1e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_mtmk_detailed_balance(triangular, k):
    space, _ = triangular
    small = space.restrict(30 if k == 2 else 12)
    assert len(small) <= 30
    assert abs(small.pi.sum() - 1.0) < 1e-12
    P = build_mtmk_matrix(small, k)
    assert detailed_balance_residual(P, small.pi) < 1e-8


def test_mtmk_matrix_capacity(triangular):
    space, _ = triangular
    with pytest.raises(ValueError):
        build_mtmk_matrix(space, 5, max_tuples=10)


def test_transition_matrix_invalid():
    with pytest.raises(ValueError):
        TransitionMatrix(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        TransitionMatrix(np.array([[1.5, -0.5], [0.5, 0.5]]))


@pytest.mark.parametrize("id_,B,sigma,c", [
    ('one dimension', [[1.0]], 1.0, [0.0]),
    ('identity zero center', np.eye(2), 0.7, [0.0, 0.0]),
])
def test_spectral_exact_chains(id_, B, sigma, c):
    space = space_of(B, sigma, c)
    check = pylgs.spectral_radius_check(pylgs.build_mhk_matrix(space), space)
    assert abs(check.tau1) < 1e-6, f"test={id_}"
    assert abs(check.predicted) < 1e-6, f"test={id_}"


@pytest.mark.parametrize("id_,B,sigma,c", INSTANCES)
def test_spectral_gap_identity(id_, B, sigma, c):
    space = space_of(B, sigma, c)
    check = pylgs.spectral_radius_check(pylgs.build_mhk_matrix(space), space)
    assert check.residual < 1e-6, f"test={id_}"
    assert 0 < check.tau1 < 1, f"test={id_}"


def test_spectral_power_iteration(triangular, monkeypatch):
    space, P = triangular
    dense = pylgs.spectral_radius_check(P, space)
    monkeypatch.setattr(diagnostics, 'DENSE_LIMIT', 0)
    power = pylgs.spectral_radius_check(P, space, tol=1e-12)
    assert abs(power.tau1 - dense.tau1) < 1e-6


def test_spectral_power_iteration_limit(triangular, monkeypatch):
    space, P = triangular
    monkeypatch.setattr(diagnostics, 'DENSE_LIMIT', 0)
    with pytest.raises(pylgs.ConvergenceError):
        pylgs.spectral_radius_check(P, space, tol=0.0, max_iter=3)


@pytest.mark.parametrize("id_,p,q,expected", [
    ('equal', [0.2, 0.8], [0.2, 0.8], 0.0),
    ('disjoint', [1.0, 0.0], [0.0, 1.0], 1.0),
    ('hand', [0.6, 0.4], [0.5, 0.5], 0.1),
])
def test_tv_distance(id_, p, q, expected):
    assert math.isclose(pylgs.tv_distance(p, q), expected,
                        abs_tol=1e-15), f"test={id_}"


def test_tv_distance_shape():
    with pytest.raises(ValueError):
        pylgs.tv_distance([0.5, 0.5], [1.0])


def test_mixing_time_values():
    mixing = pylgs.mixing_time_bound(0.5, 0.01)
    assert round(mixing.exact, 3) == 6.644
    assert round(mixing.upper, 3) == 9.210
    fast = pylgs.mixing_time_bound(0.999, 0.01)
    assert fast.exact < 1
    for delta in np.linspace(0.01, 0.99, 25):
        for eps in (0.5, 0.1, 1e-3):
            bound = pylgs.mixing_time_bound(delta, eps)
            assert bound.exact <= bound.upper


@pytest.mark.parametrize("delta,eps", [(0.0, 0.1), (1.0, 0.1),
                                       (0.5, 0.0), (0.5, 1.0)])
def test_mixing_time_domain(delta, eps):
    with pytest.raises(ValueError):
        pylgs.mixing_time_bound(delta, eps)


def test_mixing_time_mtm():
    assert np.allclose(mixing_time_mtm(0.2, 5, 0.01),
                       pylgs.mixing_time_bound(5 / 9, 0.01))
    assert mixing_time_mtm(0.2, 5, 0.01).exact < \
        pylgs.mixing_time_bound(0.2, 0.01).exact


def test_pickup_gap():
    assert pickup_gap(1.0, 0.01) == 1
    assert pickup_gap(0.1, 0.5) == 7
    assert pickup_gap(0.1, 0.01) == 44
    assert pickup_gap(0.1, 0.5) < pickup_gap(0.1, 0.01)


def test_tv_decay_exact(wide):
    space, P = wide
    delta = pylgs.delta_bound(space.basis, space.spec)
    assert 0.5 < delta < 0.999
    tv = tv_decay_exact(P, space, 15)
    bound = (1 - delta)**np.arange(1, 16)
    assert tv[0] > 1e-3
    assert np.all(tv <= bound + 1e-9)
    assert np.all(np.diff(tv) <= 1e-10)


@pytest.mark.parametrize("replicas", [
    4000,
    pytest.param(10**5, marks=pytest.mark.slow),
])
def test_empirical_tv(wide, replicas):
    space, _ = wide
    moves = 15
    delta = pylgs.delta_bound(space.basis, space.spec)
    sampler = pylgs.MhkSampler(pylgs.KleinSampler.build(space.basis,
                                                        space.spec))
    tv, rate = empirical_tv_trace(sampler, space, space.states[0], moves,
                                  replicas, np.random.default_rng(0))
    # Monte Carlo error of the empirical TV: 1/2 sum_x sd(p^(x)).
    p = space.pi
    mc_error = 0.5 * np.sum(np.sqrt(p * (1 - p) / replicas))
    bound = (1 - delta)**np.arange(1, moves + 1)
    assert tv.shape == (moves,)
    assert np.all(tv <= bound + 3 * mc_error)
    assert 0 < rate <= 1


@pytest.mark.parametrize("k", [2, 5])
def test_coupling_rate(wide, k):
    space, _ = wide
    delta = pylgs.delta_bound(space.basis, space.spec)
    klein = pylgs.KleinSampler.build(space.basis, space.spec)
    pairs = 5000
    # states[0] has the largest importance weight, the hardest start.
    rate = coupling_rate(pylgs.MtmkSampler(klein, k), space.states[0],
                         space.states[-1], pairs, np.random.default_rng(k))
    expected = pylgs.delta_mtm(delta, k)
    se = math.sqrt(expected * (1 - expected) / pairs)
    assert rate >= expected - 3 * se
    assert rate < 1


def test_coupling_rate_gibbs(wide):
    space, _ = wide
    sampler = pylgs.GibbsSampler(space.basis, space.spec)
    with pytest.raises(TypeError):
        coupling_rate(sampler, space.states[0], space.states[1], 10,
                      np.random.default_rng(0))


def test_diagnose_one_dimension():
    basis = pylgs.Basis.from_matrix([[1.0]])
    report = pylgs.diagnose(basis, pylgs.GaussianSpec(1.0, [0.0]),
                            np.random.default_rng(0), k_grid=(1, 3))
    assert abs(report.delta - 1.0) < 1e-9
    assert abs(report.spectral.tau1) < 1e-6
    record = dict(report.as_record())
    assert math.isclose(record['delta_mtm[k=1]'], report.delta)
    assert record['t_mix[k=1]'] < 1


def test_diagnose_report():
    basis = pylgs.Basis.from_matrix(TRIANGULAR)
    report = pylgs.diagnose(basis, pylgs.GaussianSpec(0.8, [0.5, 0.5]),
                            np.random.default_rng(1), k_grid=(1, 2),
                            tv_moves=5, replicas=200)
    record = dict(report.as_record())
    assert math.isclose(record['delta_mtm[k=1]'], report.delta)
    assert record['delta_mtm[k=2]'] > report.delta
    assert record['tau1_residual'] < 1e-6
    assert record['t_mix[k=1]'] <= record['t_mix_upper[k=1]']
    assert 'tv_exact[t=5]' in record and 'tv_empirical[t=5]' in record
    assert set(report.coupling) == {1, 2}
    keys = [key for key, _ in report.as_record()]
    assert keys[:3] == ['n_states', 'covered_mass', 'delta']
