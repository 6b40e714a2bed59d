"""Test pylgs.decoder."""
import math

import numpy as np
import pytest

import pylgs
from pylgs.decoder import resolve_sigma

TRIANGULAR = np.array([[2.0, 1.0], [0.0, 1.0]])
SKEWED = np.array([[1.0, 0.0], [1.0, 1.0]])


def planted_instance(n, noise, rng, entry_range=5):
    basis = pylgs.random_integer_basis(n, entry_range, rng)
    x_star = rng.integers(-5, 6, size=n)
    direction = rng.standard_normal(n)
    c = basis.embed(x_star) + noise * direction / np.linalg.norm(direction)
    return basis, x_star, c


@pytest.mark.parametrize("k,method", [(1, 'auto'), (5, 'auto'),
                                      (1, 'gibbs')])
def test_planted_exact(k, method):
    rng = np.random.default_rng(0)
    basis, x_star, _ = planted_instance(4, 0.0, rng)
    cfg = pylgs.DecodeConfig(moves=10, trials_k=k, method=method)
    result = pylgs.decode_cvp(basis, basis.embed(x_star), cfg, rng)
    assert np.array_equal(result.x_cvp, x_star)
    assert result.distance == 0.0
    assert result.moves_used == 10


def test_one_dimension():
    basis = pylgs.Basis.from_matrix([[1.0]])
    cfg = pylgs.DecodeConfig(moves=20)
    result = pylgs.decode_cvp(basis, [0.3], cfg, np.random.default_rng(1))
    assert result.x_cvp.tolist() == [0]
    assert math.isclose(result.distance, 0.3)


def lll_planted_instance(rng):
    """LLL-reduced 4-D basis, noise norm at most 0.3 min ||b^_i||."""
    basis, _ = pylgs.lll_reduce(pylgs.random_integer_basis(4, 5, rng))
    x_star = rng.integers(-5, 6, size=4)
    direction = rng.standard_normal(4)
    noise = 0.3 * basis.gs_norms.min() * rng.random()
    c = basis.embed(x_star) + noise * direction / np.linalg.norm(direction)
    return basis, x_star, c


def test_against_bruteforce():
    rng = np.random.default_rng(2)
    solved = {50: 0, 200: 0}
    for i in range(100):
        basis, x_star, c = lll_planted_instance(rng)
        best = pylgs.cvp_bruteforce(basis, c)
        assert np.array_equal(best.x, x_star)
        for moves in solved:
            cfg = pylgs.DecodeConfig(moves=moves)
            result = pylgs.decode_cvp(basis, c, cfg,
                                      np.random.default_rng(i))
            solved[moves] += bool(np.array_equal(result.x_cvp, best.x))
    assert solved[50] >= 99
    assert solved[200] >= 99


def test_not_worse_than_babai():
    rng = np.random.default_rng(3)
    for k in (1, 3):
        cfg = pylgs.DecodeConfig(moves=50, trials_k=k)
        for _ in range(10):
            basis, _, c = planted_instance(5, 2.0, rng)
            babai = pylgs.babai_round(basis, c)
            result = pylgs.decode_cvp(basis, c, cfg, rng)
            assert result.distance <= basis.distance(babai.x, c) + 1e-12
            assert np.isclose(result.distance,
                              basis.distance(result.x_cvp, c))


def test_argmin_monotone_in_moves():
    basis, _, c = planted_instance(5, 2.0, np.random.default_rng(4))
    distances = []
    for moves in (1, 5, 25, 125):
        cfg = pylgs.DecodeConfig(moves=moves, trials_k=2)
        result = pylgs.decode_cvp(basis, c, cfg, np.random.default_rng(5))
        distances.append(result.distance)
        assert all(0 < i <= moves for i in result.improved_at)
        assert result.improved_at == sorted(set(result.improved_at))
    assert all(a >= b for a, b in zip(distances, distances[1:]))


def test_shards():
    basis, _, c = planted_instance(5, 2.0, np.random.default_rng(6))
    cfg = pylgs.DecodeConfig(moves=40, shards=4)
    a = pylgs.decode_cvp(basis, c, cfg, np.random.default_rng(7))
    b = pylgs.decode_cvp(basis, c, cfg, np.random.default_rng(7))
    assert np.array_equal(a.x_cvp, b.x_cvp)
    assert a.improved_at == b.improved_at
    assert a.moves_used == 40
    babai = pylgs.babai_round(basis, c)
    assert a.distance <= basis.distance(babai.x, c) + 1e-12


def test_result_record():
    basis = pylgs.Basis.from_matrix(TRIANGULAR)
    cfg = pylgs.DecodeConfig(moves=5)
    result = pylgs.decode_cvp(basis, [0.1, 0.2], cfg,
                              np.random.default_rng(8))
    record = dict(result.as_record())
    assert list(record) == ['x_cvp', 'distance', 'moves_used',
                            'acceptance_rate', 'improved_at', 'sigma']
    assert record['x_cvp'] == '0,0'
    assert math.isclose(record['sigma'], 1.0 / (2 * math.sqrt(math.pi)))


@pytest.mark.parametrize("id_,kwargs", [
    ('zero moves', {'moves': 0}),
    ('zero trials', {'moves': 5, 'trials_k': 0}),
    ('eps', {'moves': 5, 'eps': 1.0}),
    ('kappa', {'moves': 5, 'kappa': 0.1}),
    ('method', {'moves': 5, 'method': 'hmc'}),
    ('shards above moves', {'moves': 5, 'shards': 6}),
    ('sigma policy', {'moves': 5, 'sigma_policy': 'wide'}),
    ('negative sigma', {'moves': 5, 'sigma_policy': -1.0}),
])
def test_config_invalid(id_, kwargs):
    with pytest.raises(ValueError):
        pylgs.DecodeConfig(**kwargs)


@pytest.mark.parametrize("scale", [1.0, 3.0])
def test_sigma_default(scale):
    basis = pylgs.Basis.from_matrix(scale * np.eye(3))
    expected = scale / (2 * math.sqrt(math.pi))
    assert math.isclose(pylgs.sigma_default(basis), expected)
    assert math.isclose(resolve_sigma('default', basis), expected)
    assert resolve_sigma(0.7, basis) == 0.7
    assert math.isclose(resolve_sigma('klein', basis),
                        scale / math.sqrt(2 * math.log(3)))


def test_complexity_estimate():
    basis = pylgs.Basis.from_matrix(np.eye(2))
    eps = 0.01
    a = math.log(1 / eps)
    spec = pylgs.GaussianSpec(1.0, [0.0, 0.0])
    assert math.isclose(pylgs.cvp_complexity_estimate(basis, spec, 0.0,
                                                      eps).value, a)
    d = 1.5
    spec = pylgs.GaussianSpec(d / math.sqrt(2), [0.0, 0.0])
    est = pylgs.cvp_complexity_estimate(basis, spec, d, eps)
    assert math.isclose(est.value, math.e * a)
    assert math.isclose(est.log_value, 1 + math.log(a))
    assert est.prefactor > 1
    assert math.isclose(
        pylgs.cvp_complexity_estimate(basis, spec, d, eps, k=10).value,
        math.e * a / 10)


def test_complexity_overflow():
    basis = pylgs.Basis.from_matrix(np.eye(2))
    spec = pylgs.GaussianSpec(0.01, [0.0, 0.0])
    est = pylgs.cvp_complexity_estimate(basis, spec, 10.0, 0.01)
    assert est.value == math.inf
    assert math.isfinite(est.log_value)
    with pytest.raises(ValueError):
        pylgs.cvp_complexity_estimate(basis, spec, -1.0, 0.01)


def test_bdd_radius():
    eps = 0.01
    a = math.log(1 / eps)
    assert math.isclose(pylgs.bdd_radius(0.5, a * math.e**2, eps), 1.0)
    with pytest.raises(pylgs.UndefinedRadiusError):
        pylgs.bdd_radius(0.5, 4, eps)
    with pytest.raises(ValueError):
        pylgs.bdd_radius(0.5, 1, eps, k=4)
    by_t = [pylgs.bdd_radius(1.0, t, eps) for t in (5, 10, 100, 1000)]
    by_k = [pylgs.bdd_radius(1.0, 5, eps, k) for k in (1, 2, 10)]
    for radii in (by_t, by_k):
        assert all(r1 < r2 for r1, r2 in zip(radii, radii[1:]))


def test_success_curve():
    # Z^2 in a skewed basis: min ||b^_i|| = 1/sqrt(2) sets sigma, while
    # lambda_1 / 2 = 0.5 stays above 0.8 R(200).
    basis = pylgs.Basis.from_matrix(SKEWED)
    sigma = pylgs.sigma_default(basis)
    radius = {t: pylgs.bdd_radius(sigma, t, 0.01) for t in (10, 50, 200)}
    assert 0.8 * radius[200] < 0.5
    norms = sorted({0.0, 0.6, 0.8} | {0.8 * r for r in radius.values()})
    trials = 100
    slack = 3 * math.sqrt(0.05 * 0.95 / trials)
    curves = {}
    for t in radius:
        cfg = pylgs.DecodeConfig(moves=t)
        rows = pylgs.bdd_success_curve(basis, cfg, norms, trials,
                                       np.random.default_rng(12))
        assert [row.noise_norm for row in rows] == norms
        assert all(math.isclose(row.r_predicted, radius[t]) for row in rows)
        rates = [row.success_rate for row in rows]
        assert all(rate >= 0.95 for norm, rate in zip(norms, rates)
                   if norm <= 0.8 * radius[t] + 1e-12)
        assert all(b <= a + slack for a, b in zip(rates, rates[1:]))
        curves[t] = rates
    # Planted points beyond lambda_1 / 2 are not the closest vectors.
    assert curves[200][-1] < 0.5
    # Chains share streams across t, so longer runs only add successes
    # while the planted point is the closest vector.
    for j, norm in enumerate(norms):
        if norm < 0.5:
            assert curves[10][j] <= curves[50][j] <= curves[200][j]


def test_success_curve_undefined_radius():
    basis = pylgs.Basis.from_matrix(np.eye(2))
    cfg = pylgs.DecodeConfig(moves=2)
    rows = pylgs.bdd_success_curve(basis, cfg, [0.0], 3,
                                   np.random.default_rng(10))
    assert math.isnan(rows[0].r_predicted)
    assert rows[0].success_rate == 1.0
