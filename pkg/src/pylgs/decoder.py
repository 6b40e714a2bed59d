"""
The :mod:`pylgs.decoder` solves CVP/BDD by lattice Gaussian sampling.

The decoder starts a chain at the Babai point, runs ``t`` moves and keeps
the closest accepted state. With ``k > 1`` trials per move the MTMK kernel is
used. Complexity and correct decoding radius estimates follow the ``delta``
theory of :mod:`pylgs.samplers`; logarithms are natural throughout.

"""


import collections
import dataclasses
import logging
import math

import numpy as np

from .klein import klein_sigma_default, theta_prefactor
from .lattice import GaussianSpec, babai_round, lll_reduce
from .samplers import AcceptanceCounter, make_sampler, run_chain

__all__ = ['DecodeConfig', 'DecodeResult', 'UndefinedRadiusError',
           'decode_cvp', 'sigma_default', 'resolve_sigma',
           'cvp_complexity_estimate', 'bdd_radius', 'bdd_success_curve']

logger = logging.getLogger(__name__)

Complexity = collections.namedtuple('Complexity',
                                    ['value', 'log_value', 'prefactor'])
SuccessRow = collections.namedtuple('SuccessRow',
                                    ['noise_norm', 'success_rate',
                                     'r_predicted'])


class UndefinedRadiusError(ValueError):
    """Decoding radius is undefined for ``k t <= ln(1/eps)``."""


SIGMA_POLICIES = ('default', 'klein')


@dataclasses.dataclass(frozen=True)
class DecodeConfig(object):
    """Decoder parameters.

    Attributes
    ----------
    moves : int
        Markov moves ``t``, at least 1.
    sigma_policy : str or float, optional (default='default')
        'default' for ``min ||b^_i|| / (2 sqrt(pi))``, 'klein' for
        ``min ||b^_i|| / sqrt(2 ln n)``, or an explicit positive value.
    trials_k : int, optional (default=1)
        Trials per move, 1 means MHK.
    use_lll : bool, optional (default=False)
        LLL-reduce before sampling.
    eps : float, optional (default=0.01)
        Mixing-time accuracy in (0, 1).
    seed : int, optional (default=None)
        Master seed, informational for records.
    kappa : float, optional (default=0.75)
        LLL parameter.
    method : str, optional (default='auto')
        'auto' (MHK/MTMK by ``trials_k``) or 'gibbs'.
    shards : int, optional (default=1)
        Independent chains sharing the ``moves`` budget.

    """
    moves: int
    sigma_policy: object = 'default'
    trials_k: int = 1
    use_lll: bool = False
    eps: float = 0.01
    seed: int = None
    kappa: float = 0.75
    method: str = 'auto'
    shards: int = 1

    def __post_init__(self):
        if int(self.moves) < 1:
            raise ValueError(f"DecodeConfig.moves should be >= 1:\n"
                             f"    moves={self.moves}")
        if int(self.trials_k) < 1:
            raise ValueError(f"DecodeConfig.trials_k should be >= 1:\n"
                             f"    trials_k={self.trials_k}")
        if not 0 < self.eps < 1:
            raise ValueError(f"DecodeConfig.eps should be in (0, 1):\n"
                             f"    eps={self.eps}")
        if not 0.25 <= self.kappa <= 1:
            raise ValueError(f"DecodeConfig.kappa should be in [1/4, 1]:\n"
                             f"    kappa={self.kappa}")
        if self.method not in ('auto', 'gibbs'):
            raise ValueError(f"DecodeConfig.method should be 'auto' or"
                             f" 'gibbs':\n    method={self.method}")
        if not 1 <= int(self.shards) <= int(self.moves):
            raise ValueError(f"DecodeConfig.shards should be in [1, moves]:\n"
                             f"    shards={self.shards}")
        policy = self.sigma_policy
        if isinstance(policy, str):
            if policy not in SIGMA_POLICIES:
                raise ValueError(f"DecodeConfig.sigma_policy should be one"
                                 f" of {SIGMA_POLICIES} or a positive"
                                 f" value:\n    sigma_policy={policy}")
        elif not float(policy) > 0:
            raise ValueError(f"DecodeConfig.sigma_policy should be"
                             f" positive:\n    sigma_policy={policy}")


@dataclasses.dataclass(frozen=True, eq=False)
class DecodeResult(object):
    """Outcome of :func:`decode_cvp`.

    Attributes
    ----------
    x_cvp : :class:`numpy.ndarray` of int
        Best coordinates in the input basis.
    distance : float
        ``||B x_cvp - c||``.
    moves_used : int
    acceptance_rate : float
    improved_at : list of int
        Moves (1-based) at which the best point changed.
    sigma : float
        Sampler deviation used.

    """
    x_cvp: np.ndarray
    distance: float
    moves_used: int
    acceptance_rate: float
    improved_at: list
    sigma: float = math.nan

    def as_record(self):
        return [('x_cvp', ','.join(str(int(v)) for v in self.x_cvp)),
                ('distance', self.distance),
                ('moves_used', self.moves_used),
                ('acceptance_rate', self.acceptance_rate),
                ('improved_at', ','.join(str(i) for i in self.improved_at)),
                ('sigma', self.sigma)]


def sigma_default(basis):
    """``min_i ||b^_i|| / (2 sqrt(pi))``."""
    return float(basis.gs_norms.min()) / (2.0 * math.sqrt(math.pi))


def resolve_sigma(policy, basis):
    """Sampler sigma for a policy name or explicit value."""
    if policy == 'default':
        return sigma_default(basis)
    if policy == 'klein':
        return klein_sigma_default(basis).klein
    return float(policy)


class _ArgminTracker(object):
    """Observer keeping the closest accepted state."""

    def __init__(self, state, offset):
        self.best = state
        self.offset = offset
        self.improved_at = []

    def __call__(self, state, accepted):
        if accepted and state.log_pi_unnorm > self.best.log_pi_unnorm:
            self.best = state
            self.improved_at.append(self.offset + state.move_index)


def _shard_moves(moves, shards):
    base, extra = divmod(moves, shards)
    return [base + (i < extra) for i in range(shards)]


def decode_cvp(basis, c, cfg, rng):
    """Closest vector by MHK/MTMK (or Gibbs) sampling.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis.
    c : array-like
        Query point.
    cfg : :class:`pylgs.DecodeConfig`
        Decoder parameters.
    rng : :class:`numpy.random.Generator`
        Random stream; shards draw from ``rng.spawn(shards)``.

    Returns
    -------
    result : :class:`pylgs.DecodeResult`

    Notes
    -----
    Only accepted states are inspected. With several shards the best
    point over all chains wins, the earliest shard on ties; the result is
    reproducible for a fixed shard count only.

    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if cfg.use_lll:
        work, U = lll_reduce(basis, cfg.kappa)
    else:
        work, U = basis, np.eye(basis.n, dtype=np.int64)
    sigma = resolve_sigma(cfg.sigma_policy, work)
    spec = GaussianSpec(sigma, c)
    sampler = make_sampler(work, spec, cfg.trials_k, cfg.method)
    start = sampler.initial(babai_round(work, c).x)
    streams = rng.spawn(cfg.shards) if cfg.shards > 1 else [rng]
    counter = AcceptanceCounter()
    best = None
    offset = 0
    for moves, stream in zip(_shard_moves(cfg.moves, cfg.shards), streams):
        tracker = _ArgminTracker(start, offset)

        def observe(state, accepted):
            counter(state, accepted)
            tracker(state, accepted)

        run_chain(sampler, start, moves, stream, observer=observe)
        if best is None or \
                tracker.best.log_pi_unnorm > best.best.log_pi_unnorm:
            best = tracker
        offset += moves
    x = U @ best.best.x
    distance = basis.distance(x, c)
    logger.debug(f"decode: distance={distance:.6g},"
                 f" acceptance={counter.rate:.4g}")
    return DecodeResult(x.astype(np.int64), distance, cfg.moves,
                        counter.rate, best.improved_at, sigma)


def cvp_complexity_estimate(basis, spec, distance, eps, k=1):
    """Markov moves to hit a point at ``distance``: ``ln(1/eps) e^{d^2/2s^2}``.

    With ``k > 1`` the MTMK bound divides the estimate by ``k``.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis (for the theta prefactor).
    spec : :class:`pylgs.GaussianSpec`
        Sampler parameters.
    distance : float
        ``||Bx - c||`` of the wanted point, non-negative.
    eps : float
        Mixing accuracy in (0, 1).
    k : int, optional (default=1)
        Trials per move.

    Returns
    -------
    estimate : :class:`pylgs.decoder.Complexity`
        ``value`` (``inf`` on overflow), ``log_value`` and the theta
        ``prefactor``, which is reported and not folded in.

    """
    if distance < 0:
        raise ValueError(f"Distance should be non-negative:\n"
                         f"    distance={distance}")
    if not 0 < eps < 1:
        raise ValueError(f"eps should be in (0, 1):\n    eps={eps}")
    log_value = (math.log(math.log(1.0 / eps))
                 + distance**2 / (2.0 * spec.sigma**2) - math.log(k))
    value = math.exp(log_value) if log_value < 709.0 else math.inf
    return Complexity(value, log_value, theta_prefactor(basis, spec.sigma))


def bdd_radius(sigma, t, eps, k=1):
    """Correct decoding radius ``sigma sqrt(2 ln(k t / a))``, ``a = ln(1/eps)``.

    Raises
    ------
    UndefinedRadiusError
        If ``k t <= a``.

    """
    a = math.log(1.0 / eps)
    if k * t <= a:
        raise UndefinedRadiusError(f"Decoding radius undefined for"
                                   f" k*t <= ln(1/eps):\n"
                                   f"    k*t={k * t}, a={a:.6g}")
    return sigma * math.sqrt(2.0 * math.log(k * t / a))


def bdd_success_curve(basis, cfg, noise_norms, trials, rng):
    """Empirical BDD success rate per noise norm.

    Each trial plants ``x*`` uniform in ``[-5, 5]^n`` and adds noise of the
    given norm in a uniform direction; instances, directions and decoder
    streams are shared across noise norms.

    Returns
    -------
    rows : list of :class:`pylgs.decoder.SuccessRow`
        ``(noise_norm, success_rate, r_predicted)``, ``r_predicted`` is nan
        when the radius is undefined.

    """
    n = basis.n
    planted = rng.integers(-5, 6, size=(trials, n))
    directions = rng.standard_normal((trials, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    seeds = rng.integers(2**62, size=trials)
    work = lll_reduce(basis, cfg.kappa)[0] if cfg.use_lll else basis
    sigma = resolve_sigma(cfg.sigma_policy, work)
    try:
        r_predicted = bdd_radius(sigma, cfg.moves, cfg.eps, cfg.trials_k)
    except UndefinedRadiusError as e:
        logger.warning(str(e))
        r_predicted = math.nan
    rows = []
    for norm in noise_norms:
        hits = 0
        for x_star, direction, seed in zip(planted, directions, seeds):
            c = basis.embed(x_star) + norm * direction
            result = decode_cvp(basis, c, cfg, np.random.default_rng(seed))
            hits += bool(np.array_equal(result.x_cvp, x_star))
        rows.append(SuccessRow(float(norm), hits / trials, r_predicted))
    return rows


if __name__ == '__main__':
    pass
