"""
The :mod:`pylgs.samplers` includes Markov chains targeting ``D_{Lambda, sigma, c}``.

* :class:`MhkSampler` - independent Metropolis-Hastings with Klein's
  proposal, accepts by the importance weight ratio ``w(y) / w(x)``.
* :class:`MtmkSampler` - independent multiple-try Metropolis: ``k`` Klein
  trials, one selected proportionally to ``w``, accepted by the ratio of
  weight sums (reference trials reuse the others, ``x`` fills the last slot).
* :class:`GibbsSampler` - backward systematic scan over exact 1-D
  conditionals.

Each sampler exposes ``initial(x0)`` and ``step(state, rng)`` returning
``(state, accepted)``. Weights stay in the log domain.

"""


import dataclasses
import logging
import math

import numpy as np
import scipy.special

from .gaussian import ZGaussian, rho_sum_z, sample_z
from .klein import KleinSampler, klein_sample, proposal_logprob
from .lattice import babai_round, enumerate_ball

__all__ = ['ChainState', 'MhkSampler', 'MtmkSampler', 'GibbsSampler',
           'mhk_step', 'mtmk_step', 'gibbs_step', 'mtmk_coupled_step',
           'delta_bound', 'delta_mtm', 'gaussian_support', 'run_chain',
           'AcceptanceCounter', 'make_sampler']

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class ChainState(object):
    """State of a chain with cached log quantities.

    Attributes
    ----------
    x : :class:`numpy.ndarray` of int
        Current integer vector.
    log_q : float
        Log proposal probability of ``x`` (nan for Gibbs chains).
    log_pi_unnorm : float
        ``-||Bx - c||^2 / (2 sigma^2)``.
    move_index : int
        Markov moves taken so far.

    """
    x: np.ndarray
    log_q: float
    log_pi_unnorm: float
    move_index: int = 0

    @property
    def log_weight(self):
        """Unnormalized ``log w(x) = log pi(x) - log q(x)``."""
        return self.log_pi_unnorm - self.log_q

    def moved(self):
        return dataclasses.replace(self, move_index=self.move_index + 1)


def _accept(log_ratio, rng):
    return rng.random() < math.exp(min(0.0, log_ratio))


def mhk_step(s, state, rng):
    """One independent MHK move.

    Parameters
    ----------
    s : :class:`pylgs.MhkSampler`
        Sampler.
    state : :class:`pylgs.ChainState`
        Current state.
    rng : :class:`numpy.random.Generator`
        Random stream.

    Returns
    -------
    state : :class:`pylgs.ChainState`
        Next state, ``move_index`` incremented.
    accepted : bool
        True if the proposal was accepted.

    """
    y, log_q = klein_sample(s.klein, rng)
    log_pi = s.klein.log_target(y)
    if _accept((log_pi - log_q) - state.log_weight, rng):
        return ChainState(y, log_q, log_pi, state.move_index + 1), True
    return state.moved(), False


def _draw_trials(klein, k, rng):
    trials = [klein_sample(klein, rng) for _ in range(k)]
    log_pi = np.array([klein.log_target(y) for y, _ in trials])
    log_q = np.array([lq for _, lq in trials])
    return trials, log_pi, log_q


def _select(log_w, rng):
    """Index drawn with probability proportional to ``exp(log_w)``."""
    if len(log_w) == 1:
        return 0
    p = np.exp(log_w - scipy.special.logsumexp(log_w))
    idx = int(np.searchsorted(np.cumsum(p), rng.random() * p.sum(),
                              side='right'))
    return min(idx, len(log_w) - 1)


def _mtm_log_ratio(log_w, c, log_wx):
    others = np.delete(log_w, c)
    num = scipy.special.logsumexp(log_w)
    den = scipy.special.logsumexp(np.append(others, log_wx))
    return float(num - den)


def mtmk_step(s, state, rng):
    """One independent MTMK move.

    ``k`` Klein trials are drawn, ``y_c`` is picked with probability
    proportional to its importance weight and accepted with
    ``min{1, sum_j w(y_j) / (w(x) + sum_{j != c} w(y_j))}``.

    Parameters
    ----------
    s : :class:`pylgs.MtmkSampler`
        Sampler.
    state : :class:`pylgs.ChainState`
        Current state.
    rng : :class:`numpy.random.Generator`
        Random stream.

    Returns
    -------
    state : :class:`pylgs.ChainState`
    accepted : bool

    """
    trials, log_pi, log_q = _draw_trials(s.klein, s.k, rng)
    log_w = log_pi - log_q
    c = _select(log_w, rng)
    if _accept(_mtm_log_ratio(log_w, c, state.log_weight), rng):
        y = trials[c][0]
        return ChainState(y, log_q[c], log_pi[c], state.move_index + 1), True
    return state.moved(), False


def mtmk_coupled_step(s, state_a, state_b, rng):
    """Move two chains with shared trials, selection and uniform.

    Both chains see the same candidate ``y_c``; acceptance uses one uniform,
    so the chains coalesce whenever both accept. ``k = 1`` gives the MHK
    coupling.

    Returns
    -------
    state_a, state_b : :class:`pylgs.ChainState`
    coupled : bool
        True if both chains hold the same vector after the move.

    """
    trials, log_pi, log_q = _draw_trials(s.klein, s.k, rng)
    log_w = log_pi - log_q
    c = _select(log_w, rng)
    u = rng.random()
    moved = []
    for state in (state_a, state_b):
        ratio = _mtm_log_ratio(log_w, c, state.log_weight)
        if u < math.exp(min(0.0, ratio)):
            y = trials[c][0]
            state = ChainState(y, log_q[c], log_pi[c], state.move_index + 1)
        else:
            state = state.moved()
        moved.append(state)
    return moved[0], moved[1], bool(np.array_equal(moved[0].x, moved[1].x))


def gibbs_step(s, state, rng):
    """One backward systematic Gibbs scan.

    Coordinate ``i`` is redrawn from ``D_{Z, sigma/||b_i||, m_i}`` with
    ``m_i = b_i^T (c - sum_{j != i} x_j b_j) / ||b_i||^2``.

    """
    B = s.basis.B
    x = state.x.copy()
    residual = B @ x - s.spec.center
    for i in range(s.basis.n - 1, -1, -1):
        b = B[:, i]
        residual -= b * x[i]
        center = -(b @ residual) / s.col_norms2[i]
        x[i] = sample_z(ZGaussian(s.col_sigmas[i], center), rng)
        residual += b * x[i]
    log_pi = -float(residual @ residual) / (2.0 * s.spec.sigma**2)
    return ChainState(x, math.nan, log_pi, state.move_index + 1)


class MhkSampler(object):
    """Independent Metropolis-Hastings-Klein sampler.

    Parameters
    ----------
    klein : :class:`pylgs.KleinSampler`
        Proposal, fixes the target sigma and center.

    """
    k = 1

    def __init__(self, klein):
        self.klein = klein

    @property
    def basis(self):
        return self.klein.basis

    @property
    def spec(self):
        return self.klein.spec

    def initial(self, x0):
        x0 = np.asarray(x0, dtype=np.int64)
        return ChainState(x0, proposal_logprob(self.klein, x0),
                          self.klein.log_target(x0))

    def step(self, state, rng):
        return mhk_step(self, state, rng)


class MtmkSampler(MhkSampler):
    """Independent multiple-try Metropolis-Klein sampler.

    Parameters
    ----------
    klein : :class:`pylgs.KleinSampler`
        Proposal.
    k : int
        Trials per move, ``k >= 1``.

    """
    def __init__(self, klein, k):
        if int(k) < 1:
            raise ValueError(f"MTMK trial count should be >= 1:\n    k={k}")
        super().__init__(klein)
        self.k = int(k)

    def step(self, state, rng):
        return mtmk_step(self, state, rng)


class GibbsSampler(object):
    """Sequential Gibbs sampler with a backward scan order."""
    k = 1

    def __init__(self, basis, spec):
        self.basis = basis
        self.spec = spec
        self.col_norms2 = np.einsum('ij,ij->j', basis.B, basis.B)
        self.col_sigmas = spec.sigma / np.sqrt(self.col_norms2)

    def initial(self, x0):
        x0 = np.asarray(x0, dtype=np.int64)
        diff = self.basis.B @ x0 - self.spec.center
        return ChainState(x0, math.nan,
                          -float(diff @ diff) / (2.0 * self.spec.sigma**2))

    def step(self, state, rng):
        return gibbs_step(self, state, rng), True


def make_sampler(basis, spec, k=1, method='auto'):
    """Sampler by name: 'auto' (MHK for k=1, MTMK otherwise) or 'gibbs'."""
    if method == 'gibbs':
        return GibbsSampler(basis, spec)
    if method != 'auto':
        raise ValueError(f"Unknown sampler method:\n    {method}")
    klein = KleinSampler.build(basis, spec)
    return MhkSampler(klein) if k == 1 else MtmkSampler(klein, k)


def run_chain(sampler, x0, moves, rng, observer=None):
    """Apply ``sampler.step`` ``moves`` times.

    Parameters
    ----------
    sampler : MhkSampler, MtmkSampler or GibbsSampler
        Chain kernel.
    x0 : array-like or :class:`pylgs.ChainState`
        Initial vector or state.
    moves : int
        Number of moves, ``moves >= 0``.
    rng : :class:`numpy.random.Generator`
        Random stream.
    observer : callable, optional (default=None)
        Called as ``observer(state, accepted)`` after every move.

    Returns
    -------
    state : :class:`pylgs.ChainState`
        Last state.

    """
    if moves < 0:
        raise ValueError(f"Number of moves should be >= 0:\n    moves={moves}")
    state = x0 if isinstance(x0, ChainState) else sampler.initial(x0)
    for _ in range(moves):
        state, accepted = sampler.step(state, rng)
        if observer is not None:
            observer(state, accepted)
    return state


class AcceptanceCounter(object):
    """Observer counting moves and accepted proposals."""

    def __init__(self):
        self.moves = 0
        self.accepted = 0

    def __call__(self, state, accepted):
        self.moves += 1
        self.accepted += bool(accepted)

    @property
    def rate(self):
        return self.accepted / self.moves if self.moves else math.nan


def _log_rho_sum_levels(basis, sigma):
    """``sum_i log rho_{sigma_i}(Z)`` with zero centers."""
    return sum(rho_sum_z(ZGaussian(s, 0.0), log=True)
               for s in sigma / basis.gs_norms)


def gaussian_support(basis, spec, mass_coverage=1 - 1e-12):
    """Radius whose ball around ``c`` holds ``mass_coverage`` of the rho-mass.

    The tail outside radius ``t sqrt(2 pi) sigma sqrt(n)`` is at most
    ``2 (t sqrt(2 pi e) exp(-pi t^2))^n rho(Lambda)`` (Banaszczyk), and
    ``rho(Lambda) <= prod_i rho_{sigma_i}(Z)``, while ``rho(Lambda - c)`` is at
    least the Babai point term. ``t`` grows until the tail is small enough.

    Returns
    -------
    radius : float

    """
    if not 0 < mass_coverage < 1:
        raise ValueError(f"Mass coverage should be in (0, 1):\n"
                         f"    mass_coverage={mass_coverage}")
    n = basis.n
    sigma = spec.sigma
    log_d = _log_rho_sum_levels(basis, sigma)
    babai = babai_round(basis, spec.center)
    log_n = -basis.distance(babai.x, spec.center)**2 / (2.0 * sigma**2)
    target = math.log1p(-mass_coverage) + log_n - log_d - math.log(2.0)
    t = 1.0
    while n * (0.5 * math.log(2 * math.pi * math.e) + math.log(t)
               - math.pi * t * t) > target:
        t += 0.05
    radius = t * math.sqrt(2 * math.pi) * sigma * math.sqrt(n)
    return max(radius, basis.distance(babai.x, spec.center))


def delta_bound(basis, spec, mass_coverage=1 - 1e-12):
    """Spectral gap lower bound ``delta = rho(Lambda - c) / prod rho_{sigma_i}(Z)``.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis.
    spec : :class:`pylgs.GaussianSpec`
        Target parameters.
    mass_coverage : float, optional (default=1-1e-12)
        Fraction of the rho-mass captured by the enumerated numerator.

    Returns
    -------
    delta : float
        Value in (0, 1].

    Raises
    ------
    CapacityError
        If sigma is too large to enumerate the support.

    """
    radius = gaussian_support(basis, spec, mass_coverage)
    points = enumerate_ball(basis, spec.center, radius)
    diffs = np.array([p.embedded for p in points]) - spec.center
    log_num = scipy.special.logsumexp(
        -np.einsum('ij,ij->i', diffs, diffs) / (2.0 * spec.sigma**2))
    log_den = _log_rho_sum_levels(basis, spec.sigma)
    delta = min(1.0, math.exp(log_num - log_den))
    logger.debug(f"delta={delta:.6g} from {len(points)} points,"
                 f" radius={radius:.4g}")
    return delta


def delta_mtm(delta, k):
    """MTMK rate ``k / (k - 1 + 1 / delta)``."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta should be in (0, 1]:\n    delta={delta}")
    if int(k) < 1:
        raise ValueError(f"Trial count should be >= 1:\n    k={k}")
    return k / (k - 1 + 1.0 / delta)


if __name__ == '__main__':
    pass
