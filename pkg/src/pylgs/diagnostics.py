"""
The :mod:`pylgs.diagnostics` verifies chain convergence on small lattices.

A :class:`TruncatedStateSpace` enumerates the lattice points that carry
almost all of the target and proposal mass. Over it the independent chains
have explicit transition matrices, so spectral gaps, detailed balance and
total variation decay can be computed exactly and compared with the
``delta`` bounds of :mod:`pylgs.samplers`.

Truncation leakage (proposals falling outside the enumerated set) is folded
into the diagonal, which keeps every matrix exactly row-stochastic.

"""


import collections
import dataclasses
import itertools
import logging
import math

import numpy as np
import scipy.linalg
import scipy.special

from .klein import KleinSampler, proposal_logprob
from .lattice import ConvergenceError, enumerate_ball
from .samplers import (AcceptanceCounter, MhkSampler, MtmkSampler,
                       delta_bound, delta_mtm, gaussian_support,
                       mtmk_coupled_step, run_chain)

__all__ = ['TruncatedStateSpace', 'TransitionMatrix', 'SpectralCheck',
           'MixingTime', 'SamplerDiagnostics', 'exact_target',
           'build_mhk_matrix', 'build_mtmk_matrix', 'spectral_radius_check',
           'detailed_balance_residual', 'tv_distance', 'mixing_time_bound',
           'mixing_time_mtm', 'pickup_gap', 'tv_decay_exact',
           'empirical_tv_trace', 'coupling_rate', 'diagnose']

logger = logging.getLogger(__name__)

DENSE_LIMIT = 200
"""int: Largest state count solved by a dense eigensolver."""

SpectralCheck = collections.namedtuple('SpectralCheck',
                                       ['tau1', 'predicted', 'residual'])
MixingTime = collections.namedtuple('MixingTime', ['exact', 'upper'])


@dataclasses.dataclass(eq=False)
class TruncatedStateSpace(object):
    """Enumerated states sorted by descending importance weight.

    Attributes
    ----------
    states : :class:`numpy.ndarray` of shape (N, n)
        Integer vectors, ``w(x_1) >= w(x_2) >= ...``.
    pi : :class:`numpy.ndarray`
        Target normalized over the truncation.
    q : :class:`numpy.ndarray`
        Exact Klein proposal probabilities.
    covered_mass : float
        Guaranteed fraction of both target and proposal mass.
    basis : :class:`pylgs.Basis`
    spec : :class:`pylgs.GaussianSpec`

    """
    states: np.ndarray
    pi: np.ndarray
    q: np.ndarray
    covered_mass: float
    basis: object
    spec: object

    def __post_init__(self):
        self.index = {tuple(int(v) for v in s): i
                      for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    @property
    def log_w(self):
        return np.log(self.pi) - np.log(self.q)

    def lookup(self, x):
        """Index of ``x`` or None if it lies outside the truncation."""
        return self.index.get(tuple(int(v) for v in x))

    def restrict(self, max_states):
        """Keep the ``max_states`` highest-target states, renormalize pi."""
        keep = np.sort(np.argsort(-self.pi, kind='stable')[:max_states])
        pi = self.pi[keep] / self.pi[keep].sum()
        return _sorted_space(self.states[keep], pi, self.q[keep],
                             float(self.q[keep].sum()), self.basis,
                             self.spec)


@dataclasses.dataclass(eq=False)
class TransitionMatrix(object):
    """Row-stochastic matrix over a truncated state space."""
    P: np.ndarray

    def __post_init__(self):
        if np.any(self.P < -1e-15):
            raise ValueError("Transition matrix has negative entries.")
        rows = self.P.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-9:
            raise ValueError(f"Transition matrix rows should sum to 1:\n"
                             f"    max deviation="
                             f"{np.max(np.abs(rows - 1.0))}")


def _sorted_space(states, pi, q, covered, basis, spec):
    log_w = np.log(pi) - np.log(q)
    keys = [tuple(int(v) for v in s) for s in states]
    order = sorted(range(len(states)), key=lambda i: (-log_w[i], keys[i]))
    return TruncatedStateSpace(states[order], pi[order], q[order], covered,
                               basis, spec)


def exact_target(basis, spec, mass=1 - 1e-9, max_rounds=60):
    """Enumerate the target ``D_{Lambda, sigma, c}`` over its heavy states.

    The ball radius starts from the tail bound of
    :func:`pylgs.samplers.gaussian_support` and grows until the enumerated
    states also hold ``mass`` of the Klein proposal.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis.
    spec : :class:`pylgs.GaussianSpec`
        Target parameters.
    mass : float, optional (default=1-1e-9)
        Required mass coverage in (0, 1).
    max_rounds : int, optional (default=60)
        Radius growth rounds before giving up.

    Returns
    -------
    space : :class:`pylgs.TruncatedStateSpace`

    Raises
    ------
    CapacityError
        If the enumeration cap is exceeded.

    """
    klein = KleinSampler.build(basis, spec)
    radius = gaussian_support(basis, spec, mass)
    for _ in range(max_rounds):
        points = enumerate_ball(basis, spec.center, radius)
        states = np.array([p.x for p in points], dtype=np.int64)
        log_q = np.array([proposal_logprob(klein, x) for x in states])
        q_mass = float(np.exp(scipy.special.logsumexp(log_q)))
        if q_mass >= mass:
            break
        radius *= 1.25
    else:
        raise ConvergenceError(f"Proposal mass not covered:\n"
                               f"    mass={q_mass}, required={mass}")
    log_pi = np.array([klein.log_target(x) for x in states])
    pi = np.exp(log_pi - scipy.special.logsumexp(log_pi))
    q = np.exp(log_q)
    # Weights must stay finite; dropped states carry no mass.
    keep = np.minimum(pi, q) > 1e-250
    logger.debug(f"Truncated state space: {keep.sum()} states,"
                 f" proposal mass {q_mass:.12g}")
    return _sorted_space(states[keep], pi[keep] / pi[keep].sum(), q[keep],
                         min(q_mass, mass), basis, spec)


def build_mhk_matrix(space):
    """Independent MHK transition matrix ``q(y) min{1, w(y)/w(x)}``."""
    log_w = space.log_w
    ratio = np.exp(np.minimum(0.0, log_w[None, :] - log_w[:, None]))
    P = space.q[None, :] * ratio
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return TransitionMatrix(P)


def build_mtmk_matrix(space, k, max_tuples=10**6):
    """Independent MTMK transition matrix by summation over trial tuples.

    ``P(x, y) = k sum_z q(y) prod q(z) w(y)/W min{1, W/(w(x) + S_z)}`` where
    ``z`` runs over the ``k-1`` other trials, ``S_z`` is their weight sum and
    ``W = w(y) + S_z``.

    Parameters
    ----------
    space : :class:`pylgs.TruncatedStateSpace`
        Small state space (tuples grow as ``N^(k-1)``).
    k : int
        Trials per move.
    max_tuples : int, optional (default=10**6)
        Limit on ``N^(k-1)``.

    Returns
    -------
    matrix : :class:`pylgs.TransitionMatrix`

    """
    N = len(space)
    if N**(k - 1) > max_tuples:
        raise ValueError(f"Too many trial tuples:\n"
                         f"    N={N}, k={k}, N^(k-1)={N**(k - 1)}")
    w = space.pi / space.q
    P = np.zeros((N, N))
    for z in itertools.product(range(N), repeat=k - 1):
        z = list(z)
        prob = float(np.prod(space.q[z]))
        s = float(w[z].sum())
        P += prob * np.minimum(1.0 / (w[None, :] + s), 1.0 / (w[:, None] + s))
    P *= k * space.pi[None, :]
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return TransitionMatrix(P)


def detailed_balance_residual(P, pi):
    """``max |pi(x) P(x, y) - pi(y) P(y, x)|``."""
    P = getattr(P, 'P', P)
    flow = pi[:, None] * P
    return float(np.max(np.abs(flow - flow.T)))


def spectral_radius_check(P, space, tol=1e-13, max_iter=10**4, seed=0):
    """Second largest eigenvalue modulus against ``1 - q(x_1)/pi(x_1)``.

    The unit eigenvalue is deflated by subtracting ``1 pi^T``. Spaces up to
    200 states use a dense eigensolver, larger ones power iteration.

    Parameters
    ----------
    P : :class:`pylgs.TransitionMatrix`
        Matrix from :func:`build_mhk_matrix`.
    space : :class:`pylgs.TruncatedStateSpace`
        The same space, sorted by weight.
    tol : float, optional (default=1e-13)
        Power iteration tolerance.
    max_iter : int, optional (default=10**4)
        Power iteration limit.
    seed : int, optional (default=0)
        Seed of the power iteration start vector.

    Returns
    -------
    check : :class:`pylgs.diagnostics.SpectralCheck`
        ``(tau1, predicted, residual)``.

    Raises
    ------
    ConvergenceError
        If power iteration does not converge within ``max_iter``.

    """
    M = P.P - np.outer(np.ones(len(space)), space.pi)
    if len(space) <= DENSE_LIMIT:
        tau1 = float(np.max(np.abs(scipy.linalg.eigvals(M))))
    else:
        tau1 = _power_iteration(M, tol, max_iter, seed)
    predicted = 1.0 - space.q[0] / space.pi[0]
    return SpectralCheck(tau1, predicted, abs(tau1 - predicted))


def _power_iteration(M, tol, max_iter, seed):
    v = np.random.default_rng(seed).random(M.shape[0])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        # Two steps: robust to a negative dominant eigenvalue.
        u = M @ (M @ v)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 0.0
        current = math.sqrt(norm)
        v = u / norm
        if abs(current - estimate) <= tol * max(1.0, current):
            return current
        estimate = current
    raise ConvergenceError(f"Power iteration did not converge:\n"
                           f"    max_iter={max_iter}")


def tv_distance(p, q):
    """Total variation distance ``1/2 sum |p - q|``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"Distributions should share support:\n"
                         f"    {p.shape} != {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def mixing_time_bound(delta, eps):
    """Mixing time ``ln(eps)/ln(1-delta)`` and its bound ``-ln(eps)/delta``.

    Parameters
    ----------
    delta : float
        Rate in (0, 1).
    eps : float
        Target distance in (0, 1).

    Returns
    -------
    mixing : :class:`pylgs.diagnostics.MixingTime`
        ``(exact, upper)`` with ``exact <= upper``.

    """
    if not 0 < delta < 1:
        raise ValueError(f"delta should be in (0, 1):\n    delta={delta}")
    if not 0 < eps < 1:
        raise ValueError(f"eps should be in (0, 1):\n    eps={eps}")
    return MixingTime(math.log(eps) / math.log1p(-delta),
                      -math.log(eps) / delta)


def mixing_time_mtm(delta, k, eps):
    """:func:`mixing_time_bound` at the MTMK rate ``delta_mtm(delta, k)``."""
    return mixing_time_bound(delta_mtm(delta, k), eps)


def pickup_gap(delta, eps):
    """Moves between retained samples: ``ceil`` of the exact mixing time."""
    if delta >= 1:
        return 1
    return max(1, math.ceil(mixing_time_bound(delta, eps).exact))


def tv_decay_exact(P, space, moves, start=0):
    """``TV(P^t(x_start, .), pi)`` for ``t = 1..moves``."""
    row = np.zeros(len(space))
    row[start] = 1.0
    trace = []
    for _ in range(moves):
        row = row @ P.P
        trace.append(tv_distance(row, space.pi))
    return np.array(trace)


def empirical_tv_trace(sampler, space, x0, moves, replicas, rng):
    """TV between the empirical law of ``X_t`` over replicas and pi.

    States outside the truncation are pooled into one extra bucket whose
    target mass is zero.

    Returns
    -------
    tv : :class:`numpy.ndarray`
        Distance for ``t = 1..moves``.
    rate : float
        Acceptance rate over all replica moves.

    """
    N = len(space)
    counts = np.zeros((moves, N + 1))
    counter = AcceptanceCounter()

    def observe(state, accepted):
        counter(state, accepted)
        idx = space.lookup(state.x)
        counts[state.move_index - 1, N if idx is None else idx] += 1

    start = sampler.initial(x0)
    for _ in range(replicas):
        run_chain(sampler, start, moves, rng, observer=observe)
    target = np.append(space.pi, 0.0)
    tv = np.array([tv_distance(row / replicas, target) for row in counts])
    return tv, counter.rate


def coupling_rate(sampler, x_a, x_b, pairs, rng):
    """Fraction of single paired moves after which both chains coincide."""
    if not isinstance(sampler, MhkSampler):
        raise TypeError(f"Coupling needs an independent Klein sampler:\n"
                        f"    {type(sampler).__name__}")
    a = sampler.initial(x_a)
    b = sampler.initial(x_b)
    coupled = sum(mtmk_coupled_step(sampler, a, b, rng)[2]
                  for _ in range(pairs))
    return coupled / pairs


@dataclasses.dataclass
class SamplerDiagnostics(object):
    """Convergence report of one lattice Gaussian."""
    n_states: int
    covered_mass: float
    delta: float
    delta_mtm: dict
    spectral: SpectralCheck
    mixing: dict
    tv_exact: np.ndarray
    tv_bound: np.ndarray
    tv_empirical: np.ndarray = None
    acceptance_rate: float = math.nan
    coupling: dict = dataclasses.field(default_factory=dict)

    def as_record(self):
        """Flat ``(key, value)`` pairs in report order."""
        rec = [('n_states', self.n_states),
               ('covered_mass', self.covered_mass),
               ('delta', self.delta),
               ('tau1', self.spectral.tau1),
               ('tau1_predicted', self.spectral.predicted),
               ('tau1_residual', self.spectral.residual)]
        for k, value in self.delta_mtm.items():
            rec.append((f"delta_mtm[k={k}]", value))
        for k, (exact, upper) in self.mixing.items():
            rec.append((f"t_mix[k={k}]", exact))
            rec.append((f"t_mix_upper[k={k}]", upper))
        for t, (tv, bound) in enumerate(zip(self.tv_exact, self.tv_bound), 1):
            rec.append((f"tv_exact[t={t}]", tv))
            rec.append((f"tv_bound[t={t}]", bound))
        if self.tv_empirical is not None:
            for t, tv in enumerate(self.tv_empirical, 1):
                rec.append((f"tv_empirical[t={t}]", tv))
            rec.append(('acceptance_rate', self.acceptance_rate))
        for k, rate in self.coupling.items():
            rec.append((f"coupling_rate[k={k}]", rate))
        return rec


def diagnose(basis, spec, rng, mass=1 - 1e-9, k_grid=(1, 2, 5, 10),
             eps=0.01, tv_moves=15, replicas=0):
    """Assemble :class:`SamplerDiagnostics` for ``D_{Lambda, sigma, c}``.

    With ``replicas > 0`` the empirical TV trace of MHK chains started at
    the heaviest-weight state and the paired-chain coupling rates per ``k``
    are simulated as well.

    """
    space = exact_target(basis, spec, mass)
    P = build_mhk_matrix(space)
    spectral = spectral_radius_check(P, space)
    delta = delta_bound(basis, spec)
    rates = {k: delta_mtm(delta, k) for k in k_grid}
    mixing = {}
    for k, rate in rates.items():
        if rate < 1:
            mixing[k] = mixing_time_bound(rate, eps)
        else:
            mixing[k] = MixingTime(0.0, -math.log(eps))
    tv_exact = tv_decay_exact(P, space, tv_moves)
    tv_bound = (1.0 - delta)**np.arange(1, tv_moves + 1)
    report = SamplerDiagnostics(len(space), space.covered_mass, delta, rates,
                                spectral, mixing, tv_exact, tv_bound)
    if replicas > 0:
        klein = KleinSampler.build(basis, spec)
        report.tv_empirical, report.acceptance_rate = empirical_tv_trace(
            MhkSampler(klein), space, space.states[0], tv_moves, replicas, rng)
        x_b = space.states[min(1, len(space) - 1)]
        for k in k_grid:
            sampler = MtmkSampler(klein, k)
            report.coupling[k] = coupling_rate(sampler, space.states[0], x_b,
                                               replicas, rng)
    logger.info(f"delta={delta:.6g}, tau1={spectral.tau1:.6g},"
                f" predicted={spectral.predicted:.6g}")
    return report


if __name__ == '__main__':
    pass
