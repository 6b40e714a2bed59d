"""
The :mod:`pylgs.klein` implements Klein's randomized nearest-plane sampler.

Klein's algorithm draws ``x`` coordinate by coordinate, last first, from
``D_{Z, sigma_i, x~_i}`` with ``sigma_i = sigma / r_{i,i}`` and the centers
``x~_i = (c'_i - sum_{j>i} r_{i,j} x_j) / r_{i,i}``. The probability of the
drawn vector is the product of the one-dimensional pmfs, so ``log q(x)`` is
accumulated in the same pass.

"""


import collections
import dataclasses
import math

import numpy as np

from .gaussian import ZGaussian, _draw, log_rho, rho_sum_z, theta3
from .lattice import GaussianSpec

__all__ = ['KleinSampler', 'klein_sample', 'proposal_logprob',
           'klein_sigma_default', 'klein_lower_bound', 'theta_prefactor',
           'SigmaChoice']


SigmaChoice = collections.namedtuple('SigmaChoice', ['decoder', 'klein'])
SigmaChoice.__doc__ = """Default sigma pair: decoder ``min/(2 sqrt(pi))``,
Klein's ``min/sqrt(2 log n)``."""


@dataclasses.dataclass(frozen=True, eq=False)
class KleinSampler(object):
    """Klein proposal for ``D_{Lambda, sigma, c}``.

    Attributes
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis.
    spec : :class:`pylgs.GaussianSpec`
        Target sigma and center.
    c_prime : :class:`numpy.ndarray`
        Rotated center ``Q^T c``.
    sigmas : :class:`numpy.ndarray`
        Per-level deviations ``sigma / r_{i,i}``.

    """
    basis: object
    spec: GaussianSpec
    c_prime: np.ndarray
    sigmas: np.ndarray

    @classmethod
    def build(cls, basis, spec):
        if spec.center.shape != (basis.n,):
            raise ValueError(f"Center dimension should match the basis:\n"
                             f"    center={spec.center.shape}, n={basis.n}")
        c_prime = basis.Q.T @ spec.center
        sigmas = spec.sigma / basis.gs_norms
        c_prime.setflags(write=False)
        sigmas.setflags(write=False)
        return cls(basis, spec, c_prime, sigmas)

    def level(self, i, x):
        """ZGaussian of level ``i`` given the already fixed ``x[i+1:]``."""
        R = self.basis.R
        center = (self.c_prime[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
        return ZGaussian(self.sigmas[i], center)

    def log_target(self, x):
        """Unnormalized ``log pi(x) = -||Bx - c||^2 / (2 sigma^2)``."""
        return log_rho(self.basis.B @ x, self.spec)


def klein_sample(ks, rng):
    """Draw ``x`` from Klein's proposal.

    Parameters
    ----------
    ks : :class:`pylgs.KleinSampler`
        Sampler.
    rng : :class:`numpy.random.Generator`
        Random stream owned by the caller.

    Returns
    -------
    x : :class:`numpy.ndarray` of int
        Drawn integer vector.
    log_q : float
        Exact log proposal probability of ``x``.

    """
    n = ks.basis.n
    x = np.zeros(n, dtype=np.int64)
    log_q = 0.0
    for i in range(n - 1, -1, -1):
        x[i], logp = _draw(ks.level(i, x), rng)
        log_q += logp
    return x, log_q


def proposal_logprob(ks, x):
    """Log proposal probability ``log q(x)`` by one backward pass."""
    x = np.asarray(x, dtype=np.int64)
    log_q = 0.0
    for i in range(ks.basis.n - 1, -1, -1):
        zg = ks.level(i, x)
        log_q += float(zg.log_weights(x[i])) - rho_sum_z(zg, log=True)
    return log_q


def klein_sigma_default(basis):
    """Both default sigmas for ``basis``.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis, ``n >= 2``.

    Returns
    -------
    choice : :class:`pylgs.klein.SigmaChoice`
        ``decoder = min ||b^_i|| / (2 sqrt(pi))``,
        ``klein = min ||b^_i|| / sqrt(2 ln n)``.

    Raises
    ------
    ValueError
        If ``n < 2`` (the Klein variant is undefined).

    """
    n = basis.n
    if n < 2:
        raise ValueError(f"Klein's sigma needs n >= 2:\n    n={n}")
    m = float(basis.gs_norms.min())
    return SigmaChoice(decoder=m / (2.0 * math.sqrt(math.pi)),
                       klein=m / math.sqrt(2.0 * math.log(n)))


def theta_prefactor(basis, sigma, log=False):
    """``prod_i theta3(||b^_i||^2 / (2 pi sigma^2))``."""
    taus = basis.gs_norms**2 / (2.0 * math.pi * sigma**2)
    value = sum(math.log(theta3(t)) for t in taus)
    return value if log else math.exp(value)


def klein_lower_bound(ks, x):
    """Log lower bound of ``q(x)``: ``log rho(Bx) - log theta_prefactor``."""
    x = np.asarray(x, dtype=np.int64)
    return ks.log_target(x) - theta_prefactor(ks.basis, ks.spec.sigma,
                                              log=True)


if __name__ == '__main__':
    pass
