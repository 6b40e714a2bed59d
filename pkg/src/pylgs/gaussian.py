"""
The :mod:`pylgs.gaussian` includes one-dimensional discrete Gaussian primitives.

Everything is kept in the log domain where the mass can underflow.
:class:`ZGaussian` is a truncated ``D_{Z, sigma, c}``: the window is centered
at ``round(c)`` and extends ``max(hw, ceil(hw * sigma) + 1)`` integers to both
sides, which leaves a tail mass far below double precision for ``hw >= 10``.

"""


import dataclasses
import functools
import math

import numpy as np
import scipy.special

__all__ = ['ZGaussian', 'rho', 'log_rho', 'theta3', 'theta3_closed_form',
           'rho_sum_z', 'pmf_z', 'sample_z']


def log_rho(z, spec):
    """Log of :func:`rho`: ``-||z - c||^2 / (2 sigma^2)``."""
    diff = np.atleast_1d(np.asarray(z, dtype=float)) - spec.center
    return -float(diff @ diff) / (2.0 * spec.sigma**2)


def rho(z, spec):
    """Gaussian function ``exp(-||z - c||^2 / (2 sigma^2))``.

    Parameters
    ----------
    z : array-like
        Point.
    spec : :class:`pylgs.GaussianSpec`
        Standard deviation and center.

    Returns
    -------
    value : float

    """
    return math.exp(log_rho(z, spec))


@dataclasses.dataclass(frozen=True)
class ZGaussian(object):
    """Discrete Gaussian over the integers, truncated to a finite window.

    Attributes
    ----------
    sigma : float
        Standard deviation, positive.
    center : float
        Real center.
    support_halfwidth : int, optional (default=10)
        Window halfwidth in units of sigma, at least 10.

    """
    sigma: float
    center: float
    support_halfwidth: int = 10

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"ZGaussian sigma should be positive:\n"
                             f"    sigma={self.sigma}")
        if self.support_halfwidth < 10:
            raise ValueError(f"ZGaussian support_halfwidth should be >= 10:\n"
                             f"    support_halfwidth={self.support_halfwidth}")
        object.__setattr__(self, 'center', float(self.center))

    @property
    def anchor(self):
        return int(np.rint(self.center))

    @property
    def radius(self):
        hw = self.support_halfwidth
        return max(hw, int(math.ceil(hw * self.sigma)) + 1)

    def support(self):
        """Integers of the window in ascending order."""
        r = self.radius
        return np.arange(self.anchor - r, self.anchor + r + 1)

    def log_weights(self, xs):
        xs = np.asarray(xs, dtype=float)
        return -(xs - self.center)**2 / (2.0 * self.sigma**2)


def rho_sum_z(zg, log=False):
    """Partition sum ``sum_{x in Z} rho_{sigma, c}(x)`` over the window.

    Parameters
    ----------
    zg : :class:`pylgs.gaussian.ZGaussian`
        Truncated discrete Gaussian.
    log : bool, optional (default=False)
        If True, return the natural logarithm.

    Returns
    -------
    value : float

    """
    value = float(scipy.special.logsumexp(zg.log_weights(zg.support())))
    return value if log else math.exp(value)


def pmf_z(x, zg):
    """Probability of integer ``x`` under ``zg``, zero outside the window."""
    r = zg.radius
    if abs(int(x) - zg.anchor) > r:
        return 0.0
    return math.exp(float(zg.log_weights(x)) - rho_sum_z(zg, log=True))


@functools.lru_cache(maxsize=None)
def _outward_offsets(radius):
    # 0, +1, -1, +2, -2, ...
    offsets = np.empty(2 * radius + 1, dtype=np.int64)
    offsets[0] = 0
    offsets[1::2] = np.arange(1, radius + 1)
    offsets[2::2] = -np.arange(1, radius + 1)
    return offsets


def _draw(zg, rng):
    """Inverse-CDF draw scanning outward from the anchor.

    Returns
    -------
    value : int
    logp : float
        Log probability of ``value`` under the truncated pmf.

    """
    xs = zg.anchor + _outward_offsets(zg.radius)
    logw = zg.log_weights(xs)
    lse = scipy.special.logsumexp(logw)
    cdf = np.cumsum(np.exp(logw - lse))
    u = rng.random() * cdf[-1]
    idx = min(int(np.searchsorted(cdf, u, side='right')), len(xs) - 1)
    return int(xs[idx]), float(logw[idx] - lse)


def sample_z(zg, rng):
    """Exact sample from the truncated ``D_{Z, sigma, c}``.

    Parameters
    ----------
    zg : :class:`pylgs.gaussian.ZGaussian`
        Truncated discrete Gaussian.
    rng : :class:`numpy.random.Generator`
        Random stream owned by the caller.

    Returns
    -------
    value : int
        Integer inside ``zg.support()``.

    """
    return _draw(zg, rng)[0]


def theta3(tau):
    """Jacobi theta function ``sum_n exp(-pi tau n^2)``.

    The series is summed until a term drops below 1e-18.

    Parameters
    ----------
    tau : float
        Positive argument.

    Returns
    -------
    value : float

    Raises
    ------
    ValueError
        If ``tau <= 0``.

    """
    if not tau > 0:
        raise ValueError(f"theta3 is defined for tau > 0:\n    tau={tau}")
    total = 1.0
    n = 1
    while True:
        term = 2.0 * math.exp(-math.pi * tau * n * n)
        total += term
        if term < 1e-18:
            return total
        n += 1


def theta3_closed_form(k):
    """Closed forms of ``theta3(k)`` for ``k`` in 1..5 (Gamma function)."""
    g = scipy.special.gamma(0.75)
    pi = math.pi
    forms = {
        1: pi**0.25 / g,
        2: (6 * pi + 4 * math.sqrt(2) * pi)**0.25 / (2 * g),
        3: (27 * pi + 18 * math.sqrt(3) * pi)**0.25 / (3 * g),
        4: ((8 * pi)**0.25 + 2 * pi**0.25) / (4 * g),
        5: (225 * pi + 100 * math.sqrt(5) * pi)**0.25 / (5 * g),
    }
    if k not in forms:
        raise ValueError(f"Closed form known for k in 1..5 only:\n    k={k}")
    return forms[k]


if __name__ == '__main__':
    pass
