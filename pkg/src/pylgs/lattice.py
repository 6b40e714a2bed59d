"""
The :mod:`pylgs.lattice` includes lattice bases and the exact oracles over them.

A lattice is the set {Bx: x integer} for a full rank square matrix ``B`` whose
columns are the basis vectors. :class:`Basis` caches the QR factors, the
Gram-Schmidt norms are the diagonal of ``R``. Enumeration works on the
triangular system ``||Bx - c|| = ||Rx - Q^T c||``.

"""


import dataclasses
import logging

import numpy as np

__all__ = ['Basis', 'GaussianSpec', 'LatticePoint', 'LatticeError',
           'SingularBasisError', 'CapacityError', 'ConvergenceError',
           'qr_decompose', 'lll_reduce', 'is_lll_reduced', 'enumerate_ball',
           'cvp_bruteforce', 'babai_round', 'random_integer_basis',
           'read_basis', 'write_basis']

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 10**7
"""int: Default limit of visited enumeration nodes."""


class LatticeError(ArithmeticError):
    """Base for numerical failures on lattices."""


class SingularBasisError(LatticeError):
    """Basis columns are (numerically) linearly dependent."""


class CapacityError(LatticeError):
    """Enumeration exceeded the node cap."""


class ConvergenceError(LatticeError):
    """Iterative numerical routine did not converge."""


def qr_decompose(B):
    """QR factorization with a positive diagonal.

    Parameters
    ----------
    B : array-like of shape (n, n)
        Basis matrix, columns are basis vectors.

    Returns
    -------
    Q : :class:`numpy.ndarray`
        Orthonormal factor.
    R : :class:`numpy.ndarray`
        Upper-triangular factor with ``R[i, i] > 0``.

    Raises
    ------
    SingularBasisError
        If some ``|R[i, i]|`` is below ``1e-12 * ||B||``.

    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"Basis should be a square matrix:\n"
                         f"    shape={B.shape}")
    Q, R = np.linalg.qr(B)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = signs[:, None] * R
    scale = np.linalg.norm(B)
    if np.any(np.diag(R) <= 1e-12 * scale):
        raise SingularBasisError(f"Rank-deficient basis:\n"
                                 f"    diag(R)={np.diag(R)}")
    return Q, R


@dataclasses.dataclass(frozen=True, eq=False)
class Basis(object):
    """Lattice basis with cached QR machinery.

    Use :meth:`Basis.from_matrix` to construct. Arrays are read-only, so a
    basis can be shared between chains.

    Attributes
    ----------
    B : :class:`numpy.ndarray`
        Basis matrix, columns are basis vectors ``b_i``.
    Q : :class:`numpy.ndarray`
        Orthonormal factor.
    R : :class:`numpy.ndarray`
        Upper-triangular factor, positive diagonal.
    gs_norms : :class:`numpy.ndarray`
        Gram-Schmidt norms ``||b^_i|| = R[i, i]``.

    """
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    gs_norms: np.ndarray

    @classmethod
    def from_matrix(cls, B):
        B = np.array(B, dtype=float)
        if B.ndim == 0:
            B = B.reshape(1, 1)
        Q, R = qr_decompose(B)
        gs_norms = np.diag(R).copy()
        for arr in (B, Q, R, gs_norms):
            arr.setflags(write=False)
        return cls(B, Q, R, gs_norms)

    @property
    def n(self):
        return self.B.shape[0]

    def embed(self, x):
        """Lattice vector ``Bx``."""
        return self.B @ np.asarray(x)

    def distance(self, x, c):
        return float(np.linalg.norm(self.B @ np.asarray(x) - c))


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianSpec(object):
    """Parameters of a lattice Gaussian ``D_{Lambda, sigma, c}``."""
    sigma: float
    center: np.ndarray

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Gaussian sigma should be positive:\n"
                             f"    sigma={self.sigma}")
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, 'center', center)


@dataclasses.dataclass(frozen=True, eq=False)
class LatticePoint(object):
    """Integer coordinates ``x`` with the embedded vector ``Bx``."""
    x: np.ndarray
    embedded: np.ndarray

    @classmethod
    def of(cls, basis, x):
        x = np.asarray(x, dtype=np.int64)
        return cls(x, basis.embed(x))

    def key(self):
        return tuple(int(i) for i in self.x)


def _gs_mu(R):
    """Gram-Schmidt coefficients ``mu[i, j] = r_{j,i} / r_{j,j}``."""
    return (R / np.diag(R)[:, None]).T


def is_lll_reduced(basis, kappa=0.75, tol=1e-9):
    """Check size-reduction and Lovasz conditions.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Basis to check.
    kappa : float, optional (default=0.75)
        Lovasz parameter in [1/4, 1].
    tol : float, optional (default=1e-9)
        Absolute slack on both conditions.

    Returns
    -------
    result : bool

    """
    R = basis.R
    n = basis.n
    mu = _gs_mu(R)
    for i in range(n):
        for j in range(i):
            if abs(mu[i, j]) > 0.5 + tol:
                return False
    for i in range(n - 1):
        lhs = kappa * R[i, i]**2
        rhs = R[i, i + 1]**2 + R[i + 1, i + 1]**2
        if lhs > rhs + tol * max(1.0, lhs):
            return False
    return True


def lll_reduce(basis, kappa=0.75):
    """LLL reduction.

    Size-reduces column ``k`` against all previous columns, then swaps with
    ``k-1`` when ``kappa * r_{k-1,k-1}^2 > r_{k-1,k}^2 + r_{k,k}^2``.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Input basis.
    kappa : float, optional (default=0.75)
        Lovasz parameter in [1/4, 1].

    Returns
    -------
    reduced : :class:`pylgs.Basis`
        Reduced basis ``B' = B U``.
    U : :class:`numpy.ndarray`
        Unimodular integer matrix.

    """
    if not 0.25 <= kappa <= 1.0:
        raise ValueError(f"LLL kappa should be in [1/4, 1]:\n"
                         f"    kappa={kappa}")
    n = basis.n
    B = np.array(basis.B, dtype=float)
    U = np.eye(n, dtype=np.int64)
    R = np.array(basis.R)
    k = 1
    swaps = 0
    while k < n:
        for j in range(k - 1, -1, -1):
            q = np.rint(R[j, k] / R[j, j])
            if q:
                B[:, k] -= q * B[:, j]
                U[:, k] -= int(q) * U[:, j]
                R[:j + 1, k] -= q * R[:j + 1, j]
        if kappa * R[k - 1, k - 1]**2 > R[k - 1, k]**2 + R[k, k]**2:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            _, R = qr_decompose(B)
            swaps += 1
            k = max(k - 1, 1)
        else:
            k += 1
    logger.debug(f"LLL finished after {swaps} swaps.")
    # Exact lattice vectors from the integer transform.
    return Basis.from_matrix(basis.B @ U), U


def babai_round(basis, c):
    """Nearest-plane point by backward rounding on ``R``."""
    c_prime = basis.Q.T @ np.asarray(c, dtype=float)
    R = basis.R
    n = basis.n
    x = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        center = (c_prime[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
        x[i] = int(np.rint(center))
    return LatticePoint.of(basis, x)


def enumerate_ball(basis, c, radius, cap=ENUMERATION_CAP):
    """All lattice points within ``radius`` of ``c``.

    Depth-first search over the triangular system, last coordinate first.

    Parameters
    ----------
    basis : :class:`pylgs.Basis`
        Lattice basis.
    c : array-like
        Query point.
    radius : float
        Non-negative radius (inclusive).
    cap : int, optional (default=10**7)
        Limit on visited nodes.

    Returns
    -------
    points : list of :class:`pylgs.LatticePoint`
        Sorted lexicographically by ``x``.

    Raises
    ------
    CapacityError
        If more than ``cap`` nodes are visited.

    """
    if radius < 0:
        raise ValueError(f"Enumeration radius should be non-negative:\n"
                         f"    radius={radius}")
    c = np.asarray(c, dtype=float)
    R = basis.R
    n = basis.n
    c_prime = basis.Q.T @ c
    # Slack keeps boundary points (e.g. unit vectors at radius 1).
    bound = radius**2 * (1 + 1e-12) + 1e-300
    x = np.zeros(n, dtype=np.int64)
    found = []
    visited = 0

    def descend(i, partial):
        nonlocal visited
        center = (c_prime[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
        span = np.sqrt(max(bound - partial, 0.0)) / R[i, i]
        lo = int(np.ceil(center - span - 1e-12))
        hi = int(np.floor(center + span + 1e-12))
        for xi in range(lo, hi + 1):
            visited += 1
            if visited > cap:
                raise CapacityError(f"Enumeration cap exceeded:\n"
                                    f"    cap={cap}, radius={radius}")
            step = partial + (R[i, i] * (xi - center))**2
            if step > bound:
                continue
            x[i] = xi
            if i == 0:
                found.append(x.copy())
            else:
                descend(i - 1, step)
        x[i] = 0

    descend(n - 1, 0.0)
    points = []
    for xs in found:
        if np.linalg.norm(basis.B @ xs - c)**2 <= bound:
            points.append(LatticePoint.of(basis, xs))
    points.sort(key=LatticePoint.key)
    return points


def cvp_bruteforce(basis, c, cap=ENUMERATION_CAP):
    """Exact closest vector, ties broken by the lexicographically smallest x."""
    c = np.asarray(c, dtype=float)
    babai = babai_round(basis, c)
    radius = basis.distance(babai.x, c)
    points = []
    while not points:
        points = enumerate_ball(basis, c, radius, cap=cap)
        radius = radius * 2 + 1e-12
    dists = np.array([np.linalg.norm(p.embedded - c) for p in points])
    best = dists.min()
    ties = [p for p, d in zip(points, dists)
            if d <= best * (1 + 1e-12) + 1e-15]
    # points are sorted, first tie is lexicographically smallest.
    return ties[0]


def random_integer_basis(n, entry_range, rng):
    """Non-singular integer basis with entries uniform in [-r, r]."""
    while True:
        B = rng.integers(-entry_range, entry_range + 1, size=(n, n))
        if abs(round(np.linalg.det(B))) >= 1:
            try:
                return Basis.from_matrix(B)
            except SingularBasisError:
                continue


def read_basis(filepath):
    """Read basis from plain text: "n", then n rows of n decimals."""
    with open(filepath, 'r') as f:
        lines = [line.split('#')[0].strip() for line in f]
    lines = [line for line in lines if line]
    if not lines:
        raise ValueError(f"Empty basis file:\n    {filepath}")
    n = int(lines[0])
    rows = [[float(v) for v in line.split()] for line in lines[1:]]
    if len(rows) != n or any(len(row) != n for row in rows):
        raise ValueError(f"Basis file should contain {n} rows of {n}"
                         f" values:\n    {filepath}")
    return Basis.from_matrix(rows)


def write_basis(basis, filepath):
    with open(filepath, 'w') as f:
        f.write(f"{basis.n}\n")
        for row in basis.B:
            f.write(' '.join(f"{v:.17g}" for v in row) + '\n')


if __name__ == '__main__':
    pass
