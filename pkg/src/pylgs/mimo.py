"""
The :mod:`pylgs.mimo` simulates uncoded MIMO detection with lattice samplers.

System model ``y = H s + w`` with ``n`` transmit and receive antennas,
Gray-mapped square M-QAM symbols of unit average energy and i.i.d.
``CN(0, 1)`` channel entries. The complex system is embedded into ``2n`` real
dimensions and the constellation is shifted and scaled onto consecutive
integers, so that detection is a CVP on ``B = 2 a H_r``.

Noise has variance ``sigma_w^2`` in every real dimension with
``Eb/N0 = n / (log2(M) sigma_w^2)``.

"""


import collections
import dataclasses
import functools
import itertools
import logging
import math

import numpy as np
import scipy.special

from .decoder import DecodeConfig, decode_cvp, resolve_sigma
from .lattice import Basis, GaussianSpec, LatticeError, babai_round, \
    lll_reduce
from .samplers import make_sampler, run_chain
from .utils import derive_rng

__all__ = ['QamConstellation', 'ComplexChannel', 'AffineMap', 'MimoConfig',
           'SimResult', 'qam_modulate', 'qam_demodulate', 'embed_real',
           'detect', 'run_ber_sweep', 'llr_compute', 'sample_candidates',
           'noise_variance', 'generate_frame', 'isometry_residual',
           'DETECTORS']

logger = logging.getLogger(__name__)

DETECTORS = ('ZF', 'ML', 'Gibbs', 'MHK', 'MTMK')
SAMPLING_DETECTORS = ('Gibbs', 'MHK', 'MTMK')
ML_CAP = 2**16
LLR_CLAMP = 50.0
ISOMETRY_CHECK_EVERY = 100
"""int: Frames between embedding spot-checks of a BER sweep."""


def _gray(i):
    return i ^ (i >> 1)


class QamConstellation(object):
    """Square M-QAM with per-axis Gray labels and unit average energy.

    A symbol carries ``log2(M)`` bits: the first half labels the in-phase
    level, the second half the quadrature level. Level ``i`` of ``L = sqrt(M)``
    has amplitude ``a (2 i - (L - 1))``.

    Parameters
    ----------
    order : int
        Constellation size ``M``, a power of 4.

    """

    def __init__(self, order):
        m = int(round(math.log(order, 4))) if order > 1 else 0
        if order < 4 or 4**m != order:
            raise ValueError(f"QAM order should be a power of 4:\n"
                             f"    order={order}")
        self.order = order
        self.levels = 2**m
        self.axis_bits = m
        self.bits_per_symbol = 2 * m
        self.scale = math.sqrt(3.0 / (2.0 * (order - 1)))
        # Gray label -> level index.
        self._inverse = np.empty(self.levels, dtype=np.int64)
        for i in range(self.levels):
            self._inverse[_gray(i)] = i

    def amplitude(self, idx):
        return self.scale * (2 * np.asarray(idx) - (self.levels - 1))

    def quantize(self, values):
        """Nearest level index of real amplitudes, clipped to the axis."""
        idx = np.rint((np.asarray(values) / self.scale
                       + (self.levels - 1)) / 2.0)
        return np.clip(idx, 0, self.levels - 1).astype(np.int64)

    def _axis_bits(self, idx):
        labels = _gray(np.asarray(idx, dtype=np.int64))
        shifts = np.arange(self.axis_bits - 1, -1, -1)
        return (labels[..., None] >> shifts) & 1

    def _axis_index(self, bits):
        weights = 2**np.arange(self.axis_bits - 1, -1, -1)
        return self._inverse[np.asarray(bits) @ weights]

    def indices_to_bits(self, idx):
        """Bits of a real index vector ``[I_1..I_n, Q_1..Q_n]``."""
        idx = np.asarray(idx, dtype=np.int64)
        n = idx.shape[-1] // 2
        bits = np.concatenate([self._axis_bits(idx[..., :n]),
                               self._axis_bits(idx[..., n:])], axis=-1)
        return bits.reshape(idx.shape[:-1] + (-1,))

    def bits_to_indices(self, bits):
        bits = np.asarray(bits, dtype=np.int64).reshape(-1,
                                                        self.bits_per_symbol)
        m = self.axis_bits
        return np.concatenate([self._axis_index(bits[:, :m]),
                               self._axis_index(bits[:, m:])])

    def points(self):
        """All symbols ordered by their integer label."""
        bits = (np.arange(self.order)[:, None]
                >> np.arange(self.bits_per_symbol - 1, -1, -1)) & 1
        return qam_modulate(bits.ravel(), self)


def qam_modulate(bits, constellation):
    """Gray-mapped QAM symbols of a bit sequence.

    Parameters
    ----------
    bits : array-like of {0, 1}
        Length divisible by ``log2(M)``.
    constellation : :class:`pylgs.QamConstellation`

    Returns
    -------
    symbols : :class:`numpy.ndarray` of complex

    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if len(bits) % constellation.bits_per_symbol:
        raise ValueError(f"Bit length should be divisible by"
                         f" {constellation.bits_per_symbol}:\n"
                         f"    length={len(bits)}")
    idx = constellation.bits_to_indices(bits)
    n = len(idx) // 2
    return (constellation.amplitude(idx[:n])
            + 1j * constellation.amplitude(idx[n:]))


def qam_demodulate(symbols, constellation):
    """Bits of the nearest constellation points."""
    symbols = np.atleast_1d(np.asarray(symbols, dtype=complex))
    idx = np.concatenate([constellation.quantize(symbols.real),
                          constellation.quantize(symbols.imag)])
    return constellation.indices_to_bits(idx)


@dataclasses.dataclass(frozen=True, eq=False)
class ComplexChannel(object):
    """Flat-fading channel matrix ``H``."""
    H: np.ndarray

    @classmethod
    def random(cls, n, rng):
        """I.i.d. circularly-symmetric unit-variance entries."""
        H = (rng.standard_normal((n, n))
             + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
        return cls(H)

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def real_matrix(self):
        """``[[Re H, -Im H], [Im H, Re H]]``."""
        re, im = self.H.real, self.H.imag
        return np.block([[re, -im], [im, re]])


def _to_real(v):
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


@dataclasses.dataclass(frozen=True)
class AffineMap(object):
    """Real amplitudes ``a (2 x - (L - 1))`` of integer coordinates ``x``."""
    scale: float
    levels: int

    def to_integer(self, values):
        return np.rint((np.asarray(values) / self.scale
                        + (self.levels - 1)) / 2.0).astype(np.int64)

    def from_integer(self, x):
        return self.scale * (2 * np.asarray(x) - (self.levels - 1))


def embed_real(H, c_complex, constellation):
    """Real lattice form of ``c = H s + w`` over integer coordinates.

    Parameters
    ----------
    H : :class:`pylgs.ComplexChannel` or array-like
        Channel.
    c_complex : array-like
        Received vector.
    constellation : :class:`pylgs.QamConstellation`

    Returns
    -------
    basis : :class:`pylgs.Basis`
        ``2 a H_r``.
    c : :class:`numpy.ndarray`
        ``Re/Im`` stacked received vector plus ``a (L - 1) H_r 1``.
    mapping : :class:`pylgs.mimo.AffineMap`

    Raises
    ------
    SingularBasisError
        If ``H`` is singular.

    """
    channel = H if isinstance(H, ComplexChannel) else \
        ComplexChannel(np.atleast_2d(np.asarray(H, dtype=complex)))
    Hr = channel.real_matrix
    a = constellation.scale
    L = constellation.levels
    basis = Basis.from_matrix(2.0 * a * Hr)
    c = _to_real(c_complex) + a * (L - 1) * Hr.sum(axis=1)
    return basis, c, AffineMap(a, L)


@dataclasses.dataclass(frozen=True)
class MimoConfig(object):
    """BER sweep parameters.

    Attributes
    ----------
    seed : int
        Master seed, mandatory.
    n_antennas : int, optional (default=4)
        Complex dimension ``n``.
    qam_order : int, optional (default=16)
    ebn0_db : tuple of float, optional (default=(15.0,))
    frames : int, optional (default=100)
    moves : tuple of int, optional (default=(20,))
        Markov moves, several values give a moves sweep.
    trials_k : int, optional (default=10)
        MTMK trials.
    use_lll : tuple of bool, optional (default=(True,))
    detectors : tuple of str, optional (default=None)
        None selects every detector, without 'ML' when its search space
        ``L^{2n}`` exceeds ``ML_CAP``.
    gibbs_sigma : str or float, optional (default='default')
    eps : float, optional (default=0.01)
    kappa : float, optional (default=0.75)

    """
    seed: int
    n_antennas: int = 4
    qam_order: int = 16
    ebn0_db: tuple = (15.0,)
    frames: int = 100
    moves: tuple = (20,)
    trials_k: int = 10
    use_lll: tuple = (True,)
    detectors: tuple = None
    gibbs_sigma: object = 'default'
    eps: float = 0.01
    kappa: float = 0.75

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("MimoConfig.seed is mandatory.")
        QamConstellation(self.qam_order)
        if self.n_antennas < 1:
            raise ValueError(f"MimoConfig.n_antennas should be >= 1:\n"
                             f"    n_antennas={self.n_antennas}")
        if self.frames < 1:
            raise ValueError(f"MimoConfig.frames should be >= 1:\n"
                             f"    frames={self.frames}")
        if not self.moves or min(self.moves) < 1:
            raise ValueError(f"MimoConfig.moves should be >= 1:\n"
                             f"    moves={self.moves}")
        if self.trials_k < 1:
            raise ValueError(f"MimoConfig.trials_k should be >= 1:\n"
                             f"    trials_k={self.trials_k}")
        if self.detectors is None:
            detectors = tuple(d for d in DETECTORS
                              if d != 'ML' or self.ml_feasible)
            object.__setattr__(self, 'detectors', detectors)
        unknown = set(self.detectors) - set(DETECTORS)
        if unknown or not self.detectors:
            raise ValueError(f"MimoConfig.detectors should be from"
                             f" {DETECTORS}:\n    {self.detectors}")
        if 'ML' in self.detectors and not self.ml_feasible:
            raise ValueError(f"ML search space exceeds {ML_CAP} points,"
                             f" drop 'ML' from detectors:\n"
                             f"    {self.qam_order}-QAM,"
                             f" n_antennas={self.n_antennas}")

    @property
    def ml_feasible(self):
        levels = QamConstellation(self.qam_order).levels
        return levels**(2 * self.n_antennas) <= ML_CAP

    @property
    def constellation(self):
        return QamConstellation(self.qam_order)

    @property
    def bits_per_frame(self):
        return self.n_antennas * self.constellation.bits_per_symbol


def noise_variance(n_antennas, qam_order, ebn0_db):
    """Per-real-dimension ``sigma_w^2`` from ``Eb/N0 = n/(log2(M) sigma_w^2)``."""
    return n_antennas / (math.log2(qam_order) * 10.0**(ebn0_db / 10.0))


Frame = collections.namedtuple('Frame', ['channel', 'bits', 'symbols',
                                         'unit_noise'])


def generate_frame(cfg, frame):
    """Channel, bits, symbols and unit noise of frame ``frame``.

    Every frame has its own stream ``(seed, frame)``; noise is drawn with unit
    variance per real dimension and scaled per SNR.

    """
    rng = derive_rng(cfg.seed, frame)
    constellation = cfg.constellation
    n = cfg.n_antennas
    channel = ComplexChannel.random(n, rng)
    bits = rng.integers(0, 2, size=n * constellation.bits_per_symbol)
    symbols = qam_modulate(bits, constellation)
    unit_noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return Frame(channel, bits, symbols, unit_noise)


@functools.lru_cache(maxsize=8)
def _candidate_grid(levels, dim):
    return np.array(list(itertools.product(range(levels), repeat=dim)),
                    dtype=np.int64)


Detection = collections.namedtuple('Detection', ['indices', 'acceptance'])


def detect(channel, received, detector, cfg, rng, moves=None, use_lll=None):
    """Integer constellation coordinates of the transmitted vector.

    Parameters
    ----------
    channel : :class:`pylgs.ComplexChannel`
    received : array-like of complex
        ``H s + w``.
    detector : {'ZF', 'ML', 'Gibbs', 'MHK', 'MTMK'}
        'ZF' - pseudoinverse then rounding, 'ML' - exhaustive search,
        sampling detectors - :func:`pylgs.decode_cvp` on the embedded
        lattice, answer clipped onto the constellation.
    cfg : :class:`pylgs.MimoConfig`
    rng : :class:`numpy.random.Generator`
        Sampler stream.
    moves : int, optional (default=None)
        Overrides ``cfg.moves[0]``.
    use_lll : bool, optional (default=None)
        Overrides ``cfg.use_lll[0]``.

    Returns
    -------
    detection : :class:`pylgs.mimo.Detection`
        ``indices`` in ``[0, L-1]^{2n}`` and the acceptance rate (nan for
        ZF and ML).

    """
    constellation = cfg.constellation
    L = constellation.levels
    if detector == 'ZF':
        s = np.linalg.pinv(channel.H) @ received
        return Detection(constellation.quantize(_to_real(s)), math.nan)
    basis, c, _ = embed_real(channel, received, constellation)
    if detector == 'ML':
        if L**basis.n > ML_CAP:
            raise ValueError(f"ML search space exceeds {ML_CAP} points:\n"
                             f"    {L}^{basis.n}")
        grid = _candidate_grid(L, basis.n)
        dist = np.linalg.norm(grid @ basis.B.T - c, axis=1)
        return Detection(grid[int(np.argmin(dist))], math.nan)
    if detector not in SAMPLING_DETECTORS:
        raise ValueError(f"Unknown detector:\n    {detector}")
    dcfg = DecodeConfig(
        moves=cfg.moves[0] if moves is None else moves,
        sigma_policy=cfg.gibbs_sigma if detector == 'Gibbs' else 'default',
        trials_k=cfg.trials_k if detector == 'MTMK' else 1,
        use_lll=cfg.use_lll[0] if use_lll is None else use_lll,
        eps=cfg.eps, kappa=cfg.kappa,
        method='gibbs' if detector == 'Gibbs' else 'auto')
    result = decode_cvp(basis, c, dcfg, rng)
    return Detection(np.clip(result.x_cvp, 0, L - 1), result.acceptance_rate)


def sample_candidates(channel, received, cfg, rng, moves=None, use_lll=None):
    """Constellation coordinates of every state visited by an MHK/MTMK chain.

    The list feeds :func:`llr_compute`; states are clipped onto the
    constellation and returned in visiting order, the Babai start first.

    """
    constellation = cfg.constellation
    L = constellation.levels
    basis, c, _ = embed_real(channel, received, constellation)
    if (cfg.use_lll[0] if use_lll is None else use_lll):
        work, U = lll_reduce(basis, cfg.kappa)
    else:
        work, U = basis, np.eye(basis.n, dtype=np.int64)
    spec = GaussianSpec(resolve_sigma('default', work), c)
    sampler = make_sampler(work, spec, cfg.trials_k)
    start = sampler.initial(babai_round(work, c).x)
    visited = [start.x]
    run_chain(sampler, start, cfg.moves[0] if moves is None else moves, rng,
              observer=lambda state, accepted: visited.append(state.x))
    return [np.clip(U @ x, 0, L - 1) for x in visited]


def llr_compute(samples, channel, received, sigma, constellation,
                clamp=LLR_CLAMP):
    """Per-bit log-likelihood ratios from a list of candidate vectors.

    ``LLR_i = ln sum_{b_i=1} exp(-||c - Hx||^2 / (2 sigma^2))
    - ln sum_{b_i=0} exp(...)`` over the distinct samples. A bit with only
    one class among the samples gets ``+-clamp``; all values are clipped to
    ``[-clamp, clamp]``.

    Parameters
    ----------
    samples : list of array-like of int
        Integer constellation coordinates ``[I_1..I_n, Q_1..Q_n]``.
    channel : :class:`pylgs.ComplexChannel`
    received : array-like of complex
    sigma : float
        Metric deviation.
    constellation : :class:`pylgs.QamConstellation`
    clamp : float, optional (default=50.0)

    Returns
    -------
    llr : :class:`numpy.ndarray`
        One value per transmitted bit.

    """
    if not len(samples):
        raise ValueError("LLR needs at least one sample.")
    unique = np.unique(np.asarray(samples, dtype=np.int64), axis=0)
    basis, c, _ = embed_real(channel, received, constellation)
    diff = unique @ basis.B.T - c
    metric = -np.einsum('ij,ij->i', diff, diff) / (2.0 * sigma**2)
    bits = constellation.indices_to_bits(unique)
    llr = np.empty(bits.shape[1])
    for i in range(bits.shape[1]):
        ones = metric[bits[:, i] == 1]
        zeros = metric[bits[:, i] == 0]
        if not len(zeros):
            llr[i] = clamp
        elif not len(ones):
            llr[i] = -clamp
        else:
            llr[i] = (scipy.special.logsumexp(ones)
                      - scipy.special.logsumexp(zeros))
    return np.clip(llr, -clamp, clamp)


def isometry_residual(channel, received, bits, constellation):
    """``| ||Hs - y|| - ||Bx - c|| |`` for the symbols carrying ``bits``."""
    symbols = qam_modulate(bits, constellation)
    idx = constellation.bits_to_indices(bits)
    basis, c, _ = embed_real(channel, received, constellation)
    complex_norm = np.linalg.norm(channel.H @ symbols - received)
    return abs(complex_norm - basis.distance(idx, c))


SimRow = collections.namedtuple(
    'SimRow', ['ebn0_db', 'detector', 'use_lll', 'moves', 'k', 'frames',
               'bit_errors', 'bits_total', 'ber', 'mean_acceptance'])


def _cell_key(row):
    return row.ebn0_db, row.detector, row.use_lll, row.moves


@dataclasses.dataclass
class SimResult(object):
    """Rows of a BER sweep, one per cell.

    ``frame_errors`` maps ``(ebn0_db, detector, use_lll, moves)`` to the bit
    errors of every frame.

    """
    rows: list = dataclasses.field(default_factory=list)
    frame_errors: dict = dataclasses.field(default_factory=dict)
    bits_per_frame: int = 0

    header = SimRow._fields

    def lookup(self, detector, ebn0_db=None, use_lll=None, moves=None):
        """Rows matching the given cell coordinates."""
        return [r for r in self.rows if r.detector == detector
                and (ebn0_db is None or r.ebn0_db == ebn0_db)
                and (use_lll is None or r.use_lll == use_lll)
                and (moves is None or r.moves == moves)]

    def paired_gap(self, row_a, row_b):
        """BER difference of two cells and its standard error.

        All cells see the same frames, so the error is taken over per-frame
        differences.

        Parameters
        ----------
        row_a, row_b : :class:`pylgs.mimo.SimRow`
            Rows of this result.

        Returns
        -------
        gap : float
            ``BER(row_a) - BER(row_b)``.
        se : float
            Standard error of ``gap``.

        """
        diff = (self.frame_errors[_cell_key(row_a)]
                - self.frame_errors[_cell_key(row_b)]) / self.bits_per_frame
        se = diff.std(ddof=1) / math.sqrt(len(diff)) if len(diff) > 1 \
            else math.nan
        return float(diff.mean()), float(se)


def _cells(cfg):
    for detector in cfg.detectors:
        if detector in SAMPLING_DETECTORS:
            k = cfg.trials_k if detector == 'MTMK' else 1
            for lll in cfg.use_lll:
                for moves in cfg.moves:
                    yield detector, lll, moves, k
        else:
            yield detector, False, 0, 0


def run_ber_sweep(cfg):
    """Full factorial BER simulation over (SNR, detector, LLL, moves).

    Every cell sees the same frames (common random numbers): frame ``f``
    draws channel, bits and noise from stream ``(seed, f)`` and all sampling
    detectors use stream ``(seed, f, 1)``. Every ``ISOMETRY_CHECK_EVERY``-th
    frame checks that the real embedding preserves ``||Hs - y||``.

    Parameters
    ----------
    cfg : :class:`pylgs.MimoConfig`

    Returns
    -------
    result : :class:`pylgs.SimResult`

    Raises
    ------
    LatticeError
        If a spot-checked frame breaks the embedding isometry.

    """
    constellation = cfg.constellation
    cells = list(_cells(cfg))
    frames = [generate_frame(cfg, f) for f in range(cfg.frames)]
    result = SimResult(bits_per_frame=cfg.bits_per_frame)
    total = cfg.frames * cfg.bits_per_frame
    for ebn0 in cfg.ebn0_db:
        sigma_w = math.sqrt(noise_variance(cfg.n_antennas, cfg.qam_order,
                                           ebn0))
        errors = np.zeros((len(cells), cfg.frames), dtype=np.int64)
        acceptance = np.zeros(len(cells))
        for f, frame in enumerate(frames):
            received = (frame.channel.H @ frame.symbols
                        + sigma_w * frame.unit_noise)
            if f % ISOMETRY_CHECK_EVERY == 0:
                residual = isometry_residual(frame.channel, received,
                                             frame.bits, constellation)
                if residual > 1e-9 * (1.0 + np.linalg.norm(received)):
                    raise LatticeError(f"Real embedding breaks the isometry:\n"
                                       f"    frame={f}, Eb/N0={ebn0},"
                                       f" residual={residual:.3g}")
            for j, (detector, lll, moves, _) in enumerate(cells):
                det = detect(frame.channel, received, detector, cfg,
                             derive_rng(cfg.seed, f, 1), moves=moves,
                             use_lll=lll)
                bits = constellation.indices_to_bits(det.indices)
                errors[j, f] = int(np.sum(bits != frame.bits))
                acceptance[j] += det.acceptance
        for j, (detector, lll, moves, k) in enumerate(cells):
            bit_errors = int(errors[j].sum())
            row = SimRow(ebn0, detector, lll, moves, k, cfg.frames,
                         bit_errors, total, bit_errors / total,
                         acceptance[j] / cfg.frames)
            result.rows.append(row)
            result.frame_errors[_cell_key(row)] = errors[j]
        logger.info(f"Eb/N0={ebn0} dB done: " + ', '.join(
            f"{d}={errors[j].sum() / total:.4g}"
            for j, (d, _, _, _) in enumerate(cells)))
    return result


if __name__ == '__main__':
    pass
