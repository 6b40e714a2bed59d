"""
The :mod:`pylgs.commands` includes producers of the CLI subcommands.

Every producer takes ``dict`` as initial object. Lattice subcommands share
:meth:`LatticeProducer.build_instance` , which puts the basis and the query
point into the object, then run their own steps and write the output.
Random streams derive from the master seed: stream ``(seed, 0)`` builds the
instance, stream ``(seed, 1)`` drives the chains.

"""


import csv
import math

import numpy as np

from . import diagnostics
from .decoder import DecodeConfig, UndefinedRadiusError, bdd_radius, \
    cvp_complexity_estimate, decode_cvp, resolve_sigma
from .lattice import Basis, GaussianSpec, babai_round, lll_reduce, \
    random_integer_basis, read_basis
from .mimo import MimoConfig, run_ber_sweep
from .producer import Producer, format_value
from .samplers import delta_bound, delta_mtm, make_sampler, run_chain
from .utils import derive_rng

__all__ = ['LatticeProducer', 'SampleProducer', 'DecodeProducer',
           'DiagnoseProducer', 'BerProducer']

# Planted coordinates are uniform in [-PLANT_RANGE, PLANT_RANGE].
PLANT_RANGE = 5


def _join(x):
    return ','.join(str(int(v)) for v in x)


class LatticeProducer(Producer):
    """Build lattice instance.

    Interface: build_instance, dump_record.

    """
    _required_parameters = ['objects', 'oid']

    def build_instance(self, obj, seed, basis='random', n=4, entry_range=5,
                       center='planted', noise=0.3):
        """Create basis and query point.

        Parameters
        ----------
        obj : dict
            Run state.
        seed : int
            Master seed, instance uses stream ``(seed, 0)``.
        basis : str, optional (default='random')
            'random' for an integer basis with entries in
            ``[-entry_range, entry_range]``, 'identity' for ``Z^n`` or a
            path to a basis file.
        n : int, optional (default=4)
            Dimension of generated bases.
        entry_range : int, optional (default=5)
            Random basis entries bound.
        center : str or tuple of float, optional (default='planted')
            'planted' for ``B x* + noise * u`` with ``x*`` uniform in
            ``[-5, 5]^n`` and ``u`` uniform on the sphere, otherwise the
            query point itself.
        noise : float, optional (default=0.3)
            Norm of the planted noise.

        Returns
        -------
        obj : dict
            Input with 'basis', 'center', 'planted' and 'record' keys.

        """
        rng = derive_rng(seed, 0)
        if basis == 'random':
            lattice = random_integer_basis(n, entry_range, rng)
        elif basis == 'identity':
            lattice = Basis.from_matrix(np.eye(n))
        else:
            lattice = read_basis(basis)
        planted = None
        if center == 'planted':
            planted = rng.integers(-PLANT_RANGE, PLANT_RANGE + 1,
                                   size=lattice.n)
            direction = rng.standard_normal(lattice.n)
            direction /= np.linalg.norm(direction)
            c = lattice.embed(planted) + noise * direction
        else:
            c = np.asarray(center, dtype=float)
            if c.shape != (lattice.n,):
                raise ValueError(f"Field 'center' should contain {lattice.n}"
                                 f" values:\n    center={center}")
        self.logger.info(f"    Lattice: n={lattice.n},"
                         f" min gs-norm={lattice.gs_norms.min():.4g}")
        obj['basis'] = lattice
        obj['center'] = c
        obj['planted'] = planted
        obj['record'] = [('seed', seed), ('n', lattice.n)]
        return obj

    def _work_basis(self, obj, lll, kappa):
        """Basis to sample on and its unimodular map to the input basis."""
        basis = obj['basis']
        if lll:
            return lll_reduce(basis, kappa)
        return basis, np.eye(basis.n, dtype=np.int64)


class SampleProducer(LatticeProducer):
    """Draw ``D_{Lambda, sigma, c}`` samples by a Markov chain.

    Interface: build_instance, sample, dump_samples.

    """

    def sample(self, obj, seed, sigma='default', k=1, eps=0.01, pickups=100,
               lll=False, kappa=0.75, method='auto'):
        """Run one chain, keep a state every mixing time.

        The pickup gap is the mixing time at the rate ``delta_mtm(delta, k)``
        with ``delta`` from :func:`pylgs.delta_bound` ; the first pickup
        also serves as burn-in from the Babai point.

        Returns
        -------
        obj : dict
            Input with 'samples' (coordinates in the input basis),
            'distances', 'sigma', 'delta' and 'gap' keys.

        """
        work, U = self._work_basis(obj, lll, kappa)
        c = obj['center']
        spec = GaussianSpec(resolve_sigma(sigma, work), c)
        sampler = make_sampler(work, spec, k, method)
        delta = delta_bound(work, spec)
        gap = diagnostics.pickup_gap(delta_mtm(delta, k), eps)
        self.logger.info(f"    delta={delta:.6g}, gap={gap} moves")
        rng = derive_rng(seed, 1)
        state = sampler.initial(babai_round(work, c).x)
        samples = []
        for _ in range(pickups):
            state = run_chain(sampler, state, gap, rng)
            samples.append(U @ state.x)
        basis = obj['basis']
        obj['samples'] = samples
        obj['distances'] = [basis.distance(x, c) for x in samples]
        obj['sigma'] = spec.sigma
        obj['delta'] = delta
        obj['gap'] = gap
        return obj

    def dump_samples(self, obj, out):
        """Write ``# key=value`` header, then ``x_1 .. x_n distance`` lines."""
        with open(out, 'w') as f:
            for key in ('sigma', 'delta', 'gap'):
                f.write(f"# {key}={format_value(obj[key])}\n")
            for x, dist in zip(obj['samples'], obj['distances']):
                coords = ' '.join(str(int(v)) for v in x)
                f.write(f"{coords} {format_value(dist)}\n")
        self.logger.info(f"    Samples saved:\n        {out}")
        obj['out'] = out
        return obj


class DecodeProducer(LatticeProducer):
    """Solve CVP/BDD for the instance.

    Interface: build_instance, decode, dump_record.

    """

    def decode(self, obj, seed, moves, sigma='default', k=1, eps=0.01,
               lll=True, kappa=0.75, method='auto', shards=1):
        """Run :func:`pylgs.decode_cvp` and assemble the record.

        The record holds the decoder result, the complexity estimate at
        the found distance, the correct decoding radius (nan with a warning
        when undefined) and, for planted instances, whether ``x*`` was
        recovered.

        """
        cfg = DecodeConfig(moves, sigma, k, lll, eps, seed, kappa, method,
                           shards)
        basis, c = obj['basis'], obj['center']
        result = decode_cvp(basis, c, cfg, derive_rng(seed, 1))
        work = self._work_basis(obj, lll, kappa)[0]
        spec = GaussianSpec(result.sigma, c)
        cost = cvp_complexity_estimate(work, spec, result.distance, eps, k)
        try:
            radius = bdd_radius(result.sigma, moves, eps, k)
        except UndefinedRadiusError as e:
            self.logger.warning(f"Warning: {e}")
            radius = math.nan
        record = obj['record'] + result.as_record() + [
            ('complexity', cost.value),
            ('complexity_log', cost.log_value),
            ('theta_prefactor', cost.prefactor),
            ('bdd_radius', radius),
        ]
        if obj['planted'] is not None:
            record.append(('planted', _join(obj['planted'])))
            record.append(('planted_found',
                           bool(np.array_equal(result.x_cvp, obj['planted']))))
        self.logger.info(f"    distance={result.distance:.6g},"
                         f" acceptance={result.acceptance_rate:.4g}")
        obj['result'] = result
        obj['record'] = record
        return obj


class DiagnoseProducer(LatticeProducer):
    """Convergence report of the instance target.

    Interface: build_instance, diagnose, dump_record.

    """

    def diagnose(self, obj, seed, sigma='default', lll=False, kappa=0.75,
                 mass=1 - 1e-9, k_grid=(1, 2, 5, 10), eps=0.01, tv_moves=15,
                 replicas=0):
        work = self._work_basis(obj, lll, kappa)[0]
        spec = GaussianSpec(resolve_sigma(sigma, work), obj['center'])
        report = diagnostics.diagnose(work, spec, derive_rng(seed, 1), mass,
                                      k_grid, eps, tv_moves, replicas)
        obj['report'] = report
        obj['record'] = obj['record'] + [('sigma', spec.sigma)] \
            + report.as_record()
        return obj


class BerProducer(Producer):
    """MIMO BER sweep.

    Interface: configure, simulate, dump_csv.

    """

    def configure(self, obj, seed, n_antennas=4, qam=16, ebn0_db=(15.0,),
                  frames=100, moves=(20,), k=10, lll=(True,),
                  detectors=None, gibbs_sigma='default', eps=0.01,
                  kappa=0.75):
        if detectors is not None:
            detectors = tuple(detectors)
        obj['cfg'] = MimoConfig(seed, n_antennas, qam, tuple(ebn0_db), frames,
                                tuple(moves), k, tuple(lll),
                                detectors, gibbs_sigma, eps, kappa)
        return obj

    def simulate(self, obj):
        cfg = obj['cfg']
        self.logger.info(f"    {cfg.n_antennas}x{cfg.n_antennas}"
                         f" {cfg.qam_order}-QAM, {cfg.frames} frames,"
                         f" detectors {','.join(cfg.detectors)}")
        obj['result'] = run_ber_sweep(cfg)
        return obj

    def dump_csv(self, obj, out, digits=6):
        """Write sweep rows, floats with ``digits`` significant digits."""
        result = obj['result']
        with open(out, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(result.header)
            for row in result.rows:
                writer.writerow([format_value(v, digits) for v in row])
        self.logger.info(f"    BER table saved:\n        {out}")
        obj['out'] = out
        return obj


if __name__ == '__main__':
    pass
