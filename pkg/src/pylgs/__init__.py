# coding: utf-8
"""Pylgs - lattice Gaussian sampling by Markov chain Monte Carlo."""


from .utils import derive_rng, run
from .producer import Producer
from .handler import ConfigError, Handler
from .default import CNFG
from .lattice import Basis, GaussianSpec, LatticePoint, LatticeError, \
    SingularBasisError, CapacityError, ConvergenceError, lll_reduce, \
    is_lll_reduced, enumerate_ball, cvp_bruteforce, babai_round, \
    random_integer_basis, read_basis, write_basis
from .gaussian import ZGaussian, rho, log_rho, theta3, rho_sum_z, pmf_z, \
    sample_z
from .klein import KleinSampler, klein_sample, proposal_logprob, \
    klein_sigma_default
from .samplers import ChainState, MhkSampler, MtmkSampler, GibbsSampler, \
    mhk_step, mtmk_step, gibbs_step, delta_bound, delta_mtm, run_chain, \
    make_sampler
from .diagnostics import TruncatedStateSpace, exact_target, \
    build_mhk_matrix, spectral_radius_check, tv_distance, \
    mixing_time_bound, diagnose
from .decoder import DecodeConfig, DecodeResult, UndefinedRadiusError, \
    decode_cvp, sigma_default, cvp_complexity_estimate, bdd_radius, \
    bdd_success_curve
from .mimo import QamConstellation, ComplexChannel, MimoConfig, SimResult, \
    qam_modulate, qam_demodulate, embed_real, detect, run_ber_sweep, \
    llr_compute
from .__version__ import __version__

__all__ = [
    'derive_rng', 'run', 'Producer', 'ConfigError', 'Handler', 'CNFG',
    'Basis', 'GaussianSpec', 'LatticePoint', 'LatticeError',
    'SingularBasisError', 'CapacityError', 'ConvergenceError', 'lll_reduce',
    'is_lll_reduced', 'enumerate_ball', 'cvp_bruteforce', 'babai_round',
    'random_integer_basis', 'read_basis', 'write_basis',
    'ZGaussian', 'rho', 'log_rho', 'theta3', 'rho_sum_z', 'pmf_z', 'sample_z',
    'KleinSampler', 'klein_sample', 'proposal_logprob', 'klein_sigma_default',
    'ChainState', 'MhkSampler', 'MtmkSampler', 'GibbsSampler', 'mhk_step',
    'mtmk_step', 'gibbs_step', 'delta_bound', 'delta_mtm', 'run_chain',
    'make_sampler',
    'TruncatedStateSpace', 'exact_target', 'build_mhk_matrix',
    'spectral_radius_check', 'tv_distance', 'mixing_time_bound', 'diagnose',
    'DecodeConfig', 'DecodeResult', 'UndefinedRadiusError', 'decode_cvp',
    'sigma_default', 'cvp_complexity_estimate', 'bdd_radius',
    'bdd_success_curve',
    'QamConstellation', 'ComplexChannel', 'MimoConfig', 'SimResult',
    'qam_modulate', 'qam_demodulate', 'embed_real', 'detect',
    'run_ber_sweep', 'llr_compute', '__version__',
]
