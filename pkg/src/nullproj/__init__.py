"""Sparse recovery by null-space projection with adaptive thresholds.

The core solver alternates between a magnitude-threshold support estimate
and a projection back onto the solution set ``{x : Phi x = y}``; a matrix
version fills in missing entries of low-rank matrices.  Baselines, an
exhaustive oracle for tiny instances and a seeded benchmark harness are
included.
"""
from .baselines import (CosampConfig, IhtConfig, ImatConfig, LassoConfig, OmpConfig, Sl0Config,
                        cosamp, iht, imat, lasso_admm, lasso_tune, omp, sl0)
from .completion import MimatConfig, mimat, soft_impute, svt
from .errors import (ConfigError, GuardExceededError, InvalidParameterError, NotFoundError,
                     NullprojError, NumericalError)
from .inpmat import InpmatConfig, alternating_projection, inpmat, inpmat_known_sparsity, objective
from .kernels import BACKEND
from .numerics import (SvdFactors, null_space_projector, pseudo_inverse, soft_threshold_singular,
                       svd, tikhonov_solve)
from .oracle import RipEstimate, l0_brute_force, rip_constant, thm3_snr_floor
from .results import CompletionResult, IterationTrace, RecoveryResult, Termination
from .signals import (CompletionProblem, MeasurementSet, SensingOperator, SparseSignal,
                      add_noise_at_snr, gen_low_rank, gen_sensing, gen_sparse_signal, measure, rmse,
                      snr_db, subsample_matrix)

__version__ = "0.1.0"
