"""Harmonic means of random samples, their stable limits, derivative roots
of random polynomials and the convergence time of the memoryless learner."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, DomainError, MultiplicityError, NumericalError,
                     ParameterError, PoleError, StateError, TruncationError,
                     UnlearnableError)
from .sampling import (DistributionSpec, SortedSample, StreamKey, draw, make_distribution,
                       sample_sorted, substream, uniform)
from .harmonic import (EstimatorSummary, NormalizedStat, compensated_sum, harmonic_mean,
                       limit_constant_scan, mc_estimate, normalize, norming)
from .polyroots import DerivativeRoots, RootSet, clamped_smallest_root, derivative_roots
from .overlap import (CnResult, OverlapMatrix, SpectralDecomposition, apply_transition,
                      compute_cn, from_overlaps, spectrum, structured_charpoly)
from .learner import LearnerTrace, n_delta, scaling_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
