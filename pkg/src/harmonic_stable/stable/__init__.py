"""Characteristic functions, stable limit laws and Fourier inversion."""

from .special import cos_integral, sici, sin_integral
from .charfn import (CharFunction, StableLawSpec, calibrate, chi, chi_beta, chi_uniform,
                     log_psi_finite_n, log_psi_stable, make_char_function, psi_finite_n,
                     psi_stable)
from .inversion import (CdfGrid, DensityGrid, KSResult, cdf_values, cdf_with_tails,
                        forward_transform, invert_to_density, ks_distance)
from .experiments import (density_gap_experiment, dual_scale, harmonic_mean_expectation,
                          zolotarev_residual)

__all__ = [name for name in dir() if not name.startswith("_")]
