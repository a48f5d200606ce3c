"""Numerical experiments built on the inversion routines."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from ..errors import DomainError, ParameterError
from ..harmonic import norming
from ..sampling import DistributionSpec, make_distribution
from .charfn import CharFunction, StableLawSpec, calibrate
from .inversion import invert_to_density

logger = logging.getLogger(__name__)


def dual_scale(alpha: float, scale: float) -> float:
    """Scale of the ``1/alpha`` law paired with a spectrally positive
    ``alpha > 1`` law of the given scale in the duality identity."""
    return -scale ** (-1.0 / alpha)


def zolotarev_residual(alpha: float, x, scale: Optional[float] = None,
                       target_eps: float = 1e-10):
    """Both sides of the duality ``x p(x; a) = x**-a p(x**-a; 1/a)``.

    ``p(.; a)`` for ``a > 1`` is the density of the mirror image of the
    stable limit of ``Y_n`` (the law with all its heavy tail on the left), so
    ``p(x; a) = g(-x)`` where ``g`` has ``log Psi = scale (-ik)**a``.
    ``p(.; 1/a)`` is the positive law with ``log Psi = s' (-ik)**(1/a)`` and
    ``s' = -scale**(-1/a)``. When ``scale`` is omitted it is calibrated from
    the power family with ``beta = a - 1``.

    Returns ``(lhs, rhs)`` arrays (scalars for scalar ``x``).
    """
    if not alpha > 1:
        raise DomainError(f"the duality needs alpha > 1, got {alpha}")
    if not alpha < 2:
        raise ParameterError("alpha must be below 2")
    scalar = np.ndim(x) == 0
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xx <= 0):
        raise DomainError("x must be positive")
    if scale is None:
        dist = make_distribution("power", alpha - 1.0)
        spec = calibrate(StableLawSpec.for_distribution(dist), dist)
    else:
        spec = StableLawSpec.with_scale(alpha, scale)
    dual = StableLawSpec.with_scale(1.0 / alpha, dual_scale(alpha, spec.scale))

    y = xx ** (-alpha)
    lhs = xx * _density_at(CharFunction("psi_stable", spec=spec), -xx, target_eps)
    rhs = y * _density_at(CharFunction("psi_stable", spec=dual), y, target_eps)
    if scalar:
        return float(lhs[0]), float(rhs[0])
    return lhs, rhs


def _density_at(cf: CharFunction, pts: np.ndarray, eps: float) -> np.ndarray:
    """Density at arbitrary points (the node set is padded to 3 points)."""
    nodes = np.unique(pts)
    if nodes.size < 3:
        nodes = np.concatenate([nodes, nodes[-1] + np.arange(1.0, 4 - nodes.size)])
    grid = invert_to_density(cf, nodes, eps)
    return np.interp(pts, grid.abscissae, grid.values)


@dataclass(frozen=True)
class DensityGapRow:
    n: int
    gap: float
    ratio: float
    support_floor: float
    below_floor_max: float
    error_bound: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def density_gap_experiment(dist: DistributionSpec, n_list: Sequence[int], x_grid,
                           target_eps: float = 1e-8) -> List[DensityGapRow]:
    """``sup_x |g_n(x) - g(x)|`` on ``x_grid`` for each ``n``.

    ``ratio`` is the gap divided by ``log(n)**2 / n``. ``below_floor_max`` is
    the largest ``|g_n|`` on grid points below the support floor of ``Y_n``
    (0 when no grid point lies there).
    """
    if dist.alpha != 1.0:
        raise ParameterError("the density-gap experiment is defined for alpha = 1")
    x = np.asarray(x_grid, dtype=float)
    spec = StableLawSpec.for_distribution(dist)
    g = invert_to_density(CharFunction("psi_stable", spec=spec), x, target_eps)
    rows = []
    for n in n_list:
        cf = CharFunction("psi_finite_n", dist=dist, n=int(n))
        gn = invert_to_density(cf, x, target_eps)
        gap = float(np.max(np.abs(gn.values - g.values)))
        floor = cf.support_floor
        below = x < floor
        bmax = float(np.max(np.abs(gn.values[below]))) if below.any() else 0.0
        rows.append(DensityGapRow(n=int(n), gap=gap, ratio=gap / (math.log(n) ** 2 / n),
                                  support_floor=floor, below_floor_max=bmax,
                                  error_bound=gn.error_bound() + g.error_bound()))
        logger.info("density gap n=%d: %.4g (ratio %.4g)", n, gap, rows[-1].ratio)
    return rows


@dataclass(frozen=True)
class MeanByQuadrature:
    """``E(H_n)`` from the inverted density of ``Y_n``.

    ``value`` includes a midpoint estimate of the part beyond the grid and
    ``error_bound`` covers that estimate plus the inversion error.
    """

    n: int
    value: float
    error_bound: float
    x_hi: float


def harmonic_mean_expectation(dist: DistributionSpec, n: int, x_hi: float = 500.0,
                              step: float = 0.05, target_eps: Optional[float] = None
                              ) -> MeanByQuadrature:
    """``E(H_n) = E[n a_n / (Y_n + b_n)]`` by integrating against ``g_n``.

    ``Y_n = a_n S_n - b_n`` has support ``[n a_n - b_n, inf)`` because every
    reciprocal is at least 1, so the integrand is bounded by 1 there.
    """
    cf = CharFunction("psi_finite_n", dist=dist, n=int(n))
    a_n, b_n = norming(dist, int(n))
    floor = cf.support_floor
    if not x_hi > floor + 10 * step:
        raise ParameterError("x_hi must lie well above the support floor")
    m = int(math.ceil((x_hi - floor) / step))
    x = floor + step * np.arange(m + 1)
    grid = invert_to_density(cf, x, target_eps)
    scale = n * a_n
    w = scale / (x + b_n)
    body = float(simpson(grid.values * w, x=x))
    # the integrand is at most scale / (x_hi + b_n) beyond the grid
    top = grid.mass_above * scale / (x[-1] + b_n)
    value = body + 0.5 * top
    err = 0.5 * top + grid.error_bound() * (x[-1] - x[0]) + grid.mass_below
    return MeanByQuadrature(n=int(n), value=float(value), error_bound=float(err),
                            x_hi=float(x[-1]))
