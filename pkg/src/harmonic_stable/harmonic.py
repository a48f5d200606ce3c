"""Harmonic means, their normalisations and Monte Carlo estimation.

The reciprocal sums are heavy tailed (a single small draw can dominate), so
they are accumulated with a compensated pairwise sum.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError, StateError
from .sampling import (DistributionSpec, SortedSample, StreamKey, draw,
                       substream)

logger = logging.getLogger(__name__)


def compensated_sum(values) -> float:
    """Sum of ``values`` using a pairwise tree with error-free additions.

    Every pairwise addition ``s = a + b`` also produces its exact rounding
    error, and the errors are added back at the end. The result is accurate
    to a few ulps of the sum for any ordering of positive summands.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    errs = []
    while v.size > 1:
        if v.size % 2:
            tail = v[-1:]
            v = v[:-1]
        else:
            tail = None
        a = v[0::2]
        b = v[1::2]
        s = a + b
        bb = s - a
        errs.append(np.sum((a - (s - bb)) + (b - bb)))
        v = s if tail is None else np.concatenate([s, tail])
    return float(v[0] + math.fsum(errs))


def _as_values(xs) -> np.ndarray:
    if isinstance(xs, SortedSample):
        if xs.clamped_zero:
            raise DomainError("the clamped zero root never enters a harmonic mean; "
                              "pass the nonzero roots only")
        return xs.values
    v = np.asarray(xs, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ParameterError("expected a nonempty one-dimensional sample")
    return v


def reciprocal_sum(xs) -> float:
    v = _as_values(xs)
    if np.any(v <= 0) or np.any(np.isnan(v)):
        raise DomainError("harmonic mean needs strictly positive entries")
    return compensated_sum(1.0 / v)


def harmonic_mean(xs) -> float:
    """``n / sum(1/x_i)`` for a sample of positive values."""
    v = _as_values(xs)
    return v.size / reciprocal_sum(v)


def norming(dist: DistributionSpec, n: int):
    """Scale and centring ``(a_n, b_n)`` for sums of reciprocals.

    ``a_n * S_n - b_n`` converges to a stable law, where ``S_n`` is the sum
    of ``n`` reciprocals.
    """
    alpha = dist.alpha
    if alpha == 1.0:
        return 1.0 / n, dist.c0 * math.log(n)
    a = n ** (-1.0 / alpha)
    if alpha > 1.0:
        if dist.inverse_moment is None:
            raise StateError("alpha > 1 requires a finite inverse moment")
        return a, n ** (1.0 - 1.0 / alpha) * dist.inverse_moment
    return a, 0.0


@dataclass(frozen=True)
class NormalizedStat:
    H: float
    X: float
    Y: float
    a_n: float
    b_n: float
    alpha: float
    n: int


def normalize_from_sum(recip_sum: float, n: int, dist: DistributionSpec) -> NormalizedStat:
    a_n, b_n = norming(dist, n)
    X = recip_sum / n
    H = n / recip_sum
    Y = a_n * recip_sum - b_n
    return NormalizedStat(H=H, X=X, Y=Y, a_n=a_n, b_n=b_n, alpha=dist.alpha, n=n)


def normalize(xs, dist: DistributionSpec) -> NormalizedStat:
    """Harmonic mean together with its normalised fluctuation ``Y``."""
    v = _as_values(xs)
    return normalize_from_sum(reciprocal_sum(v), v.size, dist)


# --------------------------------------------------------------------------
# Statistics and Monte Carlo


@dataclass(frozen=True)
class Statistic:
    """A named function of a sample.

    ``fn(values, dist)`` receives the draws as a float array. When
    ``ordered`` is true the array is sorted first (order statistics);
    otherwise the draw order is kept, which saves a sort.
    """

    name: str
    fn: Callable[[np.ndarray, DistributionSpec], float]
    ordered: bool = False


def _h(v, dist):
    return v.size / reciprocal_sum(v)


def _h_log(v, dist):
    return _h(v, dist) * math.log(v.size)


def _n_h(v, dist):
    return v.size * _h(v, dist)


def _y(v, dist):
    return normalize_from_sum(reciprocal_sum(v), v.size, dist).Y


def _h_log2_shift(v, dist):
    n = v.size
    return _h(v, dist) * math.log(n) ** 2 - math.log(n)


def _h_scaled(v, dist):
    """n^{1-1/alpha} (H - 1/E) for alpha > 1."""
    if dist.inverse_moment is None:
        raise StateError("statistic needs a finite inverse moment")
    n = v.size
    return n ** (1.0 - 1.0 / dist.alpha) * (_h(v, dist) - 1.0 / dist.inverse_moment)


def order_statistic(i: int) -> Statistic:
    """The ``i``-th smallest value (1-based)."""
    return Statistic(f"m{i}", lambda v, dist: float(v[i - 1]), ordered=True)


STATISTICS: Dict[str, Statistic] = {
    "H": Statistic("H", _h),
    "H_log_n": Statistic("H_log_n", _h_log),
    "n_H": Statistic("n_H", _n_h),
    "Y": Statistic("Y", _y),
    "H_log2_shift": Statistic("H_log2_shift", _h_log2_shift),
    "H_scaled": Statistic("H_scaled", _h_scaled),
    "m1": order_statistic(1),
    "m10": order_statistic(10),
}


def get_statistic(stat) -> Statistic:
    if isinstance(stat, Statistic):
        return stat
    if isinstance(stat, str):
        if stat in STATISTICS:
            return STATISTICS[stat]
        if stat.startswith("m") and stat[1:].isdigit():
            return order_statistic(int(stat[1:]))
        raise ParameterError(f"unknown statistic {stat!r}; known: {sorted(STATISTICS)}")
    if callable(stat):
        return Statistic(getattr(stat, "__name__", "custom"), stat)
    raise ParameterError(f"cannot interpret {stat!r} as a statistic")


@dataclass(frozen=True)
class EstimatorSummary:
    statistic_id: str
    n: int
    reps: int
    mean: float
    stderr: float
    seed: StreamKey

    def to_dict(self) -> dict:
        return {"statistic_id": self.statistic_id, "n": self.n, "reps": self.reps,
                "mean": self.mean, "stderr": self.stderr, "seed": self.seed.to_dict()}


def replicate_values(statistic, dist: DistributionSpec, n: int, reps: int,
                     key: StreamKey, threads: int = 1) -> np.ndarray:
    """Statistic value for each replicate ``r``, drawn from ``substream(key, r)``.

    The output does not depend on ``threads``: every replicate owns its
    stream and results are stored by replicate index.
    """
    stat = get_statistic(statistic)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if reps < 1:
        raise ParameterError("reps must be >= 1")

    def one(r: int) -> float:
        v = draw(dist, n, substream(key, r))
        if stat.ordered:
            v.sort()
        try:
            return float(stat.fn(v, dist))
        except (DomainError, ValueError) as exc:
            raise type(exc)(f"replicate {r}: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(reps)))
    else:
        out = [one(r) for r in range(reps)]
    return np.asarray(out, dtype=float)


def summarize(name: str, values: np.ndarray, n: int, key: StreamKey) -> EstimatorSummary:
    reps = values.size
    if reps < 2:
        raise ParameterError("at least two replicates are needed for a standard error")
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(reps))
    return EstimatorSummary(name, n, reps, mean, stderr, key)


def mc_estimate(statistic, dist: DistributionSpec, n: int, reps: int,
                key: StreamKey, threads: int = 1) -> EstimatorSummary:
    """Monte Carlo mean and standard error of a statistic."""
    if reps < 2:
        raise ParameterError("reps must be >= 2")
    stat = get_statistic(statistic)
    vals = replicate_values(stat, dist, n, reps, key, threads)
    summary = summarize(stat.name, vals, n, key)
    logger.debug("mc_estimate %s n=%d reps=%d -> %.6g +- %.2g",
                 stat.name, n, reps, summary.mean, summary.stderr)
    return summary


def limit_constant_scan(statistic, dist: DistributionSpec, n_list: Sequence[int],
                        reps: int, key: StreamKey, threads: int = 1) -> List[EstimatorSummary]:
    """One :class:`EstimatorSummary` per sample size.

    Each ``n`` uses its own child stream ``substream(key, i)`` so that adding
    sizes to the list does not change earlier rows.
    """
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("n_list must be strictly increasing")
    return [mc_estimate(statistic, dist, n, reps, substream(key, i), threads)
            for i, n in enumerate(ns)]
