"""Sampling families on (0, 1], keyed random substreams and order statistics.

Two families are provided:

* ``power``: density ``(1 + beta) * x**beta`` on (0, 1], ``beta > -1``;
* ``plateau``: density ``c0`` on (0, width] and a uniform remainder of mass
  ``1 - c0 * width`` on (width, 1].

Random streams are derived from a master seed and an integer path through
:class:`numpy.random.SeedSequence`, so replicate ``r`` of experiment ``e``
always sees the same variates no matter how replicates are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DistributionSpec:
    """A sampling law on (0, 1] with its stable-law exponent.

    ``c0`` is the density at 0+ for the plateau family and the normalising
    constant ``1 + beta`` for the power family. ``inverse_moment`` is
    E(1/x), present only when finite.
    """

    family: str
    beta: float
    c0: float
    alpha: float
    width: float = 1.0
    inverse_moment: Optional[float] = None

    @property
    def is_uniform(self) -> bool:
        if self.family == "power":
            return self.beta == 0.0
        return self.c0 == 1.0

    @property
    def remainder_density(self) -> float:
        """Density on (width, 1] for the plateau family."""
        if self.family != "plateau" or self.width >= 1.0:
            return self.c0
        return (1.0 - self.c0 * self.width) / (1.0 - self.width)


def make_distribution(family: str = "power", beta: float = 0.0, *,
                      c0: Optional[float] = None,
                      width: Optional[float] = None) -> DistributionSpec:
    """Build a :class:`DistributionSpec`.

    For ``family="power"`` only ``beta`` is used. For ``family="plateau"``
    ``c0`` and ``width`` are required and ``beta`` is ignored (it is 0).
    """
    if family == "power":
        beta = float(beta)
        if not beta > -1.0 or not math.isfinite(beta):
            raise ParameterError(f"beta must satisfy beta > -1, got {beta}")
        if beta > 1.0:
            raise ParameterError(f"beta must satisfy beta <= 1 (alpha <= 2), got {beta}")
        inv = (1.0 + beta) / beta if beta > 0 else None
        return DistributionSpec("power", beta, 1.0 + beta, 1.0 + beta, 1.0, inv)
    if family == "plateau":
        if c0 is None or width is None:
            raise ParameterError("plateau family needs c0 and width")
        c0 = float(c0)
        width = float(width)
        if not c0 > 0:
            raise ParameterError(f"c0 must be positive, got {c0}")
        if not 0 < width <= 1:
            raise ParameterError(f"width must lie in (0, 1], got {width}")
        if c0 * width > 1.0 + 1e-15:
            raise ParameterError(f"c0 * width must be <= 1, got {c0 * width}")
        if width == 1.0 and c0 != 1.0:
            raise ParameterError("width = 1 forces c0 = 1")
        return DistributionSpec("plateau", 0.0, c0, 1.0, width, None)
    raise ParameterError(f"unknown family {family!r}")


def uniform() -> DistributionSpec:
    return make_distribution("power", 0.0)


def cdf(dist: DistributionSpec, x):
    """Distribution function of ``dist`` (vectorised)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if dist.family == "power":
        return x ** (1.0 + dist.beta)
    t, c = dist.width, dist.c0
    rho = dist.remainder_density
    return np.where(x <= t, c * x, c * t + rho * (x - t))


def quantile(dist: DistributionSpec, u):
    """Inverse distribution function; monotone, maps (0, 1] into (0, 1]."""
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0) | (u_arr > 1)) or np.any(np.isnan(u_arr)):
        raise DomainError("quantile level must lie in [0, 1]")
    if dist.family == "power":
        out = u_arr ** (1.0 / (1.0 + dist.beta))
    else:
        t, c = dist.width, dist.c0
        knee = c * t
        if knee >= 1.0:
            out = u_arr / c
        else:
            rho = dist.remainder_density
            out = np.where(u_arr <= knee, u_arr / c, t + (u_arr - knee) / rho)
        out = np.minimum(out, 1.0)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Streams


@dataclass(frozen=True)
class StreamKey:
    """Master seed plus an integer path naming one random stream."""

    master_seed: int
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "path", tuple(int(p) & _MASK64 for p in self.path))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "path": list(self.path)}


def substream(key: StreamKey, index: int) -> StreamKey:
    """Child stream of ``key`` obtained by appending ``index`` to its path."""
    return StreamKey(key.master_seed, key.path + (int(index),))


def draw(dist: DistributionSpec, n: int, key: StreamKey) -> np.ndarray:
    """``n`` independent draws in draw order (not sorted).

    Exact zeros, reachable only through floating point underflow, are
    redrawn so that reciprocals stay finite.
    """
    if n < 1:
        raise ParameterError(f"sample size must be >= 1, got {n}")
    gen = key.generator()
    # 1 - U lies in (0, 1]
    x = quantile(dist, 1.0 - gen.random(n))
    x = np.atleast_1d(x)
    bad = x <= 0.0
    while np.any(bad):
        x[bad] = quantile(dist, 1.0 - gen.random(int(bad.sum())))
        bad = x <= 0.0
    return x


@dataclass(frozen=True)
class SortedSample:
    """Nondecreasing values in (0, 1].

    With ``clamped_zero`` an extra point at exactly 0 is implied; it is never
    stored in ``values`` and never enters a harmonic mean.
    """

    values: np.ndarray
    clamped_zero: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ParameterError("a sample needs at least one value")
        if np.any(v <= 0):
            raise DomainError("sample values must be strictly positive")
        if np.any(np.diff(v) < 0):
            raise ParameterError("sample values must be sorted")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def order_statistic(self, i: int) -> float:
        """The i-th smallest value, 1-based."""
        return float(self.values[i - 1])

    @classmethod
    def from_values(cls, values: Sequence[float], clamped_zero: bool = False) -> "SortedSample":
        return cls(np.sort(np.asarray(values, dtype=float)), clamped_zero)


def sample_sorted(dist: DistributionSpec, n: int, key: StreamKey,
                  clamped_zero: bool = False) -> SortedSample:
    x = draw(dist, n, key)
    x.sort()
    return SortedSample(x, clamped_zero)
