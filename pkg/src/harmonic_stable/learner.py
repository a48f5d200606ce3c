"""The memoryless learner as an absorbing Markov chain.

The learner holds one of ``n`` hypotheses; hypothesis 1 is the truth. At
each step it keeps hypothesis ``j`` with probability ``a_j`` and otherwise
jumps to one of the other ``n - 1`` uniformly. ``Q_11(N)`` is the
probability of holding the truth after ``N`` steps from a uniform start.

The failure probability ``1 - Q_11(N)`` has the exact expansion
``sum_{i>=2} C^(i) lambda_i**N`` over the nonzero ``B``-eigenvalues, which
lets ``N_delta`` be located without propagating the chain step by step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, ParameterError
from .overlap import OverlapMatrix, apply_transition, mu_to_lambda, spectrum
from .sampling import DistributionSpec, StreamKey, draw, substream

logger = logging.getLogger(__name__)

# propagate the chain exactly while n * N stays below this many operations
EXACT_COST_CAP = 200_000


def _require_learner(M: OverlapMatrix):
    if not M.learner_mode:
        raise ParameterError("the learner chain needs learner mode (a_1 = 1)")


def propagate(M: OverlapMatrix, N: int) -> np.ndarray:
    """``Q_11(0..N)`` by exact propagation of the uniform start."""
    _require_learner(M)
    if N < 0:
        raise ParameterError("N must be >= 0")
    p = np.full(M.n, 1.0 / M.n)
    q = np.empty(N + 1)
    q[0] = p[0]
    x = M.x
    c = 1.0 / (M.n - 1)
    for t in range(1, N + 1):
        leave = p * x
        s = leave.sum()
        p = p - leave + (s - leave) * c
        q[t] = p[0]
    return q


def _propagate_until(M: OverlapMatrix, delta: float, max_steps: int):
    """Propagate until ``1 - Q_11 <= delta`` or ``max_steps`` steps are done.

    Returns the propagated ``Q_11`` prefix and the hitting step (or ``None``).
    """
    p = np.full(M.n, 1.0 / M.n)
    x = M.x
    c = 1.0 / (M.n - 1)
    q = [p[0]]
    for t in range(1, max_steps + 1):
        leave = p * x
        s = leave.sum()
        p = p - leave + (s - leave) * c
        q.append(p[0])
        if 1.0 - p[0] <= delta:
            return np.asarray(q), t
    return np.asarray(q), None


def q_exact(M: OverlapMatrix, N: int) -> float:
    """``Q_11(N)`` by ``N`` applications of the transition."""
    _require_learner(M)
    p = np.full(M.n, 1.0 / M.n)
    for _ in range(N):
        p = apply_transition(p, M)
    return float(p[0])


@dataclass(frozen=True)
class SpectralFailure:
    """``1 - Q_11(N) = sum_i weights[i] * lam[i]**N`` for the chain."""

    lam: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_matrix(cls, M: OverlapMatrix) -> "SpectralFailure":
        _require_learner(M)
        sp = spectrum(M)
        mu = sp.mu[1:]
        x = M.x
        # eigenvalues sitting on repeated x_j belong to vectors with zero
        # overlap with the uniform start; they carry no weight
        d = x[None, :] - mu[:, None]
        simple = np.all(d != 0, axis=1)
        mu = mu[simple]
        d = d[simple]
        w = 1.0 / (mu * np.sum(x[None, :] / (d * d), axis=1))
        return cls(lam=mu_to_lambda(mu, M.n), weights=w)

    def __call__(self, N) -> float:
        N = float(N)
        lam = self.lam
        mag = np.abs(lam) ** N
        sign = np.where((lam < 0) & (int(N) % 2 == 1), -1.0, 1.0)
        return float(np.sum(self.weights * sign * mag))

    @property
    def lambda_star(self) -> float:
        return float(np.max(self.lam))


@dataclass(frozen=True)
class LearnerTrace:
    """``q_values`` holds the exactly propagated prefix ``Q_11(0..len-1)``.

    When ``N_delta`` lies beyond that prefix it was located with the
    spectral expansion (``method == "spectral"``).
    """

    delta: float
    q_values: np.ndarray
    n_delta: int
    n: int
    method: str = "exact"


def n_delta(M: OverlapMatrix, delta: float, cost_cap: int = EXACT_COST_CAP) -> LearnerTrace:
    """Smallest ``N`` with ``1 - Q_11(N) <= delta``.

    The chain is propagated exactly while affordable. If the threshold is
    not reached, an upper bracket is found by doubling and the crossing is
    pinned down by binary search on the spectral expansion of the failure
    probability (which is nonincreasing in ``N``).
    """
    _require_learner(M)
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    n = M.n
    if 1.0 - 1.0 / n <= delta:
        return LearnerTrace(delta, np.array([1.0 / n]), 0, n)
    n_prefix = max(1, cost_cap // n)
    q, N = _propagate_until(M, delta, n_prefix)
    if N is not None:
        return LearnerTrace(delta, q, N, n)
    fail = SpectralFailure.from_matrix(M)
    lo = n_prefix  # failure(lo) > delta
    hi = 2 * lo
    while fail(hi) > delta:
        lo, hi = hi, 2 * hi
        if hi > 1e15:
            raise ConvergenceError("N_delta exceeds 1e15 steps")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fail(mid) > delta:
            lo = mid
        else:
            hi = mid
    return LearnerTrace(delta, q, hi, n, method="spectral")


def n_delta_bounds(M: OverlapMatrix, delta: float):
    """Bracket for ``N_delta`` from ``lambda*`` and ``C_n``.

    With all weights positive and every ``|lambda_i| <= lambda*``,
    ``C_n lambda*^N <= 1 - Q_11(N) <= (1 - 1/n) lambda*^N``.
    """
    from .overlap import compute_cn
    cn = compute_cn(M)
    L = abs(math.log(cn.lambda_star))
    lower = (abs(math.log(delta)) + math.log(cn.exact)) / L - 1.0
    upper = math.log((1.0 - 1.0 / M.n) / delta) / L + 1.0
    return lower, upper


# --------------------------------------------------------------------------
# agent-level simulation


def simulate_agent(M: OverlapMatrix, N: int, key: StreamKey) -> bool:
    """Run the literal algorithm once; ``True`` if it holds the truth after ``N`` steps."""
    _require_learner(M)
    gen = key.generator()
    n = M.n
    a = M.a
    j = int(gen.integers(n))
    for _ in range(N):
        if gen.random() < a[j]:
            continue
        u = int(gen.integers(n - 1))
        j = u if u < j else u + 1
    return j == 0


def simulate_agents(M: OverlapMatrix, N: int, reps: int, key: StreamKey) -> np.ndarray:
    """``reps`` independent agents advanced in lockstep from one stream."""
    _require_learner(M)
    gen = key.generator()
    n = M.n
    a = M.a
    state = gen.integers(n, size=reps)
    for _ in range(N):
        stay = gen.random(reps) < a[state]
        u = gen.integers(n - 1, size=reps)
        state = np.where(stay, state, np.where(u < state, u, u + 1))
    return state == 0


# --------------------------------------------------------------------------
# scaling experiment


def random_learner(dist: DistributionSpec, n: int, key: StreamKey) -> OverlapMatrix:
    """Overlaps ``a_1 = 1`` and ``a_j = 1 - x_j`` with ``x_j`` drawn from ``dist``."""
    x = draw(dist, n - 1, key)
    return OverlapMatrix(np.concatenate([[1.0], 1.0 - x]), learner_mode=True)


def scaling_denominator(dist: DistributionSpec, n: int) -> float:
    beta = dist.beta
    if beta == 0:
        return n * math.log(n)
    if beta > 0:
        return float(n)
    return n ** (1.0 / (1.0 + beta))


@dataclass(frozen=True)
class ScalingRow:
    n: int
    median_n_delta: float
    ratio: float
    reps: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def scaling_experiment(dist: DistributionSpec, delta: float, n_list: Sequence[int],
                       reps: int, key: StreamKey) -> List[ScalingRow]:
    """Median ``N_delta`` per ``n`` and its ratio to ``|log delta| * f(n)``.

    ``f(n)`` is ``n log n`` for ``beta = 0``, ``n`` for ``beta > 0`` and
    ``n**(1/(1+beta))`` for ``beta < 0``. Instance ``r`` at the ``i``-th size
    uses ``substream(substream(key, i), r)``.
    """
    rows = []
    for i, n in enumerate(n_list):
        base = substream(key, i)
        vals = np.array([n_delta(random_learner(dist, int(n), substream(base, r)), delta).n_delta
                         for r in range(reps)], dtype=float)
        med = float(np.median(vals))
        ratio = med / (abs(math.log(delta)) * scaling_denominator(dist, int(n)))
        rows.append(ScalingRow(n=int(n), median_n_delta=med, ratio=ratio, reps=reps))
        logger.info("scaling n=%d median N_delta=%g ratio=%.4g", n, med, ratio)
    return rows
