"""Structured stochastic matrices with equal off-diagonal row entries.

Row ``i`` of ``T`` has ``a_i`` on the diagonal and ``(1 - a_i)/(n - 1)``
elsewhere. With ``x_i = 1 - a_i`` one has ``I - T = n/(n-1) * B`` where
``B = diag(x) (I - J/n)`` and ``J`` is the all-ones matrix. The
characteristic polynomial of ``B`` is ``(x/n) p'(x)`` for
``p(x) = prod_i (x - x_i)``, so the spectrum of ``T`` follows from the
roots of ``p'`` in ``O(n)`` work per eigenvalue. ``T`` is never stored
densely except by the small-``n`` oracles.

In learner mode ``a_1 = 1`` (state 1 absorbs) and every other ``a_i < 1``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, MultiplicityError, ParameterError, UnlearnableError
from .polyroots import (MERGE_TOL, RootSet, clamped_smallest_root,
                        derivative_roots, merge_roots)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OverlapMatrix:
    a: np.ndarray
    learner_mode: bool = False

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 1 or a.size < 2:
            raise ParameterError("need at least two overlaps")
        if np.any(~np.isfinite(a)) or np.any((a < 0) | (a > 1)):
            raise ParameterError("overlaps must lie in [0, 1]")
        if self.learner_mode:
            if a[0] != 1.0:
                raise ParameterError("learner mode requires a_1 = 1")
            if np.any(a[1:] == 1.0):
                bad = int(np.flatnonzero(a[1:] == 1.0)[0]) + 2
                raise UnlearnableError(f"a_{bad} = 1: state {bad} can never be left")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return int(self.a.size)

    @property
    def x(self) -> np.ndarray:
        return 1.0 - self.a

    def dense(self) -> np.ndarray:
        """The full matrix ``T`` (oracle use only)."""
        n = self.n
        off = (1.0 - self.a) / (n - 1)
        T = np.repeat(off[:, None], n, axis=1)
        np.fill_diagonal(T, self.a)
        return T

    def dense_b(self) -> np.ndarray:
        n = self.n
        return np.diag(self.x) @ (np.eye(n) - np.full((n, n), 1.0 / n))


def from_overlaps(a: Sequence[float], learner_mode: bool = False) -> OverlapMatrix:
    return OverlapMatrix(np.asarray(a, dtype=float), learner_mode)


def apply_transition(p, M: OverlapMatrix) -> np.ndarray:
    """Row vector times ``T`` in ``O(n)``: one step of the probability flow."""
    p = np.asarray(p, dtype=float)
    if p.shape != (M.n,):
        raise ParameterError(f"probability vector must have length {M.n}")
    if np.any(p < -1e-9) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("input is not a probability vector")
    leave = p * M.x
    s = leave.sum()
    return p - leave + (s - leave) / (M.n - 1)


def apply_right(M: OverlapMatrix, v) -> np.ndarray:
    """``T`` times a column vector in ``O(n)``."""
    v = np.asarray(v, dtype=float)
    return M.a * v + M.x * (v.sum() - v) / (M.n - 1)


# --------------------------------------------------------------------------
# characteristic polynomial


@dataclass(frozen=True)
class CharPolyCoeffs:
    """Monic polynomial, ``coefficients[i]`` multiplying ``x**i``."""

    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return int(self.coefficients.size) - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coefficients)


def elementary_coefficients(x) -> np.ndarray:
    """Ascending coefficients of ``prod_j (z - x_j)`` by repeated multiplication."""
    c = np.zeros(len(x) + 1)
    c[0] = 1.0
    for k, xj in enumerate(x):
        # multiply the degree-k polynomial by (z - xj)
        c[1:k + 2] = c[0:k + 1] - xj * c[1:k + 2]
        c[0] = -xj * c[0]
    return c


def structured_charpoly(M: OverlapMatrix) -> CharPolyCoeffs:
    """Characteristic polynomial of ``B``: coefficient ``i`` is ``(i/n) c_i``."""
    c = elementary_coefficients(M.x)
    i = np.arange(c.size)
    return CharPolyCoeffs(c * i / M.n)


def dense_charpoly(B: np.ndarray) -> np.ndarray:
    """``det(zI - B)`` from sums of principal minors (oracle, small ``n``)."""
    n = B.shape[0]
    out = np.zeros(n + 1)
    out[n] = 1.0
    for k in range(1, n + 1):
        e = 0.0
        for idx in itertools.combinations(range(n), k):
            e += np.linalg.det(B[np.ix_(idx, idx)])
        out[n - k] = (-1) ** k * e
    return out


# --------------------------------------------------------------------------
# spectrum and eigenvectors


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues of ``B`` (ascending, ``mu[0] = 0``) and of ``T``.

    ``lam[i] = 1 - n/(n-1) * mu[i]``, so ``lam`` is descending and
    ``lam[0] = 1``. ``v2``, ``w2`` and ``C_n`` are filled when requested.
    """

    mu: np.ndarray
    lam: np.ndarray
    n: int
    v2: Optional[np.ndarray] = None
    w2: Optional[np.ndarray] = None
    C_n: Optional[float] = None

    @property
    def mu_star(self) -> float:
        return float(self.mu[1])

    @property
    def lambda_star(self) -> float:
        return float(self.lam[1])


def mu_to_lambda(mu, n: int):
    return 1.0 - (n / (n - 1.0)) * np.asarray(mu)


def spectrum(M: OverlapMatrix) -> SpectralDecomposition:
    """All eigenvalues: 0 plus the roots of ``p'`` for the roots ``x_i``."""
    d = derivative_roots(RootSet(np.sort(M.x)))
    mu = np.concatenate([[0.0], d.mu])
    lam = mu_to_lambda(mu, M.n)
    lam[0] = 1.0
    return SpectralDecomposition(mu=mu, lam=lam, n=M.n)


def _check_simple(M: OverlapMatrix, mu: float):
    if not M.learner_mode:
        raise ParameterError("eigenvectors are implemented for learner mode (x_1 = 0)")
    if mu == 0:
        raise ParameterError("mu = 0 is the stationary pair; pass a nonzero eigenvalue")
    x = M.x
    close = np.abs(x - mu) <= MERGE_TOL * max(1.0, abs(mu))
    if close.any():
        raise MultiplicityError(f"mu={mu} equals a repeated overlap gap; eigenvalue not simple")


def eigenpair(M: OverlapMatrix, mu: float):
    """Right and left eigenvectors ``(v, w)`` of ``T`` for the ``B``-eigenvalue ``mu``.

    ``v_j = x_j / (x_j - mu)`` (so ``v_1 = 0`` and ``v = 1 + u`` with
    ``u_j = mu/(x_j - mu)``); ``w_j = mu w_1 / (mu - x_j)`` with ``w_1`` fixed
    by ``<w, v> = 1``.
    """
    _check_simple(M, mu)
    x = M.x
    d = x - mu
    v = x / d
    s = float(np.sum(x / (d * d)))
    w1 = -1.0 / (mu * s)
    w = mu * w1 / (mu - x)
    return v, w


def eigen_weight(M: OverlapMatrix, mu: float) -> float:
    """Contribution ``C^(i)`` of one eigenvalue to ``1 - Q_11(N)``."""
    x = M.x
    d = x - mu
    return float(1.0 / (mu * np.sum(x / (d * d))))


@dataclass(frozen=True)
class CnResult:
    exact: float
    approx: float
    mu_star: float
    lambda_star: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def compute_cn(M: OverlapMatrix, mu_star: Optional[float] = None) -> CnResult:
    """The constant in ``1 - Q_11(N) ~ C_n lambda*^N`` with its approximation.

    ``exact = -(1/n) sum_j v_j w_1`` from the exact eigenpair of ``lambda*``.
    ``approx`` replaces ``x_j - mu*`` by ``x_j`` (valid when ``mu*`` is well
    below every nonzero ``x_j``), giving ``1 / (mu* sum_{j>1} 1/x_j)``.
    """
    if not M.learner_mode:
        raise ParameterError("C_n is defined in learner mode")
    if mu_star is None:
        mu_star = clamped_smallest_root(RootSet(np.sort(M.x[1:])))
    v, w = eigenpair(M, mu_star)
    exact = float(-np.sum(v) * w[0] / M.n)
    approx = float(1.0 / (mu_star * np.sum(1.0 / M.x[1:])))
    lam = float(mu_to_lambda(mu_star, M.n))
    return CnResult(exact=exact, approx=approx, mu_star=float(mu_star), lambda_star=lam)


def full_decomposition(M: OverlapMatrix) -> SpectralDecomposition:
    """Spectrum plus the ``lambda*`` eigenpair and ``C_n`` (learner mode)."""
    sp = spectrum(M)
    v, w = eigenpair(M, sp.mu_star)
    cn = compute_cn(M, sp.mu_star).exact
    return SpectralDecomposition(mu=sp.mu, lam=sp.lam, n=sp.n, v2=v, w2=w, C_n=cn)
