"""Roots of the derivative of a real-rooted polynomial.

For ``p(x) = prod_j (x - x_j)`` the roots of ``p'`` are the zeros of

    f(mu) = p'(mu) / p(mu) = sum_j 1 / (mu - x_j),

which is strictly decreasing between consecutive poles, running from
``+inf`` to ``-inf``. Each open interval between distinct roots therefore
holds exactly one root of ``p'``, and a root of ``p`` of multiplicity ``m``
is itself a root of ``p'`` of multiplicity ``m - 1``. The polynomial is
never formed from coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConvergenceError, DomainError, ParameterError, PoleError
from .sampling import SortedSample

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-14
BISECT_REL_WIDTH = 1e-6
REL_TOL = 1e-13
_CHUNK_ELEMS = 1 << 21


@dataclass(frozen=True)
class RootSet:
    """Nondecreasing real roots; ``clamped_zero`` adds one more root at 0."""

    values: np.ndarray
    clamped_zero: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ParameterError("roots must form a 1-d array")
        if not np.all(np.isfinite(v)):
            raise ParameterError("roots must be finite")
        if np.any(np.diff(v) < 0):
            v = np.sort(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def all_roots(self) -> np.ndarray:
        """Every root including the clamped zero, sorted."""
        if self.clamped_zero:
            return np.sort(np.concatenate([[0.0], self.values]))
        return np.asarray(self.values)

    @property
    def n(self) -> int:
        return int(self.values.size) + int(self.clamped_zero)


RootsLike = Union[RootSet, SortedSample, Sequence[float], np.ndarray]


def as_root_set(roots: RootsLike) -> RootSet:
    if isinstance(roots, RootSet):
        return roots
    if isinstance(roots, SortedSample):
        return RootSet(roots.values, roots.clamped_zero)
    return RootSet(np.asarray(roots, dtype=float))


@dataclass(frozen=True)
class DerivativeRoots:
    """Roots ``mu_1 <= ... <= mu_{n-1}`` of ``p'``.

    ``bracket_certificates[i]`` is ``(m_i, m_{i+1})``, the consecutive roots
    of ``p`` that enclose ``mu_i``.
    """

    mu: np.ndarray
    bracket_certificates: np.ndarray

    @property
    def mu_star(self) -> float:
        return float(self.mu[0])

    def interlacing_holds(self) -> bool:
        lo = self.bracket_certificates[:, 0]
        hi = self.bracket_certificates[:, 1]
        return bool(np.all(lo <= self.mu) and np.all(self.mu <= hi))


def merge_roots(r: np.ndarray, tol: float = MERGE_TOL):
    """Collapse sorted roots closer than ``tol`` into (value, multiplicity)."""
    if r.size == 0:
        return r, np.zeros(0, dtype=int)
    new_group = np.empty(r.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(r) > tol * np.maximum(1.0, np.abs(r[1:]))
    starts = np.flatnonzero(new_group)
    mult = np.diff(np.append(starts, r.size))
    return r[starts], mult


def secular_sum(roots: RootsLike, mu: float) -> float:
    """``sum_j 1/(mu - x_j)`` over all roots, i.e. ``p'(mu)/p(mu)``."""
    r = as_root_set(roots).all_roots()
    d = mu - r
    if np.any(d == 0):
        raise PoleError(f"mu={mu} coincides with a root")
    return float(np.sum(1.0 / d))


def _solve_brackets(u: np.ndarray, m: np.ndarray, left: np.ndarray) -> np.ndarray:
    """Zero of ``sum_j m_j/(mu - u_j)`` in ``(u[left], u[left + 1])`` for each entry.

    The origin is moved to the pole nearer the zero so the answer keeps
    full relative accuracy as a distance to that pole. Bisection runs until
    the bracket has shrunk by ``BISECT_REL_WIDTH``; safeguarded Newton steps
    then polish to ``REL_TOL``.
    """
    out = np.empty(left.size)
    rows = max(1, _CHUNK_ELEMS // max(u.size, 1))
    for s in range(0, left.size, rows):
        idx = left[s:s + rows]
        out[s:s + rows] = _solve_chunk(u, m, idx)
    return out


def _secular_value(delta, m, tau, buf):
    np.subtract(tau[:, None], delta, out=buf)
    np.reciprocal(buf, out=buf)
    return buf @ m


def _secular(delta, m, tau):
    inv = 1.0 / (tau[:, None] - delta)
    f = inv @ m
    np.multiply(inv, inv, out=inv)
    return f, -(inv @ m)


def _solve_chunk(u, m, idx):
    lo_pole = u[idx]
    hi_pole = u[idx + 1]
    gap = hi_pole - lo_pole
    mid = lo_pole + 0.5 * gap
    buf = np.empty((idx.size, u.size))
    f_mid = _secular_value(u[None, :], m, mid, buf)
    use_hi = f_mid > 0  # zero lies to the right of the midpoint
    pole = np.where(use_hi, hi_pole, lo_pole)
    delta = u[None, :] - pole[:, None]
    # make the shifted pole exactly zero
    delta[np.arange(idx.size), np.where(use_hi, idx + 1, idx)] = 0.0
    # bracket in tau = mu - pole
    a = np.where(use_hi, -0.5 * gap, 0.0)
    b = np.where(use_hi, 0.0, 0.5 * gap)
    exact_mid = f_mid == 0
    # bisection: every bracket starts at half the gap, so a fixed number of
    # halvings brings all of them below BISECT_REL_WIDTH * gap
    n_bisect = int(np.ceil(np.log2(0.5 / BISECT_REL_WIDTH)))
    for _ in range(n_bisect):
        t = 0.5 * (a + b)
        pos = _secular_value(delta, m, t, buf) > 0
        a = np.where(pos, t, a)
        b = np.where(pos, b, t)
    tau = 0.5 * (a + b)
    done = np.zeros(idx.size, dtype=bool)
    for _ in range(100):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        sub = delta if act.size == idx.size else delta[act]
        t = tau[act]
        f, fp = _secular(sub, m, t)
        aa = np.where(f > 0, t, a[act])
        bb = np.where(f > 0, b[act], t)
        hit = f == 0
        new = t - f / fp
        bad = (~((new > aa) & (new < bb)) | ~np.isfinite(new)) & ~hit
        new = np.where(bad, 0.5 * (aa + bb), np.where(hit, t, new))
        scale = np.maximum(np.abs(new), np.finfo(float).tiny)
        conv = (np.abs(new - t) <= REL_TOL * scale) | (bb - aa <= REL_TOL * scale) | hit
        tau[act] = new
        a[act] = aa
        b[act] = bb
        done[act[conv]] = True
    if not done.all():
        raise ConvergenceError("secular equation solver did not converge")
    out = pole + tau
    out[exact_mid] = mid[exact_mid]
    return out


def derivative_roots(roots: RootsLike) -> DerivativeRoots:
    """All ``n - 1`` roots of ``p'`` with their interlacing brackets."""
    rs = as_root_set(roots)
    r = rs.all_roots()
    n = r.size
    if n < 2:
        raise ParameterError("need at least two roots")
    u, mult = merge_roots(r)
    pieces = [np.repeat(u[mult > 1], mult[mult > 1] - 1)]
    if u.size > 1:
        pieces.append(_solve_brackets(u, mult.astype(float), np.arange(u.size - 1)))
    mu = np.sort(np.concatenate(pieces))
    certs = np.column_stack([r[:-1], r[1:]])
    # merged roots may sit a hair outside the raw bracket; clip to it
    mu = np.clip(mu, certs[:, 0], certs[:, 1])
    return DerivativeRoots(mu=mu, bracket_certificates=certs)


def clamped_smallest_root(roots: RootsLike) -> float:
    """Smallest root ``mu*`` of ``p'`` when one root of ``p`` sits at 0.

    ``1/mu* = sum_i 1/(x_i - mu*)`` over the nonzero roots ``x_i``, and
    ``mu*`` lies in ``(0, min x_i)``. Cost is linear in the number of roots.
    """
    rs = as_root_set(roots)
    x = rs.values
    if x.size == 0:
        raise ParameterError("need at least one nonzero root")
    if np.any(x <= 0):
        raise DomainError("nonzero roots must be positive")
    u, mult = merge_roots(np.concatenate([[0.0], x]))
    if mult[0] > 1:  # pragma: no cover - excluded by the positivity check
        return 0.0
    return float(_solve_brackets(u, mult.astype(float), np.array([0]))[0])


def harmonic_bounds(x) -> tuple:
    """``((1/2) / sum(1/x), 1 / sum(1/x))``, the two-sided bound on ``mu*``."""
    s = float(np.sum(1.0 / np.asarray(x, dtype=float)))
    return 0.5 / s, 1.0 / s
