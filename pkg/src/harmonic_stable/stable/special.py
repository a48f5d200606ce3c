"""Sine and cosine integrals.

``Si(x) = int_0^x sin(t)/t dt`` and ``Ci(x) = -int_x^inf cos(t)/t dt``.

For ``|x| <= 4`` the Maclaurin series converges quickly and without harmful
cancellation. Beyond that the pair is obtained from the exponential integral
``E1(ix)`` through its continued fraction (modified Lentz iteration), which
converges for every ``x > 4`` to full double precision. The divergent
asymptotic series cannot reach 1e-10 near ``x = 4``, so it is not used.

All routines accept scalars or arrays and are vectorised over the input.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError, DomainError

EULER_GAMMA = 0.57721566490153286061
CROSSOVER = 4.0
_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 300
# At x = 4 the 2k+1 term of the sine series is below 1e-20 once k >= 22.
_SERIES_TERMS = 26


def _series(x: np.ndarray):
    """Sine integral and ``Ci(x) - gamma - log(x)`` from the Maclaurin series."""
    x2 = x * x
    si = np.zeros_like(x)
    cin = np.zeros_like(x)
    term = x.copy()  # (-1)^k x^(2k+1) / (2k+1)!
    for k in range(_SERIES_TERMS):
        si += term / (2 * k + 1)
        cterm = -term * x / (2 * k + 2)  # (-1)^(k+1) x^(2k+2) / (2k+2)!
        cin += cterm / (2 * k + 2)
        term = -term * x2 / ((2 * k + 2) * (2 * k + 3))
    return si, cin


def _continued_fraction(x: np.ndarray):
    """(Si, Ci) for ``x > CROSSOVER`` from the continued fraction of E1(ix)."""
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1.0 / _FPMIN, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, _MAXIT):
        a = -float((i - 1) * (i - 1))
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta.real - 1.0) + np.abs(delta.imag) >= _EPS
        if not active.any():
            break
    else:  # pragma: no cover - converges in well under MAXIT steps for x > 4
        raise ConvergenceError("continued fraction for Si/Ci did not converge")
    h = h * (np.cos(x) - 1j * np.sin(x))
    return 0.5 * np.pi + h.imag, -h.real


def _sici_positive(x: np.ndarray):
    si = np.empty_like(x)
    ci = np.empty_like(x)
    small = x <= CROSSOVER
    if small.any():
        xs = x[small]
        s, cin = _series(xs)
        si[small] = s
        with np.errstate(divide="ignore"):
            ci[small] = EULER_GAMMA + np.log(xs) + cin
    if (~small).any():
        s, c = _continued_fraction(x[~small])
        si[~small] = s
        ci[~small] = c
    return si, ci


def _unwrap(out, scalar):
    return float(out[0]) if scalar else out


def sin_integral(x):
    """Si(x) for any real ``x``; odd in ``x``."""
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(arr)
    si, _ = _sici_positive(ax)
    return _unwrap(np.copysign(si, arr), scalar)


def cos_integral(x):
    """Ci(x) for ``x > 0``."""
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(arr > 0)):
        raise DomainError("cos_integral needs x > 0")
    _, ci = _sici_positive(arr)
    return _unwrap(ci, scalar)


def sici(x):
    """``(Si(x), Ci(x))`` for ``x > 0``, sharing the expensive branch."""
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(arr > 0)):
        raise DomainError("sici needs x > 0")
    si, ci = _sici_positive(arr)
    return _unwrap(si, scalar), _unwrap(ci, scalar)
