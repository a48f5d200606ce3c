"""Characteristic functions of reciprocals, of normalised sums and of their
stable limits.

Notation: ``chi(k) = E exp(i k / x)`` for one draw ``x`` from a sampling law;
``Psi_n`` is the characteristic function of ``Y_n = a_n S_n - b_n`` with
``S_n`` the sum of ``n`` reciprocals; ``Psi`` is its stable limit.

Most routines return ``chi - 1`` rather than ``chi``, because ``Psi_n`` is
``exp(n * log1p(chi(a_n k) - 1) - i b_n k)`` and ``chi(a_n k) - 1`` is tiny
for large ``n``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import special as sp

from ..errors import DomainError, ParameterError, StateError, TruncationError
from ..harmonic import norming
from ..sampling import DistributionSpec
from .special import EULER_GAMMA, sici

logger = logging.getLogger(__name__)

SMALL_K_UNIFORM = 1e-2
SERIES_K_BETA = 1.0

# --------------------------------------------------------------------------
# complex helpers


def _log1p_complex(z):
    """log(1 + z) without losing the relative accuracy of small ``z``."""
    a = z.real
    b = z.imag
    re = 0.5 * np.log1p(2.0 * a + a * a + b * b)
    im = np.arctan2(b, 1.0 + a)
    return re + 1j * im


def _expm1_complex(z):
    """exp(z) - 1 accurate for small ``z``."""
    x = z.real
    y = z.imag
    s = np.sin(0.5 * y)
    return (np.expm1(x) * np.cos(y) - 2.0 * s * s) + 1j * np.exp(x) * np.sin(y)


def _as_k(k):
    scalar = np.ndim(k) == 0
    return scalar, np.atleast_1d(np.asarray(k, dtype=float))


def _finish(out, scalar):
    return complex(out[0]) if scalar else out


def _symmetric(fn_pos, k):
    """Evaluate ``fn_pos`` on ``|k| > 0`` and extend by conjugate symmetry.

    ``fn_pos`` returns ``chi - 1`` for positive arguments; the value at 0 is 0.
    """
    out = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    if nz.any():
        v = fn_pos(np.abs(k[nz]))
        out[nz] = np.where(k[nz] < 0, np.conj(v), v)
    return out


# --------------------------------------------------------------------------
# uniform law


def _chi_uniform_m1_pos(k):
    out = np.empty(k.shape, dtype=complex)
    small = k < SMALL_K_UNIFORM
    if small.any():
        z = k[small]
        lg = np.log(z)
        z2 = z * z
        re = -0.5 * np.pi * z + z2 / 2.0 - z2 * z2 / 72.0
        im = (1.0 - EULER_GAMMA) * z - z * lg + z2 * z / 12.0 - z2 * z2 * z / 480.0
        out[small] = re + 1j * im
    big = ~small
    if big.any():
        z = k[big]
        si, ci = sici(z)
        s = np.sin(0.5 * z)
        re = -0.5 * np.pi * z - 2.0 * s * s + z * si
        im = np.sin(z) - z * ci
        out[big] = re + 1j * im
    return out


def chi_uniform_m1(k):
    """``chi(k) - 1`` for the uniform law on (0, 1]."""
    scalar, kk = _as_k(k)
    return _finish(_symmetric(_chi_uniform_m1_pos, kk), scalar)


def chi_uniform(k):
    """Characteristic function of ``1/x`` for ``x`` uniform on (0, 1].

    For ``k > 0`` this is ``cos k - k pi/2 + k Si(k) + i (sin k - k Ci(k))``;
    below ``SMALL_K_UNIFORM`` a short expansion in ``k`` and ``k log k`` is
    used instead.
    """
    scalar, kk = _as_k(k)
    return _finish(1.0 + _symmetric(_chi_uniform_m1_pos, kk), scalar)


# --------------------------------------------------------------------------
# power family


def _upper_gamma_shifted(alpha: float, k):
    """``k**alpha * Gamma(-alpha, k)`` for ``0 < alpha < 2`` and ``k > 0``."""
    s = 1.0 - alpha
    if s > 0:
        g1 = sp.gamma(s) * sp.gammaincc(s, k)
    elif s == 0:
        g1 = sp.exp1(k)
    else:
        # Gamma(s, k) = (Gamma(s + 1, k) - k^s e^{-k}) / s for -1 < s < 0
        g1 = (sp.gamma(s + 1.0) * sp.gammaincc(s + 1.0, k) - k ** s * np.exp(-k)) / s
    return (np.exp(-k) - k ** alpha * g1) / alpha


def _arc_integral(alpha: float, k):
    """``int_0^{pi/2} exp(i k e^{i t} - i alpha t) dt`` by Gauss-Legendre."""
    out = np.empty(k.shape, dtype=complex)
    # the integrand oscillates about k/(2 pi) times over the arc
    nodes_needed = (48 + 4 * np.ceil(k)).astype(int)
    for m in np.unique(nodes_needed):
        sel = nodes_needed == m
        t, w = np.polynomial.legendre.leggauss(int(m))
        theta = 0.25 * np.pi * (t + 1.0)
        w = 0.25 * np.pi * w
        kk = k[sel][:, None]
        e = np.exp(1j * theta)[None, :]
        vals = np.exp(1j * kk * e - 1j * alpha * theta[None, :])
        out[sel] = vals @ w
    return out


def _chi_beta_m1_contour(alpha: float, k):
    """``chi - 1`` by rotating the integration path onto the imaginary axis."""
    arc = 1j * alpha * _arc_integral(alpha, k)
    axis = alpha * np.exp(-0.5j * np.pi * alpha) * _upper_gamma_shifted(alpha, k)
    return arc + axis - 1.0


def _chi_beta_m1_series(alpha: float, k):
    """Convergent expansion in powers of ``k`` plus the ``k**alpha`` term."""
    out = alpha * sp.gamma(-alpha) * k ** alpha * np.exp(-0.5j * np.pi * alpha)
    term = np.ones(k.shape, dtype=complex)
    for m in range(1, 40):
        term = term * (1j * k) / m
        out = out + alpha * term / (alpha - m)
    return out


def chi_beta_m1(dist: DistributionSpec, k):
    """``chi(k) - 1`` for the power family."""
    if dist.family != "power":
        raise ParameterError("chi_beta needs a power-family law")
    alpha = dist.alpha
    if not alpha > 0:
        raise ParameterError("beta must exceed -1")
    if alpha >= 2.0:
        raise DomainError("characteristic functions are implemented for alpha < 2 only")
    scalar, kk = _as_k(k)

    def pos(z):
        out = np.empty(z.shape, dtype=complex)
        use_series = (z <= SERIES_K_BETA) & (abs(alpha - 1.0) > 0.05)
        if use_series.any():
            out[use_series] = _chi_beta_m1_series(alpha, z[use_series])
        if (~use_series).any():
            out[~use_series] = _chi_beta_m1_contour(alpha, z[~use_series])
        return out

    return _finish(_symmetric(pos, kk), scalar)


def chi_beta(dist: DistributionSpec, k):
    """Characteristic function of ``1/x`` for the power family.

    ``alpha * k**alpha * int_k^inf e^{iu} u^{-alpha-1} du`` for ``k > 0``,
    evaluated as an integral over a quarter arc of radius ``k`` plus an
    exponentially damped integral along the imaginary axis. For small
    ``k`` a convergent power series is used instead (except near
    ``alpha = 1``, where its coefficients blow up).
    """
    scalar, kk = _as_k(k)
    return _finish(1.0 + np.atleast_1d(chi_beta_m1(dist, kk)), scalar)


# --------------------------------------------------------------------------
# dispatcher


def chi_m1(dist: DistributionSpec, k):
    """``chi(k) - 1`` for any supported sampling law."""
    if dist.family == "power":
        if dist.beta == 0.0:
            return chi_uniform_m1(k)
        return chi_beta_m1(dist, k)
    scalar, kk = _as_k(k)
    t = dist.width
    rho = dist.remainder_density
    out = rho * chi_uniform_m1(kk)
    if dist.c0 != rho:
        out = out + (dist.c0 - rho) * t * chi_uniform_m1(kk / t)
    return _finish(out, scalar)


def chi(dist: DistributionSpec, k):
    scalar, kk = _as_k(k)
    return _finish(1.0 + np.atleast_1d(chi_m1(dist, kk)), scalar)


def chi_decay_constant(dist: DistributionSpec) -> float:
    """``L`` with ``|chi(k)| <= L / |k|`` (one integration by parts)."""
    if dist.family == "power":
        return 2.0 * dist.alpha
    rho = dist.remainder_density
    t = dist.width
    return 2.0 * (rho + abs(dist.c0 - rho) * t * t)


def log_psi_finite_n(dist: DistributionSpec, n: int, k):
    """``log Psi_n(k)`` on its principal continuous branch."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    scalar, kk = _as_k(k)
    a_n, b_n = norming(dist, n)
    out = n * _log1p_complex(np.atleast_1d(chi_m1(dist, a_n * kk))) - 1j * b_n * kk
    return _finish(out, scalar)


def psi_finite_n(dist: DistributionSpec, n: int, k):
    """Characteristic function of ``Y_n = a_n S_n - b_n``."""
    scalar, kk = _as_k(k)
    out = np.exp(np.atleast_1d(log_psi_finite_n(dist, n, kk)))
    out[kk == 0] = 1.0
    return _finish(out, scalar)


# --------------------------------------------------------------------------
# stable limits


@dataclass(frozen=True)
class StableLawSpec:
    """A totally skewed stable law with positive right tail.

    For ``alpha == 1``: ``log Psi = -c0 (pi/2 |k| + i k log|k|) + i shift k``.
    For ``alpha != 1``: ``log Psi = scale * (-i k)**alpha`` with
    ``(-i k)**alpha = |k|**alpha exp(-i pi alpha sign(k) / 2)``; ``scale`` is
    filled in by :func:`calibrate`.
    """

    alpha: float
    c0: float = 1.0
    p: float = 1.0
    q: float = 0.0
    calibration: str = "exact_alpha1"
    scale: Optional[float] = None
    shift: float = 0.0
    calibration_residual: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.p != 1.0 or self.q != 0.0:
            raise ParameterError("only the unbalanced law p = 1, q = 0 is supported")
        if self.calibration not in ("exact_alpha1", "limit_of_finite_n", "fixed"):
            raise ParameterError(f"unknown calibration mode {self.calibration!r}")

    @property
    def is_calibrated(self) -> bool:
        return self.alpha == 1.0 or self.scale is not None

    @classmethod
    def for_distribution(cls, dist: DistributionSpec) -> "StableLawSpec":
        """Limit law of ``Y_n`` for ``dist``; exact at ``alpha = 1``.

        For ``alpha != 1`` the result still needs :func:`calibrate`.
        """
        if dist.alpha == 1.0:
            c0 = dist.c0
            shift = (1.0 - EULER_GAMMA) * c0
            if dist.family == "plateau" and dist.width < 1.0:
                shift += (c0 - dist.remainder_density) * math.log(dist.width)
            return cls(alpha=1.0, c0=c0, calibration="exact_alpha1", shift=shift)
        return cls(alpha=dist.alpha, c0=dist.c0, calibration="limit_of_finite_n")

    @classmethod
    def with_scale(cls, alpha: float, scale: float) -> "StableLawSpec":
        """A law with a prescribed scale, for identities between unit laws."""
        return cls(alpha=alpha, c0=1.0, calibration="fixed", scale=float(scale))


def log_psi_stable(spec: StableLawSpec, k):
    scalar, kk = _as_k(k)
    if spec.alpha == 1.0:
        ak = np.abs(kk)
        with np.errstate(divide="ignore", invalid="ignore"):
            klog = np.where(ak > 0, kk * np.log(np.where(ak > 0, ak, 1.0)), 0.0)
        out = -spec.c0 * (0.5 * np.pi * ak + 1j * klog) + 1j * spec.shift * kk
    else:
        if spec.scale is None:
            raise StateError("stable law with alpha != 1 used before calibration")
        phase = np.exp(-0.5j * np.pi * spec.alpha * np.sign(kk))
        out = spec.scale * np.abs(kk) ** spec.alpha * phase
    return _finish(out, scalar)


def psi_stable(spec: StableLawSpec, k):
    scalar, kk = _as_k(k)
    return _finish(np.exp(np.atleast_1d(log_psi_stable(spec, kk))), scalar)


def envelope_rate(spec: StableLawSpec) -> float:
    """``r`` with ``|Psi(k)| = exp(-r |k|**alpha)``."""
    if spec.alpha == 1.0:
        return 0.5 * np.pi * spec.c0
    if spec.scale is None:
        raise StateError("stable law with alpha != 1 used before calibration")
    return -spec.scale * math.cos(0.5 * np.pi * spec.alpha)


def _richardson(ns, values, rates):
    """Extrapolate ``v(n) = v + sum_j c_j n^{-r_j}`` to ``n = inf``."""
    ns = np.asarray(ns, dtype=float)
    m = len(ns)
    use = list(rates)[: m - 1]
    A = np.ones((m, 1 + len(use)))
    for j, r in enumerate(use):
        A[:, 1 + j] = ns ** (-r)
    sol, *_ = np.linalg.lstsq(A, np.asarray(values, dtype=float), rcond=None)
    return float(sol[0])


CALIBRATION_KS = (0.5, 1.0, 2.0, 4.0)


def fit_scale(dist: DistributionSpec, n: int, ks: Sequence[float] = CALIBRATION_KS) -> float:
    """Least-squares scale ``s`` of ``log Psi_n(k) ~ s (-ik)**alpha``."""
    kk = np.asarray(ks, dtype=float)
    z = kk ** dist.alpha * np.exp(-0.5j * np.pi * dist.alpha)
    lp = np.asarray(log_psi_finite_n(dist, n, kk))
    return float(np.real(np.vdot(z, lp)) / np.real(np.vdot(z, z)))


def _correction_rates(alpha: float):
    """Exponents ``r`` of the ``n**-r`` corrections in the finite-n scale fit."""
    if alpha > 1:
        rates = [2.0 / alpha - 1.0, 1.0 / alpha, 3.0 / alpha - 1.0, 1.0]
    else:
        rates = [1.0 / alpha - 1.0, 1.0, 2.0 / alpha - 1.0]
    return sorted(set(rates))


def calibrate(spec: StableLawSpec, dist: DistributionSpec,
              n_list: Sequence[int] = tuple(10 ** e for e in (8, 10, 12, 14, 16)),
              ks: Sequence[float] = CALIBRATION_KS) -> StableLawSpec:
    """Fix the scale of an ``alpha != 1`` law as the limit of finite-n fits.

    The scale fitted at each ``n`` approaches its limit through powers of
    ``n`` whose exponents follow from the expansion of ``n log chi(a_n k)``;
    the leading ones are removed by extrapolation across ``n_list``.
    The residual ``max_k |Psi(k) - Psi_n(k)|`` at the largest ``n`` is stored.
    """
    if spec.alpha == 1.0:
        return spec
    if dist.alpha != spec.alpha:
        raise ParameterError("distribution and stable law have different alpha")
    alpha = spec.alpha
    fits = [fit_scale(dist, int(n), ks) for n in n_list]
    scale = _richardson(n_list, fits, _correction_rates(alpha))
    out = replace(spec, scale=scale, calibration="limit_of_finite_n")
    kk = np.asarray(ks, dtype=float)
    resid = float(np.max(np.abs(psi_stable(out, kk) - psi_finite_n(dist, n_list[-1], kk))))
    logger.debug("calibrated alpha=%g scale=%.12g (fits %s) residual %.3g",
                 alpha, scale, fits, resid)
    return replace(out, calibration_residual=resid)


# --------------------------------------------------------------------------
# evaluator objects used by the inversion routines


@dataclass(frozen=True)
class CharFunction:
    """A characteristic function with the metadata needed for inversion.

    ``kind`` is one of ``chi_uniform``, ``chi_beta``, ``psi_finite_n`` and
    ``psi_stable``. Calling the object evaluates it on real ``k`` (scalar or
    array).
    """

    kind: str
    dist: Optional[DistributionSpec] = None
    n: Optional[int] = None
    spec: Optional[StableLawSpec] = None

    def __post_init__(self):
        if self.kind in ("chi_uniform", "chi_beta", "psi_finite_n") and self.dist is None:
            raise ParameterError(f"{self.kind} needs a distribution")
        if self.kind == "psi_finite_n" and (self.n is None or self.n < 1):
            raise ParameterError("psi_finite_n needs n >= 1")
        if self.kind == "psi_stable" and self.spec is None:
            raise ParameterError("psi_stable needs a StableLawSpec")
        if self.kind not in ("chi_uniform", "chi_beta", "psi_finite_n", "psi_stable"):
            raise ParameterError(f"unknown kind {self.kind!r}")

    def __call__(self, k):
        if self.kind == "chi_uniform":
            return chi_uniform(k)
        if self.kind == "chi_beta":
            return chi_beta(self.dist, k)
        if self.kind == "psi_finite_n":
            return psi_finite_n(self.dist, self.n, k)
        return psi_stable(self.spec, k)

    @property
    def alpha(self) -> float:
        return self.spec.alpha if self.spec is not None else self.dist.alpha

    @property
    def support_floor(self) -> Optional[float]:
        """Lower end of the support of ``Y_n`` (every reciprocal is >= 1)."""
        if self.kind != "psi_finite_n":
            return None
        a_n, b_n = norming(self.dist, self.n)
        return a_n * self.n - b_n

    def default_eps(self) -> float:
        return 1e-6 if self.kind == "psi_finite_n" else 1e-8

    # -- truncation -------------------------------------------------------

    def tail_integral(self, K: float) -> float:
        """Upper bound on ``int_K^inf |F(k)| dk``."""
        if self.kind == "psi_stable":
            rate = envelope_rate(self.spec)
            a = self.alpha
            if a == 1.0:
                return math.exp(-rate * K) / rate
            return float(sp.gamma(1.0 / a) * sp.gammaincc(1.0 / a, rate * K ** a)
                         / (a * rate ** (1.0 / a)))
        if self.kind == "psi_finite_n":
            return self._finite_n_tail(K)
        raise TruncationError(f"{self.kind} does not decay fast enough to be inverted")

    def _finite_n_tail(self, K: float) -> float:
        n = self.n
        if n < 2:
            raise TruncationError("a single reciprocal has a non-integrable characteristic function")
        a_n, _ = norming(self.dist, n)
        L = chi_decay_constant(self.dist)
        scale = L / a_n
        k_far = 2.0 * scale

        def closing(kf):
            # int_kf^inf (scale / k)^n dk
            return scale * (scale / kf) ** (n - 1) / (n - 1)

        if K >= k_far:
            return closing(K)
        kg = np.geomspace(K, k_far, 2049)
        env = np.abs(psi_finite_n(self.dist, n, kg))
        return float(np.trapezoid(env, kg) * 1.05 + closing(k_far))

    def truncation_point(self, eps: float, K_max: float = 1e6) -> float:
        """Smallest convenient ``K`` with ``tail_integral(K) / pi < eps / 2``."""
        target = 0.5 * eps * math.pi
        K = 1.0
        while self.tail_integral(K) >= target:
            K *= 2.0
            if K > K_max:
                raise TruncationError(f"characteristic function does not decay below "
                                      f"eps={eps} before k={K_max}")
        lo, hi = K / 2.0, K
        if K == 1.0:
            return 1.0
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if self.tail_integral(mid) < target:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-3 * hi:
                break
        return hi


def make_char_function(kind: str, dist: Optional[DistributionSpec] = None,
                       n: Optional[int] = None,
                       spec: Optional[StableLawSpec] = None) -> CharFunction:
    return CharFunction(kind=kind, dist=dist, n=n, spec=spec)
