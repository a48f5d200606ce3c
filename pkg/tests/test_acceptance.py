"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every criterion records a one-line PASS/FAIL verdict with the measured
values; the verdicts are printed at the end of the pytest run (see
``conftest.py``) and when this file is executed directly.
"""

import math
import time

import numpy as np
import pytest

from harmonic_stable.harmonic import mc_estimate, replicate_values
from harmonic_stable.learner import random_learner, scaling_experiment
from harmonic_stable.overlap import (compute_cn, dense_charpoly, from_overlaps, spectrum,
                                     structured_charpoly)
from harmonic_stable.polyroots import RootSet, derivative_roots, harmonic_bounds
from harmonic_stable.sampling import StreamKey, make_distribution, substream, uniform
from harmonic_stable.stable.charfn import CharFunction, StableLawSpec, calibrate, psi_stable
from harmonic_stable.stable.experiments import (density_gap_experiment,
                                                harmonic_mean_expectation, zolotarev_residual)
from harmonic_stable.stable.inversion import cdf_with_tails, invert_to_density, ks_distance

SEED = 20240611
VERDICTS = {}


def _record(number, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    passed = bool(ok and in_time)
    line = (f"{'PASS' if passed else 'FAIL'}  criterion {number:2d}: {detail} "
            f"[{elapsed:.1f} s, limit {limit:.0f} s]")
    VERDICTS[number] = line
    print(line)
    return passed


def _stable_cdf(dist, x_lo, x_hi, step):
    spec = StableLawSpec.for_distribution(dist)
    spec = calibrate(spec, dist)
    x = x_lo + step * np.arange(int(round((x_hi - x_lo) / step)) + 1)
    grid = invert_to_density(CharFunction("psi_stable", spec=spec), x)
    return grid, cdf_with_tails(grid)


def _ks_vs_limit(sample, dist, x_hi=60.0, step=0.05, floor=None):
    """KS distance of a sample against the stable limit of ``dist``."""
    y = np.sort(np.asarray(sample))
    x_lo = math.floor(y[0]) - 1.0 if floor is None else floor
    _, G = _stable_cdf(dist, min(x_lo, -5.0) if floor is None else x_lo, x_hi, step)
    return ks_distance(y, G).D


# --------------------------------------------------------------------------


def criterion_1():
    key = StreamKey(SEED, (1,))
    worst = 0.0
    for i in range(200):
        n = 2 + i % 7
        a = substream(key, i).generator().random(n)
        M = from_overlaps(a)
        s = structured_charpoly(M).coefficients
        d = dense_charpoly(M.dense_b())
        worst = max(worst, float(np.max(np.abs(s - d)) / np.max(np.abs(d))))
    return worst < 1e-10, f"max relative coefficient error {worst:.2e} (< 1e-10)"


def criterion_2():
    key = StreamKey(SEED, (2,))
    worst = 0.0
    exact_one = True
    for i in range(50):
        n = 3 + (47 * i) // 49
        a = np.r_[1.0, substream(key, i).generator().random(n - 1)]
        M = from_overlaps(a, learner_mode=True)
        lam = spectrum(M).lam
        ev = np.sort(np.linalg.eigvals(M.dense()).real)[::-1]
        worst = max(worst, float(np.max(np.abs(lam - ev))))
        exact_one &= lam[0] == 1.0
    return worst < 1e-10 and exact_one, \
        f"max |lambda - dense| {worst:.2e} (< 1e-10), lambda_1 == 1: {exact_one}"


def criterion_3():
    key = StreamKey(SEED, (3,))
    sizes = [int(s) for s in substream(key, 0).generator().integers(2, 500, size=990)]
    sizes += list(range(1000, 10_001, 1000))
    interlace_bad = bound_bad = 0
    for i, n in enumerate(sizes):
        x = substream(key, i + 1).generator().random(n)
        d = derivative_roots(RootSet(np.sort(x), clamped_zero=True))
        interlace_bad += not d.interlacing_holds()
        lo, hi = harmonic_bounds(x)
        mu = d.mu_star
        bound_bad += not (lo <= mu <= hi)
    ok = interlace_bad == 0 and bound_bad == 0
    return ok, (f"{len(sizes)} root sets (n up to {max(sizes)}): interlacing violations "
                f"{interlace_bad}, bound violations {bound_bad}")


def criterion_4():
    grid, G = _stable_cdf(uniform(), -5.0, 60.0, 0.05)
    mass = grid.total_mass()
    tail = 50.0 * G.survival(50.0)
    spec = StableLawSpec.for_distribution(uniform())
    psi2 = abs(abs(psi_stable(spec, 2.0)) - math.exp(-math.pi))
    ok = abs(mass - 1) <= 1e-6 and 0.97 <= tail <= 1.03 and psi2 <= 1e-10
    return ok, (f"mass {mass:.10f} (1 +- 1e-6), x(1-G(x)) at 50 = {tail:.4f} ([0.97, 1.03]), "
                f"||Psi(2)| - e^-pi| = {psi2:.1e}")


def criterion_5():
    xs = [0.5, 1.0, 2.0, 3.0]
    lhs, rhs = zolotarev_residual(1.5, xs)
    worst = float(np.max(np.abs(lhs - rhs)))
    return worst < 1e-3, f"max |lhs - rhs| over x in {xs} = {worst:.2e} (< 1e-3)"


def criterion_6():
    n = 100_000
    s = mc_estimate("H_log_n", uniform(), n, 4000, StreamKey(SEED, (6,)))
    q = harmonic_mean_expectation(uniform(), n)
    ref = q.value * math.log(n)
    band = 0.85 <= s.mean <= 1.05
    agree = abs(s.mean - ref) <= 3 * s.stderr
    return band and agree, (f"MC mean {s.mean:.4f} +- {s.stderr:.4f} (band [0.85, 1.05]: {band}); "
                            f"quadrature {ref:.4f}, |diff| {abs(s.mean - ref):.4f} "
                            f"(3 stderr = {3 * s.stderr:.4f})")


def criterion_7():
    M = 20_000
    D = {}
    for n in (1000, 10_000, 100_000):
        w = replicate_values("H_log2_shift", uniform(), n, M, StreamKey(SEED, (7, n)))
        # P(W <= x) = 1 - G(-x) means -W follows G
        D[n] = _ks_vs_limit(-w, uniform())
    dec = D[1000] > D[10_000] > D[100_000]
    ok = D[10_000] < 0.12 and dec
    return ok, (f"KS at n=1e3, 1e4, 1e5: {D[1000]:.4f}, {D[10_000]:.4f}, {D[100_000]:.4f} "
                f"(n=1e4 < 0.12; strictly decreasing: {dec})")


def criterion_8():
    n, M = 10_000, 20_000
    y = replicate_values("Y", uniform(), n, M, StreamKey(SEED, (8,)))
    D = _ks_vs_limit(y, uniform())
    return D < 0.02, f"KS(Y_n, G) at n=1e4, M=2e4 = {D:.4f} (< 0.02)"


def criterion_9():
    dist = make_distribution("power", 0.5)
    n, M = 100_000, 4000
    key = StreamKey(SEED, (9,))
    h = replicate_values("H", dist, n, M, key)
    mean_err = abs(h.mean() - 1 / 3)
    z = n ** (1 / 3) * (h - 1 / 3)
    # P(Z <= x) = 1 - G(-9x) means -9Z follows G
    D = _ks_vs_limit(-9 * z, dist)
    ok = mean_err < 0.01 and D < 0.05
    return ok, f"|E(H_n) - 1/3| = {mean_err:.5f} (< 0.01), KS = {D:.4f} (< 0.05), M = {M}"


def criterion_10():
    dist = make_distribution("power", -0.5)
    ns = [10_000, 20_000, 40_000]
    M = 4000
    means = []
    last = None
    for n in ns:
        v = replicate_values("n_H", dist, n, M, StreamKey(SEED, (10, n)))
        means.append(float(v.mean()))
        last = v
    close = all(abs(b - a) / a < 0.10 for a, b in zip(means, means[1:]))
    # P(V <= x) = 1 - G(1/x) means 1/V follows G
    D = _ks_vs_limit(1.0 / last, dist, x_hi=200.0, step=0.01, floor=0.0)
    ok = close and D < 0.05
    return ok, (f"E(nH_n) = {', '.join(f'{m:.4f}' for m in means)} (consecutive within 10%: "
                f"{close}); KS at n=4e4 = {D:.4f} (< 0.05)")


def criterion_11():
    x = np.arange(-5, 60 + 1e-9, 0.05)
    rows = density_gap_experiment(uniform(), [100, 1000, 10_000], x)
    gaps = [r.gap for r in rows]
    ratios = [r.ratio for r in rows]
    dec = gaps[0] > gaps[1] > gaps[2]
    band = max(ratios) / min(ratios)
    return dec and band < 3, (f"gaps {', '.join(f'{g:.3e}' for g in gaps)} (decreasing: {dec}); "
                              f"ratio band x{band:.2f} (< x3)")


def criterion_12():
    out = []
    ok = True
    for beta, limit in ((0.0, 2.0), (0.5, 2.0), (-0.5, 4.0)):
        rows = scaling_experiment(make_distribution("power", beta), 0.01, [100, 300, 1000], 50,
                                  StreamKey(SEED, (12, int(10 * beta) % 100)))
        r = [row.ratio for row in rows]
        band = max(r) / min(r)
        ok &= band < limit
        out.append(f"beta={beta:+.1f} ratios {', '.join(f'{v:.3f}' for v in r)} "
                   f"band x{band:.2f} (< x{limit:.0f})")
    return ok, "; ".join(out)


def criterion_13():
    key = StreamKey(SEED, (13,))
    cn = np.array([compute_cn(random_learner(uniform(), 500, substream(key, r))).exact
                   for r in range(200)])
    frac = float(np.mean((cn >= 0.8) & (cn <= 2.2)))
    worst = 0.0
    for i, n in enumerate((3, 5, 10, 20)):
        M = random_learner(uniform(), n, substream(StreamKey(SEED, (13, 1)), i))
        ev, R = np.linalg.eig(M.dense())
        L = np.linalg.inv(R)
        j = int(np.argsort(ev.real)[-2])
        ref = float((-(np.full(n, 1 / n) @ R[:, j]) * L[j, 0]).real)
        worst = max(worst, abs(compute_cn(M).exact - ref))
    ok = frac >= 0.95 and worst < 1e-9
    return ok, (f"fraction of C_n in [0.8, 2.2] = {frac:.3f} (>= 0.95; range "
                f"{cn.min():.3f}..{cn.max():.3f}); dense oracle error {worst:.1e} (< 1e-9)")


def criterion_14():
    n, reps = 1000, 10_000
    out = []
    ok = True
    for i in (1, 10):
        s = mc_estimate(f"m{i}", uniform(), n, reps, StreamKey(SEED, (14, i)))
        target = i / (n + 1)
        good = abs(s.mean - target) < 3 * s.stderr
        ok &= good
        out.append(f"E(m{i}) = {s.mean:.6f} vs {target:.6f} (|diff| {abs(s.mean - target):.1e}, "
                   f"3 stderr {3 * s.stderr:.1e})")
    return ok, "; ".join(out)


CRITERIA = [
    (1, criterion_1, 5), (2, criterion_2, 30), (3, criterion_3, 60), (4, criterion_4, 30),
    (5, criterion_5, 120), (6, criterion_6, 120), (7, criterion_7, 180), (8, criterion_8, 120),
    (9, criterion_9, 180), (10, criterion_10, 180), (11, criterion_11, 180),
    (12, criterion_12, 600), (13, criterion_13, 120), (14, criterion_14, 30),
]


@pytest.mark.parametrize("number,fn,limit", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, fn, limit):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    assert _record(number, ok, detail, elapsed, limit), VERDICTS[number]


if __name__ == "__main__":
    for number, fn, limit in CRITERIA:
        t0 = time.perf_counter()
        ok, detail = fn()
        _record(number, ok, detail, time.perf_counter() - t0, limit)
