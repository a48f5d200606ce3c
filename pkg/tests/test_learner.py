import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from harmonic_stable.errors import ParameterError
from harmonic_stable.learner import (SpectralFailure, n_delta, n_delta_bounds, propagate, q_exact,
                                     random_learner, scaling_experiment, simulate_agent,
                                     simulate_agents)
from harmonic_stable.overlap import compute_cn, from_overlaps, spectrum
from harmonic_stable.sampling import StreamKey, make_distribution, substream, uniform

TWO = from_overlaps([1.0, 0.5], learner_mode=True)


def test_initial_guess_is_uniform():
    assert q_exact(from_overlaps([1, 0.2, 0.7, 0.4], learner_mode=True), 0) == 0.25


def test_two_state_closed_form():
    assert q_exact(TWO, 3) == pytest.approx(0.9375, abs=1e-15)


def test_spectral_reconstruction_twenty_states(rng):
    M = from_overlaps(np.r_[1.0, rng.random(19)], learner_mode=True)
    assert abs(1 - q_exact(M, 100) - SpectralFailure.from_matrix(M)(100)) < 1e-9


@given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=19), st.integers(0, 300))
def test_spectral_cross_validation(a, N):
    M = from_overlaps([1.0] + a, learner_mode=True)
    assert abs(1 - q_exact(M, N) - SpectralFailure.from_matrix(M)(N)) < 1e-8


@given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=30))
def test_q_nondecreasing(a):
    q = propagate(from_overlaps([1.0] + a, learner_mode=True), 200)
    assert np.all(np.diff(q) >= -1e-15)


def test_n_delta_two_states():
    tr = n_delta(TWO, 0.01)
    assert tr.n_delta == 6
    assert 1 - tr.q_values[-1] <= 0.01 < 1 - tr.q_values[-2]


def test_n_delta_trivial_threshold():
    M = from_overlaps([1, 0.3, 0.6, 0.1], learner_mode=True)
    assert n_delta(M, 0.75).n_delta == 0
    assert n_delta(M, 0.9).n_delta == 0


def test_n_delta_domain():
    with pytest.raises(ParameterError):
        n_delta(TWO, 0.0)
    with pytest.raises(ParameterError):
        n_delta(from_overlaps([1, 0.5]), 0.1)


@given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=15), st.floats(1e-6, 0.5),
       st.floats(1e-6, 0.5))
def test_n_delta_monotone_in_delta(a, d1, d2):
    M = from_overlaps([1.0] + a, learner_mode=True)
    lo, hi = sorted((d1, d2))
    assert n_delta(M, lo).n_delta >= n_delta(M, hi).n_delta


def test_spectral_search_matches_exact_propagation(rng):
    M = from_overlaps(np.r_[1.0, rng.random(99)], learner_mode=True)
    exact = n_delta(M, 1e-3, cost_cap=10 ** 9)
    fast = n_delta(M, 1e-3, cost_cap=500)
    assert fast.method == "spectral" and exact.method == "exact"
    assert fast.n_delta == exact.n_delta


def test_agent_is_absorbed():
    # with a single alternative state the agent must hit the truth and stay
    M = from_overlaps([1.0, 0.0], learner_mode=True)
    assert simulate_agent(M, 1, StreamKey(0)) and simulate_agent(M, 50, StreamKey(1))


def test_agent_deterministic():
    M = from_overlaps([1, 0.3, 0.8, 0.5], learner_mode=True)
    runs = [simulate_agent(M, 4, StreamKey(3, (r,))) for r in range(50)]
    assert runs == [simulate_agent(M, 4, StreamKey(3, (r,))) for r in range(50)]


def test_literal_agent_success_rate():
    reps = 20_000
    hits = sum(simulate_agent(TWO, 3, StreamKey(4, (r,))) for r in range(reps))
    se = math.sqrt(0.9375 * 0.0625 / reps)
    assert abs(hits / reps - 0.9375) < 3 * se


def test_vectorised_agents_two_states():
    rate = simulate_agents(TWO, 3, 100_000, StreamKey(5)).mean()
    assert abs(rate - 0.9375) < 3 * math.sqrt(0.9375 * 0.0625 / 100_000)


def test_agents_agree_with_exact_chain():
    reps = 100_000
    key = StreamKey(6)
    for i in range(5):
        M = random_learner(uniform(), 8, substream(key, i))
        N = 10
        p = q_exact(M, N)
        rate = simulate_agents(M, N, reps, substream(substream(key, i), 1)).mean()
        z = (rate - p) / math.sqrt(p * (1 - p) / reps)
        assert abs(z) < 2.576


def test_n_delta_bracket_constants():
    # N_delta between (|log d| - log 2.2)/|log l*| - 1 and (|log d| + log 1.2)/|log l*| + 1
    key = StreamKey(8)
    delta = 0.01
    for i, n in enumerate([100, 100, 300, 300, 1000]):
        M = random_learner(uniform(), n, substream(key, i))
        L = abs(math.log(spectrum(M).lambda_star))
        N = n_delta(M, delta).n_delta
        assert (abs(math.log(delta)) - math.log(2.2)) / L - 1 <= N
        assert N <= (abs(math.log(delta)) + math.log(1.2)) / L + 1


def test_n_delta_bounds_from_cn():
    key = StreamKey(9)
    for i in range(5):
        M = random_learner(uniform(), 200, substream(key, i))
        lo, hi = n_delta_bounds(M, 0.01)
        assert lo <= n_delta(M, 0.01).n_delta <= hi


def test_exact_cn_below_one_minus_one_over_n():
    key = StreamKey(10)
    for i in range(20):
        M = random_learner(uniform(), 100, substream(key, i))
        assert 0 < compute_cn(M).exact < 1 - 1 / 100


def _band(rows):
    r = [row.ratio for row in rows]
    return max(r) / min(r)


def test_scaling_uniform():
    rows = scaling_experiment(uniform(), 0.01, [100, 300, 1000], 50, StreamKey(7))
    assert _band(rows) < 2


def test_scaling_positive_beta():
    rows = scaling_experiment(make_distribution("power", 0.5), 0.01, [100, 300, 1000], 50,
                              StreamKey(7))
    assert _band(rows) < 2


def test_scaling_negative_beta():
    rows = scaling_experiment(make_distribution("power", -0.5), 0.01, [50, 100, 200], 50,
                              StreamKey(7))
    assert _band(rows) < 4


def test_scaling_is_reproducible():
    a = scaling_experiment(uniform(), 0.05, [20, 40], 5, StreamKey(1))
    b = scaling_experiment(uniform(), 0.05, [20, 40], 5, StreamKey(1))
    assert a == b
