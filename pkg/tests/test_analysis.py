import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_teleport import analysis
from cavity_teleport.analysis import (
    ProtocolParams,
    analytic_success_prob,
    analytic_success_prob_n,
    enumerate_branches,
    exhaustive_success_prob,
    fit_power_law,
    monte_carlo,
    run_protocol,
    swapped_pair_concurrence,
    timing_sensitivity,
    trial_rng,
)
from cavity_teleport.protocol import ChannelSpec, InputState, ProtocolError
from conftest import random_channel, random_input
from oracles import filtered_success_probability

CH08 = ChannelSpec(math.sqrt(0.8), math.sqrt(0.2))
CH07 = ChannelSpec(math.sqrt(0.7), math.sqrt(0.3))
INP = InputState(0.6, 0.8)


def test_equal_channel_breakdown():
    br = analytic_success_prob(CH08, CH08)
    assert br.p_a == pytest.approx(0.04, abs=1e-12) and br.p_d == br.p_a
    assert br.p_b == pytest.approx(0.16, abs=1e-12) and br.p_c == br.p_b
    assert br.total == pytest.approx(2 * 0.2, abs=1e-12)


def test_asymmetric_channels():
    br = analytic_success_prob(CH08, CH07)
    assert br.total == pytest.approx(0.4, abs=1e-12)
    assert exhaustive_success_prob("nonmaximal", ProtocolParams(INP, (CH08, CH07))) == \
        pytest.approx(br.total, abs=1e-10)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_analytic_matches_exhaustive_and_oracle(seed):
    rng = np.random.default_rng(seed)
    c1, c2 = random_channel(rng), random_channel(rng)
    ex = exhaustive_success_prob("nonmaximal", ProtocolParams(random_input(rng), (c1, c2)))
    assert analytic_success_prob(c1, c2).total == pytest.approx(ex, abs=1e-10)
    assert filtered_success_probability([c1.vector(), c2.vector()]) == pytest.approx(ex, abs=1e-10)


def test_weaker_alpha_side():
    c1, c2 = ChannelSpec(math.sqrt(0.1), math.sqrt(0.9)), ChannelSpec(math.sqrt(0.35), math.sqrt(0.65))
    ex = exhaustive_success_prob("nonmaximal", ProtocolParams(INP, (c1, c2)))
    assert analytic_success_prob(c1, c2).total == pytest.approx(ex, abs=1e-10)


def test_n_pair_formula(rng):
    for n in (2, 3):
        chans = [random_channel(rng) for _ in range(n)]
        want = filtered_success_probability([c.vector() for c in chans])
        assert analytic_success_prob_n(chans) == pytest.approx(want, abs=1e-10)
    assert analytic_success_prob_n([CH08, CH07]) == pytest.approx(
        analytic_success_prob(CH08, CH07).total, abs=1e-14)


def test_register_size_limit(monkeypatch):
    monkeypatch.setattr(analysis, "MAX_EXHAUSTIVE_SITES", 6)
    enumerate_branches("maximal", ProtocolParams(INP))
    with pytest.raises(ProtocolError):
        enumerate_branches("nonmaximal", ProtocolParams(INP, (CH08, CH08)))
    with pytest.raises(ProtocolError):
        run_protocol("bogus", ProtocolParams(INP))
    with pytest.raises(ProtocolError):
        run_protocol("nonmaximal", ProtocolParams(INP, (CH08,)))


def test_trial_streams_are_independent_of_order():
    a = trial_rng(5, 17).random(3)
    trial_rng(5, 3).random(10)
    np.testing.assert_array_equal(a, trial_rng(5, 17).random(3))
    assert not np.array_equal(a, trial_rng(5, 18).random(3))
    assert not np.array_equal(a, trial_rng(6, 17).random(3))


def test_monte_carlo_rate_within_4_sigma():
    trials = 20_000
    mc = monte_carlo("nonmaximal", ProtocolParams(INP, (CH08, CH08)), trials, seed=42)
    assert abs(mc.success_rate - 0.4) <= 4 * math.sqrt(0.4 * 0.6 / trials)
    assert mc.min_conditional_fidelity >= 1 - 1e-10
    assert mc.ci95[0] < mc.success_rate < mc.ci95[1]


def test_monte_carlo_determinism_and_workers():
    params = ProtocolParams(INP, (CH08, CH07))
    a = monte_carlo("nonmaximal", params, 400, seed=9)
    assert a == monte_carlo("nonmaximal", params, 400, seed=9)
    assert a == monte_carlo("nonmaximal", params, 400, seed=9, workers=3)
    assert a != monte_carlo("nonmaximal", params, 400, seed=10)


def test_monte_carlo_maximal_always_succeeds():
    mc = monte_carlo("maximal", ProtocolParams(INP), 200, seed=1)
    assert mc.successes == 200 and mc.min_conditional_fidelity >= 1 - 1e-10
    with pytest.raises(ValueError):
        monte_carlo("maximal", ProtocolParams(INP), 0)


def test_sweep_zero_offset_is_exact():
    sw = timing_sensitivity("maximal", ProtocolParams(INP), [0.0])
    assert sw.points[0].mean_fidelity == pytest.approx(1.0, abs=1e-12)
    assert sw.points[0].success_rate == pytest.approx(1.0, abs=1e-12)


def test_sweep_infidelity_is_quadratic():
    grid = np.logspace(-3, -1, 7)
    sw = timing_sensitivity("maximal", ProtocolParams(InputState(2**-0.5, 2**-0.5)), grid)
    k, _ = fit_power_law(grid, [1 - p.mean_fidelity for p in sw.points])
    assert abs(k - 2) < 0.3
    neg = timing_sensitivity("maximal", ProtocolParams(InputState(2**-0.5, 2**-0.5)), -grid)
    np.testing.assert_allclose([p.mean_fidelity for p in neg.points],
                               [p.mean_fidelity for p in sw.points], atol=1e-12)


def test_filter_timing_sweep():
    sw = timing_sensitivity("nonmaximal", ProtocolParams(INP, (CH08, CH08)), [0.0, 0.05],
                            parameter="epsilon_t")
    assert sw.points[0].mean_fidelity == pytest.approx(1.0, abs=1e-12)
    assert sw.points[1].mean_fidelity < 1
    with pytest.raises(ValueError):
        timing_sensitivity("maximal", ProtocolParams(INP), [0.0], parameter="bogus")


def test_sweep_monte_carlo_mode():
    sw = timing_sensitivity("maximal", ProtocolParams(INP), [0.0, 0.1], trials=50, seed=3)
    assert sw.trials == 50 and sw.points[0].success_rate == 1.0


def test_fit_power_law_recovers_exponent():
    x = np.logspace(-2, 0, 5)
    k, c = fit_power_law(x, 3 * x**1.5)
    assert k == pytest.approx(1.5) and c == pytest.approx(math.log(3))


def test_swapped_pair_concurrence():
    rec = run_protocol("maximal", ProtocolParams(INP), np.random.default_rng(0))
    assert swapped_pair_concurrence(rec) == pytest.approx(2 * 0.6 * 0.8, abs=1e-10)
    fail = next(b for b in enumerate_branches("nonmaximal", ProtocolParams(INP, (CH08, CH08)))
                .branches if not b.success)
    with pytest.raises(ProtocolError):
        swapped_pair_concurrence(fail)
