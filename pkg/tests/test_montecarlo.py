import math

import numpy as np
import pytest

from fsorelay.channels import GammaGammaPointingParams, NegExpParams, RayleighParams
from fsorelay.montecarlo import (
    BLOCK_SIZE,
    WORKERS_ENV,
    SimConfig,
    block_rng,
    empirical_cdf,
    sample_af_snr,
    simulate_link,
)
from fsorelay.outage import outage_probability
from fsorelay.relay import LinkConfig, af_relay_cdf

MEAN = 100.0
FSO = GammaGammaPointingParams(4.2, 1.4, 2.45, MEAN)
RF = RayleighParams(MEAN)


def test_result_independent_of_worker_count(monkeypatch):
    trials = 3 * BLOCK_SIZE + 17
    a = simulate_link(LinkConfig(), FSO, RF, SimConfig(trials, seed=5, workers=1))
    b = simulate_link(LinkConfig(), FSO, RF, SimConfig(trials, seed=5, workers=3))
    monkeypatch.setenv(WORKERS_ENV, "2")
    c = simulate_link(LinkConfig(), FSO, RF, SimConfig(trials, seed=5))
    assert a == b == c
    assert a.trials_used == trials
    d = simulate_link(LinkConfig(), FSO, RF, SimConfig(trials, seed=6))
    assert d != a


def test_block_streams_are_distinct_and_reproducible():
    x = block_rng(1, 0).random(4)
    assert np.array_equal(x, block_rng(1, 0).random(4))
    assert not np.array_equal(x, block_rng(1, 1).random(4))


def test_empirical_cdf():
    s = np.array([1.0, 2.0, 2.0, 5.0])
    assert empirical_cdf(s, 2.0) == 0.75
    assert empirical_cdf(s, 0.5) == 0.0
    with pytest.raises(ValueError):
        empirical_cdf([], 1.0)


def test_threshold_limits():
    sim = SimConfig(20_000, seed=3)
    low = simulate_link(LinkConfig(gamma_th=1e-12), FSO, RF, sim)
    high = simulate_link(LinkConfig(gamma_th=1e12), FSO, RF, sim)
    assert low.outage_rate == 0.0 and low.outage_ci95 == 0.0
    assert high.outage_rate == 1.0


@pytest.mark.parametrize("fso", [FSO, NegExpParams(1.0, MEAN)])
def test_outage_agrees_with_analytic(fso):
    cfg = LinkConfig(n_relays=3)
    res = simulate_link(cfg, fso, RF, SimConfig(400_000, seed=11))
    p = outage_probability(cfg, fso, RF)
    assert abs(res.outage_rate - p) < 4 * res.outage_sigma


def test_af_sampler_against_cdf():
    cfg = LinkConfig(n_antennas=3)
    x = np.sort(sample_af_snr(cfg, FSO, RF, np.random.default_rng(2), 300_000))
    for g in (5.0, 20.0, 60.0):
        f = af_relay_cdf("gg", cfg, FSO, RF, g)
        assert abs(empirical_cdf(x, g) - f) < 5 * math.sqrt(f * (1 - f) / x.size)


def test_semi_analytic_ber_has_lower_variance_than_bit_counting():
    cfg = LinkConfig(n_relays=1)
    mean = 10.0
    res = simulate_link(cfg, FSO.with_mean_snr(mean), RayleighParams(mean),
                        SimConfig(200_000, seed=4, count_bits=True))
    p = res.bit_error_rate
    assert abs(p - res.ber_estimate) < 5 * math.sqrt(p * (1 - p) / res.trials_used)
    assert res.ber_std < math.sqrt(p * (1 - p))
    assert simulate_link(cfg, FSO, RF, SimConfig(1000)).bit_error_rate is None


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(0)
    with pytest.raises(ValueError):
        SimConfig(10, seed=-1)
    with pytest.raises(ValueError):
        SimConfig(10, mode="bogus")
    with pytest.raises(ValueError):
        SimConfig(10, workers=0)


def test_shared_first_hop_mode_runs():
    res = simulate_link(LinkConfig(), FSO, RF, SimConfig(50_000, seed=1, mode="shared_gamma1"))
    assert 0.0 < res.outage_rate < 1.0
