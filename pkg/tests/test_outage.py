import math

import pytest

from fsorelay.channels import GammaGammaPointingParams, NegExpParams, RayleighParams, ne_cdf
from fsorelay.outage import OutageRequest, outage_gg, outage_ne, outage_probability
from fsorelay.relay import LinkConfig, af_relay_cdf


def gg(mean, regime="moderate"):
    a, b, xi = {"moderate": (4.0, 1.9, 10.45), "strong": (4.2, 1.4, 2.45)}[regime]
    return GammaGammaPointingParams(a, b, xi, mean)


@pytest.mark.parametrize("regime", ["moderate", "strong"])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_gamma_gamma_forms_agree(regime, m):
    cfg = LinkConfig(n_antennas=2, n_relays=m)
    fso, rf = gg(100.0, regime), RayleighParams(100.0)
    ref = outage_gg(OutageRequest(cfg, fso, rf, "factored"))
    for form in ("expanded", "series"):
        assert outage_gg(OutageRequest(cfg, fso, rf, form)) == pytest.approx(ref, rel=1e-8)


def test_negative_exponential_forms_agree():
    cfg = LinkConfig(n_antennas=3, n_relays=3)
    fso, rf = NegExpParams(1.0, 300.0), RayleighParams(300.0)
    exp = outage_ne(OutageRequest(cfg, fso, rf, "expanded"))
    assert outage_ne(OutageRequest(cfg, fso, rf, "factored")) == pytest.approx(exp, rel=1e-9)
    # The square-root asymptote overestimates the FSO CDF, so the asymptotic
    # outage sits above the exact one and approaches it with SNR.
    asym = outage_ne(OutageRequest(cfg, fso, rf, "asymptotic"))
    assert exp < asym < 1.2 * exp
    far = NegExpParams(1.0, 1e5), RayleighParams(1e5)
    e2 = outage_ne(OutageRequest(cfg, *far, "expanded"))
    a2 = outage_ne(OutageRequest(cfg, *far, "asymptotic"))
    assert a2 == pytest.approx(e2, rel=0.02)


def test_single_relay_is_product_of_af_cdfs():
    cfg = LinkConfig(n_antennas=2, n_relays=1)
    fso, rf = gg(50.0, "strong"), RayleighParams(50.0)
    g = cfg.gamma_th
    expected = af_relay_cdf("gg", cfg, fso, rf, g) * af_relay_cdf("rf", cfg, rf, rf, g)
    assert outage_probability(cfg, fso, rf) == pytest.approx(expected, rel=1e-10)


def test_extra_df_hop_multiplies_survival():
    fso, rf = NegExpParams(1.0, 100.0), RayleighParams(100.0)
    p1 = outage_probability(LinkConfig(n_relays=1), fso, rf)
    p2 = outage_probability(LinkConfig(n_relays=2), fso, rf)
    g = 10.0
    hop = 1 - ne_cdf(fso, g) * -math.expm1(-g / 100.0)
    assert 1 - p2 == pytest.approx((1 - p1) * hop, rel=1e-10)


def test_frozen_value_confirmed_by_simulation():
    # 25 dB, moderate turbulence, N = M = 2, C = 1, threshold 10 dB.  A 1e7
    # trial simulation gave 0.0030252 +- 1.7e-5 (one sigma).
    mean = 10 ** 2.5
    p = outage_probability(LinkConfig(), gg(mean), RayleighParams(mean))
    assert p == pytest.approx(0.0030232102469, rel=1e-9)


def test_outage_decreases_with_snr_and_increases_with_threshold():
    cfg = LinkConfig()
    vals = [outage_probability(cfg, gg(10 ** (d / 10)), RayleighParams(10 ** (d / 10)))
            for d in (10, 20, 30)]
    assert vals[0] > vals[1] > vals[2] > 0
    fso, rf = gg(100.0), RayleighParams(100.0)
    assert outage_probability(cfg, fso, rf, gamma_th=5.0) < outage_probability(cfg, fso, rf, gamma_th=20.0)


def test_request_validation():
    cfg, rf = LinkConfig(), RayleighParams(10.0)
    with pytest.raises(ValueError):
        OutageRequest(cfg, gg(10.0), rf, "asymptotic")
    with pytest.raises(ValueError):
        OutageRequest(cfg, NegExpParams(1.0, 10.0), rf, "series")
    with pytest.raises(TypeError):
        OutageRequest(cfg, rf, rf)
    with pytest.raises(ValueError):
        outage_gg(OutageRequest(cfg, gg(10.0), rf), gamma_th=0.0)


def test_asymptotic_form_can_be_left_unclamped():
    cfg = LinkConfig(n_relays=2)
    fso, rf = NegExpParams(3.0, 10.0), RayleighParams(10.0)
    req = OutageRequest(cfg, fso, rf, "asymptotic")
    assert outage_ne(req) == 1.0
    assert outage_ne(req, clamp=False) > 1.0
