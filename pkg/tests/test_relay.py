import math

import numpy as np
import pytest
from scipy import integrate

from fsorelay.channels import GammaGammaPointingParams, NegExpParams, RayleighParams, gg_pe_cdf
from fsorelay.relay import (
    LinkConfig,
    af_kernel,
    af_relay_cdf,
    opportunistic_cdf,
    sc_cdf,
    sc_pdf,
    sc_weights,
)

# P(g1 g2 / (C + g2) < x) by mpmath quadrature over the selection-combined
# first hop (30 digits).  Columns: branch, second hop, N, C, first-hop mean, x, value.
AF_REFERENCE = [
    ("rf", RayleighParams(5.0), 2, 1.0, 5.0, 1.0, 0.1039996887025268),
    ("rf", RayleighParams(20.0), 3, 2.0, 10.0, 4.0, 0.09579917625052255),
    ("ne", NegExpParams(1.0, 30.0), 2, 1.0, 30.0, 3.0, 0.0719173846854865),
    ("ne", NegExpParams(2.0, 10.0), 1, 0.5, 10.0, 1.0, 0.2736974090264624),
]


@pytest.mark.parametrize("branch, ch, n, c, g1, x, expected", AF_REFERENCE)
def test_af_cdf_matches_reference(branch, ch, n, c, g1, x, expected):
    cfg = LinkConfig(n_antennas=n, fixed_gain_c=c)
    assert af_relay_cdf(branch, cfg, ch, RayleighParams(g1), x) == pytest.approx(expected, rel=1e-10)


def test_gamma_gamma_af_cdf_matches_quadrature():
    ch = GammaGammaPointingParams(4.0, 1.9, 10.45, 100.0)
    rf1 = RayleighParams(100.0)
    cfg = LinkConfig(n_antennas=2, fixed_gain_c=1.0)
    x = 8.0

    def integrand(y):
        return sc_pdf(rf1, 2, y) * gg_pe_cdf(ch, x * cfg.fixed_gain_c / (y - x))

    tail, _ = integrate.quad(integrand, x, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
    expected = sc_cdf(rf1, 2, x) + tail
    assert af_relay_cdf("gg", cfg, ch, rf1, x) == pytest.approx(expected, rel=1e-8)


def test_selection_combining():
    p = RayleighParams(3.0)
    assert math.fsum(sc_weights(4)) == pytest.approx(1.0)
    assert sc_cdf(p, 3, 2.0) == pytest.approx((1 - math.exp(-2 / 3)) ** 3)
    val, _ = integrate.quad(lambda g: sc_pdf(p, 3, g), 0, 2.0)
    assert val == pytest.approx(sc_cdf(p, 3, 2.0), rel=1e-10)


def test_small_gain_constant_reduces_to_first_hop():
    # C -> 0 makes the AF SNR equal to g1 whenever g2 > 0.  The excess is
    # O(C log C) for a Rayleigh second hop and O(sqrt(C)) for a Negative
    # Exponential one.
    rf1 = RayleighParams(10.0)
    base = sc_cdf(rf1, 2, 4.0)

    def excess(branch, ch, c):
        return af_relay_cdf(branch, LinkConfig(fixed_gain_c=c), ch, rf1, 4.0) - base

    assert excess("rf", RayleighParams(10.0), 1e-12) == pytest.approx(0.0, abs=1e-10)
    ne = NegExpParams(1.0, 10.0)
    ratio = excess("ne", ne, 1e-8) / excess("ne", ne, 1e-10)
    assert ratio == pytest.approx(10.0, rel=1e-3)


def test_kernels_start_at_one_and_cdf_at_zero():
    cfg = LinkConfig()
    rf1 = RayleighParams(10.0)
    ch = GammaGammaPointingParams(4.2, 1.4, 2.45, 10.0)
    assert af_kernel("gg", cfg, ch, rf1, 0, 0.0) == 1.0
    assert af_kernel("gg", cfg, ch, rf1, 0, 1e-8) == pytest.approx(1.0, abs=1e-5)
    assert af_relay_cdf("gg", cfg, ch, rf1, 0.0) == 0.0
    # The rf branch reuses the first-hop statistics when no channel is given.
    assert af_relay_cdf("rf", cfg, None, rf1, 3.0) == af_relay_cdf("rf", cfg, rf1, rf1, 3.0)


def test_input_validation():
    with pytest.raises(ValueError):
        LinkConfig(n_antennas=0)
    with pytest.raises(ValueError):
        af_relay_cdf("optical", LinkConfig(), None, RayleighParams(1.0), 1.0)
    with pytest.raises(TypeError):
        af_relay_cdf("gg", LinkConfig(), RayleighParams(1.0), RayleighParams(1.0), 1.0)
    with pytest.raises(ValueError):
        opportunistic_cdf(1.2, 0.5)
    assert opportunistic_cdf(0.2, 0.5) == pytest.approx(0.1)
