import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from fsorelay.specfun import (
    MeijerGSpec,
    NonConvergenceError,
    PoleError,
    SeriesAccuracy,
    bessel_k,
    bivariate_meijer_g,
    gamma_sign,
    hyp_pfq,
    ln_gamma,
    meijer_g,
    meijer_g_info,
    meijerg,
    perturb_and_extrapolate,
    pochhammer,
)

# Reference values from mpmath.meijerg at 30 digits.
# Columns: an, ap, bm, bq, z, value.
MPMATH_G = [
    ([], [], [0.0], [], 2.5, 0.08208499862389879517),
    ([], [], [1.0, 0.0], [], 0.7, 0.36349046404735365204),
    ([], [], [1.0, 0.0, 0.5], [], 0.3, 0.4716611053030949016),
    ([0.3], [], [0.5, 0.0], [], 1.7, 0.60355371207058948156),
    ([0.3], [1.2], [0.1, 0.6], [0.25], 0.8, 0.39243618478970090296),
    ([1.0], [3.0], [2.0, 4.0, 1.9], [0.0], 5.0, 1.8743108472402831481),
    ([1.0], [110.2025], [109.2025, 4.0, 1.9], [0.0], 10.0, 0.039780416232211614576),
    ([1.0], [7.0025], [6.0025, 4.2, 1.4], [0.0], 0.05, 0.0038459431526895616779),
    ([1.0, 0.5], [55.10125, 55.60125], [54.60125, 55.10125, 2.0, 2.5, 0.95, 1.45, 1.0],
     [0.5, 0.0], 0.02, 0.0014408776077177717172),
    ([1.0, 0.5], [3.50125, 4.00125], [3.00125, 3.50125, 2.1, 2.6, 0.7, 1.2, 1.0],
     [0.5, 0.0], 3.0, 0.47992634719303425306),
    ([-0.95], [], [1.0, 0.0], [], 0.01, 0.91075159985099431436),
    ([-1.5], [], [1.0, 0.0, 0.5], [], 2.0, 0.077534344419581633335),
    ([0.2, 0.4], [], [1.1], [0.7], 3.5, 0.09736982589508111942),
]


@pytest.mark.parametrize("an, ap, bm, bq, z, expected", MPMATH_G)
def test_meijer_g_matches_mpmath(an, ap, bm, bq, z, expected):
    assert meijerg(an, ap, bm, bq, z) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("z", [1e-3, 0.1, 1.0, 10.0])
def test_exponential_and_bessel_identities(z):
    assert meijerg([], [], [0.0], [], z) == pytest.approx(math.exp(-z), rel=1e-12)
    r = 2.0 * math.sqrt(z)
    assert meijerg([], [], [1.0, 0.0], [], z) == pytest.approx(r * special.kv(1, r), rel=1e-10)


def test_negative_exponential_kernel_closed_form():
    # G^{2,0}_{0,2}(y | 0, 1/2) = sqrt(pi) exp(-2 sqrt(y))
    for y in (0.01, 0.5, 3.0, 40.0):
        got = meijerg([], [], [0.0, 0.5], [], y)
        assert got == pytest.approx(math.sqrt(math.pi) * math.exp(-2 * math.sqrt(y)), rel=1e-11)


def test_collision_is_reported_as_perturbed():
    info = meijer_g_info(MeijerGSpec.from_groups([], [], [1.0, 0.0], [], 0.5))
    assert info.perturbed
    assert info.error < 1e-10 * abs(info.value)


def test_inversion_route_for_more_upper_parameters():
    spec = MeijerGSpec.from_groups([0.2, 0.4], [], [1.1], [0.7], 3.5)
    direct = meijer_g(spec)
    # G(z | a; b) = G(1/z | 1-b; 1-a)
    assert direct == pytest.approx(meijer_g(spec.inverted()), rel=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        MeijerGSpec(2, 0, 0, 1, (), (0.0,), 1.0)
    with pytest.raises(ValueError):
        MeijerGSpec.from_groups([], [], [0.0], [], -1.0)
    spec = MeijerGSpec.from_groups([1.0], [2.0], [0.5], [0.0], 3.0)
    assert (spec.m, spec.n, spec.p, spec.q) == (1, 1, 2, 2)
    assert spec.groups == ((1.0,), (2.0,), (0.5,), (0.0,))
    assert spec.with_z(2.0).z == 2.0


def test_elementary_helpers():
    assert ln_gamma(5.0)[0] == pytest.approx(math.log(24.0))
    assert ln_gamma(-0.5) == (pytest.approx(math.log(2 * math.sqrt(math.pi))), -1)
    assert gamma_sign(-1.5) == 1
    assert gamma_sign(-2.0) == 0
    with pytest.raises(PoleError):
        ln_gamma(-3.0)
    assert pochhammer(3.0, 4) == 3 * 4 * 5 * 6
    assert pochhammer(2.5, 0) == 1.0
    assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4) * math.exp(-2.0))


def test_hypergeometric_series():
    assert hyp_pfq([], [], 1.3) == pytest.approx(math.exp(1.3), rel=1e-14)
    assert hyp_pfq([1.0], [], 0.25) == pytest.approx(1 / 0.75, rel=1e-12)
    assert hyp_pfq([-3.0], [1.0], 2.0) == pytest.approx(special.eval_laguerre(3, 2.0))
    with pytest.raises(NonConvergenceError):
        hyp_pfq([1.0, 1.0], [], 0.1)
    with pytest.raises(PoleError):
        hyp_pfq([1.0], [-2.0], 0.1)


def test_perturb_and_extrapolate_passes_through_without_collision():
    value, perturbed = perturb_and_extrapolate(lambda p: p[0] * p[1], [1.3, 2.1])
    assert value == 1.3 * 2.1
    assert not perturbed


def test_perturb_and_extrapolate_removes_removable_singularity():
    # (Gamma(a-b) - 1/(a-b)) is finite as a -> b; a smooth even-in-h quantity
    # evaluated on a split grid must extrapolate back to the limit.
    def fn(p):
        d = p[0] - p[1]
        return math.expm1(d) / d

    value, perturbed = perturb_and_extrapolate(fn, [2.0, 2.0 + 0.0])
    assert perturbed
    assert value == pytest.approx(1.0, rel=1e-10)


# Oracle: mpmath quadrature of x^f e^-x G^{2,0}_{0,2}(z1 x) G^{3,0}_{0,3}(z2 x),
# with the second kernel written as a Mellin convolution (15 digits).
BIVARIATE = [
    (0.0, 1e-2, 1e-3, 1.55548929264082, 1e-10),
    (0.5, 0.3, 0.5, 0.205123150743544, 1e-8),
    (1.5, 1e-4, 2e-3, 1.91229721572062, 1e-10),
]


@pytest.mark.parametrize("f, z1, z2, expected, tol", BIVARIATE)
def test_bivariate_matches_quadrature(f, z1, z2, expected, tol):
    k2 = MeijerGSpec.from_groups([], [], [1.0, 0.0], [])
    k3 = MeijerGSpec.from_groups([], [], [1.0, 0.0, 0.5], [])
    got = bivariate_meijer_g([-f], k2, k3, z1, z2, SeriesAccuracy(rel_tol=tol))
    assert got == pytest.approx(expected, rel=max(100 * tol, 1e-9))


def test_bivariate_reduces_to_univariate_when_one_kernel_is_trivial():
    # With K2 = G^{1,0}_{0,1}(. | 0) (= exp(-x)), the integral collapses to a
    # single Laplace transform at p = 1 + z2.
    k2 = MeijerGSpec.from_groups([], [], [1.0, 0.0], [])
    k1 = MeijerGSpec.from_groups([], [], [0.0], [])
    f, z1, z2 = 0.7, 0.04, 0.3
    p = 1.0 + z2
    expected = p ** (-1 - f) * meijerg([-f], [], [1.0, 0.0], [], z1 / p)
    got = bivariate_meijer_g([-f], k2, k1, z1, z2, SeriesAccuracy(rel_tol=1e-10))
    assert got == pytest.approx(expected, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(z=st.floats(1e-3, 30.0), a=st.floats(0.05, 0.95), b=st.floats(0.05, 2.0))
def test_two_parameter_bessel_form(z, a, b):
    # G^{2,0}_{0,2}(z | a, b) = 2 z^{(a+b)/2} K_{a-b}(2 sqrt z)
    expected = 2 * z ** ((a + b) / 2) * special.kv(a - b, 2 * math.sqrt(z))
    assert meijerg([], [], [a, b], [], z) == pytest.approx(expected, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(z=st.floats(1e-3, 5.0), c=st.floats(0.1, 3.0))
def test_multiplication_by_power_shifts_parameters(z, c):
    # z^c G(z | a; b) = G(z | a + c; b + c)
    base = meijerg([0.4], [], [1.3, 0.2], [], z)
    shifted = meijerg([0.4 + c], [], [1.3 + c, 0.2 + c], [], z)
    assert shifted == pytest.approx(z ** c * base, rel=1e-9)


def test_vectorised_scipy_agreement_over_log_grid():
    zs = np.logspace(-4, 3, 15)
    got = np.array([meijerg([], [], [0.0, 0.5], [], z) for z in zs])
    np.testing.assert_allclose(got, math.sqrt(math.pi) * np.exp(-2 * np.sqrt(zs)), rtol=1e-10)
