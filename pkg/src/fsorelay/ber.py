"""
DPSK bit-error rate of the relay chain.

The error rate is the average of the conditional DPSK error ``exp(-g)/2``
over the end-to-end SNR law, whose CDF is the outage probability::

    P_e = 1/2 Int_0^inf exp(-g) P_out(g) dg

Three routes are provided:

* :func:`dpsk_ber_quadrature` integrates any outage function numerically
  (the reference route);
* :func:`dpsk_ber_gg_exact` integrates the expanded Gamma-Gamma outage term
  by term.  The powers ``F_FSO^t`` come from the power-series CDF, and each
  resulting integral is a Meijer G-function (or a bivariate G-function for
  the product terms);
* :func:`dpsk_ber_ne_asymptotic` does the same for Negative Exponential
  turbulence with ``F_FSO`` replaced by its small-SNR asymptote.

Term-by-term integration rests on ::

    Int_0^inf g^f exp(-p g) G^{m,n}_{p,q}(c g | a; b) dg
        = p^(-1-f) G^{m,n+1}_{p+1,q}(c/p | -f, a; b)
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple

from scipy import integrate

from .channels import GammaGammaPointingParams, NegExpParams, RayleighParams, gg_pe_cdf_series
from .outage import OutageRequest, outage_gg, outage_ne
from .relay import LinkConfig, af_kernel_spec, gg_af_constant, sc_weights
from .series import GeneralizedPowerSeries, series_integer_power
from .specfun import (
    MeijerGSpec,
    NonConvergenceError,
    SeriesAccuracy,
    SpecialFunctionError,
    bivariate_meijer_g,
    meijer_g,
    perturb_and_extrapolate,
)

__all__ = [
    "GeneralizedPowerSeries",
    "series_integer_power",
    "BerResult",
    "dpsk_ber_quadrature",
    "dpsk_ber_gg_quadrature",
    "dpsk_ber_ne_quadrature",
    "dpsk_ber_gg_exact",
    "dpsk_ber_ne_asymptotic",
    "QUAD_UPPER",
]

QUAD_UPPER = 60.0
# Accuracy used for G-functions inside quadrature integrands.
QUAD_ACCURACY = SeriesAccuracy(rel_tol=1e-11)
# Terms whose magnitude bound falls below this are dropped from closed forms.
TERM_FLOOR = 1e-17
# The product terms are evaluated by the double residue sum, whose precision
# is limited by the pole-splitting; 1e-10 here means "raise above ~1e-7".
BIVARIATE_ACCURACY = SeriesAccuracy(rel_tol=1e-10)


class BerResult(NamedTuple):
    """BER value with provenance.

    Attributes
    ----------
    value : float
        Bit-error rate.
    fallback : bool
        True if the closed form could not be evaluated (a bivariate
        G-function did not converge) and `value` comes from quadrature.
    terms : int
        Number of series terms used by the closed form (0 on fallback).
    detail : str
        Human-readable reason for a fallback, empty otherwise.
    """

    value: float
    fallback: bool = False
    terms: int = 0
    detail: str = ""


def dpsk_ber_quadrature(outage_fn: Callable[[float], float], upper: float = QUAD_UPPER,
                        abs_tol: float = 1e-12) -> float:
    """``1/2 Int_0^upper exp(-g) P_out(g) dg`` by adaptive quadrature.

    The substitution ``g = x^2`` removes square-root behaviour of outage
    functions near the origin.  The neglected tail is at most
    ``exp(-upper)/2``.

    Raises
    ------
    NonConvergenceError
        If the quadrature error estimate exceeds ``1e3 * abs_tol``.
    """
    def integrand(x: float) -> float:
        if x == 0.0:
            return 0.0
        g = x * x
        return 2.0 * x * math.exp(-g) * outage_fn(g)

    top = math.sqrt(upper)
    breaks = [0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 4.5, top]
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(breaks[:-1], breaks[1:]):
            v, e = integrate.quad(integrand, a, b, epsabs=abs_tol, epsrel=1e-10, limit=200)
            total += v
            err += e
    if err > 1e3 * abs_tol and err > 1e-8 * abs(total):
        raise NonConvergenceError(f"BER quadrature error estimate {err:.1e} too large")
    return 0.5 * total


def dpsk_ber_gg_quadrature(cfg: LinkConfig, fso: GammaGammaPointingParams,
                           rf: RayleighParams, form: str = "expanded") -> float:
    """Reference BER for Gamma-Gamma links: quadrature over the outage function."""
    req = OutageRequest(cfg, fso, rf, form)
    return dpsk_ber_quadrature(lambda g: outage_gg(req, g))


def dpsk_ber_ne_quadrature(cfg: LinkConfig, fso: NegExpParams, rf: RayleighParams,
                           form: str = "expanded") -> float:
    """Reference BER for Negative Exponential links.

    With ``form="asymptotic"`` the unclamped asymptotic outage is integrated,
    which is the quantity the asymptotic closed form represents.
    """
    req = OutageRequest(cfg, fso, rf, form)
    return dpsk_ber_quadrature(lambda g: outage_ne(req, g, clamp=(form != "asymptotic")))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _laplace_g(spec: MeijerGSpec, f: float, p: float, acc: SeriesAccuracy) -> float:
    """``Int g^f exp(-p g) G(spec.z * g) dg``."""
    an, ap, bm, bq = spec.groups
    lifted = MeijerGSpec.from_groups([-f, *an], ap, bm, bq, spec.z / p)
    return p ** (-1.0 - f) * meijer_g(lifted, acc)


def _laplace_product(spec1: MeijerGSpec, spec2: MeijerGSpec, f: float, p: float,
                     acc: SeriesAccuracy) -> float:
    """``Int g^f exp(-p g) G1(z1 g) G2(z2 g) dg`` via the bivariate G-function."""
    return p ** (-1.0 - f) * bivariate_meijer_g([-f], spec1, spec2, spec1.z / p, spec2.z / p,
                                                BIVARIATE_ACCURACY)


def _chain_coefficients(cfg: LinkConfig):
    """``(t, u, k, omega)`` for ``omega = binom(M-1,t) binom(t,u) (-1)^(t+u) w_k``."""
    w = sc_weights(cfg.n_antennas)
    m = cfg.n_relays
    for t in range(m):
        for u in range(t + 1):
            base = math.comb(m - 1, t) * math.comb(t, u) * (-1) ** (t + u)
            for k, wk in enumerate(w):
                yield t, u, k, base * wk


def _closed_form_sum(cfg, rf, powers, fso_kernel, fso_const, acc):
    """Integral of ``exp(-g) (1 - P_out(g))`` from the expanded outage.

    Parameters
    ----------
    powers : list of GeneralizedPowerSeries
        ``powers[t]`` is ``F_FSO^t`` as a series in ``g``.
    fso_kernel : callable
        ``k -> MeijerGSpec`` of the AF-FSO kernel at unit SNR, so that the
        kernel is ``fso_const[0] + fso_const[1] * G(spec.z * g)``.
    """
    w = sc_weights(cfg.n_antennas)
    n = cfg.n_antennas
    c0, c1 = fso_const
    rf_spec = [af_kernel_spec("rf", cfg, rf, rf, k, 1.0) for k in range(n)]
    fso_spec = [fso_kernel(k) for k in range(n)]
    parts = []
    count = 0
    for t, u, k, omega in _chain_coefficients(cfg):
        p = 1.0 + (k + u + 1) / rf.mean_snr
        for f, d in powers[t].terms:
            scale = omega * d
            bound = abs(scale) * math.exp(math.lgamma(1.0 + f) - (1.0 + f) * math.log(p))
            if bound < TERM_FLOOR:
                continue
            count += 1
            # AF-FSO kernel
            if c0:
                parts.append(scale * c0 * math.exp(math.lgamma(1.0 + f)) * p ** (-1.0 - f))
            parts.append(scale * c1 * _laplace_g(fso_spec[k], f, p, acc))
            # AF-RF kernel
            parts.append(scale * _laplace_g(rf_spec[k], f, p, acc))
            # Product of both AF kernels
            for g_idx in range(n):
                pp = 1.0 + (k + g_idx + u + 2) / rf.mean_snr
                sc2 = -scale * w[g_idx]
                if c0:
                    parts.append(sc2 * c0 * _laplace_g(rf_spec[k], f, pp, acc))
                parts.append(sc2 * c1 * _laplace_product(rf_spec[k], fso_spec[g_idx], f, pp, acc))
    return math.fsum(parts), count


def _gg_power_series(fso: GammaGammaPointingParams, m: int) -> list[GeneralizedPowerSeries]:
    base = gg_pe_cdf_series(fso).map_exponents(1.0)
    # Convert from u = g / mean to g: coefficient d u^f = d mean^-f g^f.
    in_g = GeneralizedPowerSeries(tuple((e, c * fso.mean_snr ** (-e)) for e, c in base.terms),
                                  base.horizon)
    return [series_integer_power(in_g, t) for t in range(m)]


def dpsk_ber_gg_exact(cfg: LinkConfig, fso: GammaGammaPointingParams, rf: RayleighParams,
                      acc: SeriesAccuracy = SeriesAccuracy(rel_tol=1e-12),
                      fallback: bool = True) -> BerResult:
    """Closed-form DPSK BER for Gamma-Gamma + pointing-error FSO links.

    Parameters
    ----------
    fallback : bool
        If True (default) a failure of the bivariate G-function is answered
        by the quadrature route and flagged in the result; if False the
        :class:`~fsorelay.specfun.SpecialFunctionError` propagates.
    """
    def evaluate(params):
        xi2, a, b = params
        p = GammaGammaPointingParams(a, b, math.sqrt(xi2), fso.mean_snr)
        powers = _gg_power_series(p, cfg.n_relays)
        kernel = lambda k: af_kernel_spec("gg", cfg, p, rf, k, 1.0)
        return _closed_form_sum(cfg, rf, powers, kernel, (1.0, -gg_af_constant(p)), acc)

    try:
        counts = []
        value, _ = perturb_and_extrapolate(
            lambda q: counts.append(evaluate(q)) or counts[-1][0],
            [fso.xi2, fso.alpha, fso.beta], step=1e-2)
    except SpecialFunctionError as exc:
        if not fallback:
            raise
        return BerResult(dpsk_ber_gg_quadrature(cfg, fso, rf), True, 0, str(exc))
    return BerResult(min(0.5, max(0.0, 0.5 - 0.5 * value)), False, counts[0][1])


def dpsk_ber_ne_asymptotic(cfg: LinkConfig, fso: NegExpParams, rf: RayleighParams,
                           acc: SeriesAccuracy = SeriesAccuracy(rel_tol=1e-12),
                           fallback: bool = True) -> BerResult:
    """Asymptotic closed-form DPSK BER for Negative Exponential FSO links.

    The FSO CDF is replaced by ``theta sqrt(g)``, so ``F_FSO^t`` is the
    single term ``theta^t g^(t/2)``.
    """
    powers = [GeneralizedPowerSeries(((0.5 * t, fso.theta ** t),)) for t in range(cfg.n_relays)]
    kernel = lambda k: af_kernel_spec("ne", cfg, fso, rf, k, 1.0)
    try:
        value, count = _closed_form_sum(cfg, rf, powers, kernel, (0.0, 1.0 / math.sqrt(math.pi)), acc)
    except SpecialFunctionError as exc:
        if not fallback:
            raise
        return BerResult(dpsk_ber_ne_quadrature(cfg, fso, rf, "asymptotic"), True, 0, str(exc))
    return BerResult(min(0.5, max(0.0, 0.5 - 0.5 * value)), False, count)
