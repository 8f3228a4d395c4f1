"""
Fading laws for the individual hops.

Three laws are supported:

* Gamma-Gamma turbulence with pointing error (FSO, weak-to-strong turbulence),
* Negative Exponential turbulence (FSO, saturated regime),
* Rayleigh fading (RF).

Each law has analytic pdf/CDF evaluators and a vectorized sampler.  All
quantities are instantaneous electrical SNRs in linear units.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .specfun import (
    DEFAULT_ACCURACY,
    MeijerGSpec,
    NonConvergenceError,
    SeriesAccuracy,
    _cluster_offsets,
    gamma_sign,
    meijer_g,
    perturb_and_extrapolate,
)
from .series import GeneralizedPowerSeries

__all__ = [
    "GammaGammaPointingParams",
    "NegExpParams",
    "RayleighParams",
    "ChannelParams",
    "SeriesCdfCoeffs",
    "gg_pe_pdf",
    "gg_pe_cdf",
    "gg_pe_cdf_spec",
    "gg_pe_cdf_series",
    "series_cdf_coeffs",
    "ne_cdf",
    "ne_pdf",
    "rayleigh_cdf",
    "rayleigh_pdf",
    "channel_cdf",
    "sample_snr",
    "turbulence_params_from_rytov",
]

SERIES_TERMS = 64
# The power series amplifies rounding by 1/h^k for a k-fold collision, so it
# is split further apart than the G-function residues.
SERIES_PERTURBATION = 1e-2


@dataclass(frozen=True)
class GammaGammaPointingParams:
    """Gamma-Gamma turbulence with pointing error.

    Parameters
    ----------
    alpha, beta : float
        Large- and small-scale turbulence shape parameters.
    xi : float
        Ratio of equivalent beam radius to pointing-jitter standard deviation.
    mean_snr : float
        Average electrical SNR of the link (linear).
    """

    alpha: float
    beta: float
    xi: float
    mean_snr: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "xi", "mean_snr"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def xi2(self) -> float:
        return self.xi * self.xi

    @property
    def kappa(self) -> float:
        return self.xi2 / (self.xi2 + 1.0)

    @property
    def abk(self) -> float:
        """The recurring scale ``alpha * beta * kappa``."""
        return self.alpha * self.beta * self.kappa

    def with_mean_snr(self, mean_snr: float) -> "GammaGammaPointingParams":
        return GammaGammaPointingParams(self.alpha, self.beta, self.xi, mean_snr)


@dataclass(frozen=True)
class NegExpParams:
    """Negative Exponential (saturated) turbulence.

    ``lam`` is the rate of the irradiance law; its variance is ``1/lam**2``.
    """

    lam: float
    mean_snr: float

    def __post_init__(self) -> None:
        if not (self.lam > 0 and self.mean_snr > 0):
            raise ValueError("lam and mean_snr must be positive")

    @property
    def theta(self) -> float:
        """Slope of the small-SNR CDF asymptote ``theta * sqrt(gamma)``."""
        return self.lam / math.sqrt(self.mean_snr)

    def with_mean_snr(self, mean_snr: float) -> "NegExpParams":
        return NegExpParams(self.lam, mean_snr)


@dataclass(frozen=True)
class RayleighParams:
    """Rayleigh fading with average SNR ``mean_snr``."""

    mean_snr: float

    def __post_init__(self) -> None:
        if not self.mean_snr > 0:
            raise ValueError("mean_snr must be positive")

    def with_mean_snr(self, mean_snr: float) -> "RayleighParams":
        return RayleighParams(mean_snr)


ChannelParams = Union[GammaGammaPointingParams, NegExpParams, RayleighParams]


def _check_gamma(gamma: float) -> None:
    if not gamma >= 0:
        raise ValueError(f"SNR must be non-negative, got {gamma}")


# ---------------------------------------------------------------------------
# Gamma-Gamma with pointing error
# ---------------------------------------------------------------------------

def _gg_arg(p: GammaGammaPointingParams, gamma: float) -> float:
    return p.abk * math.sqrt(gamma / p.mean_snr)


def _gg_norm(p: GammaGammaPointingParams) -> float:
    return p.xi2 / (math.gamma(p.alpha) * math.gamma(p.beta))


def gg_pe_cdf_spec(p: GammaGammaPointingParams, gamma: float) -> MeijerGSpec:
    """G-function whose value, times ``xi^2 / (Gamma(alpha) Gamma(beta))``, is the CDF."""
    return MeijerGSpec.from_groups([1.0], [p.xi2 + 1.0], [p.xi2, p.alpha, p.beta], [0.0],
                                   _gg_arg(p, gamma))


def gg_pe_pdf(p: GammaGammaPointingParams, gamma: float,
              acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Probability density of the SNR at `gamma` (> 0)."""
    if not gamma > 0:
        raise ValueError("pdf requires gamma > 0")
    spec = MeijerGSpec.from_groups([], [p.xi2 + 1.0], [p.xi2, p.alpha, p.beta], [],
                                   _gg_arg(p, gamma))
    return max(0.0, 0.5 * _gg_norm(p) / gamma * meijer_g(spec, acc))


@dataclass(frozen=True)
class SeriesCdfCoeffs:
    """Coefficients of the power-series form of the Gamma-Gamma CDF.

    With ``u = gamma / mean_snr`` the CDF reads ::

        x0 * u**(xi^2/2) + sum_n y[n] u**((n+alpha)/2) + sum_n z[n] u**((n+beta)/2)
    """

    xi2: float
    alpha: float
    beta: float
    x0: float
    y: tuple = field(default=())
    z: tuple = field(default=())

    def terms(self) -> list[tuple[float, float]]:
        """All ``(exponent, coefficient)`` pairs in the variable ``u``."""
        out = [(0.5 * self.xi2, self.x0)]
        out += [(0.5 * (n + self.alpha), c) for n, c in enumerate(self.y)]
        out += [(0.5 * (n + self.beta), c) for n, c in enumerate(self.z)]
        return out

    def evaluate(self, u: float) -> float:
        if u == 0:
            return 0.0
        lu = math.log(u)
        return math.fsum(c * math.exp(e * lu) for e, c in self.terms() if c != 0.0)


def _lg(x: float) -> tuple[float, int]:
    return math.lgamma(x), gamma_sign(x)


def _family(xi2: float, a: float, b: float, abk: float, n_max: int) -> list[float]:
    """Coefficients of the family with exponents (n + a)/2 (other shape b)."""
    # Gamma(xi2 - a) / Gamma(xi2 + 1 - a) = 1 / (xi2 - a), taken exactly so
    # that large xi2 does not cost precision through log-Gamma round-off.
    lead = math.log(xi2) - math.log(abs(xi2 - a))
    sign = 1 if xi2 > a else -1
    for x, s in ((b - a, 1), (a, -1), (b, -1)):
        lg, sg = _lg(x)
        lead += s * lg
        sign *= sg
    out = []
    log_c = lead + a * math.log(abk)
    c_sign = sign
    for n in range(n_max):
        if n:
            r = (a - xi2 + n - 1) * abk / ((1.0 - xi2 + a + n - 1) * (1.0 - b + a + n - 1) * n)
            if r == 0:
                out.extend([0.0] * (n_max - n))
                break
            log_c += math.log(abs(r))
            c_sign = c_sign if r > 0 else -c_sign
        out.append(c_sign * math.exp(log_c) / (n + a))
    return out


def series_cdf_coeffs(p: GammaGammaPointingParams, n_max: int = SERIES_TERMS) -> SeriesCdfCoeffs:
    """Closed-form coefficients of the power-series CDF.

    Requires ``xi^2``, ``alpha`` and ``beta`` to have pairwise non-integer
    differences; :func:`gg_pe_cdf` handles the degenerate cases by
    perturbation.
    """
    xi2, a, b, abk = p.xi2, p.alpha, p.beta, p.abk
    lg0 = 0.0
    s0 = 1
    for x, s in ((a - xi2, 1), (b - xi2, 1), (a, -1), (b, -1)):
        lg, sg = _lg(x)
        lg0 += s * lg
        s0 *= sg
    x0 = s0 * math.exp(lg0 + xi2 * math.log(abk))
    return SeriesCdfCoeffs(xi2, a, b, x0,
                           tuple(_family(xi2, a, b, abk, n_max)),
                           tuple(_family(xi2, b, a, abk, n_max)))


# A series value is accepted only if eps * sum|terms| stays below 1e-8 of it.
SERIES_CANCELLATION = sys.float_info.epsilon / 1e-8


def _series_value(xi2, a, b, mean_snr, gamma, n_max):
    xi = math.sqrt(xi2)
    coeffs = series_cdf_coeffs(GammaGammaPointingParams(a, b, xi, mean_snr), n_max)
    # Tail check: the last retained terms must be negligible.
    u = gamma / mean_snr
    lu = math.log(u)
    try:
        tail = max(abs(coeffs.y[-1]) * math.exp(0.5 * (n_max - 1 + a) * lu),
                   abs(coeffs.z[-1]) * math.exp(0.5 * (n_max - 1 + b) * lu))
        value = coeffs.evaluate(u)
        # Round-off grows with the sum of |terms|; reject results eaten by
        # cancellation rather than returning them silently.
        magnitude = sum(abs(c) * math.exp(e * lu) for e, c in coeffs.terms())
    except OverflowError:
        raise NonConvergenceError("power-series CDF overflows at this argument") from None
    if not (math.isfinite(value) and math.isfinite(magnitude)):
        raise NonConvergenceError("power-series CDF is not finite at this argument")
    scale = max(abs(value), 1e-300)
    if tail > 1e-13 * scale:
        raise NonConvergenceError("power-series CDF has not converged")
    if SERIES_CANCELLATION * magnitude > scale:
        raise NonConvergenceError("power-series CDF lost its precision to cancellation")
    return value


def _series_cdf(p: GammaGammaPointingParams, gamma: float, n_max: int) -> float:
    return perturb_and_extrapolate(
        lambda q: _series_value(*q, p.mean_snr, gamma, n_max), [p.xi2, p.alpha, p.beta],
        step=SERIES_PERTURBATION)[0]


def gg_pe_cdf_series(p: GammaGammaPointingParams, n_max: int = SERIES_TERMS) -> GeneralizedPowerSeries:
    """Power-series CDF as a :class:`GeneralizedPowerSeries` in ``gamma / mean_snr``.

    The horizon is the first omitted exponent of the two infinite families.
    Requires pairwise non-integer differences among ``xi^2, alpha, beta``.
    """
    if any(_cluster_offsets([p.xi2, p.alpha, p.beta])):
        raise ValueError("series coefficients need non-integer-spaced xi^2, alpha, beta")
    coeffs = series_cdf_coeffs(p, n_max)
    horizon = 0.5 * (n_max + min(p.alpha, p.beta))
    return GeneralizedPowerSeries(tuple(coeffs.terms()), horizon)


def gg_pe_cdf(p: GammaGammaPointingParams, gamma: float, method: str = "meijerg",
              acc: SeriesAccuracy = DEFAULT_ACCURACY, n_max: int = SERIES_TERMS,
              fallback: bool = True) -> float:
    """CDF of the Gamma-Gamma-with-pointing-error SNR.

    Parameters
    ----------
    method : {"meijerg", "series"}
        ``"meijerg"`` evaluates the closed G-function form; ``"series"`` sums
        the power series (falling back to ``"meijerg"`` if the series has not
        converged within `n_max` terms per family).
    fallback : bool
        With ``fallback=False`` a non-converged series raises
        :class:`~fsorelay.specfun.NonConvergenceError` instead.
    """
    _check_gamma(gamma)
    if gamma == 0:
        return 0.0
    if method == "series":
        try:
            return min(1.0, max(0.0, _series_cdf(p, gamma, n_max)))
        except NonConvergenceError:
            if not fallback:
                raise
            method = "meijerg"
    if method != "meijerg":
        raise ValueError(f"unknown method {method!r}")
    value = _gg_norm(p) * meijer_g(gg_pe_cdf_spec(p, gamma), acc)
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# Negative Exponential and Rayleigh
# ---------------------------------------------------------------------------

def ne_cdf(p: NegExpParams, gamma: float, method: str = "exact") -> float:
    """CDF of the SNR under Negative Exponential turbulence.

    ``method="asymptotic"`` returns the small-SNR approximation
    ``theta * sqrt(gamma)`` clamped to 1.
    """
    _check_gamma(gamma)
    if method == "exact":
        return -math.expm1(-p.lam * math.sqrt(gamma / p.mean_snr))
    if method == "asymptotic":
        return min(1.0, p.theta * math.sqrt(gamma))
    raise ValueError(f"unknown method {method!r}")


def ne_pdf(p: NegExpParams, gamma: float) -> float:
    if not gamma > 0:
        raise ValueError("pdf requires gamma > 0")
    r = math.sqrt(gamma / p.mean_snr)
    return p.lam * math.exp(-p.lam * r) / (2.0 * math.sqrt(gamma * p.mean_snr))


def rayleigh_cdf(p: RayleighParams, gamma: float) -> float:
    """``1 - exp(-gamma / mean_snr)``."""
    _check_gamma(gamma)
    return -math.expm1(-gamma / p.mean_snr)


def rayleigh_pdf(p: RayleighParams, gamma: float) -> float:
    _check_gamma(gamma)
    return math.exp(-gamma / p.mean_snr) / p.mean_snr


def channel_cdf(p: ChannelParams, gamma: float) -> float:
    """Exact CDF of any supported law."""
    if isinstance(p, GammaGammaPointingParams):
        return gg_pe_cdf(p, gamma)
    if isinstance(p, NegExpParams):
        return ne_cdf(p, gamma)
    if isinstance(p, RayleighParams):
        return rayleigh_cdf(p, gamma)
    raise TypeError(f"unsupported channel parameters {type(p).__name__}")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_snr(p: ChannelParams, rng: np.random.Generator, size=None):
    """Draw instantaneous SNRs.

    Parameters
    ----------
    p : ChannelParams
        Fading law and average SNR.
    rng : numpy.random.Generator
        Explicit random stream; no global state is touched.
    size : int or tuple, optional
        Output shape; a scalar float is returned when omitted.

    Notes
    -----
    * Rayleigh: ``gamma = -mean_snr * log(U)``.
    * Negative Exponential: irradiance ``I ~ Exp(rate lam)`` and
      ``gamma = mean_snr * I**2``, so that ``P(gamma < g)`` is
      ``1 - exp(-lam sqrt(g / mean_snr))``.
    * Gamma-Gamma with pointing error: ``I_a`` is the product of unit-mean
      Gamma variates with shapes ``alpha`` and ``beta``; the pointing loss
      is ``I_p = U**(1/xi^2)``; ``gamma = mean_snr * (I_a I_p / kappa)**2``.
    """
    if isinstance(p, RayleighParams):
        out = -p.mean_snr * np.log1p(-rng.random(size))
    elif isinstance(p, NegExpParams):
        irr = rng.exponential(1.0 / p.lam, size)
        out = p.mean_snr * irr * irr
    elif isinstance(p, GammaGammaPointingParams):
        ia = rng.gamma(p.alpha, 1.0 / p.alpha, size) * rng.gamma(p.beta, 1.0 / p.beta, size)
        ip = (1.0 - rng.random(size)) ** (1.0 / p.xi2)
        h = ia * ip / p.kappa
        out = p.mean_snr * h * h
    else:
        raise TypeError(f"unsupported channel parameters {type(p).__name__}")
    return float(out) if size is None else out


def turbulence_params_from_rytov(rytov_var: float) -> tuple[float, float]:
    """Gamma-Gamma shape parameters from the Rytov variance (plane wave)."""
    if not rytov_var > 0:
        raise ValueError("Rytov variance must be positive")
    s2 = rytov_var
    s125 = s2 ** 1.2
    alpha = 1.0 / math.expm1(0.49 * s2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return alpha, beta
