"""
End-to-end outage probability of the relay chain.

The chain is: first hop over ``N`` Rayleigh antennas with selection
combining, a fixed-gain AF hop to the second relay over parallel FSO and RF
links (the better one is kept), then ``M - 1`` identical decode-and-forward
hops, each choosing the better of an FSO and an RF link.  With independent
stages ::

    P_out = 1 - (1 - F_AF,FSO F_AF,RF) (1 - F_FSO F_RF)^(M-1)

All quantities are linear; the threshold is ``gamma_th``.

Forms
-----
``factored``
    The product above, built from the per-stage CDFs.
``expanded``
    Binomially expanded into explicit sums over ``k, g, t, u`` (and ``v``
    for Negative Exponential turbulence).  This is the default; its
    coefficients are the ones the BER closed forms integrate term by term.
``series``
    Gamma-Gamma only: the FSO CDF powers ``F_FSO^t`` are taken from the
    power-series CDF raised with :func:`series_integer_power`.
``asymptotic``
    Negative Exponential only: ``F_FSO`` replaced by its small-SNR
    asymptote ``theta sqrt(gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import (
    GammaGammaPointingParams,
    NegExpParams,
    RayleighParams,
    gg_pe_cdf,
    gg_pe_cdf_series,
    ne_cdf,
    rayleigh_cdf,
)
from .relay import LinkConfig, af_kernel, sc_weights
from .series import series_integer_power
from .specfun import perturb_and_extrapolate

__all__ = [
    "OutageRequest",
    "outage_gg",
    "outage_ne",
    "outage_probability",
    "GG_FORMS",
    "NE_FORMS",
]

GG_FORMS = ("expanded", "factored", "series")
NE_FORMS = ("expanded", "factored", "asymptotic")


@dataclass(frozen=True)
class OutageRequest:
    """Bundle of everything an outage evaluation needs."""

    cfg: LinkConfig
    fso: GammaGammaPointingParams | NegExpParams
    rf: RayleighParams
    form: str = "expanded"

    def __post_init__(self) -> None:
        if isinstance(self.fso, GammaGammaPointingParams):
            ok = GG_FORMS
        elif isinstance(self.fso, NegExpParams):
            ok = NE_FORMS
        else:
            raise TypeError("fso must be Gamma-Gamma or Negative Exponential parameters")
        if self.form not in ok:
            raise ValueError(f"form {self.form!r} not available; choose from {ok}")


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def _stage_kernels(branch, cfg, fso, rf, g):
    """Per-k weights, exponentials, FSO kernels and RF kernels of the AF stage."""
    w = sc_weights(cfg.n_antennas)
    e = [math.exp(-(k + 1) * g / rf.mean_snr) for k in range(cfg.n_antennas)]
    hf = [af_kernel(branch, cfg, fso, rf, k, g) for k in range(cfg.n_antennas)]
    hr = [af_kernel("rf", cfg, rf, rf, k, g) for k in range(cfg.n_antennas)]
    return w, e, hf, hr


def _factored(branch, cfg, fso, rf, g, f_fso):
    w, e, hf, hr = _stage_kernels(branch, cfg, fso, rf, g)
    a_f = math.fsum(wk * ek * h for wk, ek, h in zip(w, e, hf))
    a_r = math.fsum(wk * ek * h for wk, ek, h in zip(w, e, hr))
    f_af_fso = 1.0 - a_f
    f_af_rf = 1.0 - a_r
    hop = 1.0 - f_fso * rayleigh_cdf(rf, g)
    return 1.0 - (1.0 - f_af_fso * f_af_rf) * hop ** (cfg.n_relays - 1)


def _expanded(branch, cfg, fso, rf, g, fso_powers, v_terms=None):
    """Sum over k, (g), t, u of the binomially expanded outage.

    ``fso_powers[t]`` supplies the factor carried by ``F_FSO^t``.  For
    Negative Exponential turbulence (`v_terms` given) the FSO factor is
    instead expanded over ``v``: ``v_terms[t]`` is the list of
    ``(coefficient, exp(-lambda v sqrt(g/mean)))`` pairs.
    """
    n, m = cfg.n_antennas, cfg.n_relays
    x = g / rf.mean_snr
    w, _, hf, hr = _stage_kernels(branch, cfg, fso, rf, g)
    pos, neg = [], []
    for t in range(m):
        if v_terms is None:
            fso_t = [(1.0, fso_powers[t])]
        else:
            fso_t = v_terms[t]
        for u in range(t + 1):
            base_tu = math.comb(m - 1, t) * math.comb(t, u) * (-1) ** (t + u)
            for cv, fv in fso_t:
                for k in range(n):
                    omega = base_tu * w[k] * cv
                    common = omega * fv
                    ek = math.exp(-(k + u + 1) * x)
                    neg.append(common * ek * hf[k])
                    neg.append(common * ek * hr[k])
                    for gg in range(n):
                        ekg = math.exp(-(k + gg + u + 2) * x)
                        pos.append(common * w[gg] * ekg * hr[k] * hf[gg])
    return 1.0 - math.fsum(neg) + math.fsum(pos)


def outage_gg(req: OutageRequest, gamma_th: float | None = None) -> float:
    """Outage probability with Gamma-Gamma + pointing-error FSO links.

    Parameters
    ----------
    req : OutageRequest
        Configuration, channel parameters and form
        (``"expanded"``, ``"factored"`` or ``"series"``).
    gamma_th : float, optional
        Threshold SNR (linear); defaults to ``req.cfg.gamma_th``.
    """
    cfg, fso, rf = req.cfg, req.fso, req.rf
    if not isinstance(fso, GammaGammaPointingParams):
        raise TypeError("outage_gg needs GammaGammaPointingParams")
    g = cfg.gamma_th if gamma_th is None else gamma_th
    if not g > 0:
        raise ValueError("gamma_th must be positive")
    form = req.form
    if form == "factored":
        return _clamp(_factored("gg", cfg, fso, rf, g, gg_pe_cdf(fso, g)))
    if form == "expanded":
        f = gg_pe_cdf(fso, g)
        powers = [f ** t for t in range(cfg.n_relays)]
        return _clamp(_expanded("gg", cfg, fso, rf, g, powers))
    if form == "series":
        def with_params(q):
            xi = math.sqrt(q[0])
            p = GammaGammaPointingParams(q[1], q[2], xi, fso.mean_snr)
            s = gg_pe_cdf_series(p)
            u = g / fso.mean_snr
            powers = [series_integer_power(s, t)(u) for t in range(cfg.n_relays)]
            return _expanded("gg", cfg, fso, rf, g, powers)
        value, _ = perturb_and_extrapolate(with_params, [fso.xi2, fso.alpha, fso.beta],
                                           step=1e-2)
        return _clamp(value)
    raise ValueError(f"unknown form {form!r} for Gamma-Gamma outage")


def outage_ne(req: OutageRequest, gamma_th: float | None = None, clamp: bool = True) -> float:
    """Outage probability with Negative Exponential FSO links.

    Parameters
    ----------
    req : OutageRequest
        Form ``"expanded"``, ``"factored"`` or ``"asymptotic"``.
    gamma_th : float, optional
        Threshold SNR (linear); defaults to ``req.cfg.gamma_th``.
    clamp : bool
        Clip to ``[0, 1]``.  The asymptotic form can leave the unit interval
        at low SNR (``theta sqrt(gamma_th) > 1``); pass ``False`` to get the
        raw expression, e.g. to integrate it term by term.
    """
    cfg, fso, rf = req.cfg, req.fso, req.rf
    if not isinstance(fso, NegExpParams):
        raise TypeError("outage_ne needs NegExpParams")
    g = cfg.gamma_th if gamma_th is None else gamma_th
    if not g > 0:
        raise ValueError("gamma_th must be positive")
    form = req.form
    if form == "factored":
        value = _factored("ne", cfg, fso, rf, g, ne_cdf(fso, g))
    elif form == "expanded":
        r = math.exp(-fso.lam * math.sqrt(g / fso.mean_snr))
        v_terms = [[(math.comb(t, v) * (-1) ** v, r ** v) for v in range(t + 1)]
                   for t in range(cfg.n_relays)]
        value = _expanded("ne", cfg, fso, rf, g, None, v_terms)
    elif form == "asymptotic":
        a = fso.theta * math.sqrt(g)
        value = _expanded("ne", cfg, fso, rf, g, [a ** t for t in range(cfg.n_relays)])
    else:
        raise ValueError(f"unknown form {form!r} for Negative Exponential outage")
    return _clamp(value) if clamp else value


def outage_probability(cfg: LinkConfig, fso, rf: RayleighParams,
                       gamma_th: float | None = None, form: str = "expanded") -> float:
    """Dispatch to :func:`outage_gg` or :func:`outage_ne` by channel type."""
    req = OutageRequest(cfg, fso, rf, form)
    if isinstance(fso, GammaGammaPointingParams):
        return outage_gg(req, gamma_th)
    return outage_ne(req, gamma_th)
