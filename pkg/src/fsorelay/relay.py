"""
Per-stage CDFs of the relay chain.

The first relay selection-combines ``N`` Rayleigh branches; the second relay
receives the first relay's signal over a fixed-gain amplify-and-forward
(AF) hop, in parallel over an FSO and an RF link, and keeps the stronger.
Subsequent relays decode and forward, again choosing the better of an FSO
and an RF link.

For a fixed-gain AF hop with gain constant ``C`` the end-to-end SNR is
``g1 * g2 / (C + g2)``.  Its CDF is written as ::

    F(gamma) = 1 - sum_k w_k exp(-(k+1) gamma / mean_rf) H_k(gamma)

with ``w_k = binom(N-1, k) (-1)^k N / (k+1)`` and a branch-specific
kernel ``H_k`` (see :func:`af_kernel`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channels import (
    ChannelParams,
    GammaGammaPointingParams,
    NegExpParams,
    RayleighParams,
    rayleigh_cdf,
)
from .specfun import DEFAULT_ACCURACY, MeijerGSpec, SeriesAccuracy, meijer_g

__all__ = [
    "LinkConfig",
    "sc_cdf",
    "sc_pdf",
    "sc_weights",
    "af_kernel",
    "af_kernel_spec",
    "af_relay_cdf",
    "opportunistic_cdf",
    "gg_af_constant",
]


@dataclass(frozen=True)
class LinkConfig:
    """Topology and constants of the relay chain.

    Attributes
    ----------
    n_antennas : int
        Receive antennas at the first relay (selection combining).
    n_relays : int
        Total number of relays ``M``; ``M - 1`` decode-and-forward hybrid
        hops follow the AF stage.
    fixed_gain_c : float
        Constant ``C`` of the fixed AF gain ``G^2 = 1/(C sigma_RF^2)``.
    eta : float
        Optical-to-electrical conversion efficiency.
    gamma_th : float
        Outage threshold SNR (linear).
    """

    n_antennas: int = 2
    n_relays: int = 2
    fixed_gain_c: float = 1.0
    eta: float = 1.0
    gamma_th: float = 10.0

    def __post_init__(self) -> None:
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ValueError("n_antennas must be an integer >= 1")
        if int(self.n_relays) != self.n_relays or self.n_relays < 1:
            raise ValueError("n_relays must be an integer >= 1")
        if not (self.fixed_gain_c > 0 and self.eta > 0 and self.gamma_th > 0):
            raise ValueError("fixed_gain_c, eta and gamma_th must be positive")


def sc_weights(n: int) -> list[float]:
    """``binom(n-1, k) (-1)^k n / (k+1)`` for ``k = 0..n-1`` (they sum to 1)."""
    return [math.comb(n - 1, k) * (-1) ** k * n / (k + 1) for k in range(n)]


def sc_cdf(p: RayleighParams, n: int, gamma: float) -> float:
    """CDF of the best of `n` i.i.d. Rayleigh branches."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rayleigh_cdf(p, gamma) ** n


def sc_pdf(p: RayleighParams, n: int, gamma: float) -> float:
    """Density of the best of `n` i.i.d. Rayleigh branches (binomial form)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not gamma > 0:
        raise ValueError("pdf requires gamma > 0")
    g = p.mean_snr
    terms = [math.comb(n - 1, k) * (-1) ** k * math.exp(-(k + 1) * gamma / g)
             for k in range(n)]
    return n / g * math.fsum(terms)


def gg_af_constant(p: GammaGammaPointingParams) -> float:
    """Prefactor ``xi^2 2^(alpha+beta-3) / (pi Gamma(alpha) Gamma(beta))``."""
    return (p.xi2 * 2.0 ** (p.alpha + p.beta - 3.0)
            / (math.pi * math.gamma(p.alpha) * math.gamma(p.beta)))


def af_kernel_spec(branch: str, cfg: LinkConfig, ch: ChannelParams | None,
                   rf1: RayleighParams, k: int, gamma: float) -> MeijerGSpec:
    """G-function entering the AF kernel of index `k` at SNR `gamma`."""
    c = cfg.fixed_gain_c
    g1 = rf1.mean_snr
    if branch == "gg":
        x2 = ch.xi2
        z = ch.abk ** 2 * c * (k + 1) * gamma / (16.0 * ch.mean_snr * g1)
        return MeijerGSpec.from_groups(
            [1.0, 0.5], [(x2 + 1) / 2, (x2 + 2) / 2],
            [x2 / 2, (x2 + 1) / 2, ch.alpha / 2, (ch.alpha + 1) / 2,
             ch.beta / 2, (ch.beta + 1) / 2, 1.0],
            [0.5, 0.0], z)
    if branch == "ne":
        z = ch.lam ** 2 * c * (k + 1) * gamma / (4.0 * ch.mean_snr * g1)
        return MeijerGSpec.from_groups([], [], [1.0, 0.0, 0.5], [], z)
    if branch == "rf":
        g2 = ch.mean_snr if ch is not None else g1
        z = c * (k + 1) * gamma / (g1 * g2)
        return MeijerGSpec.from_groups([], [], [1.0, 0.0], [], z)
    raise ValueError(f"unknown branch {branch!r}")


def af_kernel(branch: str, cfg: LinkConfig, ch: ChannelParams | None,
              rf1: RayleighParams, k: int, gamma: float,
              acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Kernel ``H_k``: conditional survival weight of the second hop.

    ``gg``: ``1 - K G^{7,2}_{4,9}(.)``; ``ne``: ``G^{3,0}_{0,3}(.)/sqrt(pi)``;
    ``rf``: ``G^{2,0}_{0,2}(.)``.  All tend to 1 as ``gamma -> 0``.
    """
    if gamma == 0:
        return 1.0
    spec = af_kernel_spec(branch, cfg, ch, rf1, k, gamma)
    g = meijer_g(spec, acc)
    if branch == "gg":
        return 1.0 - gg_af_constant(ch) * g
    if branch == "ne":
        return g / math.sqrt(math.pi)
    return g


def _check_branch(branch: str, ch) -> None:
    expected = {"gg": GammaGammaPointingParams, "ne": NegExpParams, "rf": RayleighParams}
    if branch not in expected:
        raise ValueError(f"unknown branch {branch!r}")
    if ch is not None and not isinstance(ch, expected[branch]):
        raise TypeError(f"branch {branch!r} needs {expected[branch].__name__}")


def af_relay_cdf(branch: str, cfg: LinkConfig, ch: ChannelParams | None,
                 rf1: RayleighParams, gamma: float,
                 acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """CDF of the AF end-to-end SNR ``g1 g2 / (C + g2)`` at the second relay.

    Parameters
    ----------
    branch : {"gg", "ne", "rf"}
        Law of the second-hop SNR ``g2``.
    cfg : LinkConfig
        Supplies ``N`` and ``C``.
    ch : ChannelParams
        Second-hop parameters (for ``"rf"`` a :class:`RayleighParams`; if
        ``None`` the first-hop statistics are reused).
    rf1 : RayleighParams
        Per-antenna statistics of the first hop.
    """
    if not gamma >= 0:
        raise ValueError("gamma must be non-negative")
    _check_branch(branch, ch)
    if gamma == 0:
        return 0.0
    w = sc_weights(cfg.n_antennas)
    g1 = rf1.mean_snr
    terms = [wk * math.exp(-(k + 1) * gamma / g1) * af_kernel(branch, cfg, ch, rf1, k, gamma, acc)
             for k, wk in enumerate(w)]
    return min(1.0, max(0.0, 1.0 - math.fsum(terms)))


def opportunistic_cdf(f_fso: float, f_rf: float) -> float:
    """CDF of the better of two independent links: the product of their CDFs."""
    for f in (f_fso, f_rf):
        if not 0.0 <= f <= 1.0:
            raise ValueError("inputs must be probabilities")
    return f_fso * f_rf
