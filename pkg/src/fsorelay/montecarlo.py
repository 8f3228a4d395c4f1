"""
Trial-by-trial simulation of the relay chain.

Every trial draws the fading of each link, forms the stage SNRs and records

* whether the end-to-end SNR ``gamma_eq`` (minimum over the relay stages)
  falls below ``gamma_th`` (outage), and
* the conditional DPSK error ``exp(-gamma_eq) / 2`` (semi-analytic BER).

Trials are grouped into fixed-size blocks.  Block ``b`` draws from its own
counter-based stream ``Philox(SeedSequence([seed, b]))``, and per-block
accumulators are merged in block order, so the result depends only on
``(seed, trials, mode, parameters)`` and never on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import ChannelParams, RayleighParams, sample_snr
from .relay import LinkConfig

__all__ = [
    "SimConfig",
    "SimResult",
    "simulate_link",
    "empirical_cdf",
    "sample_af_snr",
    "sample_sc_snr",
    "block_rng",
    "BLOCK_SIZE",
    "WORKERS_ENV",
]

BLOCK_SIZE = 1 << 16
WORKERS_ENV = "FSORELAY_WORKERS"
MODES = ("independent_gamma1", "shared_gamma1")


@dataclass(frozen=True)
class SimConfig:
    """Simulation budget and stream selection.

    Attributes
    ----------
    trials : int
        Number of trials (``>= 1``).
    seed : int
        64-bit seed; block streams are derived from it.
    mode : str
        ``"independent_gamma1"`` gives each AF branch its own first-hop draw,
        which is the independence the analytic outage assumes;
        ``"shared_gamma1"`` uses one draw for both, as in the physical system.
    workers : int, optional
        Thread count.  ``None`` reads the ``FSORELAY_WORKERS`` environment
        variable (default 1).  Never affects the result.
    count_bits : bool
        Also draw one DPSK bit decision per trial and count errors; used to
        compare against the semi-analytic estimator.
    """

    trials: int = 1_000_000
    seed: int = 2024
    mode: str = "independent_gamma1"
    workers: int | None = None
    count_bits: bool = False

    def __post_init__(self) -> None:
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be an integer >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return int(self.workers)
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))


@dataclass(frozen=True)
class SimResult:
    """Monte Carlo estimates with 95% half-widths.

    ``outage_ci95`` is the binomial half-width ``1.96 sqrt(p(1-p)/n)``;
    ``ber_ci95`` uses the sample standard deviation of the per-trial
    conditional error.  ``bit_error_rate`` is only set when bits were
    counted.
    """

    outage_rate: float
    outage_ci95: float
    ber_estimate: float
    ber_ci95: float
    trials_used: int
    bit_error_rate: float | None = None
    ber_std: float = 0.0

    @property
    def outage_sigma(self) -> float:
        """One binomial standard deviation of the outage estimate."""
        return self.outage_ci95 / 1.96

    @property
    def ber_sigma(self) -> float:
        return self.ber_ci95 / 1.96


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream of block `block` under `seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def empirical_cdf(samples, gamma: float) -> float:
    """Fraction of the sorted `samples` that are ``<= gamma``."""
    s = np.asarray(samples)
    if s.size == 0:
        raise ValueError("samples must be non-empty")
    return float(np.searchsorted(s, gamma, side="right")) / s.size


def sample_sc_snr(rf1: RayleighParams, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Selection-combined SNR: maximum of `n` independent Rayleigh-law SNRs."""
    return sample_snr(rf1, rng, (size, n)).max(axis=1)


def sample_af_snr(cfg: LinkConfig, ch: ChannelParams, rf1: RayleighParams,
                  rng: np.random.Generator, size: int) -> np.ndarray:
    """End-to-end SNR ``g1 g2 / (C + g2)`` of one fixed-gain AF branch."""
    g1 = sample_sc_snr(rf1, cfg.n_antennas, rng, size)
    g2 = sample_snr(ch, rng, size)
    return g1 * g2 / (cfg.fixed_gain_c + g2)


def _block(cfg: LinkConfig, fso: ChannelParams, rf: RayleighParams, sim: SimConfig,
           block: int, size: int):
    rng = block_rng(sim.seed, block)
    c = cfg.fixed_gain_c
    g1_fso = sample_sc_snr(rf, cfg.n_antennas, rng, size)
    if sim.mode == "shared_gamma1":
        g1_rf = g1_fso
    else:
        g1_rf = sample_sc_snr(rf, cfg.n_antennas, rng, size)
    g2_fso = sample_snr(fso, rng, size)
    g2_rf = sample_snr(rf, rng, size)
    geq = np.maximum(g1_fso * g2_fso / (c + g2_fso), g1_rf * g2_rf / (c + g2_rf))
    for _ in range(cfg.n_relays - 1):
        hop = np.maximum(sample_snr(fso, rng, size), sample_snr(rf, rng, size))
        np.minimum(geq, hop, out=geq)
    cond = 0.5 * np.exp(-geq)
    outages = int(np.count_nonzero(geq < cfg.gamma_th))
    bits = int(np.count_nonzero(rng.random(size) < cond)) if sim.count_bits else 0
    # Shifted second moment keeps the variance accurate when BER is tiny.
    mean = float(cond.mean())
    m2 = float(np.square(cond - mean).sum())
    return outages, size, mean, m2, bits


def _merge(parts):
    """Chan et al. pairwise-style merge of (n, mean, M2), in block order."""
    n_tot, mean, m2 = 0, 0.0, 0.0
    for n, mu, s in parts:
        if n_tot == 0:
            n_tot, mean, m2 = n, mu, s
            continue
        delta = mu - mean
        n_new = n_tot + n
        mean += delta * n / n_new
        m2 += s + delta * delta * n_tot * n / n_new
        n_tot = n_new
    return n_tot, mean, m2


def simulate_link(cfg: LinkConfig, fso: ChannelParams, rf: RayleighParams,
                  sim: SimConfig | None = None) -> SimResult:
    """Simulate the chain and estimate outage probability and DPSK BER.

    Parameters
    ----------
    cfg : LinkConfig
        Topology, ``C`` and ``gamma_th``.
    fso : ChannelParams
        FSO fading law and average SNR (used on the AF hop and every DF hop).
    rf : RayleighParams
        RF links (first hop, AF hop and DF hops).
    sim : SimConfig, optional

    Returns
    -------
    SimResult
    """
    sim = sim or SimConfig()
    n_blocks = -(-sim.trials // BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * (n_blocks - 1) + [sim.trials - BLOCK_SIZE * (n_blocks - 1)]

    def run(b):
        return _block(cfg, fso, rf, sim, b, sizes[b])

    workers = sim.resolved_workers()
    if workers == 1 or n_blocks == 1:
        results = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_blocks)))

    n = sim.trials
    outages = sum(r[0] for r in results)
    _, mean, m2 = _merge([(r[1], r[2], r[3]) for r in results])
    p = outages / n
    std = math.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    bit_rate = sum(r[4] for r in results) / n if sim.count_bits else None
    return SimResult(
        outage_rate=p,
        outage_ci95=1.96 * math.sqrt(p * (1.0 - p) / n),
        ber_estimate=mean,
        ber_ci95=1.96 * std / math.sqrt(n),
        trials_used=n,
        bit_error_rate=bit_rate,
        ber_std=std,
    )
