"""Seeded Monte Carlo estimators for BER, outage and empirical distributions.

Trials are processed in fixed-size chunks.  Chunk ``i`` draws from a child
generator derived from the master seed and the chunk index alone
(``SeedSequence(seed, spawn_key=(i,))``), and results are a pure fold over
per-chunk statistics in chunk-index order, so estimates are bit-identical no
matter how, or in what order, chunks are computed.

The default BER estimator is semi-analytic: it averages the conditional error
rate Q(sqrt(gamma/2)) over sampled channel states, which removes detector
noise variance and makes floors near 1e-6 reachable at sane trial counts.
``mc_bitlevel_single`` simulates individual on-off keyed bits and exists to
validate that conditional form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fading import AnyChannel, sample_channel
from .geometry import sample_jitter, superimposed_angle
from .performance import SystemSpec, mean_snr, qfunc

ECDF_QUANTITIES = ("r", "theta_s", "h", "gamma")


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int = 42
    chunk_size: int = 1 << 16
    estimator: str = "semi-analytic"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.estimator not in ("semi-analytic", "bit-level"):
            raise ValueError(f"unknown estimator {self.estimator!r}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float  # NaN when fewer than two chunks were available
    trials: int
    seed: int

    def __post_init__(self):
        if not math.isnan(self.std_error) and self.std_error < 0.0:
            raise ValueError("std_error must be >= 0")


@dataclass(frozen=True)
class McPerfResult:
    ber: McEstimate
    outage: McEstimate


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Child generator for one chunk, derived only from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def chunk_layout(trials: int, chunk_size: int) -> list[tuple[int, int]]:
    """(index, size) pairs covering ``trials`` in fixed chunk order."""
    out = []
    done = 0
    index = 0
    while done < trials:
        size = min(chunk_size, trials - done)
        out.append((index, size))
        done += size
        index += 1
    return out


def _fold_mean_se(sums: list[float], sizes: list[int], seed: int) -> McEstimate:
    """Weighted batch-means estimate folded in chunk-index order."""
    total = 0.0
    for s in sums:
        total += s
    n = sum(sizes)
    mean = total / n
    if len(sums) < 2:
        return McEstimate(mean=mean, std_error=float("nan"), trials=n, seed=seed)
    acc = 0.0
    for s, size in zip(sums, sizes):
        dev = s / size - mean
        acc += size * dev * dev
    per_trial_var = acc / (len(sums) - 1)
    return McEstimate(
        mean=mean, std_error=math.sqrt(per_trial_var / n), trials=n, seed=seed
    )


def system_gamma_chunk(
    system: SystemSpec, seed: int, index: int, size: int
) -> np.ndarray:
    """Combined SNR samples for one chunk.

    Channels are sampled in system order from a single chunk stream; the
    combiner weights each branch SNR by alpha^2.
    """
    rng = chunk_rng(seed, index)
    gbar = system.gamma_bar()
    gamma = np.zeros(size)
    for channel, alpha in zip(system.channels, system.alphas):
        h = sample_channel(channel, rng, size)
        gamma += (alpha * alpha * gbar) * np.square(h)
    return gamma


def mc_perf(system: SystemSpec, gamma_th: float, cfg: McConfig) -> McPerfResult:
    """Estimate system BER and outage probability over the channel ensemble."""
    if gamma_th <= 0.0:
        raise ValueError(f"gamma_th must be > 0, got {gamma_th}")
    ber_sums: list[float] = []
    out_sums: list[float] = []
    sizes: list[int] = []
    for index, size in chunk_layout(cfg.trials, cfg.chunk_size):
        gamma = system_gamma_chunk(system, cfg.seed, index, size)
        ber_sums.append(float(np.sum(qfunc(np.sqrt(0.5 * gamma)))))
        out_sums.append(float(np.count_nonzero(gamma < gamma_th)))
        sizes.append(size)
    return McPerfResult(
        ber=_fold_mean_se(ber_sums, sizes, cfg.seed),
        outage=_fold_mean_se(out_sums, sizes, cfg.seed),
    )


def mc_bitlevel_single(
    channel: AnyChannel, p_t: float, sigma_n_sq: float, cfg: McConfig
) -> McEstimate:
    """Bit-level BER of a single branch with on-off keying.

    Equiprobable symbols 0 / 2*P_t through gain h plus Gaussian receiver
    noise, maximum-likelihood threshold at P_t*h (channel gain known).
    """
    sigma_n = math.sqrt(sigma_n_sq)
    err_sums: list[float] = []
    sizes: list[int] = []
    for index, size in chunk_layout(cfg.trials, cfg.chunk_size):
        rng = chunk_rng(cfg.seed, index)
        h = sample_channel(channel, rng, size)
        bits = rng.integers(0, 2, size).astype(bool)
        received = 2.0 * p_t * h * bits + rng.normal(0.0, sigma_n, size)
        decided = received > p_t * h
        err_sums.append(float(np.count_nonzero(decided != bits)))
        sizes.append(size)
    return _fold_mean_se(err_sums, sizes, cfg.seed)


def mc_empirical_cdf(quantity: str, target, cfg: McConfig) -> np.ndarray:
    """Sorted samples of a link quantity, for KS comparison against a CDF.

    ``quantity`` is one of ``r``, ``theta_s``, ``h`` (single channel) or
    ``gamma`` (a :class:`SystemSpec`).  The ``gamma`` path shares its chunk
    sampler with :func:`mc_perf`, so frequencies derived from the returned
    samples match mc_perf counts bit for bit under the same configuration.
    """
    if quantity not in ECDF_QUANTITIES:
        raise ValueError(f"quantity must be one of {ECDF_QUANTITIES}, got {quantity!r}")
    parts: list[np.ndarray] = []
    if quantity == "gamma":
        if not isinstance(target, SystemSpec):
            raise TypeError("gamma samples need a SystemSpec")
        for index, size in chunk_layout(cfg.trials, cfg.chunk_size):
            parts.append(system_gamma_chunk(target, cfg.seed, index, size))
        return np.sort(np.concatenate(parts))

    for index, size in chunk_layout(cfg.trials, cfg.chunk_size):
        rng = chunk_rng(cfg.seed, index)
        if quantity == "h":
            parts.append(np.asarray(sample_channel(target, rng, size)))
        else:
            if hasattr(target, "geometry"):
                sample = sample_jitter(target.jitter, rng, size)
                state = superimposed_angle(sample, target.geometry)
                theta_s, r = state.theta_s, state.r
            else:  # direct path: transmitter jitter over the total length
                ax = rng.normal(0.0, target.sigma_theta, size)
                ay = rng.normal(0.0, target.sigma_theta, size)
                theta_s = np.hypot(ax, ay)
                r = theta_s * target.length
            parts.append(np.asarray(theta_s if quantity == "theta_s" else r))
    return np.sort(np.concatenate(parts))
