"""Closed-form BER, outage and MGF expressions for single- and multi-branch links.

Conventions (IM/DD with on-off keying throughout):
  * mean electrical SNR of a branch at unit gain: gamma_bar = 2 P_t^2 / sigma_n^2;
  * instantaneous per-branch SNR gamma_k = gamma_bar * h_k^2, combined over
    branches as gamma = sum(alpha_k^2 * gamma_k) (maximum ratio combining);
  * conditional bit error rate Q(sqrt(gamma / 2)).

For one branch the outage expression is exact (it is the gain CDF evaluated
at the threshold).  The finite-SNR BER contract is adaptive quadrature of the
conditional error rate against the gain law; the high-SNR closed form and a
retained incomplete-gamma variant (see ``single_ber_incgamma``) are provided
alongside, and the validation suite measures where the latter departs from
quadrature.  Multi-branch expressions are four-term high-SNR truncations of
the MGF product and are labeled asymptotic in all outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, gamma as gamma_fn, gammainc

from .fading import AnyChannel, ChannelDerived

SQRT_PI = math.sqrt(math.pi)


def qfunc(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def lower_gamma(a: float, x: float) -> float:
    """Unregularized lower incomplete gamma function."""
    return float(gammainc(a, x)) * gamma_fn(a)


class InvalidRegimeError(ValueError):
    """A truncated multi-branch term is outside its validity regime."""

    def __init__(self, failing_terms: tuple[str, ...]):
        self.failing_terms = failing_terms
        super().__init__(
            "asymptotic expansion invalid for terms: " + "; ".join(failing_terms)
        )


@dataclass(frozen=True)
class AsymptoticSpec:
    """Leading term g_c * mu^t of a fading density near zero, plus the
    modulation constants of the conditional error rate rho * Q(sqrt(zeta
    * gamma_bar * mu)).  OOK intensity detection uses rho=1, zeta=1/2."""

    g_c: float
    t: float
    rho: float = 1.0
    zeta: float = 0.5

    def __post_init__(self):
        if not (self.g_c > 0.0 and math.isfinite(self.g_c)):
            raise ValueError(f"g_c must be > 0, got {self.g_c}")
        if not (self.t > -1.0 and math.isfinite(self.t)):
            raise ValueError(f"t must be > -1, got {self.t}")


@dataclass(frozen=True)
class SystemSpec:
    """A transmitter, a set of channels and the power split across them."""

    channels: tuple[AnyChannel, ...]
    alphas: tuple[float, ...]
    p_t: float          # total transmit power (W)
    sigma_n_sq: float   # receiver noise variance

    def __post_init__(self):
        if len(self.channels) < 1:
            raise ValueError("system needs at least one channel")
        if len(self.alphas) != len(self.channels):
            raise ValueError(
                f"{len(self.alphas)} power coefficients for {len(self.channels)} channels"
            )
        if any(a < 0.0 for a in self.alphas):
            raise ValueError("power allocation coefficients must be >= 0")
        if abs(sum(self.alphas) - 1.0) >= 1e-12:
            raise ValueError(f"power coefficients must sum to 1, got {sum(self.alphas)}")
        if not (self.p_t > 0.0 and math.isfinite(self.p_t)):
            raise ValueError(f"p_t must be > 0, got {self.p_t}")
        if not (self.sigma_n_sq > 0.0 and math.isfinite(self.sigma_n_sq)):
            raise ValueError(f"sigma_n_sq must be > 0, got {self.sigma_n_sq}")

    def gamma_bar(self) -> float:
        return mean_snr(self.p_t, self.sigma_n_sq)

    def derived(self) -> tuple[ChannelDerived, ...]:
        return tuple(c.derive() for c in self.channels)


@dataclass(frozen=True)
class PerfPoint:
    """One sweep point of a performance curve."""

    sweep_value: float
    ber: float
    outage: float
    estimator: str = "closed-form"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.ber <= 0.5):
            raise ValueError(f"ber must be in [0, 0.5], got {self.ber}")
        if not (0.0 <= self.outage <= 1.0):
            raise ValueError(f"outage must be in [0, 1], got {self.outage}")


def mean_snr(p_t: float, sigma_n_sq: float) -> float:
    """Mean SNR at unit channel gain: 2 P_t^2 / sigma_n^2."""
    if p_t <= 0.0 or sigma_n_sq <= 0.0:
        raise ValueError("p_t and sigma_n_sq must be > 0")
    return 2.0 * p_t * p_t / sigma_n_sq


def ber_floor(d: ChannelDerived) -> float:
    """SNR-independent residual error rate of one branch: (1 - n) / 2."""
    return 0.5 * (1.0 - d.n)


def outage_floor(d: ChannelDerived) -> float:
    return 1.0 - d.n


def single_ber_quadrature(d: ChannelDerived, gamma_bar: float) -> float:
    """Finite-SNR average BER of one branch by adaptive quadrature.

    Uses the probability-transform substitution u = (h/a0)^m, which maps the
    continuous part of the gain law to a uniform variable; the zero atom
    contributes (1 - n)/2 analytically.
    """
    if gamma_bar <= 0.0:
        raise ValueError(f"gamma_bar must be > 0, got {gamma_bar}")
    z = gamma_bar * d.beam.a0 ** 2
    expo = 2.0 / d.m

    def integrand(u):
        return float(qfunc(math.sqrt(0.5 * z * u ** expo)))

    # Split at the point where the argument reaches ~40 so the adaptive rule
    # cannot overlook a narrow feature at the left endpoint when z is huge.
    pieces = [0.0, 1.0]
    if z > 80.0:
        pieces = [0.0, min(1.0, (80.0 / z) ** (d.m / 2.0)), 1.0]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        if hi > lo:
            total += quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-10, limit=300)[0]
    return 0.5 * (1.0 - d.n) + d.n * total


def single_ber_asymptotic(d: ChannelDerived, gamma_bar: float) -> float:
    """High-SNR closed-form BER of one branch (floor plus power-law decay)."""
    if gamma_bar <= 0.0:
        raise ValueError(f"gamma_bar must be > 0, got {gamma_bar}")
    z = gamma_bar * d.beam.a0 ** 2
    tail = (4.0 / z) ** (0.5 * d.m) * gamma_fn(0.5 * (d.m + 1.0)) / (2.0 * SQRT_PI)
    return float(0.5 * (1.0 - d.n) + d.n * tail)


def single_ber_incgamma(d: ChannelDerived, gamma_bar: float) -> float:
    """Retained incomplete-gamma BER closed form.

    Kept for comparison only: it disagrees with quadrature at finite SNR
    (the validation suite reports the measured gap) and converges to
    ``single_ber_asymptotic`` at high SNR.  Quadrature is the finite-SNR
    contract.
    """
    if gamma_bar <= 0.0:
        raise ValueError(f"gamma_bar must be > 0, got {gamma_bar}")
    z = gamma_bar * d.beam.a0 ** 2
    tail = (4.0 / z) ** (0.5 * d.m) * lower_gamma(0.5 * (d.m + 1.0), z) / (2.0 * SQRT_PI)
    return float(0.5 * (1.0 - d.n) + d.n * tail)


def single_outage(d: ChannelDerived, gamma_bar: float, gamma_th: float) -> float:
    """Exact outage probability of one branch (CDF of the branch SNR).

    Equals 1 exactly once the threshold exceeds the SNR support bound
    gamma_bar * a0^2.
    """
    if gamma_th <= 0.0:
        raise ValueError(f"gamma_th must be > 0, got {gamma_th}")
    if gamma_bar <= 0.0:
        raise ValueError(f"gamma_bar must be > 0, got {gamma_bar}")
    z = gamma_bar * d.beam.a0 ** 2
    if gamma_th >= z:
        return 1.0
    return (1.0 - d.n) + d.n * (gamma_th / z) ** (0.5 * d.m)


def single_mgf_exact(d: ChannelDerived, gamma_bar: float, v: float) -> float:
    """MGF E[exp(-v gamma)] of one branch over its finite SNR support."""
    if v < 0.0:
        raise ValueError(f"v must be >= 0, got {v}")
    if v == 0.0:
        return 1.0
    x = v * gamma_bar * d.beam.a0 ** 2
    half_m = 0.5 * d.m
    return float((1.0 - d.n) + half_m * d.n * x ** (-half_m) * lower_gamma(half_m, x))


def single_mgf_asymptotic(d: ChannelDerived, gamma_bar: float, v: float) -> float:
    """Large-argument MGF of one branch (complete-gamma tail)."""
    if v <= 0.0:
        raise ValueError(f"v must be > 0, got {v}")
    x = v * gamma_bar * d.beam.a0 ** 2
    half_m = 0.5 * d.m
    return float((1.0 - d.n) + half_m * d.n * x ** (-half_m) * gamma_fn(half_m))


# ---------------------------------------------------------------------------
# asymptotic-framework helpers


def leading_term(d: ChannelDerived) -> AsymptoticSpec:
    """Leading coefficient/exponent of the squared-gain density near zero."""
    g_c = 0.5 * d.m * d.n / d.beam.a0 ** d.m
    return AsymptoticSpec(g_c=g_c, t=0.5 * d.m - 1.0)


def outage_from_leading(spec: AsymptoticSpec, gamma_bar: float, gamma_th: float) -> float:
    """High-SNR outage of the continuous part from its leading term."""
    return spec.g_c / (spec.t + 1.0) * (gamma_th / gamma_bar) ** (spec.t + 1.0)


def ber_from_leading(spec: AsymptoticSpec, gamma_bar: float) -> float:
    """High-SNR average error rate of the continuous part from its leading term."""
    t = spec.t
    return (
        2.0 ** t * spec.g_c * spec.rho * gamma_fn(t + 1.5)
        / (SQRT_PI * (t + 1.0) * (spec.zeta * gamma_bar) ** (t + 1.0))
    )


def mgf_from_leading(spec: AsymptoticSpec, gamma_bar: float, v: float) -> float:
    """Large-argument MGF of the continuous part from its leading term."""
    return spec.g_c * gamma_fn(spec.t + 1.0) / (gamma_bar * v) ** (spec.t + 1.0)


# ---------------------------------------------------------------------------
# multi-branch (maximum ratio combining)


def _active(system: SystemSpec) -> list[tuple[ChannelDerived, float]]:
    """Channels that actually carry power; alpha = 0 entries are dropped."""
    pairs = [
        (c.derive(), a) for c, a in zip(system.channels, system.alphas) if a > 0.0
    ]
    if not pairs:
        raise ValueError("no channel carries power")
    return pairs


def _mgf_tail(d: ChannelDerived, alpha: float, gamma_bar: float, v: float) -> float:
    """Power-law tail coefficient of one branch's MGF at argument alpha^2 v."""
    x = v * gamma_bar * d.beam.a0 ** 2 * alpha * alpha
    half_m = 0.5 * d.m
    return half_m * d.n * x ** (-half_m) * gamma_fn(half_m)


def multi_mgf_approx(system: SystemSpec, v: float) -> float:
    """Four-term truncation of the combined-SNR MGF product.

    Keeps the all-blocked product, the single-survivor sum, the
    single-blocked sum and the all-survive product.  For one branch this is
    the single-branch asymptotic MGF.
    """
    if v <= 0.0:
        raise ValueError(f"v must be > 0, got {v}")
    pairs = _active(system)
    gbar = system.gamma_bar()
    if len(pairs) == 1:
        d, _ = pairs[0]
        return single_mgf_asymptotic(d, gbar, v)
    blocked = [1.0 - d.n for d, _ in pairs]
    tails = [_mgf_tail(d, a, gbar, v) for d, a in pairs]
    all_blocked = math.prod(blocked)
    one_survivor = sum(
        tails[k] * math.prod(b for i, b in enumerate(blocked) if i != k)
        for k in range(len(pairs))
    )
    one_blocked = sum(
        blocked[k] * math.prod(t for i, t in enumerate(tails) if i != k)
        for k in range(len(pairs))
    )
    all_survive = math.prod(tails)
    return float(all_blocked + one_survivor + one_blocked + all_survive)


def _check_regime(ms: list[float]) -> None:
    m_tot = sum(ms)
    failing = []
    for k, mk in enumerate(ms):
        if m_tot - mk <= 0.0:
            failing.append(f"single-blocked[k={k}]: residual exponent m-m_k <= 0")
    if m_tot <= 0.0:
        failing.append("all-survive: total exponent m <= 0")
    if failing:
        raise InvalidRegimeError(tuple(failing))


def multi_ber_asymptotic(system: SystemSpec) -> float:
    """High-SNR average BER of the combined system (four-term truncation).

    Channels with alpha = 0 are removed first; a single remaining branch
    falls back to the single-branch closed form.  Raises
    :class:`InvalidRegimeError` naming any term whose exponent is
    nonpositive.
    """
    pairs = _active(system)
    gbar = system.gamma_bar()
    if len(pairs) == 1:
        return single_ber_asymptotic(pairs[0][0], gbar)
    ms = [d.m for d, _ in pairs]
    _check_regime(ms)
    m_tot = sum(ms)
    blocked = [1.0 - d.n for d, _ in pairs]
    # X_k = 1 / (gamma_bar a0_k^2 alpha_k^2); per-branch power-law scales
    xs = [1.0 / (gbar * d.beam.a0 ** 2 * a * a) for d, a in pairs]
    tails = [
        0.5 * d.m * d.n * x ** (0.5 * d.m) * gamma_fn(0.5 * d.m)
        for (d, _), x in zip(pairs, xs)
    ]

    total = 0.5 * math.prod(blocked)
    for k, (d, _) in enumerate(pairs):
        others_blocked = math.prod(b for i, b in enumerate(blocked) if i != k)
        total += (
            d.n * 2.0 ** (d.m - 1.0) * xs[k] ** (0.5 * d.m)
            * gamma_fn(0.5 * (d.m + 1.0)) * others_blocked / SQRT_PI
        )
    for k, (d, _) in enumerate(pairs):
        m_rest = m_tot - d.m
        others_tail = math.prod(t for i, t in enumerate(tails) if i != k)
        total += (
            blocked[k] * 2.0 ** m_rest * gamma_fn(0.5 * (m_rest + 1.0)) * others_tail
            / (SQRT_PI * m_rest * gamma_fn(0.5 * m_rest))
        )
    total += (
        2.0 ** m_tot * gamma_fn(0.5 * (m_tot + 1.0)) * math.prod(tails)
        / (SQRT_PI * m_tot * gamma_fn(0.5 * m_tot))
    )
    return float(total)


def multi_outage_asymptotic(system: SystemSpec, gamma_th: float) -> float:
    """High-SNR outage probability of the combined system (same truncation)."""
    if gamma_th <= 0.0:
        raise ValueError(f"gamma_th must be > 0, got {gamma_th}")
    pairs = _active(system)
    gbar = system.gamma_bar()
    if len(pairs) == 1:
        return single_outage(pairs[0][0], gbar, gamma_th)
    ms = [d.m for d, _ in pairs]
    _check_regime(ms)
    m_tot = sum(ms)
    blocked = [1.0 - d.n for d, _ in pairs]
    xs = [1.0 / (gbar * d.beam.a0 ** 2 * a * a) for d, a in pairs]
    tails = [
        0.5 * d.m * d.n * x ** (0.5 * d.m) * gamma_fn(0.5 * d.m)
        for (d, _), x in zip(pairs, xs)
    ]

    total = math.prod(blocked)
    for k, (d, _) in enumerate(pairs):
        others_blocked = math.prod(b for i, b in enumerate(blocked) if i != k)
        total += d.n * (gamma_th * xs[k]) ** (0.5 * d.m) * others_blocked
    for k, (d, _) in enumerate(pairs):
        m_rest = m_tot - d.m
        others_tail = math.prod(t for i, t in enumerate(tails) if i != k)
        total += (
            blocked[k] * gamma_th ** (0.5 * m_rest) * others_tail
            / gamma_fn(0.5 * m_rest + 1.0)
        )
    total += gamma_th ** (0.5 * m_tot) * math.prod(tails) / gamma_fn(0.5 * m_tot + 1.0)
    return float(total)


def system_ber_floor(system: SystemSpec) -> float:
    """Residual BER with every powered branch obstructed."""
    return 0.5 * math.prod(1.0 - d.n for d, _ in _active(system))


def system_outage_floor(system: SystemSpec) -> float:
    return math.prod(1.0 - d.n for d, _ in _active(system))


# ---------------------------------------------------------------------------
# N identical channels, uniform power split


def identical_ber_n(
    d: ChannelDerived, count: int, p_t: float, sigma_n_sq: float
) -> float:
    """High-SNR BER with ``count`` identical branches at power 1/count each.

    The uniform split puts a count^2 factor inside every power-law scale.
    ``count = 1`` is the single-branch closed form.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gbar = mean_snr(p_t, sigma_n_sq)
    if count == 1:
        return single_ber_asymptotic(d, gbar)
    m, n, a0 = d.m, d.n, d.beam.a0
    x = count * count / (gbar * a0 * a0)  # sigma_n^2 N^2 / (2 P_t^2 a0^2)
    blocked = 1.0 - n
    tail = 0.5 * m * n * x ** (0.5 * m) * gamma_fn(0.5 * m)

    total = 0.5 * blocked ** count
    total += (
        count * n * 2.0 ** (m - 1.0) * x ** (0.5 * m) * gamma_fn(0.5 * (m + 1.0))
        * blocked ** (count - 1) / SQRT_PI
    )
    m_rest = (count - 1) * m
    total += (
        count * blocked * 2.0 ** m_rest * gamma_fn(0.5 * (m_rest + 1.0))
        * tail ** (count - 1) / (SQRT_PI * m_rest * gamma_fn(0.5 * m_rest))
    )
    m_all = count * m
    total += (
        2.0 ** m_all * gamma_fn(0.5 * (m_all + 1.0)) * tail ** count
        / (SQRT_PI * m_all * gamma_fn(0.5 * m_all))
    )
    return float(total)


def gain(d: ChannelDerived, count: int, p_t: float, sigma_n_sq: float) -> float:
    """BER improvement factor from adding one more identical branch."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return identical_ber_n(d, count, p_t, sigma_n_sq) / identical_ber_n(
        d, count + 1, p_t, sigma_n_sq
    )


def gain_infinite_snr(d: ChannelDerived) -> float:
    """Limit of the branch-count gain as transmit power grows: 1 / (1 - n)."""
    if d.n == 1.0:
        return math.inf
    return 1.0 / (1.0 - d.n)


def gain_low_obstruction(
    d: ChannelDerived, count: int, p_t: float, sigma_n_sq: float
) -> float:
    """Limit of the branch-count gain as the obstruction rate vanishes."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    m, n, a0 = d.m, d.n, d.beam.a0
    gbar = mean_snr(p_t, sigma_n_sq)
    x = 1.0 / (gbar * a0 * a0)
    nm, nm1 = count * m, (count + 1) * m
    numer = (
        gamma_fn(0.5 * nm1) * gamma_fn(0.5 * (nm + 1.0)) * count ** (nm - 1.0)
    )
    denom = (
        gamma_fn(0.5 * nm) * gamma_fn(0.5 * (nm1 + 1.0))
        * (count + 1.0) ** (nm1 - 1.0)
        * m * n * 2.0 ** (m - 1.0) * x ** (0.5 * m) * gamma_fn(0.5 * m)
    )
    return float(numer / denom)
