"""Composite channel fading: beam optics, pointing-error power law, obstruction.

The collected-power fraction under a pointing error r is approximately
``A0 * exp(-2 r^2 / w_zeq^2)`` for a Gaussian beam.  With the Rayleigh
pointing-error model of :mod:`rislink.geometry`, that transform gives a
power-law density ``(m/A0) (h/A0)^(m-1)`` on (0, A0].  Random obstruction
multiplies in a Bernoulli on/off state, so the channel gain has a point mass
``1 - n`` at exactly zero plus the power-law part scaled by ``n``.

The point mass is always handled structurally (as a probability), never as a
numeric spike inside a density array.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .geometry import JitterSpec, LinkGeometry, sample_jitter, superimposed_angle

# Gaussian-beam collection approximation degrades for wide apertures.
BEAM_RATIO_LIMIT = 6.0


@dataclass(frozen=True)
class BeamSpec:
    """Transmit beam optics: aperture radius a (m) and divergence angle (rad)."""

    aperture_radius: float
    divergence: float

    def __post_init__(self):
        if not (self.aperture_radius > 0.0 and math.isfinite(self.aperture_radius)):
            raise ValueError(f"aperture_radius must be > 0, got {self.aperture_radius}")
        if not (self.divergence > 0.0 and math.isfinite(self.divergence)):
            raise ValueError(f"divergence must be > 0, got {self.divergence}")


@dataclass(frozen=True)
class BeamDerived:
    """Beam quantities at the receiver plane.

    w_z: beam radius after the full path; u: sqrt(pi/2) * a / w_z;
    a0: collected-power fraction at zero offset; w_zeq_sq: equivalent beam
    width squared (m^2), always >= w_z^2.
    """

    w_z: float
    u: float
    a0: float
    w_zeq_sq: float

    def __post_init__(self):
        if not (0.0 < self.a0 < 1.0):
            raise ValueError(f"a0 must be in (0, 1), got {self.a0}")
        # >= up to roundoff: the ratio tends to 1 from above as u -> 0
        if self.w_zeq_sq < self.w_z ** 2 * (1.0 - 1e-12):
            raise ValueError("w_zeq_sq must be >= w_z^2")


@dataclass(frozen=True)
class ObstructionSpec:
    """Obstruction rate per meter of path length."""

    eta: float

    def __post_init__(self):
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be >= 0 and finite, got {self.eta}")


@dataclass(frozen=True)
class ChannelDerived:
    """Distribution parameters of one channel's gain.

    m: power-law fading exponent; n: obstruction survival probability
    (the gain has mass 1 - n at zero); beam: the derived beam optics.
    """

    m: float
    n: float
    beam: BeamDerived

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise ValueError(f"fading exponent m must be > 0, got {self.m}")
        if not (0.0 < self.n <= 1.0):
            raise ValueError(f"survival probability n must be in (0, 1], got {self.n}")


def derive_beam(beam: BeamSpec, total_length: float) -> BeamDerived:
    """Evaluate the beam-optics quantities for a given total path length.

    Warns (does not fail) when w_z / a <= 6, where the Gaussian collection
    approximation loses accuracy.
    """
    if total_length <= 0.0:
        raise ValueError(f"total_length must be > 0, got {total_length}")
    w_z = beam.divergence * total_length
    if w_z / beam.aperture_radius <= BEAM_RATIO_LIMIT:
        warnings.warn(
            f"beam radius / aperture = {w_z / beam.aperture_radius:.2f} <= "
            f"{BEAM_RATIO_LIMIT}: collected-power approximation degraded",
            stacklevel=2,
        )
    u = math.sqrt(math.pi / 2.0) * beam.aperture_radius / w_z
    erf_u = float(erf(u))
    a0 = erf_u * erf_u
    w_zeq_sq = w_z * w_z * math.sqrt(math.pi) * erf_u / (2.0 * u * math.exp(-u * u))
    return BeamDerived(w_z=w_z, u=u, a0=a0, w_zeq_sq=w_zeq_sq)


def fading_exponent(bd: BeamDerived, geom: LinkGeometry, jit: JitterSpec) -> float:
    """Power-law exponent of the pointing-error fading for a reflected link."""
    lw = geom.l + geom.w
    denom = 4.0 * jit.sigma_theta ** 2 * lw * lw + 16.0 * jit.sigma_beta ** 2 * geom.l ** 2
    if denom == 0.0:
        raise ValueError(
            "sigma_theta = sigma_beta = 0: fading collapses to a point mass at a0 "
            "and has no power-law exponent"
        )
    return bd.w_zeq_sq / denom


def fading_exponent_direct(bd: BeamDerived, length: float, sigma_theta: float) -> float:
    """Exponent for a direct (unreflected) path with transmitter jitter only."""
    denom = 4.0 * sigma_theta ** 2 * length * length
    if denom == 0.0:
        raise ValueError("sigma_theta = 0: direct path has no power-law exponent")
    return bd.w_zeq_sq / denom


def obstruction_survival(obs: ObstructionSpec, total_length: float) -> float:
    """Probability that a path of the given length is unobstructed."""
    if total_length <= 0.0:
        raise ValueError(f"total_length must be > 0, got {total_length}")
    return math.exp(-obs.eta * total_length)


def pointing_fading(theta_s, geom: LinkGeometry, bd: BeamDerived):
    """Collected-power fraction for a given superimposed pointing angle."""
    arr = np.asarray(theta_s, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("theta_s must be >= 0")
    out = bd.a0 * np.exp(-2.0 * arr * arr * geom.l ** 2 / bd.w_zeq_sq)
    return float(out) if np.ndim(theta_s) == 0 else out


@dataclass(frozen=True)
class ChannelSpec:
    """Full description of one reflected link."""

    geometry: LinkGeometry
    jitter: JitterSpec
    beam: BeamSpec
    obstruction: ObstructionSpec

    @property
    def path_length(self) -> float:
        return self.geometry.total_length

    def derive(self) -> ChannelDerived:
        bd = derive_beam(self.beam, self.path_length)
        return ChannelDerived(
            m=fading_exponent(bd, self.geometry, self.jitter),
            n=obstruction_survival(self.obstruction, self.path_length),
            beam=bd,
        )


@dataclass(frozen=True)
class DirectChannelSpec:
    """Direct transmitter-to-receiver path: beam jitter only, no reflector.

    Reconstructed baseline: same fading family as the reflected link with the
    exponent computed from transmitter jitter over the total length.
    """

    length: float
    sigma_theta: float
    beam: BeamSpec
    obstruction: ObstructionSpec

    def __post_init__(self):
        if not (self.length > 0.0 and math.isfinite(self.length)):
            raise ValueError(f"length must be > 0, got {self.length}")
        if not (self.sigma_theta >= 0.0 and math.isfinite(self.sigma_theta)):
            raise ValueError(f"sigma_theta must be >= 0, got {self.sigma_theta}")

    @property
    def path_length(self) -> float:
        return self.length

    def derive(self) -> ChannelDerived:
        bd = derive_beam(self.beam, self.length)
        return ChannelDerived(
            m=fading_exponent_direct(bd, self.length, self.sigma_theta),
            n=obstruction_survival(self.obstruction, self.length),
            beam=bd,
        )


AnyChannel = ChannelSpec | DirectChannelSpec


def sample_channel(
    channel: AnyChannel, rng: np.random.Generator, size: int | None = None
):
    """Draw channel gains h = h_pointing * h_obstruction.

    The pointing part goes through the physical jitter chain (Gaussian angle
    draws, superimposed angle, Gaussian-beam collection), not through the
    derived power law, so Monte Carlo stays an independent oracle of the
    closed forms.  Jitter draws come first, then the obstruction uniforms;
    the draw count is fixed by ``size``, which makes chunked streams
    deterministic.
    """
    bd = derive_beam(channel.beam, channel.path_length)
    if isinstance(channel, ChannelSpec):
        sample = sample_jitter(channel.jitter, rng, size)
        theta_s = superimposed_angle(sample, channel.geometry).theta_s
        h_p = bd.a0 * np.exp(
            -2.0 * np.square(theta_s) * channel.geometry.l ** 2 / bd.w_zeq_sq
        )
    else:
        ax = rng.normal(0.0, channel.sigma_theta, size)
        ay = rng.normal(0.0, channel.sigma_theta, size)
        theta_s = np.hypot(ax, ay)
        h_p = bd.a0 * np.exp(
            -2.0 * np.square(theta_s) * channel.length ** 2 / bd.w_zeq_sq
        )
    n = obstruction_survival(channel.obstruction, channel.path_length)
    survived = rng.random(size) < n
    out = h_p * survived
    return float(out) if size is None else out


def h_cdf(x, derived: ChannelDerived):
    """CDF of the channel gain: mass 1-n at 0, power law up to a0, then 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("channel gain must be >= 0")
    a0, m, n = derived.beam.a0, derived.m, derived.n
    out = np.where(arr >= a0, 1.0, 1.0 - n + n * (np.minimum(arr, a0) / a0) ** m)
    return float(out) if np.ndim(x) == 0 else out


def h_pdf_parts(derived: ChannelDerived):
    """Return (mass_at_zero, continuous density on (0, a0]).

    The zero atom is returned as a probability; the callable covers only the
    absolutely continuous part and is zero outside (0, a0].
    """
    a0, m, n = derived.beam.a0, derived.m, derived.n

    def density(h):
        arr = np.asarray(h, dtype=float)
        inside = (arr > 0.0) & (arr <= a0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(inside, n * (m / a0) * (arr / a0) ** (m - 1.0), 0.0)
        return float(vals) if np.ndim(h) == 0 else vals

    return 1.0 - n, density


def h_mean(derived: ChannelDerived) -> float:
    """Analytic mean of the channel gain: n * a0 * m / (m + 1)."""
    return derived.n * derived.beam.a0 * derived.m / (derived.m + 1.0)
