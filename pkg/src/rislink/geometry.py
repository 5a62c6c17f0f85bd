"""Pointing-error geometry of a single mirror-reflected optical link.

A transmitter aims a beam at a steerable mirror which reflects it onto the
receiver center.  Angular jitter at the transmitter (per-axis std dev
``sigma_theta``) and of the mirror normal (``sigma_beta``) displace the spot
in the receiver plane.  In the small-angle regime the combined angular error
per axis is ``(1 + w/l)*theta + 2*beta``, so the radial angle is Rayleigh
distributed and the receiver-plane displacement is that angle times ``l``.

``raytrace`` performs the exact trigonometric reflection and exists purely as
a verification oracle for the linearized formulas; the distribution layer and
everything downstream use only the linear model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Beyond this the linearized pointing model is meaningless, so the tracer
# refuses rather than returning numbers nobody should use.
MAX_TRACE_ANGLE = 0.3


def _require_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class JitterSpec:
    """Per-axis angle standard deviations (radians) of the two jitter sources."""

    sigma_theta: float  # transmitter beam jitter
    sigma_beta: float   # mirror normal jitter

    def __post_init__(self):
        for name in ("sigma_theta", "sigma_beta"):
            v = getattr(self, name)
            _require_finite(name, v)
            if v < 0.0:
                raise ValueError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class LinkGeometry:
    """Path lengths of one reflected link.

    ``incidence_angle`` only matters to the ray tracer (and the mirror-plane
    offset it reports); it cancels out of the linearized angle statistics.
    """

    w: float  # transmitter -> mirror distance (m)
    l: float  # mirror -> receiver distance (m)
    incidence_angle: float = math.pi / 4

    def __post_init__(self):
        if not (self.w > 0.0 and math.isfinite(self.w)):
            raise ValueError(f"w must be > 0, got {self.w}")
        if not (self.l > 0.0 and math.isfinite(self.l)):
            raise ValueError(f"l must be > 0, got {self.l}")
        if not (0.0 <= self.incidence_angle < math.pi / 2):
            raise ValueError(
                f"incidence_angle must be in [0, pi/2), got {self.incidence_angle}"
            )

    @property
    def total_length(self) -> float:
        return self.w + self.l


@dataclass(frozen=True)
class JitterSample:
    """One joint draw of the four jitter angles (scalars or arrays)."""

    theta_x: float | np.ndarray
    theta_y: float | np.ndarray
    beta_x: float | np.ndarray
    beta_y: float | np.ndarray

    def __post_init__(self):
        for name in ("theta_x", "theta_y", "beta_x", "beta_y"):
            _require_finite(name, getattr(self, name))


@dataclass(frozen=True)
class PointingState:
    """Radial pointing-error angle and the matching receiver-plane offset."""

    theta_s: float | np.ndarray  # superimposed angle (rad, >= 0)
    r: float | np.ndarray        # displacement at the receiver plane (m, >= 0)

    def __post_init__(self):
        _require_finite("theta_s", self.theta_s)
        _require_finite("r", self.r)
        if np.any(np.asarray(self.theta_s) < 0.0):
            raise ValueError("theta_s must be >= 0")


@dataclass(frozen=True)
class RayTraceResult:
    """Exact vs. linearized receiver offsets for one in-plane trace."""

    icrn_offset: float            # beam offset in the mirror plane (m)
    exact_receiver_offset: float  # full trigonometric reflection (m)
    linear_receiver_offset: float # ((1 + w/l)*theta + 2*beta) * l (m)

    def __post_init__(self):
        for name in ("icrn_offset", "exact_receiver_offset", "linear_receiver_offset"):
            _require_finite(name, getattr(self, name))


def sample_jitter(
    spec: JitterSpec, rng: np.random.Generator, size: int | None = None
) -> JitterSample:
    """Draw the four independent zero-mean Gaussian jitter angles.

    ``size=None`` gives scalar fields; an integer gives arrays.  The draw
    order (theta_x, theta_y, beta_x, beta_y) is part of the determinism
    contract: a fixed seed reproduces the same sequence.
    """
    return JitterSample(
        theta_x=rng.normal(0.0, spec.sigma_theta, size),
        theta_y=rng.normal(0.0, spec.sigma_theta, size),
        beta_x=rng.normal(0.0, spec.sigma_beta, size),
        beta_y=rng.normal(0.0, spec.sigma_beta, size),
    )


def superimposed_angle(sample: JitterSample, geom: LinkGeometry) -> PointingState:
    """Combine the four jitter angles into the radial pointing error.

    Per axis the transmitter jitter is amplified by (1 + w/l) and the mirror
    jitter doubled by reflection; the radial angle is the root square sum of
    the two axes and the receiver offset is that angle times l.
    """
    amp = 1.0 + geom.w / geom.l
    ax = amp * sample.theta_x + 2.0 * sample.beta_x
    ay = amp * sample.theta_y + 2.0 * sample.beta_y
    theta_s = np.hypot(ax, ay)
    if np.ndim(theta_s) == 0:
        theta_s = float(theta_s)
    return PointingState(theta_s=theta_s, r=theta_s * geom.l)


def pointing_scale_sq(geom: LinkGeometry, jit: JitterSpec) -> float:
    """Per-axis variance of the superimposed angle: (1+w/l)^2 s_t^2 + 4 s_b^2."""
    amp = 1.0 + geom.w / geom.l
    return amp * amp * jit.sigma_theta ** 2 + 4.0 * jit.sigma_beta ** 2


def _check_nonnegative(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError(f"{what} must be >= 0")
    return arr


def theta_s_pdf(x, geom: LinkGeometry, jit: JitterSpec):
    """Rayleigh density of the superimposed pointing-error angle."""
    arr = _check_nonnegative(x, "angle")
    s2 = pointing_scale_sq(geom, jit)
    if s2 == 0.0:
        raise ValueError("degenerate jitter: sigma_theta = sigma_beta = 0 has no density")
    out = arr / s2 * np.exp(-(arr * arr) / (2.0 * s2))
    return float(out) if np.ndim(x) == 0 else out


def theta_s_cdf(x, geom: LinkGeometry, jit: JitterSpec):
    """Rayleigh CDF of the superimposed pointing-error angle."""
    arr = _check_nonnegative(x, "angle")
    s2 = pointing_scale_sq(geom, jit)
    if s2 == 0.0:
        raise ValueError("degenerate jitter: sigma_theta = sigma_beta = 0 has no CDF")
    out = 1.0 - np.exp(-(arr * arr) / (2.0 * s2))
    return float(out) if np.ndim(x) == 0 else out


def displacement_cdf(r, geom: LinkGeometry, jit: JitterSpec):
    """CDF of the receiver-plane displacement r = theta_s * l.

    Algebraically identical to ``theta_s_cdf(r / l)``: the per-axis scale in
    displacement units is (l+w)^2 s_t^2 + 4 s_b^2 l^2.
    """
    arr = _check_nonnegative(r, "displacement")
    lw = geom.l + geom.w
    s2 = lw * lw * jit.sigma_theta ** 2 + 4.0 * jit.sigma_beta ** 2 * geom.l ** 2
    if s2 == 0.0:
        raise ValueError("degenerate jitter: sigma_theta = sigma_beta = 0 has no CDF")
    out = 1.0 - np.exp(-(arr * arr) / (2.0 * s2))
    return float(out) if np.ndim(r) == 0 else out


def raytrace(plane: str, theta: float, beta: float, geom: LinkGeometry) -> RayTraceResult:
    """Exact in-plane reflection trace vs. the linearized offset.

    The nominal beam leaves the transmitter, hits the mirror center at the
    plane's incidence angle (``geom.incidence_angle`` horizontally, 0
    vertically) and reflects through distance ``l`` to the receiver center;
    the receiver plane is normal to that nominal reflected ray.  The actual
    beam is rotated by ``theta`` at the transmitter and the mirror normal by
    ``beta`` about the mirror center; the trace intersects the tilted mirror
    (no original-plane shortcut) and then the receiver plane.

    Raises ValueError when |theta| + |beta| >= 0.3 rad (outside the linear
    contract) or when the reflected ray cannot reach either plane.
    """
    if plane not in ("horizontal", "vertical"):
        raise ValueError(f"plane must be 'horizontal' or 'vertical', got {plane!r}")
    if abs(theta) + abs(beta) >= MAX_TRACE_ANGLE:
        raise ValueError(
            f"|theta| + |beta| = {abs(theta) + abs(beta):.3g} rad exceeds the "
            f"small-angle contract ({MAX_TRACE_ANGLE} rad)"
        )
    inc = geom.incidence_angle if plane == "horizontal" else 0.0
    w, l = geom.w, geom.l

    # Mirror line along x, original normal +y.  The nominal beam arrives with
    # direction (sin inc, -cos inc) from the transmitter at distance w.
    d_in = np.array([math.sin(inc + theta), -math.cos(inc + theta)])
    tx = np.array([-w * math.sin(inc), w * math.cos(inc)])
    normal = np.array([math.sin(beta), math.cos(beta)])  # tilt chosen so beta>0 deflects like theta>0

    approach = float(d_in @ normal)  # = -cos(inc + theta + beta)
    if approach >= -1e-12:
        raise ValueError("jittered beam does not reach the reflector plane")
    hit = tx - (float(tx @ normal) / approach) * d_in

    d_out = d_in - 2.0 * approach * normal
    nominal_out = np.array([math.sin(inc), math.cos(inc)])
    receiver = l * nominal_out

    along = float(d_out @ nominal_out)
    if along <= 1e-12:
        raise ValueError("reflected ray is parallel to or diverges from the receiver plane")
    span = float((receiver - hit) @ nominal_out) / along
    spot = hit + span * d_out

    in_plane = np.array([math.cos(inc), -math.sin(inc)])
    exact = float((spot - receiver) @ in_plane)
    linear = ((1.0 + w / l) * theta + 2.0 * beta) * l
    icrn = math.tan(theta) * w / math.cos(inc)
    return RayTraceResult(
        icrn_offset=icrn,
        exact_receiver_offset=exact,
        linear_receiver_offset=linear,
    )
