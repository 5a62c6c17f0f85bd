"""rislink: performance modeling of mirror-assisted free-space optical links.

Covers the pointing-error geometry of a jittering transmitter aimed at a
jittering steerable mirror, the resulting composite fading law with random
obstruction, closed-form and Monte Carlo BER / outage estimation for single-
and multi-branch systems, branch-count gain, and high-SNR power allocation.
"""

__version__ = "0.1.0"

from .geometry import (
    JitterSample,
    JitterSpec,
    LinkGeometry,
    PointingState,
    RayTraceResult,
    displacement_cdf,
    raytrace,
    sample_jitter,
    superimposed_angle,
    theta_s_cdf,
    theta_s_pdf,
)
from .fading import (
    BeamDerived,
    BeamSpec,
    ChannelDerived,
    ChannelSpec,
    DirectChannelSpec,
    ObstructionSpec,
    derive_beam,
    fading_exponent,
    h_cdf,
    h_mean,
    h_pdf_parts,
    obstruction_survival,
    pointing_fading,
    sample_channel,
)
from .performance import (
    AsymptoticSpec,
    InvalidRegimeError,
    PerfPoint,
    SystemSpec,
    gain,
    gain_infinite_snr,
    gain_low_obstruction,
    identical_ber_n,
    mean_snr,
    multi_ber_asymptotic,
    multi_mgf_approx,
    multi_outage_asymptotic,
    single_ber_asymptotic,
    single_ber_incgamma,
    single_ber_quadrature,
    single_mgf_asymptotic,
    single_mgf_exact,
    single_outage,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    McPerfResult,
    mc_bitlevel_single,
    mc_empirical_cdf,
    mc_perf,
)
from .allocation import (
    AllocCheck,
    AllocProblem,
    Allocation,
    build_problem,
    optimal_alloc,
    proportional_alloc,
    verify_alloc,
)
from .scenario import ResultTable, Scenario, ScenarioError, load_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
