"""Acceptance gate: one test per release criterion, printed pass/fail lines.

Two sub-criteria are implemented exactly as stated but are expected to fail
(strict xfail) because the stated targets are contradicted by verified
computation; each has a green companion asserting the verified behavior and
an entry in the decisions ledger:

  * criterion 5's fixed 60 dBm point: with a fading exponent near 0.5 the
    power-law terms decay like (transmit power)^-0.5, so the branch-count
    gain is still ~35% away from its infinite-power limit 1/(1-n) at 60 dBm;
    the limit is verified at 110 dBm instead.
  * criterion 7's quadratic-slope band [1.9, 2.1]: the exact reflection
    trace agrees with the linearized offset to SECOND order (the quadratic
    error coefficient cancels identically for every incidence angle, checked
    symbolically and numerically), so the fitted slope is 3, not 2.
"""
import dataclasses
import math
import time

import numpy as np
import pytest

from rislink import allocation, geometry, performance, validation
from rislink.fading import BeamSpec, ChannelSpec, ObstructionSpec
from rislink.geometry import JitterSpec, LinkGeometry
from rislink.montecarlo import (
    McConfig,
    chunk_layout,
    mc_empirical_cdf,
    mc_perf,
    system_gamma_chunk,
)
from rislink.performance import (
    identical_ber_n,
    gain,
    gain_infinite_snr,
    gain_low_obstruction,
    mean_snr,
    multi_ber_asymptotic,
    multi_outage_asymptotic,
    single_ber_asymptotic,
    single_ber_quadrature,
    single_mgf_exact,
    single_outage,
    SystemSpec,
)
from rislink.validation import ks_distance, table1_reflected, table1_system

SIGMA_N_SQ = 1e-4
GAMMA_TH_5DB = 10.0 ** 0.5


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def test_c1_receiver_offset_cdf_reproduction():
    """Sampled receiver-offset CDF matches the closed form at three jitter scales."""
    start = time.monotonic()
    geom = LinkGeometry(w=4.0 * math.sqrt(3.0), l=2.0 * math.sqrt(10.0))
    pairs = [(5e-3, 2e-3), (1e-2, 4e-3), (2e-2, 8e-3)]
    beam = BeamSpec(aperture_radius=0.1, divergence=8e-3)
    distances = []
    cdfs = []
    for offset, (s_t, s_b) in enumerate(pairs):
        channel = ChannelSpec(
            geom, JitterSpec(s_t, s_b), beam, ObstructionSpec(0.0)
        )
        samples = mc_empirical_cdf(
            "r", channel, McConfig(trials=10 ** 6, seed=42 + offset)
        )
        jit = channel.jitter
        distances.append(
            ks_distance(samples, lambda x, j=jit: geometry.displacement_cdf(x, geom, j))
        )
        cdfs.append(lambda x, j=jit: geometry.displacement_cdf(x, geom, j))
    elapsed = time.monotonic() - start
    grid = np.linspace(0.02, 0.8, 50)
    ordered = all(
        np.all(cdfs[i](grid) > cdfs[i + 1](grid)) for i in range(len(cdfs) - 1)
    )
    ok = max(distances) < 0.005 and elapsed < 10.0 and ordered
    report(
        "1",
        ok,
        f"KS distances {[f'{d:.2e}' for d in distances]} (< 0.005), "
        f"larger jitter lowers the CDF: {ordered}, runtime {elapsed:.1f}s (< 10s)",
    )
    assert max(distances) < 0.005
    assert ordered
    assert elapsed < 10.0


def test_c2_obstruction_floors():
    """At extreme power the system sits on the obstruction floor."""
    derived = table1_reflected(eta=1e-3).derive()
    floor_ber = 0.5 * (1.0 - derived.n)
    floor_out = 1.0 - derived.n
    p_t = 1e9  # gamma_bar a0^2 = 3.8e18 > 1e6
    system = table1_system(count=1, eta=1e-3, p_t=p_t)
    z = system.gamma_bar() * derived.beam.a0 ** 2
    assert z > 1e6
    res = mc_perf(system, GAMMA_TH_5DB, McConfig(trials=10 ** 7, seed=42))
    ber_gap = abs(res.ber.mean - floor_ber)
    out_gap = abs(res.outage.mean - floor_out)
    ber_ok = ber_gap <= 3.0 * res.ber.std_error
    out_ok = out_gap <= 3.0 * res.outage.std_error
    # closed forms hit the same floors in the infinite-power limit
    asym_limit = single_ber_asymptotic(derived, mean_snr(1e120, SIGMA_N_SQ))
    out_limit = single_outage(derived, mean_snr(1e120, SIGMA_N_SQ), GAMMA_TH_5DB)
    closed_ok = (
        abs(asym_limit - floor_ber) <= 1e-12 * floor_ber
        and abs(out_limit - floor_out) <= 1e-12 * floor_out
    )
    report(
        "2",
        ber_ok and out_ok and closed_ok,
        f"MC BER gap {ber_gap:.2e} vs 3se {3 * res.ber.std_error:.2e}, "
        f"MC outage gap {out_gap:.2e} vs 3se {3 * res.outage.std_error:.2e}, "
        f"closed-form floors match to 1e-12: {closed_ok}",
    )
    assert ber_ok and out_ok and closed_ok


def test_c3_single_branch_asymptotic_accuracy():
    """High-SNR closed form within 2% of quadrature once gamma_bar a0^2 >= 1e4."""
    derived = table1_reflected(eta=1e-8).derive()
    assert derived.m == pytest.approx(0.502, abs=5e-4)
    gaps = []
    for z in (1e4, 3e4, 1e5):
        gbar = z / derived.beam.a0 ** 2
        q = single_ber_quadrature(derived, gbar)
        a = single_ber_asymptotic(derived, gbar)
        gaps.append(abs(a - q) / q)
    # the retained incomplete-gamma closed form is measured by the validator
    res = validation.check_ber_closed_forms()
    reported = "quadrature is the finite-SNR contract" in res.detail
    ok = max(gaps) < 0.02 and res.passed and reported
    report(
        "3",
        ok,
        f"asymptotic-vs-quadrature gaps {[f'{g:.1e}' for g in gaps]} (< 2%), "
        f"validator reports the retained-form discrepancy: {reported}",
    )
    assert max(gaps) < 0.02
    assert res.passed and reported


def test_c4_multi_branch_against_monte_carlo():
    """Two-branch truncation vs Monte Carlo in the stated BER band, plus ordering."""
    # Stated configuration: eta = 1e-3.  The two-branch BER floor is
    # (1-n)^2/2 = 9.7e-3 > 1e-3, so no transmit power puts the Monte Carlo
    # BER inside [1e-5, 1e-3]: the stated band is empty.  Demonstrate that,
    # then run the substantive 15% comparison at the Table-1 obstruction rate
    # (eta = 1e-8) where the band is populated.  Ledger entry covers this.
    desk = table1_system(count=2, eta=1e-3, p_t=10.0 ** ((70.0 - 30.0) / 10.0))
    floor = performance.system_ber_floor(desk)
    probe = mc_perf(desk, GAMMA_TH_5DB, McConfig(trials=10 ** 6, seed=42))
    band_empty = floor > 1e-3 and probe.ber.mean >= floor - 3 * probe.ber.std_error
    report(
        "4a",
        band_empty,
        f"stated eta=1e-3 band is empty: two-branch floor {floor:.3e} > 1e-3 "
        f"(MC at 70 dBm: {probe.ber.mean:.3e}); running the band check at the "
        f"Table-1 rate instead",
    )
    assert band_empty

    start = time.monotonic()
    worst_ber = worst_out = 0.0
    in_band = 0
    for p_dbm in (64.0, 70.0):
        p_t = 10.0 ** ((p_dbm - 30.0) / 10.0)
        system = table1_system(count=2, eta=1e-8, p_t=p_t)
        res = mc_perf(system, GAMMA_TH_5DB, McConfig(trials=10 ** 8, seed=42))
        if 1e-5 <= res.ber.mean <= 1e-3:
            in_band += 1
            ber_rel = abs(multi_ber_asymptotic(system) - res.ber.mean) / res.ber.mean
            out_rel = (
                abs(multi_outage_asymptotic(system, GAMMA_TH_5DB) - res.outage.mean)
                / res.outage.mean
            )
            worst_ber = max(worst_ber, ber_rel)
            worst_out = max(worst_out, out_rel)
    elapsed = time.monotonic() - start
    band_ok = in_band == 2 and worst_ber < 0.15 and worst_out < 0.15
    report(
        "4b",
        band_ok and elapsed < 120.0,
        f"{in_band} points in [1e-5, 1e-3]; worst rel gap BER {worst_ber:.3f}, "
        f"outage {worst_out:.3f} (< 0.15); 2x1e8 trials in {elapsed:.0f}s (< 120s)",
    )
    assert band_ok
    assert elapsed < 120.0

    # ordering: more branches help everywhere in the valid regime, with
    # diminishing returns in the branch count
    orderings = []
    for p_dbm in np.linspace(40.0, 70.0, 7):
        p_t = 10.0 ** ((p_dbm - 30.0) / 10.0)
        one = multi_ber_asymptotic(table1_system(1, 1e-3, p_t))
        two = multi_ber_asymptotic(table1_system(2, 1e-3, p_t))
        orderings.append(two <= one)
    p_t40 = 10.0 ** ((40.0 - 30.0) / 10.0)
    bers = [multi_ber_asymptotic(table1_system(k, 1e-3, p_t40)) for k in (2, 3, 4)]
    gaps_shrink = (bers[0] - bers[1]) > (bers[1] - bers[2]) > 0.0
    report(
        "4c",
        all(orderings) and gaps_shrink,
        f"two-branch <= one-branch at all {len(orderings)} sweep points: "
        f"{all(orderings)}; gap(2->3)={bers[0]-bers[1]:.3e} > "
        f"gap(3->4)={bers[1]-bers[2]:.3e}",
    )
    assert all(orderings) and gaps_shrink


def test_c5_gain_limits():
    """Branch-count gain limits and monotonicity (verified operating points)."""
    desk = table1_reflected(eta=1e-3).derive()
    limit = gain_infinite_snr(desk)
    assert limit == pytest.approx(1.0 / (1.0 - desk.n), rel=1e-12)
    deep = [gain(desk, count, 1e8, SIGMA_N_SQ) for count in range(1, 6)]
    deep_ok = all(abs(g - limit) / limit < 0.01 for g in deep)
    at60 = gain(desk, 1, 1000.0, SIGMA_N_SQ)

    light = table1_reflected(eta=1e-12).derive()
    low = [
        abs(
            gain(light, count, 0.1, SIGMA_N_SQ)
            / gain_low_obstruction(light, count, 0.1, SIGMA_N_SQ)
            - 1.0
        )
        for count in range(1, 6)
    ]
    low_ok = max(low) < 0.01

    vals = [gain(desk, count, 0.1, SIGMA_N_SQ) for count in range(1, 7)]
    mono_ok = all(a >= b for a, b in zip(vals, vals[1:]))
    report(
        "5",
        deep_ok and low_ok and mono_ok,
        f"gain at 110 dBm within 1% of 1/(1-n)={limit:.4f} for N=1..5: {deep_ok} "
        f"(at the stated 60 dBm the gain is still {at60:.2f}, see xfail); "
        f"low-obstruction limit gaps max {max(low):.1e}; nonincreasing at "
        f"20 dBm: {mono_ok}",
    )
    assert deep_ok and low_ok and mono_ok


@pytest.mark.xfail(
    strict=True,
    reason="spec defect (ledgered): with m ~ 0.5 the gain converges to "
    "1/(1-n) like P_t^-0.5, so at 60 dBm it is still ~35% short; the stated "
    "'1/(1-n) = 1/0.8607' also equals 1/n, not 1/(1-n), at eta = 1e-3",
)
def test_c5_stated_60dbm_point():
    """Criterion 5 exactly as stated: gain within 1% of 1/(1-n) at 60 dBm."""
    desk = table1_reflected(eta=1e-3).derive()
    limit = gain_infinite_snr(desk)
    gains = [gain(desk, count, 1000.0, SIGMA_N_SQ) for count in range(1, 6)]
    report(
        "5 (stated 60 dBm)",
        False,
        f"gains at 60 dBm {[f'{g:.3f}' for g in gains]} vs limit {limit:.4f}",
    )
    assert all(abs(g - limit) / limit < 0.01 for g in gains)


def test_c6_power_allocation():
    """Stationarity, grid agreement, exact uniformity, Monte Carlo benefit."""
    rng = np.random.default_rng(42)
    worst_res = worst_gap = 0.0
    for _ in range(100):
        count = int(rng.integers(2, 4))
        problem = allocation.AllocProblem(
            coeffs=tuple(float(v) for v in rng.uniform(0.1, 10.0, count)),
            exponents=tuple(float(v) for v in rng.uniform(0.3, 3.0, count)),
            floor_term=0.0,
        )
        alloc = allocation.optimal_alloc(problem)
        check = allocation.verify_alloc(problem, alloc)
        worst_res = max(worst_res, check.kkt_residual)
        worst_gap = max(
            worst_gap, max(abs(a - g) for a, g in zip(alloc.alphas, check.grid_alphas))
        )
    random_ok = worst_res < 1e-10 and worst_gap <= 1e-4

    uniform_alloc = allocation.optimal_alloc(
        allocation.AllocProblem((3.0, 3.0), (0.7, 0.7), 0.0)
    )
    uniform_ok = uniform_alloc.alphas == (0.5, 0.5)

    # asymmetric two-branch system at 65 dBm, where the high-SNR objective
    # ranks allocations the same way the full model does
    ch_a = table1_reflected(eta=2e-3)
    ch_b = ChannelSpec(
        LinkGeometry(w=50.0, l=100.0),
        JitterSpec(7e-3, 2e-3),
        BeamSpec(0.1, 8e-3),
        ObstructionSpec(5e-4),
    )
    system = SystemSpec((ch_a, ch_b), (0.5, 0.5), 10.0 ** 3.5, SIGMA_N_SQ)
    for channel in system.channels:
        derived = channel.derive()
        gap = abs(
            single_ber_asymptotic(derived, system.gamma_bar())
            - single_ber_quadrature(derived, system.gamma_bar())
        ) / single_ber_quadrature(derived, system.gamma_bar())
        assert gap < 0.05  # the stated validity precondition
    alloc = allocation.optimal_alloc(allocation.build_problem(system))
    tuned = dataclasses.replace(system, alphas=alloc.alphas)
    cfg = McConfig(trials=10 ** 7, seed=42)
    res_uniform = mc_perf(system, GAMMA_TH_5DB, cfg)
    res_tuned = mc_perf(tuned, GAMMA_TH_5DB, cfg)
    margin = res_uniform.ber.mean - res_tuned.ber.mean
    combined = math.hypot(res_uniform.ber.std_error, res_tuned.ber.std_error)
    mc_ok = margin > 3.0 * combined
    report(
        "6",
        random_ok and uniform_ok and mc_ok,
        f"100 problems: worst residual {worst_res:.1e} (< 1e-10), worst grid "
        f"gap {worst_gap:.1e} (<= 1e-4); identical -> uniform: {uniform_ok}; "
        f"MC improvement {margin:.2e} vs 3se {3 * combined:.2e}",
    )
    assert random_ok and uniform_ok and mc_ok


def _convergence_slopes() -> dict[str, float]:
    geom = LinkGeometry(w=50.0, l=100.0, incidence_angle=math.pi / 4.0)
    slopes = {}
    for plane in ("horizontal", "vertical"):
        scales = np.logspace(-1.05, -4.0, 9)
        errs = []
        for s in scales:
            res = geometry.raytrace(plane, float(s), float(s) / 2.0, geom)
            errs.append(abs(res.exact_receiver_offset - res.linear_receiver_offset))
        slopes[plane] = float(np.polyfit(np.log10(scales), np.log10(errs), 1)[0])
    return slopes


def test_c7_geometry_oracle_convergence():
    """The exact trace validates the linearization: error vanishes as order 3."""
    slopes = _convergence_slopes()
    ok = all(2.9 < s < 3.1 for s in slopes.values())
    report(
        "7",
        ok,
        f"measured error-order slopes {slopes} - cubic, stronger than the "
        f"quadratic contract (quadratic coefficient cancels identically; "
        f"see xfail for the stated [1.9, 2.1] band)",
    )
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="spec defect (ledgered): the exact reflection trace matches the "
    "linearized offset to second order for every incidence angle (the "
    "claimed quadratic error term displaces the reflection point along the "
    "ray, which does not move the receiver-plane spot at second order), so "
    "the fitted slope is 3, outside the stated [1.9, 2.1] band",
)
def test_c7_stated_slope_band():
    """Criterion 7 exactly as stated: fitted slope in [1.9, 2.1]."""
    slopes = _convergence_slopes()
    report("7 (stated band)", False, f"measured slopes {slopes}")
    assert all(1.9 <= s <= 2.1 for s in slopes.values())


def test_c8_distribution_suite():
    """Mixture normalization, first moment, MGF normalization, zero mass."""
    channel = table1_reflected(eta=1e-3)
    derived = channel.derive()

    from rislink.fading import h_mean, h_pdf_parts, sample_channel
    from scipy.integrate import quad

    mass, density = h_pdf_parts(derived)
    integral = quad(density, 0.0, derived.beam.a0, epsabs=1e-13, epsrel=1e-11,
                    limit=300)[0]
    norm_err = abs(mass + integral - 1.0)

    n_draws = 10 ** 6
    h = sample_channel(channel, np.random.default_rng(42), size=n_draws)
    mean_rel = abs(float(np.mean(h)) - h_mean(derived)) / h_mean(derived)

    mgf_at_zero = single_mgf_exact(derived, mean_snr(1.0, SIGMA_N_SQ), 0.0)

    zero_freq = float(np.count_nonzero(h == 0.0)) / n_draws
    band = 3.0 * math.sqrt(mass * (1.0 - mass) / n_draws)
    zero_ok = abs(zero_freq - mass) <= band

    ok = (
        norm_err < 1e-9
        and mean_rel < 0.01
        and abs(mgf_at_zero - 1.0) <= 1e-12
        and zero_ok
    )
    report(
        "8",
        ok,
        f"normalization err {norm_err:.1e} (< 1e-9), mean rel err "
        f"{mean_rel:.2e} (< 1%), MGF(0)-1 = {mgf_at_zero - 1.0:.1e}, zero-mass "
        f"gap {abs(zero_freq - mass):.2e} vs 3-sigma {band:.2e}",
    )
    assert ok


def test_c9_determinism(tmp_path):
    """Same seed gives byte-identical output, independent of chunk schedule."""
    import json as json_mod

    from rislink import cli
    from rislink.scenario import load_scenario

    data = load_scenario("table1_single").to_dict()
    data["mc"]["trials"] = 30000
    data["name"] = "determinism"
    path = tmp_path / "s.json"
    path.write_text(json_mod.dumps(data))
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", "--scenario", str(path), "--out", str(out_a)]) == 0
    assert cli.main(["simulate", "--scenario", str(path), "--out", str(out_b)]) == 0
    byte_identical = out_a.read_bytes() == out_b.read_bytes()

    # chunk results do not depend on evaluation order (worker-count proxy)
    system = table1_system(count=2, eta=1e-3, p_t=1.0)
    layout = chunk_layout(30000, 4096)
    forward = [system_gamma_chunk(system, 42, i, s) for i, s in layout]
    scrambled = {i: system_gamma_chunk(system, 42, i, s)
                 for i, s in sorted(layout, key=lambda t: -t[0])}
    schedule_free = all(
        np.array_equal(forward[i], scrambled[i]) for i, _ in layout
    )
    report(
        "9",
        byte_identical and schedule_free,
        f"repeat run byte-identical: {byte_identical}; chunk stream "
        f"independent of evaluation order: {schedule_free}",
    )
    assert byte_identical and schedule_free
