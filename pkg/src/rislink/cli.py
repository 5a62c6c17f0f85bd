"""Command-line front end: scenario-driven sweeps and the validation gate.

Commands::

    rislink analyze  --scenario <file|name> --out <path>   closed-form curves
    rislink simulate --scenario <file|name> --out <path>   Monte Carlo curves
    rislink gain     --scenario <file|name> --out <path>   branch-count gain
    rislink optimize --scenario <file|name> --out <path>   power allocation
    rislink validate [--out <path>]                        oracle suite

Exit codes: 0 success, 2 configuration error, 3 validation failure.
``analyze`` never runs Monte Carlo and ``simulate`` never reads analytic
results; the two paths share only the scenario.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from . import __version__, allocation, montecarlo, performance, validation
from .scenario import (
    ResultTable,
    Scenario,
    ScenarioError,
    load_scenario,
    scenario_hash,
    shipped_scenarios,
)
from .units import db_to_linear, linear_to_db

_SWEEP_COLUMN = {"P_t_dBm": "p_t_dbm", "eta": "eta", "N": "n_channels"}


def _provenance(command: str, scenario: Scenario) -> tuple[tuple[str, str], ...]:
    return (
        ("tool", f"rislink {__version__}"),
        ("command", command),
        ("scenario", scenario.name),
        ("scenario_sha256", scenario_hash(scenario)),
        ("seed", str(scenario.mc.seed)),
        ("trials", str(scenario.mc.trials)),
    )


def cmd_analyze(scenario: Scenario) -> ResultTable:
    """Closed-form and high-SNR curves over the sweep; no sampling involved."""
    gamma_th = db_to_linear(scenario.gamma_th_db)
    want_asym = "asymptotic" in scenario.outputs
    want_quad = "quadrature" in scenario.outputs
    columns = [_SWEEP_COLUMN[scenario.sweep.variable], "gamma_bar_db"]
    if want_asym:
        columns.append("ber_asymptotic")
    if want_quad:
        columns.append("ber_quadrature")
    if want_asym:
        columns.append("outage_asymptotic")
    columns += ["ber_floor", "outage_floor", "regime_note"]
    rows = []
    for value in scenario.sweep.values():
        system = scenario.system_at(float(value))
        gbar = system.gamma_bar()
        single = len(system.channels) == 1
        note = ""
        try:
            if single:
                derived = system.channels[0].derive()
                ber = performance.single_ber_asymptotic(derived, gbar)
                ber_quad = performance.single_ber_quadrature(derived, gbar)
                outage = performance.single_outage(derived, gbar, gamma_th)
            else:
                ber = performance.multi_ber_asymptotic(system)
                ber_quad = float("nan")  # quadrature route is single-branch only
                outage = performance.multi_outage_asymptotic(system, gamma_th)
        except performance.InvalidRegimeError as exc:
            ber = ber_quad = outage = float("nan")
            note = "; ".join(exc.failing_terms)
        row = [float(value), linear_to_db(gbar)]
        if want_asym:
            row.append(ber)
        if want_quad:
            row.append(ber_quad)
        if want_asym:
            row.append(outage)
        row += [
            performance.system_ber_floor(system),
            performance.system_outage_floor(system),
            note,
        ]
        rows.append(tuple(row))
    return ResultTable(tuple(columns), tuple(rows), _provenance("analyze", scenario))


def cmd_simulate(scenario: Scenario) -> ResultTable:
    """Monte Carlo curves with standard errors; deterministic under the seed."""
    gamma_th = db_to_linear(scenario.gamma_th_db)
    columns = [
        _SWEEP_COLUMN[scenario.sweep.variable],
        "ber_mc",
        "ber_stderr",
        "outage_mc",
        "outage_stderr",
        "trials",
    ]
    rows = []
    for value in scenario.sweep.values():
        system = scenario.system_at(float(value))
        if scenario.mc.estimator == "bit-level":
            if len(system.channels) != 1:
                raise ScenarioError("mc.estimator", "bit-level needs a single channel")
            ber = montecarlo.mc_bitlevel_single(
                system.channels[0], system.p_t, system.sigma_n_sq, scenario.mc
            )
            outage = montecarlo.mc_perf(system, gamma_th, scenario.mc).outage
        else:
            result = montecarlo.mc_perf(system, gamma_th, scenario.mc)
            ber, outage = result.ber, result.outage
        point = performance.PerfPoint(
            sweep_value=float(value),
            ber=ber.mean,
            outage=outage.mean,
            estimator="monte-carlo",
        )
        rows.append(
            (
                point.sweep_value,
                point.ber,
                ber.std_error,
                point.outage,
                outage.std_error,
                ber.trials,
            )
        )
    return ResultTable(tuple(columns), tuple(rows), _provenance("simulate", scenario))


def cmd_gain(scenario: Scenario) -> ResultTable:
    """Branch-count gain curve at the scenario's fixed transmit power."""
    if scenario.sweep.variable != "N":
        raise ScenarioError("sweep.variable", "gain sweeps over N")
    derived = scenario.channels[0].derive()
    columns = [
        "n_channels",
        "ber_n",
        "ber_n_plus_1",
        "gain",
        "gain_infinite_snr",
        "gain_low_obstruction",
    ]
    rows = []
    for value in scenario.sweep.values():
        count = int(round(float(value)))
        ber_n = performance.identical_ber_n(
            derived, count, scenario.p_t, scenario.sigma_n_sq
        )
        ber_np1 = performance.identical_ber_n(
            derived, count + 1, scenario.p_t, scenario.sigma_n_sq
        )
        rows.append(
            (
                count,
                ber_n,
                ber_np1,
                ber_n / ber_np1,
                performance.gain_infinite_snr(derived),
                performance.gain_low_obstruction(
                    derived, count, scenario.p_t, scenario.sigma_n_sq
                ),
            )
        )
    return ResultTable(tuple(columns), tuple(rows), _provenance("gain", scenario))


def cmd_optimize(scenario: Scenario) -> ResultTable:
    """Power allocation for the base system plus verifier output."""
    system = scenario.base_system()
    problem = allocation.build_problem(system)
    alloc = allocation.optimal_alloc(problem)
    check = allocation.verify_alloc(problem, alloc)
    columns = [
        "channel",
        "alpha",
        "alpha_grid",
        "alpha_abs_gap",
        "coeff_b",
        "exponent_m",
    ]
    rows = tuple(
        (
            k,
            alloc.alphas[k],
            check.grid_alphas[k],
            abs(alloc.alphas[k] - check.grid_alphas[k]),
            problem.coeffs[k],
            problem.exponents[k],
        )
        for k in range(problem.size)
    )
    provenance = _provenance("optimize", scenario) + (
        ("kkt_residual", repr(check.kkt_residual)),
        ("grid_optimum_gap", repr(check.grid_optimum_gap)),
        ("objective", repr(alloc.objective)),
    )
    return ResultTable(tuple(columns), rows, provenance)


def cmd_validate(trials: int, seed: int, stream=None) -> tuple[ResultTable, bool]:
    """Run the oracle suite, print one line per check, return pass state."""
    stream = stream if stream is not None else sys.stdout
    results = validation.run_checks(trials=trials, seed=seed)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} - {res.name}: {res.detail}",
              file=stream)
    columns = ("check", "passed", "detail")
    rows = tuple((r.name, int(r.passed), r.detail) for r in results)
    provenance = (
        ("tool", f"rislink {__version__}"),
        ("command", "validate"),
        ("seed", str(seed)),
        ("trials", str(trials)),
    )
    return ResultTable(columns, rows, provenance), all(r.passed for r in results)


def _write_output(table: ResultTable, out: str, fmt: str) -> None:
    payload = table.to_csv() if fmt == "csv" else table.to_json()
    if out == "-":
        sys.stdout.write(payload)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    mc = scenario.mc
    if args.seed is not None:
        mc = dataclasses.replace(mc, seed=args.seed)
    if args.trials is not None:
        mc = dataclasses.replace(mc, trials=args.trials)
    return dataclasses.replace(scenario, mc=mc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rislink",
        description="Mirror-assisted free-space optical link performance toolkit",
    )
    parser.add_argument("--version", action="version", version=f"rislink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("analyze", "closed-form and asymptotic performance curves"),
        ("simulate", "Monte Carlo performance curves with standard errors"),
        ("gain", "BER gain from adding identical branches"),
        ("optimize", "high-SNR power allocation with verification"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--scenario", required=True,
                       help=f"path or shipped name ({', '.join(shipped_scenarios())})")
        p.add_argument("--out", required=True, help="output path, '-' for stdout")
        p.add_argument("--seed", type=int, default=None, help="override scenario seed")
        p.add_argument("--trials", type=int, default=None,
                       help="override scenario trial count")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    v = sub.add_parser("validate", help="run the cross-validation oracle suite")
    v.add_argument("--out", default=None, help="optional report path, '-' for stdout")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--trials", type=int, default=1_000_000)
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "gain": cmd_gain,
    "optimize": cmd_optimize,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        table, ok = cmd_validate(args.trials, args.seed)
        if args.out:
            _write_output(table, args.out, args.format)
        return 0 if ok else 3
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        table = _COMMANDS[args.command](scenario)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _write_output(table, args.out, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
