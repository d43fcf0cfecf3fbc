"""Command-line interface.

    crnflow <command> --scenario path/to/scenario.json [--out DIR]
                      [--tol FLOAT] [--seed INT] [--sweep SPEC]

Commands: info, simulate, equilibrium, decompose, effective-eq,
effective-cycle, ledger, classify. Exit codes: 0 success, 1 usage or
validation error, 2 solver failure, 3 integration halted at the
positivity floor (partial artifacts are still written).

--sweep runs the command once per value of one rate constant:
`<label>.<kf|kr>=v1,v2,...` or `<label>.<kf|kr>=lo:hi:n` (n linearly
spaced values). Artifacts get a per-value suffix and a sweep summary is
written alongside.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import geometry
from .convex import CoshDissipation
from .dynamics import Trajectory, energy_dissipation_balance, lyapunov_monitor, simulate, simulate_timedep
from .fileio import (
    NetworkParseError,
    ScenarioConfig,
    emit_report_json,
    emit_schedule_csv,
    emit_trajectory_csv,
)
from .kinetics import ConvergenceError, classify_state, mass_action_flux, wegscheider_check
from .network import ReactionNetwork

COMMANDS = (
    "info",
    "simulate",
    "equilibrium",
    "decompose",
    "effective-eq",
    "effective-cycle",
    "ledger",
    "classify",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="crnflow", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--tol", type=float, default=None, help="override the scenario's check tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in reports (default 0)")
    p.add_argument("--sweep", default=None, help="rate sweep: <label>.<kf|kr>=v1,v2,... or lo:hi:n")
    return p


def _fmt(v: float) -> str:
    return "%.17g" % v


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt(float(x)) for x in np.asarray(v, dtype=float)) + "]"


def _write(outdir: pathlib.Path, name: str, text: str) -> pathlib.Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _meta(scenario: ScenarioConfig, seed: int) -> dict:
    return {
        "seed": seed,
        "network": scenario.network_path or "<inline>",
        "species": list(scenario.network.species),
        "edge_labels": list(scenario.network.edge_labels),
    }


def _run_simulation(scenario: ScenarioConfig) -> Trajectory:
    net = scenario.network
    kwargs = dict(
        grid=scenario.grid,
        x_ref=scenario.x_ref,
        rtol=scenario.rtol,
        atol=scenario.atol,
        positivity_floor=scenario.positivity_floor,
    )
    if scenario.schedule is not None:
        return simulate_timedep(net, scenario.x0, scenario.t_span, scenario.schedule, **kwargs)
    return simulate(net, scenario.x0, scenario.t_span, **kwargs)


def _cmd_info(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    wc = wegscheider_check(net)
    print(f"species ({net.n_species}): {' '.join(net.species)}")
    print(f"hypervertices: {net.n_hypervertices}")
    print(f"edges ({net.n_edges}): {' '.join(net.edge_labels)}")
    print(f"conserved quantities ({net.n_conserved}):")
    for row in net.cons_basis.tolist():
        print(f"  {row}")
    print(f"cycles ({net.n_cycles}):")
    for col in net.cycle_basis.T.tolist():
        print(f"  {col}")
    verdict = "equilibrium" if wc["is_equilibrium"] else "nonequilibrium"
    print(f"rate constants: {verdict} (max cycle affinity "
          f"{_fmt(float(np.max(np.abs(wc['cycle_affinity']), initial=0.0)))})")
    return 0


def _cmd_simulate(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    traj = _run_simulation(scenario)
    path = _write(outdir, f"trajectory{suffix}.csv", emit_trajectory_csv(traj))
    print(f"wrote {path} ({traj.times.size} rows)")
    print(f"final state: {_fmt_vec(traj.final_state)}")
    if traj.halted:
        print(f"halted: {traj.halt_reason}")
        return 3
    return 0


def _cmd_equilibrium(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    if scenario.x_ref is not None:
        x_ref = scenario.x_ref
    else:
        wc = wegscheider_check(net)
        if not wc["is_equilibrium"]:
            raise ValueError(
                "rate constants carry cycle affinity and no x_ref was given; "
                "there is no equilibrium reference to project onto"
            )
        x_ref = np.exp(wc["potential"])
    x_eq = geometry.equilibrium_point(net, scenario.x0, x_ref)
    cert = geometry.pythagoras_gap(net, scenario.x0, x_eq, x_ref)
    report = {
        "meta": _meta(scenario, seed),
        "x0": scenario.x0,
        "x_ref": x_ref,
        "x_eq": x_eq,
        "conserved_residual": float(np.max(np.abs(net.conserved(x_eq) - net.conserved(scenario.x0)), initial=0.0)),
        "pythagoras": cert,
    }
    path = _write(outdir, f"equilibrium{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"x_eq: {_fmt_vec(x_eq)}")
    print(f"pythagoras gap: {_fmt(cert['gap'])}")
    return 0


def _cmd_decompose(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    x = scenario.state if scenario.state is not None else scenario.x0
    pair = mass_action_flux(net, x)
    dissip = CoshDissipation(pair.activity)
    fsplit = geometry.flux_split(net, dissip, pair.flux)
    gsplit = geometry.force_split(net, dissip, pair.force)
    report = {
        "meta": _meta(scenario, seed),
        "state": np.asarray(x, dtype=float),
        "flux": pair.flux,
        "force": pair.force,
        "activity": pair.activity,
        "cycle_affinity": net.curl(pair.force),
        "flux_split": {
            "j_eq": fsplit["flux"],
            "cycle_part": fsplit["cycle_part"],
            "u": fsplit["u"],
            "velocity_residual": fsplit["velocity_residual"],
            "iterations": fsplit["iterations"],
        },
        "force_split": {
            "f_st": gsplit["force"],
            "shift": gsplit["shift"],
            "y": gsplit["y"],
            "divergence_residual": gsplit["divergence_residual"],
            "iterations": gsplit["iterations"],
        },
    }
    path = _write(outdir, f"decompose{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"velocity residual: {_fmt(fsplit['velocity_residual'])}")
    print(f"divergence residual: {_fmt(gsplit['divergence_residual'])}")
    return 0


def _closed_loop_deviation(net: ReactionNetwork, scenario: ScenarioConfig, traj, schedule) -> float:
    redo = simulate_timedep(
        net,
        scenario.x0,
        (float(schedule.times[0]), float(schedule.times[-1])),
        schedule,
        grid=schedule.times,
        rtol=scenario.rtol,
        atol=scenario.atol,
        positivity_floor=scenario.positivity_floor,
    )
    base = traj.interpolate(schedule.times)
    mirror = redo.interpolate(schedule.times)
    scale = float(np.max(np.abs(base)))
    return float(np.max(np.abs(mirror - base)) / scale)


def _cmd_effective_eq(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    traj = _run_simulation(scenario)
    times = scenario.grid if scenario.grid is not None else traj.times
    schedule, cert = geometry.effective_equilibrium_rates(net, traj, times=times)
    deviation = _closed_loop_deviation(net, scenario, traj, schedule)
    report = {
        "meta": _meta(scenario, seed),
        "certificates": cert,
        "max_zeta_residual": float(cert["zeta_residual"].max()),
        "max_velocity_residual": float(cert["velocity_residual"].max()),
        "closed_loop_deviation": deviation,
        "kappa": np.sqrt(net.kplus * net.kminus),
    }
    _write(outdir, f"effective_eq_schedule{suffix}.csv", emit_schedule_csv(schedule, net.edge_labels))
    path = _write(outdir, f"effective_eq{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"closed-loop deviation (relative sup-norm): {_fmt(deviation)}")
    print(f"max zeta residual: {_fmt(report['max_zeta_residual'])}")
    return 0


def _cmd_effective_cycle(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    traj = _run_simulation(scenario)
    times = scenario.grid if scenario.grid is not None else traj.times
    schedule, cert = geometry.effective_steady_rates(net, traj, times=times)
    report = {
        "meta": _meta(scenario, seed),
        "certificates": cert,
        "max_steady_residual": float(cert["steady_residual"].max()),
        "max_affinity_residual": float(cert["affinity_residual"].max()),
        "kappa": np.sqrt(net.kplus * net.kminus),
    }
    _write(outdir, f"effective_cycle_schedule{suffix}.csv", emit_schedule_csv(schedule, net.edge_labels))
    path = _write(outdir, f"effective_cycle{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"max steadiness residual: {_fmt(report['max_steady_residual'])}")
    return 0


def _cmd_ledger(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    wc = wegscheider_check(net)
    if scenario.x_ref is not None:
        x_ref = scenario.x_ref
    elif wc["is_equilibrium"]:
        x_ref = np.exp(wc["potential"])
    else:
        raise ValueError(
            "ledger needs an equilibrium-class network or an explicit x_ref "
            "(complex-balanced) reference state"
        )
    scenario.x_ref = x_ref
    traj = _run_simulation(scenario)
    monitor = lyapunov_monitor(net, traj, x_ref)
    report = {
        "meta": _meta(scenario, seed),
        "reference": x_ref,
        "lyapunov": {
            "max_derivative": monitor["max_derivative"],
            "nonincreasing": monitor["nonincreasing"],
        },
    }
    if wc["is_equilibrium"]:
        balance = energy_dissipation_balance(net, traj)
        report["energy_balance"] = {
            "lhs": balance["lhs"],
            "rhs": balance["rhs"],
            "gap": balance["gap"],
            "reference": balance["reference"],
        }
    _write(outdir, f"ledger_trajectory{suffix}.csv", emit_trajectory_csv(traj))
    path = _write(outdir, f"ledger{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"lyapunov nonincreasing: {monitor['nonincreasing']} "
          f"(max derivative {_fmt(monitor['max_derivative'])})")
    if "energy_balance" in report:
        print(f"energy balance gap: {_fmt(report['energy_balance']['gap'])}")
    if traj.halted:
        print(f"halted: {traj.halt_reason}")
        return 3
    return 0


def _cmd_classify(scenario: ScenarioConfig, outdir, tol, seed, suffix) -> int:
    net = scenario.network
    x = scenario.state if scenario.state is not None else scenario.x0
    result = classify_state(net, x, tol=tol if tol is not None else 1e-8)
    report = {"meta": _meta(scenario, seed), "state": np.asarray(x, dtype=float), **result}
    path = _write(outdir, f"classify{suffix}.json", emit_report_json(report))
    print(f"wrote {path}")
    print(f"label: {result['label']}")
    return 0


_DISPATCH = {
    "info": _cmd_info,
    "simulate": _cmd_simulate,
    "equilibrium": _cmd_equilibrium,
    "decompose": _cmd_decompose,
    "effective-eq": _cmd_effective_eq,
    "effective-cycle": _cmd_effective_cycle,
    "ledger": _cmd_ledger,
    "classify": _cmd_classify,
}


def _parse_sweep(spec: str, net: ReactionNetwork) -> tuple[str, str, np.ndarray]:
    head, sep, tail = spec.partition("=")
    if not sep or "." not in head:
        raise ValueError("sweep spec must look like <label>.<kf|kr>=<values>")
    label, _, which = head.rpartition(".")
    if which not in ("kf", "kr"):
        raise ValueError("sweep target must be kf or kr")
    if label not in net.edge_labels:
        raise ValueError(f"unknown edge label {label!r}")
    if ":" in tail:
        parts = tail.split(":")
        if len(parts) != 3:
            raise ValueError("range sweep must be lo:hi:n")
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        values = np.linspace(lo, hi, num)
    else:
        values = np.array([float(v) for v in tail.split(",") if v])
    if values.size == 0 or not np.all(values > 0):
        raise ValueError("sweep values must be positive and non-empty")
    return label, which, values


def _apply_sweep_value(net: ReactionNetwork, label: str, which: str, value: float) -> ReactionNetwork:
    e = net.edge_labels.index(label)
    kp = net.kplus.copy()
    km = net.kminus.copy()
    (kp if which == "kf" else km)[e] = value
    return net.with_rates(kp, km)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        scenario = ScenarioConfig.load(args.scenario)
    except (OSError, json.JSONDecodeError, NetworkParseError, ValueError) as e:
        print(f"error: invalid scenario: {e}", file=sys.stderr)
        return 1

    outdir = pathlib.Path(args.out)
    tol = args.tol if args.tol is not None else scenario.tol
    handler = _DISPATCH[args.command]

    if args.sweep is None:
        runs = [(scenario, "")]
    else:
        try:
            label, which, values = _parse_sweep(args.sweep, scenario.network)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        runs = []
        for v in values:
            import copy

            sc = copy.copy(scenario)
            sc.network = _apply_sweep_value(scenario.network, label, which, float(v))
            runs.append((sc, f"__{label}.{which}={_fmt(float(v))}"))

    summary = []
    first_bad = 0
    for sc, suffix in runs:
        try:
            code = handler(sc, outdir, tol, args.seed, suffix)
        except ConvergenceError as e:
            print(f"error: solver failure: {e}", file=sys.stderr)
            code = 2
        except (ValueError, NetworkParseError) as e:
            print(f"error: {e}", file=sys.stderr)
            code = 1
        summary.append({"suffix": suffix, "exit_code": code})
        if code != 0 and first_bad == 0:
            first_bad = code
    if args.sweep is not None:
        _write(outdir, "sweep_summary.json", emit_report_json({"runs": summary, "sweep": args.sweep}))
    return first_bad


if __name__ == "__main__":
    sys.exit(main())
