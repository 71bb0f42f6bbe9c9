"""Command-line front end: scenarios in, reports and plot-ready data out.

Each invocation runs one scenario and writes, into the output directory,
a machine-readable ``report.json``, tabular CSV/plot data files where the
command produces them, and a ``report.meta.json`` sidecar holding the
timestamp and tool version (kept out of the main report so that repeated
runs with the same scenario and seed are byte-identical).

Exit status is 0 only when no module error occurred and every declared
reproduction expectation passed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcation import (
    hopf_m_star_analytic,
    hopf_scan,
    overlay_lines,
    region_classify,
    region_grid,
)
from .dynamics import (
    basin_sample,
    boundedness_monitor,
    classify_attractor,
    integrate,
    persistence_witness,
)
from .equilibria import (
    all_original_equilibria,
    blowup_equilibria,
    partial_blowup_equilibria,
    verify_equilibrium,
)
from .model import ModelParams, SysState
from .optimal import optimal_m
from .scenario import (
    FIGURE_INITIALS,
    PRESET_NAMES,
    Scenario,
    ScenarioError,
    load_scenario,
    preset_scenario,
)
from .stability import (
    MissingEquilibriumError,
    classify_E1,
    classify_E2,
    classify_E3,
    classify_origin,
    persistence_check,
    persistence_threshold_m,
)

__all__ = ["main", "run", "emit_tabular"]

_CONDITION_TEXT = {
    "death_lt_conversion": "predator death rate below conversion efficiency",
    "predation_rate_le_one": "predation coefficient at most one",
    "conversion_lt_collapse_cap": "conversion efficiency below the ratio-collapse cap",
    "net_revenue_positive": "harvest revenue margin positive",
    "net_revenue_below_cap": "harvest revenue margin below the coexistence cap",
    "prey_level_positive": "interior prey level positive",
    "prey_level_below_capacity": "interior prey level below carrying capacity",
    "slope_denominator_positive": "interior predator ratio well defined",
    "degenerate_denominator": "closed-form denominator vanishes",
}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_tabular(header: list[str], rows, path: str | Path, fmt: str = "csv") -> Path:
    """Write rows to ``path`` as CSV or whitespace plot data.

    Numbers are serialized with 17 significant digits so parsing the file
    recovers them bit-exactly; non-numeric cells are written verbatim.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("emit_tabular requires at least one data row")
    path = Path(path)

    def cell(v) -> str:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return _fmt(float(v))
        return str(v)

    lines = []
    if fmt == "csv":
        lines.append(",".join(header))
        lines.extend(",".join(cell(v) for v in row) for row in rows)
    elif fmt == "plot-script-data":
        lines.append("# " + " ".join(header))
        lines.extend(" ".join(cell(v) for v in row) for row in rows)
    else:
        raise ValueError(f"unknown tabular format {fmt!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _trace_json(trace) -> list[dict]:
    return [
        {"condition": c.condition_id, "left": c.left, "right": c.right, "passed": c.passed}
        for c in trace
    ]


def _verdict_json(v) -> dict:
    return {
        "kind": v.kind,
        "verdict": v.verdict,
        "route": v.route,
        "eigenvalues": [[z.real, z.imag] for z in v.eigenvalues],
        "rh_terms": list(v.rh_terms) if v.rh_terms is not None else None,
        "governing_conditions": [[cid, ok] for cid, ok in v.governing_conditions],
        "notes": v.notes,
    }


def _params_json(p: ModelParams) -> dict:
    return {k: getattr(p, k) for k in ("a", "e", "d", "q", "m", "m1", "m2", "p", "c", "rho", "delta")}


def _echo_conditions(report, say) -> None:
    for check in report.condition_trace:
        text = _CONDITION_TEXT.get(check.condition_id, check.condition_id)
        mark = "ok " if check.passed else "FAIL"
        say(f"      [{mark}] {text}: {check.left:.6g} vs {check.right:.6g}")


def _cmd_equilibria(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    reports = (
        all_original_equilibria(params)
        + blowup_equilibria(params)
        + partial_blowup_equilibria(params)
    )
    payload = []
    for r in reports:
        entry = {
            "kind": r.kind,
            "system": r.system,
            "coords": list(r.coords),
            "exists": r.exists,
            "conditions": _trace_json(r.condition_trace),
        }
        if r.exists:
            entry["residual"] = verify_equilibrium(params, r)
        payload.append(entry)
        say(f"  {r.kind:5s} exists={str(r.exists):5s} coords=({', '.join(f'{v:.6g}' for v in r.coords)})")
        _echo_conditions(r, say)
    return {"equilibria": payload}, []


def _cmd_stability(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    verdicts = [classify_origin(params), classify_E1(params)]
    skipped = {}
    for fn, kind in ((classify_E2, "E2"), (classify_E3, "E3")):
        try:
            verdicts.append(fn(params))
        except MissingEquilibriumError as exc:
            skipped[kind] = str(exc)
    persistence = persistence_check(params)
    for v in verdicts:
        route = f" via {v.route}" if v.route else ""
        say(f"  {v.kind:3s}: {v.verdict}{route}")
    say(f"  persistent: {persistence.persistent} "
        f"(y_bar={persistence.y_bar:.6g}, effort_bound={persistence.effort_bound:.6g})")
    return {
        "verdicts": [_verdict_json(v) for v in verdicts],
        "not_classified": skipped,
        "persistence": dataclasses.asdict(persistence),
        "persistence_threshold_m": float(persistence_threshold_m(params)),
    }, []


def _cmd_simulate(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    opts = scenario.options
    results = []
    artifacts = []
    for idx, ic in enumerate(opts["initial"]):
        label = f"ic{idx}"
        traj = integrate(
            params, SysState(*ic), opts["t_end"],
            rel_tol=opts["rel_tol"], abs_tol=opts["abs_tol"],
            max_step=opts["max_step"], fixed_step=opts["fixed_step"],
        )
        verdict = classify_attractor(params, traj, match_radius=opts["match_radius"])
        bounded = boundedness_monitor(params, traj)
        path = out / f"trajectory_{label}.csv"
        emit_tabular(
            ["t", "x", "y", "E"],
            (
                [t, s[0], s[1], s[2]]
                for t, s in zip(traj.times, traj.states)
            ),
            path,
        )
        artifacts.append(str(path))
        results.append({
            "initial": list(ic),
            "final_time": traj.final_time,
            "final_state": list(traj.final_state),
            "attractor": verdict.kind,
            "distance": verdict.distance,
            "cycle": dataclasses.asdict(verdict.cycle_stats) if verdict.cycle_stats else None,
            "meta": dataclasses.asdict(traj.meta),
            "bound_satisfied": bounded.satisfied,
            "file": path.name,
        })
        say(f"  {label} {tuple(round(v, 6) for v in ic)} -> {verdict.kind} "
            f"(final t={traj.final_time:.6g})")
    return {"runs": results}, artifacts


def _cmd_hopf(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    opts = scenario.options
    scan = hopf_scan(params, opts["m_lo"], opts["m_hi"], steps=opts["steps"])
    payload: dict = {
        "scan": {
            "m_star": scan.m_star,
            "transversality": scan.transversality,
            "reason": scan.reason,
            "conditions": scan.conditions,
        }
    }
    artifacts = []
    if scan.delta_values:
        path = emit_tabular(
            ["m", "hurwitz_product"], ([m, d] for m, d in scan.delta_values),
            out / "hopf_scan.csv",
        )
        artifacts.append(str(path))
    m_ref = opts.get("m_ref")
    if m_ref is not None:
        analytic = hopf_m_star_analytic(params, m_ref)
        payload["analytic"] = {
            "m_ref": m_ref,
            "m_star": analytic.m_star,
            "reason": analytic.reason,
            "conditions": analytic.conditions,
            "quadratic": list(analytic.quadratic) if analytic.quadratic else None,
        }
    if scan.m_star is None:
        say(f"  no Hopf crossing: {scan.reason}")
    else:
        say(f"  Hopf crossing at m* = {scan.m_star:.6f} (slope {scan.transversality:.4g})")
    return payload, artifacts


def _cmd_regions(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    opts = scenario.options
    grid = region_grid(
        params, (opts["c_min"], opts["c_max"]), (opts["d_min"], opts["d_max"]),
        opts["nx"], opts["ny"],
    )
    path = emit_tabular(["c", "d", "region"], grid.rows(), out / "regions.csv")
    lines = overlay_lines(params)
    lines_path = emit_tabular(
        ["name", "kind", "slope", "intercept", "value"],
        ([ln.name, ln.kind, ln.slope, ln.intercept, ln.value] for ln in lines),
        out / "region_lines.csv",
    )
    counts: dict[str, int] = {}
    for _, _, label in grid.rows():
        counts[label] = counts.get(label, 0) + 1
    say("  region counts: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return {
        "counts": counts,
        "c_range": [opts["c_min"], opts["c_max"]],
        "d_range": [opts["d_min"], opts["d_max"]],
        "nx": opts["nx"],
        "ny": opts["ny"],
    }, [str(path), str(lines_path)]


def _cmd_basins(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    opts = scenario.options
    result = basin_sample(
        params, tuple(opts["box"]), opts["n"], opts["t_end"],
        seed=scenario.seed, match_radius=opts["match_radius"],
    )
    path = emit_tabular(
        ["x0", "y0", "E0", "attractor"],
        ([s.x, s.y, s.E, v.kind] for s, v in result.samples),
        out / "basins.csv",
    )
    say("  attractor counts: " + ", ".join(f"{k}={v}" for k, v in sorted(result.counts.items())))
    return {"counts": result.counts, "n": opts["n"], "seed": scenario.seed}, [str(path)]


def _cmd_optimal(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    opts = scenario.options
    result = optimal_m(params, (opts["m_lo"], opts["m_hi"]), scan_points=opts["scan_points"])
    path = emit_tabular(
        ["m", "residual"], ([m, r] for m, r in result.scan), out / "optimal_scan.csv",
    )
    say(f"  m_opt = {result.m_opt:.6f}; equilibrium = "
        f"({', '.join(f'{v:.6g}' for v in result.equilibrium)})")
    return {
        "m_opt": result.m_opt,
        "equilibrium": list(result.equilibrium),
        "residual": result.residual,
        "bracket_used": list(result.bracket_used),
        "lambdas": [result.adjoints.lambda1, result.adjoints.lambda2, result.adjoints.lambda3],
        "adjoint_residuals": result.adjoints.residuals,
        "condition_number": result.adjoints.condition_number,
        "delta": params.delta,
    }, [str(path)]


def _figure_trajectory_checks(params, initials, target_kind, t_end, out, say, tol=1e-3):
    """Integrate published initial conditions and check their final state."""
    from .equilibria import all_original_equilibria

    target = next(r for r in all_original_equilibria(params) if r.kind == target_kind)
    expectations = []
    artifacts = []
    runs = []
    for label, ic in initials:
        traj = integrate(params, SysState(*ic), t_end)
        final = np.asarray(traj.final_state)
        dist = float(np.linalg.norm(final - np.asarray(target.coords)))
        passed = dist < tol
        path = emit_tabular(
            ["t", "x", "y", "E"],
            ([t, s[0], s[1], s[2]] for t, s in zip(traj.times, traj.states)),
            out / f"trajectory_{label}.csv",
        )
        artifacts.append(str(path))
        runs.append({
            "label": label, "initial": list(ic), "final_state": [float(v) for v in final],
            "final_time": traj.final_time, "distance": dist, "file": path.name,
        })
        expectations.append({
            "check": f"{label} reaches {target_kind} within {tol:g}",
            "passed": passed,
            "detail": f"distance {dist:.3e} at t={traj.final_time:.6g}",
        })
        say(f"  {label}: distance to {target_kind} = {dist:.3e} "
            f"({'ok' if passed else 'MISS'})")
    return runs, expectations, artifacts


def _cmd_reproduce(scenario: Scenario, out: Path, say) -> tuple[dict, list[str]]:
    params = scenario.params
    figure = scenario.options["figure"]
    payload: dict = {"figure": figure}
    expectations: list[dict] = []
    artifacts: list[str] = []

    if figure in (1, 2, 4):
        target = {1: "E0", 2: "E1", 4: "E3"}[figure]
        t_end = scenario.options.get("t_end") or (2000.0 if figure == 4 else 500.0)
        runs, expectations, artifacts = _figure_trajectory_checks(
            params, FIGURE_INITIALS[figure], target, t_end, out, say,
        )
        payload["runs"] = runs
    elif figure == 3:
        threshold = persistence_threshold_m(params)
        payload["persistence_threshold_m"] = float(threshold)
        say(f"  persistence threshold m = {float(threshold):.6f}")
        checks = []
        for m in (0.3, 0.35, 0.4, 0.45):
            rep = persistence_check(params.replace(m=m))
            checks.append({"m": m, "persistent": rep.persistent})
            expectations.append({
                "check": f"persistence verdict at m={m}",
                "passed": rep.persistent == (m > float(threshold)),
                "detail": f"persistent={rep.persistent}",
            })
        payload["persistence"] = checks
        witness = persistence_witness(
            params.replace(m=0.4), SysState(0.5, 0.4, 0.3),
            scenario.options.get("t_end") or 2000.0,
        )
        payload["witness_tail_minima"] = list(witness.tail_minima or ())
        expectations.append({
            "check": "tail minima positive at m=0.4",
            "passed": witness.witnessed,
            "detail": f"minima {witness.tail_minima}",
        })
    elif figure == 5:
        t_end = scenario.options.get("t_end") or 2000.0
        traj = integrate(params, SysState(0.3, 0.2, 0.2), t_end, max_step=1.0)
        verdict = classify_attractor(params, traj)
        path = emit_tabular(
            ["t", "x", "y", "E"],
            ([t, s[0], s[1], s[2]] for t, s in zip(traj.times, traj.states)),
            out / "trajectory_cycle.csv",
        )
        artifacts.append(str(path))
        payload["attractor"] = verdict.kind
        payload["cycle"] = dataclasses.asdict(verdict.cycle_stats) if verdict.cycle_stats else None
        expectations.append({
            "check": "sustained oscillation at the published fraction",
            "passed": verdict.kind == "limit_cycle",
            "detail": f"classified {verdict.kind}",
        })
        scan = hopf_scan(params.replace(m=0.5), 0.36, 0.5)
        payload["hopf_m_star"] = scan.m_star
        expectations.append({
            "check": "Hopf fraction within 0.005 of 0.385",
            "passed": scan.m_star is not None and abs(scan.m_star - 0.385) <= 0.005,
            "detail": f"m_star={scan.m_star}",
        })
        say(f"  attractor: {verdict.kind}; Hopf m* = {scan.m_star}")
    elif figure == 6:
        sub, arts = _cmd_regions(
            Scenario(command="regions", params=params, seed=scenario.seed,
                     options={"c_min": 0.25, "c_max": 6.0, "d_min": 0.02, "d_max": 0.7,
                              "nx": 40, "ny": 30}),
            out, say,
        )
        payload.update(sub)
        artifacts.extend(arts)
        for (c, d), expected in (((4.0, 0.18), "III"), ((4.6, 0.3), "V")):
            got = region_classify(params, c, d).label
            expectations.append({
                "check": f"label at (c={c}, d={d}) is {expected}",
                "passed": got == expected,
                "detail": f"got {got}",
            })
    elif figure in (7, 8):
        n = scenario.options.get("n") or 32
        t_end = scenario.options.get("t_end") or 1000.0
        pair = {7: ("E0", "E3"), 8: ("E0", "E2")}[figure]
        result = basin_sample(params, ((0.01, 1.0),) * 3, n, t_end, seed=scenario.seed)
        path = emit_tabular(
            ["x0", "y0", "E0", "attractor"],
            ([s.x, s.y, s.E, v.kind] for s, v in result.samples),
            out / "basins.csv",
        )
        artifacts.append(str(path))
        payload["counts"] = result.counts
        say("  attractor counts: " + ", ".join(f"{k}={v}" for k, v in sorted(result.counts.items())))
        for kind in pair:
            expectations.append({
                "check": f"attractor {kind} reached from the sampling box",
                "passed": result.counts.get(kind, 0) >= 1,
                "detail": f"count {result.counts.get(kind, 0)}",
            })
    else:
        raise ScenarioError(f"unknown figure number {figure}; expected 1..8")

    payload["expectations"] = expectations
    for item in expectations:
        say(f"  [{'ok' if item['passed'] else 'FAIL'}] {item['check']}: {item['detail']}")
    return payload, artifacts


_DISPATCH = {
    "equilibria": _cmd_equilibria,
    "stability": _cmd_stability,
    "simulate": _cmd_simulate,
    "hopf": _cmd_hopf,
    "regions": _cmd_regions,
    "basins": _cmd_basins,
    "optimal": _cmd_optimal,
    "reproduce-figure": _cmd_reproduce,
}


def run(scenario: Scenario, out_dir: str | Path, quiet: bool = False) -> int:
    """Execute a scenario; write report and artifacts; return the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def say(msg: str) -> None:
        if not quiet:
            print(msg)

    say(f"command: {scenario.command} (scenario {scenario.name!r}, seed {scenario.seed})")
    t0 = time.time()
    try:
        payload, artifacts = _DISPATCH[scenario.command](scenario, out, say)
    except Exception as exc:  # surfaced as exit status + diagnostic
        print(f"error: {exc}", file=sys.stderr)
        report = {
            "scenario": scenario.name,
            "command": scenario.command,
            "seed": scenario.seed,
            "params": _params_json(scenario.params),
            "error": str(exc),
            "error_type": type(exc).__name__,
        }
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        _write_sidecar(out, t0)
        return 1

    report = {
        "scenario": scenario.name,
        "command": scenario.command,
        "seed": scenario.seed,
        "params": _params_json(scenario.params),
        "artifacts": sorted(Path(a).name for a in artifacts),
        "result": payload,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_sidecar(out, t0)

    expectations = payload.get("expectations", [])
    failed = [e for e in expectations if not e["passed"]]
    if failed:
        print(f"{len(failed)} expectation(s) failed", file=sys.stderr)
        return 2
    say(f"report written to {out / 'report.json'}")
    return 0


def _write_sidecar(out: Path, t0: float) -> None:
    sidecar = {
        "created_unix": time.time(),
        "wall_seconds": time.time() - t0,
        "tool_version": __version__,
    }
    (out / "report.meta.json").write_text(json.dumps(sidecar, indent=2) + "\n")


def build_scenario(args) -> Scenario:
    """Assemble the scenario from preset and/or file, then CLI overrides."""
    scenario = None
    if args.scenario:
        scenario = load_scenario(args.scenario)
    elif args.preset:
        scenario = preset_scenario(args.preset)
    if scenario is None:
        raise ScenarioError("either --scenario or --preset is required")
    if args.preset and args.scenario:
        # file wins over preset unless the file itself names the preset
        base = preset_scenario(args.preset)
        if scenario.command != base.command:
            raise ScenarioError(
                f"--preset {args.preset} runs {base.command!r} but the scenario "
                f"file requests {scenario.command!r}"
            )
    if args.command and scenario.command != args.command:
        raise ScenarioError(
            f"command line requests {args.command!r} but the scenario resolves "
            f"to {scenario.command!r}"
        )
    if args.seed is not None:
        scenario.seed = args.seed
    return scenario


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="harvestdyn",
        description="Ratio-dependent predator-prey harvesting analysis toolkit",
    )
    parser.add_argument(
        "command",
        nargs="?",
        choices=sorted(_DISPATCH),
        help="analysis to run; may be omitted when the scenario or preset names it",
    )
    parser.add_argument("--scenario", help="scenario file (sectioned text or JSON)")
    parser.add_argument("--preset", help=f"named preset ({', '.join(PRESET_NAMES)})")
    parser.add_argument("--out", default="harvestdyn-out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--quiet", action="store_true", help="suppress the human summary")
    args = parser.parse_args(argv)

    try:
        scenario = build_scenario(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(scenario, args.out, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
