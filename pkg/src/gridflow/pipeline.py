"""End-to-end orchestration: network -> fields -> chart -> lines -> control -> report.

Every stage reads its inputs from the run directory when not handed them
in memory, so the staged subcommands compose to exactly the same bytes as
one single-shot run (all artifact files use shortest round-trip float
formatting). Artifacts per run directory:

    network.txt          network file (schema in network.py)
    theta.grid           direction field raster (rad)
    rho_max.grid         maximal density raster (veh/m^2)
    v_max.grid           maximal velocity raster (m/s)
    alpha.grid beta.grid scaling-field rasters
    xi.grid eta.grid     chart-coordinate rasters (diagnostic)
    atlas.txt            traced eta-paths with rescaled data
    control_plan.txt     per-eta bottleneck/flow/control table
    timeseries.txt       per-line density and flux snapshots
    convergence.csv      L2-error series
    manifest.json        scenario hash, versions, stage timings

Timeseries file schema (version 1):

    # gridflow timeseries v1
    lines <L> times <T>
    times <t_0> ... <t_{T-1}>
    line <k> eta <eta> n_cells <n> dxi <dxi> xi_first <xi_0>
    rho <time_index> <n densities>          (T rows)
    flux <time_index> <n+1 interface fluxes> (T rows)

Densities are written exactly (repr); fluxes are informational and
written with 12 significant digits.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .control import ControlPlan, apply_plan, plan_for_lines, save_control_plan
from .diagnostics import ConvergenceReport, decay_report, line_l2, lyapunov, save_report_csv
from .errors import StageError, ValidationError
from .fields import (ContinuumFields, DirectionField, grid_for_bbox, load_direction,
                     load_raster, reconstruct_direction, reconstruct_rho_max,
                     reconstruct_v_max, save_raster)
from .godunov import GhostCell, LineState, all_fluxes, line_from_path, run
from .network import generate_manhattan_grid, load_network, save_network
from .scenario import Scenario
from .transform import (CurvilinearAtlas, ScalingFields, chart_potentials, load_atlas,
                        rescale_line_data, save_atlas, solve_scaling_fields,
                        trace_eta_paths)


@dataclass
class SimulationResult:
    times: np.ndarray  # (T,)
    lines: list  # final LineStates
    plans: ControlPlan
    rho_series: list  # per line: (T, n_cells)
    deta: float


def _manifest_update(out: Path, **entries):
    path = out / "manifest.json"
    data = {}
    if path.exists():
        data = json.loads(path.read_text())
    data.update(entries)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _stage(out: Path, name: str, fn):
    t0 = _time.perf_counter()
    try:
        result = fn()
    except Exception as exc:
        _manifest_update(out, complete=False, failed_stage=name, error=str(exc))
        raise StageError(name, exc) from exc
    stages = {}
    mpath = out / "manifest.json"
    if mpath.exists():
        stages = json.loads(mpath.read_text()).get("stages", {})
    stages[name] = {"seconds": round(_time.perf_counter() - t0, 3)}
    _manifest_update(out, stages=stages)
    return result


def _require(out: Path, filename: str, producer: str) -> Path:
    p = out / filename
    if not p.exists():
        raise ValidationError(f"missing artifact {p}; run the '{producer}' stage first")
    return p


def stage_network(scenario: Scenario, out: Path):
    scenario.validate()
    if scenario.source == "file":
        net = load_network(scenario.network_path)
    else:
        net = generate_manhattan_grid(
            scenario.rows, scenario.cols, scenario.side_m, scenario.noise_sigma_m,
            scenario.seed, scenario.default_speed,
            fast_rows=scenario.fast_rows, fast_cols=scenario.fast_cols,
            fast_speed=scenario.fast_speed, river=scenario.river,
        )
    save_network(net, out / "network.txt")
    return net


def stage_fields(scenario: Scenario, out: Path, net=None) -> ContinuumFields:
    if net is None:
        net = load_network(_require(out, "network.txt", "generate-grid"))
    grid = grid_for_bbox(net.bbox, scenario.resolution_m)
    theta = reconstruct_direction(net, grid, scenario.idw_sensitivity, scenario.idw_reg_m)
    rho_max = reconstruct_rho_max(net, grid, scenario.vehicle_spacing_m,
                                  scenario.kernel_sigma_m)
    v_max = reconstruct_v_max(net, grid, scenario.idw_sensitivity, scenario.idw_reg_m)
    fields = ContinuumFields(theta, rho_max, v_max)
    save_raster(theta, out / "theta.grid")
    save_raster(rho_max, out / "rho_max.grid")
    save_raster(v_max, out / "v_max.grid")
    return fields


def stage_transform(scenario: Scenario, out: Path, fields=None):
    if fields is None:
        theta = load_direction(_require(out, "theta.grid", "reconstruct"))
        rho_max = load_raster(_require(out, "rho_max.grid", "reconstruct"))
        v_max = load_raster(_require(out, "v_max.grid", "reconstruct"))
        fields = ContinuumFields(theta, rho_max, v_max)
    step = scenario.trace_step_m or 0.5 * scenario.resolution_m
    scaling = solve_scaling_fields(fields.theta, step=step)
    atlas = trace_eta_paths(fields.theta, scaling, scenario.n_paths, step=step)
    atlas = CurvilinearAtlas(
        paths=[rescale_line_data(p, fields, scaling) for p in atlas.paths],
        scaling=scaling, grid=atlas.grid, eta_spacing=atlas.eta_spacing,
    )
    save_raster(scaling.alpha, out / "alpha.grid")
    save_raster(scaling.beta, out / "beta.grid")
    xi_f, eta_f = chart_potentials(fields.theta, scaling)
    save_raster(xi_f, out / "xi.grid")
    save_raster(eta_f, out / "eta.grid")
    save_atlas(atlas, out / "atlas.txt")
    return scaling, atlas


def _load_atlas_artifacts(out: Path):
    alpha = load_raster(_require(out, "alpha.grid", "transform"))
    beta = load_raster(_require(out, "beta.grid", "transform"))
    scaling = ScalingFields(alpha, beta)
    return load_atlas(_require(out, "atlas.txt", "transform"), scaling, alpha.grid)


def build_lines(scenario: Scenario, atlas: CurvilinearAtlas):
    """LineStates with scenario initial/boundary conditions, plus their plans."""
    lines = []
    for path in atlas.paths:
        line = line_from_path(path, scenario.n_cells)
        rho_max = np.broadcast_to(line.fd.rho_max, line.rho.shape)
        if scenario.initial == "jam":
            rho0 = rho_max.copy()
        elif scenario.initial == "empty":
            rho0 = np.zeros_like(rho_max)
        else:
            rho0 = float(scenario.initial) * rho_max
        if scenario.inflow == "capacity":
            d_in = float(np.broadcast_to(line.fd.phi_max, line.rho.shape)[0])
        else:
            d_in = float(scenario.inflow)
        lines.append(replace(line, rho=rho0, inflow_demand=d_in))
    plans = plan_for_lines(lines, scenario.epsilon)
    if scenario.outflow == "controlled":
        lines = [apply_plan(line, plan) for line, plan in zip(lines, plans)]
    else:
        lines = [replace(line, outflow=GhostCell()) for line in lines]
    return lines, plans


def stage_simulate(scenario: Scenario, out: Path, atlas=None) -> SimulationResult:
    if atlas is None:
        atlas = _load_atlas_artifacts(out)
    lines, plans = build_lines(scenario, atlas)
    save_control_plan(plans, out / "control_plan.txt")
    times = np.linspace(0.0, scenario.horizon_s, scenario.n_observations)
    rho_series = []
    finals = []
    for line in lines:
        snaps = [line.rho.copy()]

        def observer(_t, state, snaps=snaps):
            snaps.append(state.rho.copy())

        freeze = 1e-12 * float(np.max(line.fd.rho_max))
        final = run(line, scenario.horizon_s, cfl=scenario.cfl, observer=observer,
                    observe_times=times[1:], freeze_tol=freeze)
        if len(snaps) != len(times):
            raise ValidationError(
                f"observer recorded {len(snaps)} snapshots for {len(times)} times"
            )
        rho_series.append(np.array(snaps))
        finals.append(final)
    result = SimulationResult(times=times, lines=finals, plans=plans,
                              rho_series=rho_series, deta=atlas.eta_spacing)
    save_timeseries(result, out / "timeseries.txt")
    return result


def save_timeseries(result: SimulationResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("# gridflow timeseries v1\n")
        fh.write(f"lines {len(result.lines)} times {len(result.times)}\n")
        fh.write("times " + " ".join(repr(float(t)) for t in result.times) + "\n")
        for k, line in enumerate(result.lines):
            fh.write(f"line {k} eta {float(line.eta)!r} n_cells {line.n_cells} "
                     f"dxi {float(line.dxi)!r} xi_first {float(line.xi[0])!r}\n")
            series = result.rho_series[k]
            for j in range(len(result.times)):
                fh.write(f"rho {j} " + " ".join(repr(float(v)) for v in series[j]) + "\n")
            for j in range(len(result.times)):
                state = replace(line, rho=series[j], time=float(result.times[j]))
                flux = all_fluxes(state)
                fh.write(f"flux {j} " + " ".join(f"{v:.12g}" for v in flux) + "\n")


def load_timeseries(path):
    """Returns (times (T,), records) with per-line dicts of eta/dxi/xi/rho (T,n)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    n_lines, n_times = int(head[1]), int(head[3])
    times = np.array(lines[1].split()[1:], dtype=float)
    if len(times) != n_times:
        raise ValidationError(f"timeseries header promises {n_times} times, found {len(times)}")
    records = []
    k = 2
    for _ in range(n_lines):
        parts = lines[k].split()
        rec = {"eta": float(parts[3]), "n_cells": int(parts[5]),
               "dxi": float(parts[7]), "xi_first": float(parts[9])}
        k += 1
        rho = np.empty((n_times, rec["n_cells"]))
        for j in range(n_times):
            row = lines[k].split()
            rho[int(row[1])] = np.array(row[2:], dtype=float)
            k += 1
        k += n_times  # skip flux rows (informational)
        rec["rho"] = rho
        records.append(rec)
    return times, records


def stage_report(scenario: Scenario, out: Path, result=None) -> ConvergenceReport:
    if result is None:
        atlas = _load_atlas_artifacts(out)
        times, records = load_timeseries(_require(out, "timeseries.txt", "simulate"))
        if not records:
            raise ValidationError("timeseries holds no lines")
        lines, plans = build_lines(scenario, atlas)
        if len(lines) != len(records):
            raise ValidationError(
                f"timeseries has {len(records)} lines but atlas yields {len(lines)}"
            )
        rho_series = [rec["rho"] for rec in records]
        deta = atlas.eta_spacing
    else:
        times = result.times
        lines = result.lines
        plans = result.plans
        rho_series = result.rho_series
        deta = result.deta
    n_t = len(times)
    n_l = len(lines)
    l2 = np.empty((n_t, n_l))
    lyap = np.empty((n_t, n_l))
    for k, (line, plan) in enumerate(zip(lines, plans)):
        for j in range(n_t):
            state = replace(line, rho=rho_series[k][j], time=float(times[j]))
            err = state.rho - plan.rho_d
            l2[j, k] = line_l2(err, line.dxi)
            lyap[j, k] = lyapunov(state, plan)
    report = decay_report(times, lyap, [p.nu for p in plans], l2,
                          [line.eta for line in lines], deta)
    save_report_csv(report, out / "convergence.csv", per_eta=True)
    return report


def run_pipeline(scenario: Scenario, out) -> ConvergenceReport:
    """All stages in sequence; deterministic for a fixed scenario.

    Failures leave a manifest marking the incomplete run and surface as
    StageError naming the failed stage.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    scenario.validate()
    _manifest_update(out, scenario_hash=scenario.canonical_hash(),
                     gridflow_version=__version__, complete=False)
    net = _stage(out, "generate-grid", lambda: stage_network(scenario, out))
    fields = _stage(out, "reconstruct", lambda: stage_fields(scenario, out, net))
    _, atlas = _stage(out, "transform", lambda: stage_transform(scenario, out, fields))
    result = _stage(out, "simulate", lambda: stage_simulate(scenario, out, atlas))
    report = _stage(out, "report", lambda: stage_report(scenario, out, result))
    _manifest_update(out, complete=True)
    return report
