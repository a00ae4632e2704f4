"""Declarative scenario configuration for end-to-end runs.

A scenario is one YAML document with unit-suffixed keys; all lengths in
meters, speeds in km/h at this boundary (converted to m/s internally),
times in seconds. Example:

    network:
      source: generate        # or: file (then: path: net.txt)
      rows: 10
      cols: 10
      side_m: 1000.0
      noise_sigma_m: 20.0
      seed: 1
      default_speed_kmh: 30.0
      fast_speed_kmh: 50.0
      fast_rows: [3]
      fast_cols: [6]
      river: {gap_row: 4, bridge_cols: [3, 6]}
    fields:
      resolution_m: 10.0
      idw_sensitivity: 20.0
      idw_reg_m: 1000.0
      vehicle_spacing_m: 6.0
      kernel_sigma_m: 100.0
    transform:
      n_paths: 100
    simulation:
      n_cells: 200
      initial: jam            # jam | empty | number (fraction of rho_max)
      inflow: capacity        # capacity | number (rescaled flow units)
      outflow: controlled     # controlled | ghost
      epsilon: 1.0e-5
      horizon_s: 4000.0
      cfl: 0.9
      n_observations: 50

Omitted keys fall back to the defaults above, which reproduce the
benchmark experiment.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .errors import ValidationError
from .network import KMH, RiverSpec


@dataclass
class Scenario:
    # network
    source: str = "generate"
    network_path: str | None = None
    rows: int = 10
    cols: int = 10
    side_m: float = 1000.0
    noise_sigma_m: float = 20.0
    seed: int = 1
    default_speed_kmh: float = 30.0
    fast_speed_kmh: float = 50.0
    fast_rows: tuple = (3,)
    fast_cols: tuple = (6,)
    river_gap_row: int | None = 4
    river_bridge_cols: tuple = (3, 6)
    # fields
    resolution_m: float = 5.0
    idw_sensitivity: float = 20.0
    idw_reg_m: float = 2000.0
    vehicle_spacing_m: float = 6.0
    kernel_sigma_m: float = 100.0
    # transform
    n_paths: int = 100
    trace_step_m: float | None = None
    # simulation
    n_cells: int = 200
    initial: object = "jam"
    inflow: object = "capacity"
    outflow: str = "controlled"
    epsilon: float = 1e-5
    horizon_s: float = 4000.0
    cfl: float = 0.9
    n_observations: int = 50

    @property
    def default_speed(self) -> float:
        return self.default_speed_kmh * KMH

    @property
    def fast_speed(self) -> float:
        return self.fast_speed_kmh * KMH

    @property
    def river(self) -> RiverSpec | None:
        if self.river_gap_row is None:
            return None
        return RiverSpec(self.river_gap_row, tuple(self.river_bridge_cols))

    def validate(self) -> "Scenario":
        if self.source not in ("generate", "file"):
            raise ValidationError(f"network source must be generate|file, got {self.source!r}")
        if self.source == "file":
            if not self.network_path:
                raise ValidationError("network source 'file' needs network.path")
            if not Path(self.network_path).exists():
                raise ValidationError(f"network file not found: {self.network_path}")
        if self.source == "generate" and (self.rows < 2 or self.cols < 2):
            raise ValidationError("generated grid needs rows, cols >= 2")
        for name in ("side_m", "resolution_m", "idw_sensitivity", "idw_reg_m",
                     "vehicle_spacing_m", "kernel_sigma_m", "horizon_s",
                     "default_speed_kmh", "fast_speed_kmh"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.noise_sigma_m < 0:
            raise ValidationError("noise_sigma_m must be >= 0")
        if self.n_paths < 1 or self.n_cells < 1:
            raise ValidationError("n_paths and n_cells must be >= 1")
        if not 0 < self.cfl <= 1:
            raise ValidationError(f"cfl must be in (0, 1], got {self.cfl}")
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.n_observations < 3:
            raise ValidationError("n_observations must be >= 3")
        if self.outflow not in ("controlled", "ghost"):
            raise ValidationError(f"outflow must be controlled|ghost, got {self.outflow!r}")
        if isinstance(self.initial, str):
            if self.initial not in ("jam", "empty"):
                raise ValidationError(f"initial must be jam|empty|number, got {self.initial!r}")
        elif not 0 <= float(self.initial) <= 1:
            raise ValidationError("numeric initial condition is a fraction of rho_max in [0,1]")
        if not isinstance(self.inflow, str):
            if float(self.inflow) < 0:
                raise ValidationError("numeric inflow must be >= 0")
        elif self.inflow != "capacity":
            raise ValidationError(f"inflow must be capacity|number, got {self.inflow!r}")
        return self

    def canonical_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


_SECTION_KEYS = {
    "network": {
        "source": "source", "path": "network_path", "rows": "rows", "cols": "cols",
        "side_m": "side_m", "noise_sigma_m": "noise_sigma_m", "seed": "seed",
        "default_speed_kmh": "default_speed_kmh", "fast_speed_kmh": "fast_speed_kmh",
        "fast_rows": "fast_rows", "fast_cols": "fast_cols",
    },
    "fields": {
        "resolution_m": "resolution_m", "idw_sensitivity": "idw_sensitivity",
        "idw_reg_m": "idw_reg_m", "vehicle_spacing_m": "vehicle_spacing_m",
        "kernel_sigma_m": "kernel_sigma_m",
    },
    "transform": {"n_paths": "n_paths", "trace_step_m": "trace_step_m"},
    "simulation": {
        "n_cells": "n_cells", "initial": "initial", "inflow": "inflow",
        "outflow": "outflow", "epsilon": "epsilon", "horizon_s": "horizon_s",
        "cfl": "cfl", "n_observations": "n_observations",
    },
}


def scenario_from_dict(data: dict) -> Scenario:
    kwargs = {}
    for section, keys in _SECTION_KEYS.items():
        sub = data.get(section) or {}
        if not isinstance(sub, dict):
            raise ValidationError(f"scenario section '{section}' must be a mapping")
        for key, val in sub.items():
            if key == "river" and section == "network":
                if val is None:
                    kwargs["river_gap_row"] = None
                else:
                    kwargs["river_gap_row"] = int(val["gap_row"])
                    kwargs["river_bridge_cols"] = tuple(val.get("bridge_cols", ()))
                continue
            if key not in keys:
                raise ValidationError(f"unknown scenario key '{section}.{key}'")
            kwargs[keys[key]] = tuple(val) if isinstance(val, list) else val
    unknown = set(data) - set(_SECTION_KEYS)
    if unknown:
        raise ValidationError(f"unknown scenario sections {sorted(unknown)}")
    if "river_gap_row" not in kwargs and (data.get("network") or {}).get("river", "absent") is None:
        kwargs["river_gap_row"] = None
    return Scenario(**kwargs).validate()


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"cannot parse scenario {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"scenario {path} must be a YAML mapping")
    return scenario_from_dict(data)


def benchmark_scenario(**overrides) -> Scenario:
    """The full experiment configuration (all defaults)."""
    return replace(Scenario(), **overrides).validate()


def small_scenario(**overrides) -> Scenario:
    """A fast scaled-down variant for tests and demos."""
    base = Scenario(
        rows=5, cols=5, side_m=500.0, noise_sigma_m=10.0, seed=7,
        fast_rows=(1,), fast_cols=(3,), river_gap_row=2, river_bridge_cols=(2,),
        resolution_m=10.0, idw_reg_m=1000.0,
        n_paths=12, n_cells=60, horizon_s=1500.0, n_observations=12,
    )
    return replace(base, **overrides).validate()
