"""Shared fixtures: the benchmark experiment is built once per session."""

import time
from dataclasses import replace

import pytest

from gridflow.pipeline import (stage_fields, stage_network, stage_report,
                               stage_simulate, stage_transform)
from gridflow.scenario import benchmark_scenario


class BenchmarkRun:
    """Everything the tests need from one end-to-end benchmark build."""

    def __init__(self, scenario, out, net, fields, scaling, atlas):
        self.scenario = scenario
        self.out = out
        self.net = net
        self.fields = fields
        self.scaling = scaling
        self.atlas = atlas
        self.result = None
        self.report = None
        self.sim_seconds = None


@pytest.fixture(scope="session")
def bench(tmp_path_factory):
    """Benchmark network, fields and chart (no simulation yet)."""
    out = tmp_path_factory.mktemp("benchmark")
    scenario = benchmark_scenario()
    net = stage_network(scenario, out)
    fields = stage_fields(scenario, out, net)
    scaling, atlas = stage_transform(scenario, out, fields)
    return BenchmarkRun(scenario, out, net, fields, scaling, atlas)


@pytest.fixture(scope="session")
def bench_controlled(bench):
    """Controlled-outflow benchmark simulation and its convergence report."""
    t0 = time.perf_counter()
    result = stage_simulate(bench.scenario, bench.out, bench.atlas)
    bench.sim_seconds = time.perf_counter() - t0
    report = stage_report(bench.scenario, bench.out, result)
    bench.result = result
    bench.report = report
    return bench


@pytest.fixture(scope="session")
def bench_ghost(bench, tmp_path_factory):
    """Same benchmark with free (ghost-cell) outflow."""
    out = tmp_path_factory.mktemp("benchmark-ghost")
    scenario = replace(bench.scenario, outflow="ghost")
    run = BenchmarkRun(scenario, out, bench.net, bench.fields, bench.scaling, bench.atlas)
    t0 = time.perf_counter()
    run.result = stage_simulate(scenario, out, bench.atlas)
    run.sim_seconds = time.perf_counter() - t0
    run.report = stage_report(scenario, out, run.result)
    return run
