"""Python bindings for the heterogeneous-NIC training planner."""

import json

from ._core import (
    ConfigError,
    HolmesError,
    Scenario,
    analytic_makespan,
    build_groups,
    calibrate,
    coord_of,
    flops_per_iteration,
    load_scenario,
    metrics,
    multi_cluster_alloc,
    parse_scenario,
    rank_of,
    run_1f1b,
    run_command,
    two_nic_split,
    uniform_partition,
)
from . import _core

__all__ = [
    "ConfigError",
    "HolmesError",
    "Scenario",
    "analytic_makespan",
    "build_groups",
    "calibrate",
    "coord_of",
    "flops_per_iteration",
    "load_scenario",
    "metrics",
    "multi_cluster_alloc",
    "parse_scenario",
    "partition",
    "plan",
    "rank_of",
    "run_1f1b",
    "run_command",
    "simulate",
    "two_nic_split",
    "uniform_partition",
    "validate",
]


def validate(scenario):
    """Return the list of diagnostics; empty means the scenario is plannable."""
    return json.loads(_core.validate_json(scenario))


def plan(scenario, naive=False):
    return json.loads(_core.plan_json(scenario, naive))


def partition(scenario, strategy=None):
    return json.loads(_core.partition_json(scenario, strategy))


def simulate(scenario, naive=False, strategy=None):
    return json.loads(_core.simulate_json(scenario, naive, strategy))
