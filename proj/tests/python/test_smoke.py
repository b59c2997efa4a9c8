import os
import pathlib

import pytest

import holmes_planner as hp

ROOT = pathlib.Path(os.environ.get("HOLMES_SOURCE_DIR", pathlib.Path(__file__).parents[2]))
SCENARIOS = ROOT / "scenarios"


def test_rank_numbering():
    assert hp.rank_of([2, 2], 4, 2, 1, 1) == 9
    assert hp.rank_of([2, 2], 4, 1, 2, 4) == 8
    assert hp.coord_of([2, 2], 4, 16) == (2, 2, 4)
    with pytest.raises(hp.HolmesError):
        hp.coord_of([2, 2], 4, 17)


def test_groups_n8():
    g = hp.build_groups([2], 4, 2, 2, 2)
    assert g["tp"] == [[1, 2], [3, 4], [5, 6], [7, 8]]
    assert g["pp"] == [[1, 5], [2, 6], [3, 7], [4, 8]]
    assert g["dp"] == [[1, 3], [2, 4], [5, 7], [6, 8]]


def test_partition_arithmetic():
    assert hp.two_nic_split(30, 197, 160, 1.05)[:2] == (17, 13)
    assert hp.two_nic_split(30, 197, 160, 1.0)[:2] == (16, 14)
    assert hp.multi_cluster_alloc(36, [197, 160, 122], [1, 1, 1], 0.0, [1e9] * 3) == [14, 12, 10]
    assert hp.uniform_partition(7, 2) == [4, 3]


def test_pipeline_oracles():
    assert hp.analytic_makespan([(1, 1), (1, 1)], 4, [0.0]) == pytest.approx(10.0)
    stages = [(0.5, 1.0)] * 4
    assert hp.run_1f1b(stages, 12, [0.1] * 3) == pytest.approx(
        hp.analytic_makespan(stages, 12, [0.1] * 3))
    tflops, throughput = hp.metrics(1e15, 2.0, 32, 768)
    assert tflops == pytest.approx(15.625)
    assert throughput == pytest.approx(384.0)


def test_two_cluster_plan_and_simulation():
    s = hp.load_scenario(str(SCENARIOS / "hybrid_2x2.json"))
    assert s.devices == 16
    assert s.nic_env == "hybrid"
    assert hp.validate(s) == []
    plan = hp.plan(s)
    assert plan["pp"][0] == [1, 5, 9, 13]
    assert plan["dp"][0] == [1, 3]
    channels = {(c["kind"], c["row"]): c["channel"] for c in plan["channels"]}
    assert channels[("pp", 1)] == "ethernet"
    assert channels[("dp", 1)] == "infiniband"
    holmes = hp.simulate(s)
    naive = hp.simulate(s, naive=True)
    assert holmes["iter_time_s"] < naive["iter_time_s"]


def test_calibration_and_ordering():
    ib = hp.load_scenario(str(SCENARIOS / "group1_ib.json"))
    eta = hp.calibrate(ib, 197.0)
    ib.efficiency = eta
    assert hp.simulate(ib)["tflops_per_gpu"] == pytest.approx(197.0, abs=0.5)


def test_bad_config_raises():
    with pytest.raises(hp.ConfigError):
        hp.parse_scenario('{"name": "x", "bogus": 1}')


def test_run_command_exit_codes(tmp_path):
    code, out, _ = hp.run_command("validate", str(SCENARIOS / "toy_n8.json"))
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert hp.run_command("validate", str(bad))[0] == 2
    code, out, _ = hp.run_command("plan", str(SCENARIOS / "toy_n8.json"), "json")
    assert code == 0 and out.endswith("\n")
