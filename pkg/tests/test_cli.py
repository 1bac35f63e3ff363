"""Command-line behavior: artifacts, exit codes, diagnostics."""

import json
import subprocess
import sys

import pytest

from gridcrew import (
    DamagedNode,
    DamageScenario,
    Depot,
    Crew,
    PowerNetwork,
    RoadEdge,
    RoadNetwork,
    load_damage_scenario,
    load_power_network,
    load_reduced_dump,
    load_road_network,
    load_schedule_report,
    project_power_onto_roads,
    save_damage_scenario,
    save_power_network,
    save_road_network,
    validate_report,
)
from gridcrew.cli import main


def gen_args(out_dir, seed=5, damaged=4, extra=()):
    return [
        "generate", "--seed", str(seed), "--road-nodes", "36",
        "--damaged", str(damaged), "--depots", "1", "--out", str(out_dir),
        *extra,
    ]


def bundle_args(out_dir):
    return [
        "--power", str(out_dir / "power.txt"),
        "--roads", str(out_dir / "roads.txt"),
        "--scenario", str(out_dir / "scenario.txt"),
    ]


@pytest.fixture
def bundle_dir(tmp_path):
    assert main(gen_args(tmp_path)) == 0
    return tmp_path


class TestGenerate:
    def test_bundle_loads_back(self, bundle_dir):
        power = load_power_network(str(bundle_dir / "power.txt"))
        roads = load_road_network(str(bundle_dir / "roads.txt"))
        scenario = load_damage_scenario(
            str(bundle_dir / "scenario.txt"), roads=roads, power=power
        )
        assert len(scenario.damaged) == 4
        assert len(scenario.depots) == 1

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(gen_args(a)) == 0
        assert main(gen_args(b)) == 0
        for name in ("power.txt", "roads.txt", "scenario.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_different_seed_differs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(gen_args(a, seed=5)) == 0
        assert main(gen_args(b, seed=6)) == 0
        assert (a / "scenario.txt").read_bytes() != (b / "scenario.txt").read_bytes()


class TestRun:
    def test_artifacts_validate(self, bundle_dir, tmp_path):
        out = tmp_path / "out"
        code = main(["run", *bundle_args(bundle_dir), "--out", str(out)])
        assert code == 0
        report = load_schedule_report(str(out / "schedule.json"))
        power = load_power_network(str(bundle_dir / "power.txt"))
        roads = load_road_network(str(bundle_dir / "roads.txt"))
        scenario = load_damage_scenario(
            str(bundle_dir / "scenario.txt"), roads=roads, power=power
        )
        projection = project_power_onto_roads(power, roads)
        assert validate_report(report, roads, projection, scenario) == []
        assert (out / "summary.txt").read_text().startswith("restoration summary")
        geo = json.loads((out / "routes.geojson").read_text())
        assert geo["type"] == "FeatureCollection"

    def test_repeat_runs_byte_identical(self, bundle_dir, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["run", *bundle_args(bundle_dir), "--out", str(out1)]) == 0
        assert main(["run", *bundle_args(bundle_dir), "--out", str(out2)]) == 0
        for name in ("schedule.json", "summary.txt", "routes.geojson"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_weight_flags_reach_the_report(self, bundle_dir, tmp_path):
        out = tmp_path / "out"
        code = main([
            "run", *bundle_args(bundle_dir), "--out", str(out),
            "--alpha2", "0.5", "--beta2", "0", "--no-normalize-power",
        ])
        assert code == 0
        report = load_schedule_report(str(out / "schedule.json"))
        s = report["settings"]
        assert (s["alpha2"], s["beta2"]) == (0.5, 0.0)
        assert s["normalize_power"] is False
        assert s["power_norm"] == 1.0

    def test_env_var_out_dir(self, bundle_dir, tmp_path, monkeypatch):
        out = tmp_path / "envout"
        monkeypatch.setenv("GRIDCREW_OUT_DIR", str(out))
        assert main(["run", *bundle_args(bundle_dir)]) == 0
        assert (out / "schedule.json").exists()

    def test_tiny_exact_cap_is_a_solver_failure(self, tmp_path, capsys):
        assert main(gen_args(tmp_path, damaged=3, extra=("--capacity", "100"))) == 0
        code = main([
            "run", *bundle_args(tmp_path), "--out", str(tmp_path / "out"),
            "--exact-cap", "1",
        ])
        assert code == 2
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert diag["error"] == "RouteSizeError"
        assert diag["exit_code"] == 2


class TestValidateCommand:
    def test_good_report_passes(self, bundle_dir, tmp_path):
        out = tmp_path / "out"
        assert main(["run", *bundle_args(bundle_dir), "--out", str(out)]) == 0
        code = main([
            "validate", "--report", str(out / "schedule.json"), *bundle_args(bundle_dir),
        ])
        assert code == 0

    def test_tampered_report_fails(self, bundle_dir, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", *bundle_args(bundle_dir), "--out", str(out)]) == 0
        report = json.loads((out / "schedule.json").read_text())
        report["totals"]["power_restored_kw"] += 1.0
        (out / "schedule.json").write_text(json.dumps(report))
        code = main([
            "validate", "--report", str(out / "schedule.json"), *bundle_args(bundle_dir),
        ])
        assert code == 1
        assert "totals: power_restored_kw" in capsys.readouterr().out


class TestFailureDiagnostics:
    def write_disconnected_bundle(self, d):
        roads = RoadNetwork(
            nodes={
                "ra": (32.90, -96.95), "rb": (32.905, -96.95),
                "rc": (33.50, -96.00), "rd": (33.505, -96.00),
            },
            edges=[
                RoadEdge("ra", "rb", 500.0, 10.0),
                RoadEdge("rc", "rd", 500.0, 10.0),
            ],
        ).validate()
        power = PowerNetwork(
            nodes={"p1": (33.50, -96.00), "p2": (32.90, -96.95)},
            edges=[("p1", "p2")],
        ).validate()
        scenario = DamageScenario(
            damaged=[DamagedNode("p1", 100.0, 1.0, 2.0)],
            depots=[Depot("d0", "ra")],
            crews=[Crew("c0", "line", 5.0, 0)],
        )
        save_road_network(roads, str(d / "roads.txt"))
        save_power_network(power, str(d / "power.txt"))
        save_damage_scenario(scenario, str(d / "scenario.txt"))

    def test_unreachable_site_exits_1_with_diagnostic(self, tmp_path, capsys):
        self.write_disconnected_bundle(tmp_path)
        code = main(["run", *bundle_args(tmp_path), "--out", str(tmp_path / "out")])
        assert code == 1
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert diag["error"] == "UnreachableTerminalError"
        assert diag["exit_code"] == 1

    def test_missing_input_exits_3(self, bundle_dir, tmp_path, capsys):
        code = main([
            "run",
            "--power", str(tmp_path / "nope.txt"),
            "--roads", str(bundle_dir / "roads.txt"),
            "--scenario", str(bundle_dir / "scenario.txt"),
            "--out", str(tmp_path / "out"),
        ])
        assert code == 3
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert diag["exit_code"] == 3

    def test_malformed_input_exits_1(self, bundle_dir, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("[nodes]\nid lat lon\nonly-two-fields 1.0\n")
        code = main([
            "run", "--power", str(bad),
            "--roads", str(bundle_dir / "roads.txt"),
            "--scenario", str(bundle_dir / "scenario.txt"),
            "--out", str(tmp_path / "out"),
        ])
        assert code == 1
        diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert diag["error"] == "ParseError"


class TestReduceDump:
    def test_dump_loads_and_is_metric(self, bundle_dir, tmp_path):
        out_file = tmp_path / "reduced.txt"
        code = main(["reduce-dump", *bundle_args(bundle_dir), "--out-file", str(out_file)])
        assert code == 0
        reduced = load_reduced_dump(str(out_file))
        reduced.validate_metric()
        roads = load_road_network(str(bundle_dir / "roads.txt"))
        power = load_power_network(str(bundle_dir / "power.txt"))
        scenario = load_damage_scenario(
            str(bundle_dir / "scenario.txt"), roads=roads, power=power
        )
        assert reduced.damaged_ids() == [d.node_id for d in scenario.damaged]


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gridcrew.cli", "generate", "--seed", "1",
         "--road-nodes", "25", "--damaged", "2", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "scenario.txt").exists()
