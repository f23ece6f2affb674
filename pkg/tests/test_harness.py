"""Configuration, simulation, the run loop, metrics and the CLI."""

import json

import numpy as np
import pytest

from disptrack import (
    ConfigError,
    GroundTruth,
    RunReport,
    ScanRecord,
    TruthTarget,
    load_config,
    metrics,
    run,
    simulate,
)
from disptrack.cli import main as cli_main
from disptrack.estimation import TrackEstimate
from disptrack.runner import read_observations, report_jsonable


def base_config(**overrides):
    cfg = {
        "model": {
            "dim": 1,
            "bounds": [[-60.0, 60.0]],
            "F": [[1.0]],
            "Q": [[0.05]],
            "p_s": 0.95,
        },
        "sensor": {"H": [[1.0]], "R": [[0.5]], "p_d": 0.9, "p_fa": 0.1},
        "birth": {
            "cardinality": [0.8, 0.2],
            "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[25.0]]}],
        },
        "approx": {
            "hyp_existence_threshold": 1e-4,
            "max_hypotheses": 50,
            "max_tracks": 30,
        },
        "extract": {"confirm_threshold": 0.9, "deconfirm_threshold": 0.5},
        "sim": {"scans": 6, "seed": 12345, "clutter_rate": 0.5},
    }
    for key, value in overrides.items():
        block, _, field = key.partition(".")
        if field:
            cfg[block][field] = value
        else:
            cfg[block] = value
    return cfg


class TestConfig:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(base_config()))
        cfg = load_config(path)
        assert cfg.scans == 6
        assert cfg.seed == 12345
        assert cfg.motion.p_s == 0.95
        assert cfg.birth.max_births == 1

    def test_unknown_keys_rejected(self):
        bad = base_config()
        bad["model"]["speed_of_light"] = 3e8
        with pytest.raises(ConfigError):
            load_config(bad)
        bad2 = base_config()
        bad2["typo_block"] = {}
        with pytest.raises(ConfigError):
            load_config(bad2)

    def test_missing_block_rejected(self):
        bad = base_config()
        del bad["sensor"]
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_model_errors_become_config_errors(self):
        bad = base_config(**{"sensor.p_fa": 1.0})
        with pytest.raises(ConfigError):
            load_config(bad)
        bad = base_config(**{"model.Q": [[-1.0]]})
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_birth_cap_truncates_support(self):
        cfg = load_config(
            base_config(
                birth={
                    "cardinality": [0.5, 0.3, 0.2],
                    "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[25.0]]}],
                },
                approx={"birth_cap": 1},
            )
        )
        assert cfg.birth.max_births == 1
        assert cfg.birth.cardinality.tolist() == pytest.approx([0.625, 0.375])

    def test_dimension_mismatch_rejected(self):
        bad = base_config(**{"sensor.H": [[1.0, 0.0]]})
        with pytest.raises(ConfigError):
            load_config(bad)


class TestSimulate:
    def test_nothing_to_observe(self):
        cfg = load_config(
            base_config(
                birth={
                    "cardinality": [1.0],
                    "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[25.0]]}],
                },
                sim={"scans": 5, "seed": 3, "clutter_rate": 0.0},
            )
        )
        truth, scans = simulate(cfg)
        assert all(len(s) == 0 for s in scans)
        assert truth.targets == []

    def test_clean_single_birth_chain(self):
        # Certain survival and detection, no clutter, one birth per scan:
        # the scan t observation count equals the number of targets alive.
        cfg = load_config(
            base_config(
                **{"model.p_s": 1.0, "model.Q": [[0.01]], "sensor.p_d": 1.0},
                birth={
                    "cardinality": [0.0, 1.0],
                    "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[4.0]]}],
                },
                sim={"scans": 4, "seed": 17, "clutter_rate": 0.0},
            )
        )
        truth, scans = simulate(cfg)
        for t, scan in enumerate(scans):
            assert len(scan) == t + 1
        for target in truth.targets:
            # first detection forced at the birth scan
            assert target.observations[0] is not None
            # at most one observation per scan, none after departure
            assert len(target.observations) == len(target.states)

    def test_assumptions_hold(self):
        cfg = load_config(base_config(sim={"scans": 12, "seed": 99, "clutter_rate": 1.5}))
        truth, scans = simulate(cfg)
        seen_ids = set()
        for scan in scans:
            values = [tuple(o.value.tolist()) for o in scan]
            assert len(values) == len(set(values))  # distinct within scan
            for o in scan:
                assert o.id not in seen_ids  # globally unique
                seen_ids.add(o.id)
        assigned = set()
        for target in truth.targets:
            for ref in target.observations:
                if ref is not None:
                    assert ref not in assigned  # an observation has one origin
                    assigned.add(ref)
        for scan_fa in truth.false_alarms:
            for ref in scan_fa:
                assert ref not in assigned
        # births happen at most once per target, observations only while alive
        for target in truth.targets:
            assert len(target.states) >= 1
            assert target.birth_scan + len(target.states) <= truth.scans + 1

    def test_determinism(self):
        cfg = load_config(base_config())
        truth_a, scans_a = simulate(cfg)
        truth_b, scans_b = simulate(cfg)
        assert len(truth_a.targets) == len(truth_b.targets)
        for sa, sb in zip(scans_a, scans_b):
            assert [o.id for o in sa] == [o.id for o in sb]
            for oa, ob in zip(sa, sb):
                assert np.array_equal(oa.value, ob.value)


class TestRun:
    def test_empty_scene_keeps_empty_map(self):
        cfg = load_config(
            base_config(
                birth={
                    "cardinality": [1.0],
                    "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[25.0]]}],
                },
                sim={"scans": 3, "seed": 5, "clutter_rate": 0.0},
            )
        )
        report, truth, _ = run(cfg)
        for rec in report.records:
            assert rec.map_hypothesis == []
            assert rec.estimates == []

    def test_weight_sum_is_one_every_scan(self):
        cfg = load_config(base_config())
        report, _, _ = run(cfg)
        for rec in report.records:
            assert rec.total_weight == pytest.approx(1.0, abs=1e-9)

    def test_report_serialization_is_deterministic(self):
        cfg = load_config(base_config())
        a = json.dumps(report_jsonable(run(cfg)[0]), sort_keys=True)
        b = json.dumps(report_jsonable(run(cfg)[0]), sort_keys=True)
        assert a == b


class TestMetrics:
    def _truth_two_static(self):
        t1 = TruthTarget(0, [np.array([0.0]), np.array([0.0])], [(0, 0), (1, 0)])
        t2 = TruthTarget(0, [np.array([5.0]), np.array([5.0])], [(0, 1), (1, 1)])
        return GroundTruth(2, [t1, t2], [[], []])

    def _report(self, points_per_scan):
        records = []
        for t, points in enumerate(points_per_scan):
            estimates = [
                TrackEstimate(None, 1.0, 1.0, np.array([p]), True) for p in points
            ]
            records.append(
                ScanRecord(t, [], 1, len(points), 1.0, 1.0, [], estimates)
            )
        return RunReport(records)

    def test_perfect_estimates(self):
        out = metrics(self._truth_two_static(), self._report([[0.0, 5.0], [0.0, 5.0]]))
        assert out["mean_cardinality_error"] == 0
        assert out["rmse"] == pytest.approx(0.0, abs=1e-12)

    def test_empty_extraction_counts_missing(self):
        out = metrics(self._truth_two_static(), self._report([[], []]))
        assert out["mean_cardinality_error"] == -2
        assert out["rmse"] is None

    def test_reorder_invariance(self):
        a = metrics(self._truth_two_static(), self._report([[0.1, 5.2], [0.0, 5.0]]))
        b = metrics(self._truth_two_static(), self._report([[5.2, 0.1], [5.0, 0.0]]))
        assert a["rmse"] == pytest.approx(b["rmse"])


class TestCli:
    def _write_cfg(self, tmp_path, **overrides):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(base_config(**overrides)))
        return path

    def test_simulate_track_report_roundtrip(self, tmp_path, capsys):
        cfg = self._write_cfg(tmp_path)
        sim_dir = tmp_path / "sim"
        assert cli_main(["simulate", "--config", str(cfg), "--out", str(sim_dir)]) == 0
        assert (sim_dir / "observations.jsonl").exists()
        assert (sim_dir / "truth.json").exists()

        track_dir = tmp_path / "trk"
        assert (
            cli_main(
                ["track", "--config", str(cfg), "--obs", str(sim_dir), "--out", str(track_dir)]
            )
            == 0
        )
        report = json.loads((track_dir / "report.json").read_text())
        assert len(report["records"]) == 6
        assert report["metrics"] is None

        assert cli_main(["report", "--in", str(track_dir)]) == 0
        out = capsys.readouterr().out
        assert "scan" in out

    def test_run_writes_everything_and_metrics(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        out_dir = tmp_path / "run"
        assert cli_main(["run", "--config", str(cfg), "--out", str(out_dir)]) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["metrics"] is not None
        rows = (out_dir / "records.jsonl").read_text().strip().splitlines()
        assert len(rows) == 6

    def test_run_byte_identical_across_invocations(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        d1, d2 = tmp_path / "a", tmp_path / "b"
        assert cli_main(["run", "--config", str(cfg), "--seed", "7", "--out", str(d1)]) == 0
        assert cli_main(["run", "--config", str(cfg), "--seed", "7", "--out", str(d2)]) == 0
        for name in ("observations.jsonl", "truth.json", "records.jsonl", "report.json"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        cfg = self._write_cfg(tmp_path)
        d1, d2 = tmp_path / "a", tmp_path / "b"
        cli_main(["run", "--config", str(cfg), "--seed", "7", "--out", str(d1)])
        cli_main(["run", "--config", str(cfg), "--seed", "8", "--out", str(d2)])
        assert (d1 / "observations.jsonl").read_bytes() != (d2 / "observations.jsonl").read_bytes()

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(base_config(typo_block={})))
        assert cli_main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_degenerate_update_exit_code(self, tmp_path, capsys):
        # Observations cannot be explained: no clutter, no births, p_fa = 0.
        cfg = self._write_cfg(
            tmp_path,
            **{"sensor.p_fa": 0.0},
        )
        sim_dir = tmp_path / "sim"
        cli_main(["simulate", "--config", str(cfg), "--out", str(sim_dir)])
        impossible = self._write_cfg(
            tmp_path,
            birth={
                "cardinality": [1.0],
                "spatial": [{"weight": 1.0, "mean": [0.0], "cov": [[25.0]]}],
            },
            **{"sensor.p_fa": 0.0},
        )
        code = cli_main(
            ["track", "--config", str(impossible), "--obs", str(sim_dir), "--out",
             str(tmp_path / "t")]
        )
        assert code == 3
        assert "degenerate" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert cli_main(["run", "--config", str(tmp_path / "nope.json"),
                         "--out", str(tmp_path / "o")]) == 2


class TestObservationsIO:
    def test_roundtrip(self, tmp_path):
        cfg = load_config(base_config())
        _, scans = simulate(cfg)
        from disptrack.runner import write_observations

        path = tmp_path / "obs.jsonl"
        write_observations(path, scans)
        loaded = read_observations(path)
        assert len(loaded) == len(scans)
        for a, b in zip(scans, loaded):
            assert [o.id for o in a] == [o.id for o in b]
            for oa, ob in zip(a, b):
                assert np.array_equal(oa.value, ob.value)
