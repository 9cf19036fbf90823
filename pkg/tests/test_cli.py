import json

import numpy as np
import pytest

from gpscreen.cli import main
from gpscreen.data import Dataset, load_dataset, save_dataset


@pytest.fixture()
def source_csv(tmp_path):
    rng = np.random.default_rng(2)
    feats = rng.standard_normal((15, 6))
    ds = Dataset("src", tuple(f"s{i}" for i in range(15)), feats, feats[:, 0])
    path = tmp_path / "source.csv"
    save_dataset(ds, path)
    return path


class TestProject:
    def test_projects_and_preserves_ids(self, tmp_path, source_csv, capsys):
        out = tmp_path / "proj.csv"
        assert main(["project", "--input", str(source_csv), "--m", "3",
                     "--seed", "4", "--out", str(out)]) == 0
        projected = load_dataset(out)
        original = load_dataset(source_csv)
        assert projected.ids == original.ids
        np.testing.assert_array_equal(projected.targets, original.targets)
        assert projected.dim == 3
        assert "6 -> 3" in capsys.readouterr().out

    def test_bad_dimension_is_config_error(self, tmp_path, source_csv):
        assert main(["project", "--input", str(source_csv), "--m", "99",
                     "--seed", "0", "--out", str(tmp_path / "x.csv")]) == 2

    def test_missing_input_is_data_error(self, tmp_path):
        assert main(["project", "--input", str(tmp_path / "nope.csv"), "--m", "2",
                     "--out", str(tmp_path / "x.csv")]) == 3


class TestSynth:
    def test_generates_dataset(self, tmp_path, source_csv):
        out = tmp_path / "syn.csv"
        assert main(["synth", "--source", str(source_csv), "--n", "30",
                     "--seed", "1", "--out", str(out)]) == 0
        syn = load_dataset(out)
        assert len(syn) == 30
        assert syn.provenance == "synthetic"


class TestRunAndVerify:
    def test_run_writes_results_and_verify_passes(self, tmp_path, source_csv, capsys):
        cfg = {
            "dataset": str(source_csv),
            "policy": {"name": "gp-thompson"},
            "goal": "aregret",
            "horizon": 5,
            "replications": 2,
            "master_seed": 1,
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(cfg_path)]) == 0
        assert (tmp_path / "out" / "records.csv").exists()
        assert main(["verify", "--records", str(tmp_path / "out" / "records.csv")]) == 0

    def test_verify_fails_on_tampered_file(self, tmp_path, source_csv):
        cfg = {
            "dataset": str(source_csv),
            "policy": {"name": "random"},
            "horizon": 4,
            "replications": 1,
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(cfg_path)]) == 0
        records = tmp_path / "out" / "records.csv"
        lines = records.read_text().splitlines()
        cells = lines[1].split(",")
        cells[6] = "42.0"
        lines[1] = ",".join(cells)
        records.write_text("\n".join(lines) + "\n")
        assert main(["verify", "--records", str(records)]) == 3

    def test_bad_config_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("{not json")
        assert main(["run", "--config", str(cfg_path)]) == 2

    def test_unknown_policy_exit_code(self, tmp_path, source_csv):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "dataset": str(source_csv),
            "policy": {"name": "gp-bss"},
            "horizon": 3,
        }))
        assert main(["run", "--config", str(cfg_path)]) == 2


class TestAdvise:
    def test_full_terminal_session(self, tmp_path, source_csv, capsys):
        camp_dir = tmp_path / "camp"
        assert main(["advise", "init", "--campaign", str(camp_dir),
                     "--candidates", str(source_csv), "--policy", "gp-thompson",
                     "--seed", "5"]) == 0
        assert main(["advise", "suggest", "--campaign", str(camp_dir)]) == 0
        out = capsys.readouterr().out
        arm = out.split("suggest: ")[1].split()[0]
        assert main(["advise", "observe", "--campaign", str(camp_dir),
                     "--arm", arm, "--y", "1.5"]) == 0
        assert main(["advise", "whatif", "--campaign", str(camp_dir),
                     "--arm", "s9" if arm != "s9" else "s8", "--y", "2.0"]) == 0
        capsys.readouterr()
        assert main(["advise", "status", "--campaign", str(camp_dir)]) == 0
        status = json.loads(capsys.readouterr().out)
        assert status["n_observed"] == 1

    def test_duplicate_observe_is_data_error(self, tmp_path, source_csv):
        camp_dir = tmp_path / "camp"
        main(["advise", "init", "--campaign", str(camp_dir),
              "--candidates", str(source_csv), "--policy", "random"])
        assert main(["advise", "observe", "--campaign", str(camp_dir),
                     "--arm", "s0", "--y", "1.0"]) == 0
        assert main(["advise", "observe", "--campaign", str(camp_dir),
                     "--arm", "s0", "--y", "1.0"]) == 3
