import csv
import subprocess
import sys

import numpy as np
import pytest

from harkit.cli import run
from harkit.dataset import load_features, write_raw, write_raw_windows


@pytest.fixture(scope="module")
def raw_csv(tmp_path_factory, synthetic_windows):
    p = tmp_path_factory.mktemp("cli") / "raw.csv"
    write_raw_windows(p, synthetic_windows)
    return p


@pytest.fixture(scope="module")
def feat_csv(raw_csv):
    p = raw_csv.parent / "feat.csv"
    assert run(["extract", "--in", str(raw_csv), "--out", str(p)]) == 0
    return p


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestUsage:
    def test_no_subcommand(self, capsys):
        assert run([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert run(["extract", "--in", "a", "--out", "b", "--bogus"]) == 1

    def test_bad_choice(self):
        assert run(["train", "--in", "a", "--out", "b", "--model", "svm"]) == 1

    def test_elbow_counts(self, feat_csv, tmp_path):
        assert run(["elbow", "--in", str(feat_csv), "--out", str(tmp_path / "e"),
                    "--tree-counts", "5,x"]) == 1

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "harkit"], capture_output=True, text=True)
        assert out.returncode == 1 and "usage" in out.stderr


class TestExtract:
    def test_single_window(self, tmp_path):
        write_raw(tmp_path / "raw.csv", np.random.default_rng(0).normal(size=(64, 9)),
                  ["staying"] * 64, [0] * 64)
        assert run(["extract", "--in", str(tmp_path / "raw.csv"), "--out", str(tmp_path / "f.csv")]) == 0
        rows = _rows(tmp_path / "f.csv")
        assert len(rows) == 2 and len(rows[0]) == 103 and rows[1][-1] == "staying"

    def test_reduced(self, raw_csv, tmp_path):
        assert run(["extract", "--in", str(raw_csv), "--out", str(tmp_path / "f.csv"),
                    "--schema", "reduced94", "--filters", "median", "--kernel", "5"]) == 0
        ds = load_features(tmp_path / "f.csv")
        assert ds.n_attributes == 94 and len(ds) == 120

    def test_bad_label_is_data_error(self, tmp_path, capsys):
        write_raw(tmp_path / "raw.csv", np.zeros((64, 9)), ["run"] * 64, [0] * 64)
        assert run(["extract", "--in", str(tmp_path / "raw.csv"), "--out", str(tmp_path / "f.csv")]) == 2
        assert "raw.csv:2" in capsys.readouterr().err

    def test_missing_input_is_data_error(self, tmp_path):
        assert run(["extract", "--in", str(tmp_path / "no.csv"), "--out", str(tmp_path / "f.csv")]) == 2

    def test_even_kernel(self, raw_csv, tmp_path):
        assert run(["extract", "--in", str(raw_csv), "--out", str(tmp_path / "f.csv"),
                    "--filters", "mean", "--kernel", "4"]) == 2


class TestCommands:
    def test_train_and_replay(self, feat_csv, raw_csv, tmp_path):
        model = tmp_path / "m.json"
        assert run(["train", "--in", str(feat_csv), "--out", str(model), "--trees", "10"]) == 0
        log = tmp_path / "events.csv"
        assert run(["replay", "--in", str(raw_csv), "--model-file", str(model), "--out", str(log)]) == 0
        rows = _rows(log)
        assert rows[0] == ["at_ms", "label", "confidence", "suppressed"]
        # back-to-back windows: 120 * 64 samples -> 1 + (7680 - 64) / 32 events
        assert len(rows) - 1 == 1 + (120 * 64 - 64) // 32

    def test_train_hier_needs_raw(self, feat_csv, raw_csv, tmp_path):
        assert run(["train", "--in", str(feat_csv), "--out", str(tmp_path / "h.json"),
                    "--model", "hier"]) == 2
        assert run(["train", "--in", str(raw_csv), "--out", str(tmp_path / "h.json"),
                    "--model", "hier", "--trees", "5"]) == 0

    def test_full_schema_from_reduced_file(self, raw_csv, tmp_path):
        run(["extract", "--in", str(raw_csv), "--out", str(tmp_path / "r.csv"), "--schema", "reduced94"])
        assert run(["train", "--in", str(tmp_path / "r.csv"), "--out", str(tmp_path / "m.json"),
                    "--schema", "full103"]) == 2

    def test_eval_prints_table(self, feat_csv, tmp_path, capsys):
        assert run(["eval", "--in", str(feat_csv), "--model", "knn", "--k", "5",
                    "--out", str(tmp_path / "r.csv")]) == 0
        captured = capsys.readouterr()
        assert "Accuracy (%)" in captured.out
        assert captured.err.startswith("# config: ")
        keys = dict(r for r in _rows(tmp_path / "r.csv")[2:] if len(r) == 2)
        assert keys["attributes"] == "94" and float(keys["accuracy"]) > 90

    def test_eval_spec(self, raw_csv, tmp_path, capsys):
        spec = tmp_path / "s.toml"
        spec.write_text(f'[experiment]\ndataset = "{raw_csv}"\nfolds = 5\n'
                        '[model]\nkind = "nb"\n[filters]\nsmoothing = "mean"\nkernel = 3\n')
        assert run(["eval", "--spec", str(spec)]) == 0
        assert "experiment" in capsys.readouterr().out

    def test_eval_needs_input(self):
        assert run(["eval"]) == 1

    def test_rank(self, feat_csv, tmp_path):
        assert run(["rank", "--in", str(feat_csv), "--out", str(tmp_path / "rank.csv")]) == 0
        rows = _rows(tmp_path / "rank.csv")
        assert rows[1] == ["rank", "feature", "info_gain"] and len(rows) == 2 + 102
        scores = [float(r[2]) for r in rows[2:]]
        assert scores == sorted(scores, reverse=True)

    def test_summarize(self, feat_csv, tmp_path):
        assert run(["summarize", "--in", str(feat_csv), "--out", str(tmp_path / "s.csv")]) == 0
        rows = _rows(tmp_path / "s.csv")
        assert rows[1][0] == "feature" and ["class_count:staying", "30"] in rows

    def test_elbow(self, feat_csv, tmp_path):
        assert run(["elbow", "--in", str(feat_csv), "--out", str(tmp_path / "e.csv"),
                    "--tree-counts", "2,8", "--folds", "3"]) == 0
        rows = _rows(tmp_path / "e.csv")
        assert [r[0] for r in rows[2:]] == ["2", "8"]
