import json

import pytest

from treedb.cli import main

COUNTER = """
var x : 0..3 = 0;
var y : 0..2 = 0;
cmd x < 3 -> x := x + 1;
cmd y < 2 -> y := y + 1;
"""


@pytest.fixture
def counter_file(tmp_path):
    path = tmp_path / "counter.gcm"
    path.write_text(COUNTER)
    return path


class TestExplore:
    def test_model_run_writes_report(self, counter_file, tmp_path, capsys):
        report = tmp_path / "out.json"
        code = main([
            "explore", "--model", str(counter_file), "--store", "tree",
            "--workers", "4", "--table-bits", "10", "--report", str(report),
        ])
        assert code == 0
        data = json.loads(report.read_text())
        assert data["schema"] == "treedb-explore-v1"
        assert data["exploration"]["states"] == 12
        assert data["exploration"]["deadlocks"] == 1
        comp = data["compression"]
        assert comp["ratio"] == comp["words_compressed"] / comp["words_plain"]
        assert "states=12" in capsys.readouterr().out

    def test_synthetic_worst_case_ratio(self, tmp_path):
        report = tmp_path / "ident.json"
        code = main([
            "explore", "--synthetic", "identical:n=1000,k=8",
            "--store", "tree-basic", "--report", str(report),
        ])
        assert code == 0
        data = json.loads(report.read_text())
        assert data["compression"]["ratio"] == 1.75

    def test_collapse_rejects_parallel_run(self, counter_file, capsys):
        code = main([
            "explore", "--model", str(counter_file), "--store", "collapse",
            "--workers", "4",
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.gcm"
        bad.write_text("var x 0..3 = 0;")
        assert main(["explore", "--model", str(bad), "--store", "tree"]) == 1
        assert "error" in capsys.readouterr().err

    def test_capacity_abort_exit_code(self, capsys):
        code = main([
            "explore", "--synthetic", "identical:n=5000,k=8",
            "--store", "tree", "--table-bits", "7",
        ])
        assert code == 2

    def test_model_and_synthetic_are_exclusive(self, counter_file):
        assert main([
            "explore", "--model", str(counter_file),
            "--synthetic", "identical:n=10,k=2",
        ]) == 1

    def test_env_table_bits_fallback(self, counter_file, monkeypatch, tmp_path):
        monkeypatch.setenv("TREEDB_TABLE_BITS", "11")
        report = tmp_path / "env.json"
        assert main([
            "explore", "--model", str(counter_file), "--store", "tree",
            "--report", str(report),
        ]) == 0
        data = json.loads(report.read_text())
        assert data["compression"]["backing_bytes"] == 16 * (1 << 11)

    def test_figures_written_alongside_report(self, tmp_path):
        report = tmp_path / "uni.json"
        code = main([
            "explore", "--synthetic", "uniform:r=3,k=8", "--store", "tree-basic",
            "--report", str(report), "--figures",
        ])
        assert code == 0
        levels = tmp_path / "uni_levels.png"
        ratios = tmp_path / "uni_ratios.png"
        assert levels.exists() and levels.read_bytes()[:8].startswith(b"\x89PNG")
        assert ratios.exists() and ratios.read_bytes()[:8].startswith(b"\x89PNG")


class TestCompare:
    def test_table_csv_and_figures(self, counter_file, tmp_path, capsys):
        report = tmp_path / "cmp.json"
        csv_path = tmp_path / "cmp.csv"
        code = main([
            "compare", "--model", str(counter_file),
            "--stores", "tree,tree-basic,collapse,hashtable",
            "--table-bits", "10",
            "--report", str(report), "--csv", str(csv_path), "--figures",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "hashtable" in out and "collapse" in out
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("store,states,")
        assert len(lines) == 5
        assert all(line.split(",")[1] == "12" for line in lines[1:])
        data = json.loads(report.read_text())
        states = {run["exploration"]["states"] for run in data["runs"]}
        assert states == {12}
        assert (tmp_path / "cmp_stores.png").exists()

    def test_cross_product_tree_is_smallest(self, tmp_path):
        report = tmp_path / "cross.json"
        code = main([
            "compare", "--synthetic", "cross:m=64,k=16",
            "--stores", "tree,collapse,hashtable", "--report", str(report),
        ])
        assert code == 0
        runs = json.loads(report.read_text())["runs"]
        per_state = {r["compression"]["store"]: r["compression"]["per_state_words"]
                     for r in runs}
        assert per_state["tree"] < per_state["collapse"]
        assert per_state["tree"] < per_state["hashtable"]
        assert per_state["tree"] < 2.5  # approaches one node entry

    def test_needs_two_stores(self, counter_file):
        assert main([
            "compare", "--model", str(counter_file), "--stores", "tree",
        ]) == 1


class TestVerify:
    def test_subset_prints_pass_lines(self, capsys):
        code = main(["verify", "--criteria", "1,3", "--table-bits", "16"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 2
        assert "[ 1]" in out and "[ 3]" in out
        assert "2/2 criteria passed" in out
