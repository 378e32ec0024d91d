from __future__ import annotations

import json
import subprocess
import sys

import pytest

from guifusion.canonical import write_json
from guifusion.cli import main

from .conftest import FIXTURES

NOTEAPP = str(FIXTURES / "noteapp-v1.json")


def run_cli(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture()
def ripped_store(tmp_path):
    root = tmp_path / "store"
    assert run_cli("rip", NOTEAPP, "--out", str(root)) == 0
    return root


class TestRip:
    def test_writes_database_layout(self, ripped_store, capsys):
        db = ripped_store / "db" / "noteapp" / "1.0"
        for name in ("model.json", "efg.json", "trace.json", "ngram.json"):
            assert (db / name).is_file()
        assert len(list((db / "states").glob("*.json"))) == 3
        assert list((db / "screens").glob("*.svg"))

    def test_prints_summary(self, tmp_path, capsys):
        run_cli("rip", NOTEAPP, "--out", str(tmp_path / "s"))
        out = capsys.readouterr().out
        assert "3 states, 7 edges, truncated=false" in out

    def test_bad_model_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert run_cli("rip", str(bad), "--out", str(tmp_path / "s")) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_model_exits_2(self, tmp_path):
        assert run_cli("rip", str(tmp_path / "none.json"), "--out", str(tmp_path)) == 2

    def test_usage_error_exits_1(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("rip")  # missing the model argument
        assert excinfo.value.code == 1

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        env_root = tmp_path / "env-store"
        monkeypatch.setenv("GUIFUSION_DB", str(env_root))
        run_cli("rip", NOTEAPP, "--out", str(tmp_path / "flag-store"))
        assert (env_root / "db" / "noteapp" / "1.0" / "efg.json").is_file()
        assert not (tmp_path / "flag-store").exists()


class TestCrashes:
    def test_dfs_strategy(self, capsys):
        assert run_cli("crashes", NOTEAPP, "--strategy", "dfs") == 0
        reports = json.loads(capsys.readouterr().out)
        assert len(reports) == 1
        assert [s["component"] for s in reports[0]["steps"]] == [
            "btn_list",
            "btn_delete",
        ]

    def test_random_strategy_deterministic(self, capsys):
        run_cli("crashes", NOTEAPP, "--strategy", "random", "--budget", "200", "--seed", "9")
        first = capsys.readouterr().out
        run_cli("crashes", NOTEAPP, "--strategy", "random", "--budget", "200", "--seed", "9")
        second = capsys.readouterr().out
        assert first == second

    def test_out_writes_files(self, tmp_path, capsys):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        assert list(out.glob("crash-*.json"))


class TestReplay:
    def test_replay_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        capsys.readouterr()
        report_file = next(out.glob("crash-*.json"))
        assert run_cli("replay", str(report_file), NOTEAPP) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["outcome"] == "crash-reproduced"

    def test_malformed_report_exits_2(self, tmp_path):
        bad = tmp_path / "report.json"
        bad.write_text("{}", encoding="utf-8")
        assert run_cli("replay", str(bad), NOTEAPP) == 2


class TestDedupAndTriage:
    def test_dedup_writes_output(self, tmp_path, capsys):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        capsys.readouterr()
        store_root = tmp_path / "store"
        reports_dir = store_root / "reports"
        reports_dir.mkdir(parents=True)
        source = next(out.glob("crash-*.json"))
        for i in (1, 2):
            data = json.loads(source.read_text(encoding="utf-8"))
            data["report_id"] = f"r-00000{i}"
            write_json(reports_dir / f"r-00000{i}.json", data)
        assert run_cli("dedup", "--db", str(store_root)) == 0
        output = json.loads((store_root / "duplicates.json").read_text(encoding="utf-8"))
        assert output["pairs"][0]["score"] == 1.0
        assert output["clusters"] == [["r-000001", "r-000002"]]

    def test_triage(self, tmp_path, capsys):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        capsys.readouterr()
        report_file = next(out.glob("crash-*.json"))
        owners = tmp_path / "owners.json"
        write_json(owners, {"alice": {"ListActivity": 2}, "bob": {"MainActivity": 1}})
        assert run_cli("triage", str(report_file), "--owners", str(owners)) == 0
        ranking = json.loads(capsys.readouterr().out)
        assert ranking[0] == {"developer": "alice", "score": 2}

    def test_triage_missing_owners_exits_2(self, tmp_path):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        report_file = next(out.glob("crash-*.json"))
        assert run_cli("triage", str(report_file), "--owners", str(tmp_path / "no.json")) == 2


class TestReportRender:
    def test_render_from_store(self, ripped_store, tmp_path, capsys):
        out = tmp_path / "crashes"
        run_cli("crashes", NOTEAPP, "--strategy", "dfs", "--out", str(out))
        capsys.readouterr()
        source = next(out.glob("crash-*.json"))
        reports_dir = ripped_store / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        data = json.loads(source.read_text(encoding="utf-8"))
        data["report_id"] = "r-000001"
        write_json(reports_dir / "r-000001.json", data)
        assert run_cli("report", "render", "r-000001", "--db", str(ripped_store)) == 0
        md = capsys.readouterr().out
        assert md.count("## ") == 3

    def test_unknown_report_exits_2(self, ripped_store):
        assert run_cli("report", "render", "r-9", "--db", str(ripped_store)) == 2


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "guifusion.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "rip" in result.stdout
