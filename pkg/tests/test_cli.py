"""Command-line interface."""

import json
import os

import pytest

from openqa.cli import main


class TestLoadKb:
    def test_summary_line(self, fx, capsys):
        assert main(["load-kb", os.path.join(fx, "kb.tsv")]) == 0
        out = capsys.readouterr().out
        assert "30 triples" in out

    def test_bad_file_is_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("not\ttab-separated-enough\n")
        assert main(["load-kb", str(bad)]) == 1
        assert "error" in capsys.readouterr().err


class TestAsk:
    def test_plain(self, toy, capsys):
        assert main(["--config", toy["config"], "ask", "who wrote hamlet"]) == 0
        assert "shakespeare" in capsys.readouterr().out

    def test_json(self, toy, capsys):
        assert main(["--config", toy["config"], "ask", "who wrote hamlet", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["answer"] == "shakespeare"

    def test_config_from_env(self, toy, capsys, monkeypatch):
        monkeypatch.setenv("OPENQA_CONFIG", toy["config"])
        assert main(["ask", "who wrote hamlet"]) == 0
        assert "shakespeare" in capsys.readouterr().out

    def test_no_config(self, monkeypatch):
        monkeypatch.delenv("OPENQA_CONFIG", raising=False)
        with pytest.raises(SystemExit):
            main(["ask", "who wrote hamlet"])


class TestEval:
    def test_reports_accuracy(self, fx, toy, capsys):
        assert main(["--config", toy["config"], "eval", os.path.join(fx, "qa.jsonl")]) == 0
        out = capsys.readouterr().out
        assert "accuracy 1.0000 (25/25)" in out


class TestIndex:
    def test_builds_and_writes(self, fx, toy, tmp_path, capsys):
        out_path = str(tmp_path / "index.json")
        assert main(["--config", toy["config"], "index",
                     os.path.join(fx, "passages.jsonl"), "--out", out_path]) == 0
        assert os.path.exists(out_path)
        assert "indexed 42 documents" in capsys.readouterr().out  # 30 triples + 12 passages


class TestTrain:
    def test_trains_and_writes_model(self, fx, toy, tmp_path, capsys):
        out_path = str(tmp_path / "tagger.json")
        assert main(["--config", toy["config"], "train", "tagger",
                     os.path.join(fx, "tagger.jsonl"),
                     "--epochs", "2", "--out", out_path]) == 0
        assert os.path.exists(out_path)
        assert "trained tagger" in capsys.readouterr().out


class TestMakeSelectorData:
    def test_writes_dataset(self, fx, toy, tmp_path, capsys):
        out_path = str(tmp_path / "sel.jsonl")
        assert main(["--config", toy["three_config"], "make-selector-data",
                     os.path.join(fx, "qa.jsonl"), out_path]) == 0
        assert os.path.exists(out_path)
        assert "wrote" in capsys.readouterr().out
