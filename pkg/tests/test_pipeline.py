"""System orchestration: ask, evaluate, splitting, selector data."""

import json
import os

import pytest

from openqa.errors import ConfigError, EmptyDataset, EmptyQuestion
from openqa.pipeline import (
    System, SystemConfig, ask, evaluate, load_qa_pairs,
    make_selector_data, run_solvers, split_dataset,
)
from openqa.text import normalize


class TestConfig:
    def test_load_resolves_relative_paths(self, toy):
        config = SystemConfig.load(toy["config"])
        assert os.path.isabs(config.kb_path)
        assert os.path.exists(config.kb_path)

    def test_missing_resource_rejected(self, tmp_path, toy):
        doc = json.load(open(toy["config"]))
        doc["kb_path"] = "/nonexistent/kb.tsv"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ConfigError):
            SystemConfig.load(str(bad))

    def test_retrieval_k_must_be_positive(self, toy):
        doc = json.load(open(toy["config"]))
        doc["retrieval_k"] = 0
        with pytest.raises(ConfigError):
            SystemConfig(**{**{k: doc[k] for k in
                               ("kb_path", "passages_path", "templates_path", "vocab_path")},
                           "retrieval_k": 0})


class TestAsk:
    def test_empty_question_raises(self, toy):
        with pytest.raises(EmptyQuestion):
            ask(toy["system"], "   ")

    def test_kb_question(self, toy):
        response = ask(toy["system"], "who wrote hamlet")
        assert response.answer == "shakespeare"
        assert response.solver == "selector"
        assert 0.0 < response.confidence <= 1.0

    def test_passage_question(self, toy):
        response = ask(toy["system"], "what color is the sky")
        assert response.answer == "blue"

    def test_unanswerable_question(self, toy):
        response = ask(toy["system"], "zorp blix quantum nonsense")
        assert response.answer is None
        assert response.solver == "none"
        assert response.confidence == 0.0

    def test_response_carries_candidates_and_timings(self, toy):
        response = ask(toy["system"], "who wrote hamlet")
        assert set(response.candidates) == {"sp", "ld", "rr"}
        assert set(response.timings) == {"sp", "ld", "rr"}
        assert all(t >= 0.0 for t in response.timings.values())

    def test_to_dict_is_json_serializable(self, toy):
        doc = ask(toy["system"], "who wrote hamlet").to_dict()
        json.dumps(doc)
        assert doc["answer"] == "shakespeare"

    def test_fallback_without_selector(self, toy):
        response = ask(toy["system_three"], "who wrote hamlet")
        assert response.answer == "shakespeare"
        assert response.solver in ("sp", "ld", "rr")


class TestSolverDegradation:
    def test_run_solvers_shape(self, toy):
        candidates, timings = run_solvers(toy["system"], "who wrote hamlet")
        assert set(candidates) == {"sp", "ld", "rr"}

    def test_missing_models_degrade_to_empty(self, toy, tmp_path):
        config_path = toy["write_config"](str(tmp_path / "bare.json"), {})
        bare = System(SystemConfig.load(config_path))
        candidates, _ = run_solvers(bare, "who wrote hamlet")
        assert candidates["ld"] == [] and candidates["rr"] == []
        assert candidates["sp"][0].answer == "shakespeare"
        # ask remains total
        assert ask(bare, "who wrote hamlet").answer == "shakespeare"


class TestSplit:
    def test_sizes(self):
        pairs = [(f"q{i}", f"a{i}") for i in range(10)]
        train, test = split_dataset(pairs, 0.7, seed=0)
        assert len(train) == 7 and len(test) == 3

    def test_disjoint_union(self):
        pairs = [(f"q{i}", f"a{i}") for i in range(100)]
        train, test = split_dataset(pairs, 0.7, seed=5)
        assert sorted(train + test) == sorted(pairs)
        assert not set(train) & set(test)

    def test_seed_determinism(self):
        pairs = [(f"q{i}", f"a{i}") for i in range(50)]
        assert split_dataset(pairs, 0.7, seed=9) == split_dataset(pairs, 0.7, seed=9)
        assert split_dataset(pairs, 0.7, seed=9) != split_dataset(pairs, 0.7, seed=10)

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            split_dataset([("q", "a")], 1.0)


class TestEvaluate:
    def test_full_accuracy_on_toy_world(self, toy):
        report = evaluate(toy["system"], toy["pairs"])
        assert report.total == 25
        assert report.accuracy == 1.0

    def test_normalized_comparison(self, toy):
        report = evaluate(toy["system"], [("who wrote hamlet", "  Shakespeare! ")])
        assert report.correct == 1

    def test_empty_dataset(self, toy):
        with pytest.raises(EmptyDataset):
            evaluate(toy["system"], [])

    def test_per_solver_hit_rates(self, toy):
        report = evaluate(toy["system"], toy["pairs"])
        assert set(report.per_solver_hit_rate) == {"sp", "ld", "rr"}
        assert all(0.0 <= r <= 1.0 for r in report.per_solver_hit_rate.values())
        assert report.per_solver_hit_rate["ld"] >= 0.5


class TestSelectorData:
    def test_counts_and_format(self, toy, tmp_path):
        out = str(tmp_path / "sel.jsonl")
        written, skipped = make_selector_data(toy["system_three"], toy["pairs"], out)
        assert written + skipped == 25
        assert written >= 1
        with open(out) as fh:
            for line in fh:
                doc = json.loads(line)
                assert len(doc["candidates"]) >= 2
                assert 0 <= doc["gold"] < len(doc["candidates"])

    def test_gold_index_matches_answer(self, toy, tmp_path):
        out = str(tmp_path / "sel.jsonl")
        make_selector_data(toy["system_three"], toy["pairs"], out)
        gold_by_q = {q: a for q, a in toy["pairs"]}
        with open(out) as fh:
            for line in fh:
                doc = json.loads(line)
                gold = normalize(gold_by_q[doc["question"]])
                assert normalize(doc["candidates"][doc["gold"]]) == gold


def test_load_qa_pairs(fx):
    pairs = load_qa_pairs(os.path.join(fx, "qa.jsonl"))
    assert len(pairs) == 25
    assert pairs[0] == ("who wrote hamlet", "shakespeare")
