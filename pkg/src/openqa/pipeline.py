"""System orchestration: configuration, the three-solver ask path,
dataset splitting, evaluation, and selector training-data generation."""

from __future__ import annotations

import json
import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import nn
from .answers import SOLVER_LD, SOLVER_ORDER, SOLVER_RR, SOLVER_SP, AnswerCandidate
from .errors import ConfigError, EmptyDataset, EmptyQuestion
from .hyper import Hyper
from .kb import KnowledgeBase, build_entity_dictionary, load_triples
from .ld_solver import solve_ld
from .reader import ReaderModel, read
from .retrieval import InvertedIndex, build_index, load_passages, search, splice_triple, tag_passage
from .selector import SelectorModel, select
from .sp_solver import QuestionTemplate, load_templates, solve_sp
from .text import EntityDictionary, Vocabulary, normalize

log = logging.getLogger("openqa")

SOLVER_TIMEOUT_SECONDS = 5.0


@dataclass
class SystemConfig:
    kb_path: str
    passages_path: str
    templates_path: str
    vocab_path: str
    tagger_model: Optional[str] = None
    scorer_model: Optional[str] = None
    reader_model: Optional[str] = None
    selector_model: Optional[str] = None
    retrieval_k: int = 10
    hyper: Hyper = field(default_factory=Hyper)
    http_addr: str = "127.0.0.1:8080"
    solver_timeout: float = SOLVER_TIMEOUT_SECONDS

    def __post_init__(self):
        if self.retrieval_k < 1:
            raise ConfigError("retrieval_k must be >= 1")
        required = {"kb_path": self.kb_path, "passages_path": self.passages_path,
                    "templates_path": self.templates_path, "vocab_path": self.vocab_path}
        for name, path in required.items():
            if not os.path.exists(path):
                raise ConfigError(f"{name} does not exist: {path}")
        for name in ("tagger_model", "scorer_model", "reader_model", "selector_model"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"{name} does not exist: {path}")

    @classmethod
    def load(cls, path: str) -> "SystemConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))

        def resolve(p):
            if p is None:
                return None
            return p if os.path.isabs(p) else os.path.join(base, p)

        hyper = Hyper(**doc.get("hyper", {}))
        return cls(
            kb_path=resolve(doc["kb_path"]),
            passages_path=resolve(doc["passages_path"]),
            templates_path=resolve(doc["templates_path"]),
            vocab_path=resolve(doc["vocab_path"]),
            tagger_model=resolve(doc.get("tagger_model")),
            scorer_model=resolve(doc.get("scorer_model")),
            reader_model=resolve(doc.get("reader_model")),
            selector_model=resolve(doc.get("selector_model")),
            retrieval_k=doc.get("retrieval_k", 10),
            hyper=hyper,
            http_addr=doc.get("http_addr", "127.0.0.1:8080"),
            solver_timeout=doc.get("solver_timeout", SOLVER_TIMEOUT_SECONDS),
        )


@dataclass
class AskResponse:
    answer: Optional[str]
    confidence: float
    solver: str
    candidates: dict[str, list[AnswerCandidate]]
    timings: dict[str, float]  # milliseconds per solver

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "confidence": self.confidence,
            "solver": self.solver,
            "candidates": {
                tag: [
                    {"answer": c.answer, "confidence": c.confidence,
                     "solver": c.solver, "provenance": c.provenance}
                    for c in cands
                ]
                for tag, cands in self.candidates.items()
            },
            "timings": self.timings,
        }


@dataclass
class EvalReport:
    total: int
    correct: int
    per_solver_hit_rate: dict[str, float]

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


class System:
    """All immutable resources plus the configured models."""

    def __init__(self, config: SystemConfig):
        self.config = config
        self.kb: KnowledgeBase = load_triples(config.kb_path)
        self.dictionary: EntityDictionary = build_entity_dictionary(self.kb)
        self.templates: list[QuestionTemplate] = load_templates(config.templates_path)
        self.vocab: Vocabulary = Vocabulary.load(config.vocab_path)

        docs = [splice_triple(t, i) for i, t in enumerate(self.kb.triples)]
        next_id = len(docs)
        for pid, text in load_passages(config.passages_path):
            docs.append(tag_passage(pid, text, self.dictionary, next_id))
            next_id += 1
        self.index: InvertedIndex = build_index(docs)

        self.tagger = nn.ModelParameters.load(config.tagger_model) if config.tagger_model else None
        self.scorer = nn.ModelParameters.load(config.scorer_model) if config.scorer_model else None
        self.reader = (
            ReaderModel(nn.ModelParameters.load(config.reader_model), self.vocab)
            if config.reader_model else None
        )
        self.selector = (
            SelectorModel(nn.ModelParameters.load(config.selector_model), self.vocab)
            if config.selector_model else None
        )

    # per-solver entry points; a missing model degrades to an empty list
    def run_sp(self, question: str) -> list[AnswerCandidate]:
        return solve_sp(question, self.kb, self.dictionary, self.templates)

    def run_ld(self, question: str) -> list[AnswerCandidate]:
        if self.tagger is None or self.scorer is None:
            return []
        return solve_ld(question, self.kb, self.dictionary, self.tagger, self.scorer, self.vocab)

    def run_rr(self, question: str) -> list[AnswerCandidate]:
        if self.reader is None:
            return []
        results = search(self.index, question, self.config.retrieval_k)
        return read(self.reader, question, results)

    def solver_fns(self) -> dict[str, Callable[[str], list[AnswerCandidate]]]:
        return {SOLVER_SP: self.run_sp, SOLVER_LD: self.run_ld, SOLVER_RR: self.run_rr}


def run_solvers(system: System, question: str) -> tuple[dict[str, list[AnswerCandidate]], dict[str, float]]:
    """All three solvers concurrently; failures/timeouts become empty lists."""
    fns = system.solver_fns()
    candidates: dict[str, list[AnswerCandidate]] = {}
    timings: dict[str, float] = {}
    with ThreadPoolExecutor(max_workers=len(fns)) as pool:
        started = time.perf_counter()
        futures = {tag: pool.submit(fn, question) for tag, fn in fns.items()}
        for tag, fut in futures.items():
            try:
                candidates[tag] = fut.result(timeout=system.config.solver_timeout)
            except Exception:
                log.exception("solver %s failed on %r", tag, question)
                candidates[tag] = []
            timings[tag] = (time.perf_counter() - started) * 1000.0
    return candidates, timings


def ask(system: System, question: str) -> AskResponse:
    """Run all solvers, fuse their top candidates, return the winner."""
    if not normalize(question):
        raise EmptyQuestion("question is empty after normalization")
    candidates, timings = run_solvers(system, question)
    tops = [candidates[tag][0] for tag in SOLVER_ORDER if candidates[tag]]

    if not tops:
        return AskResponse(None, 0.0, "none", candidates, timings)

    if system.selector is not None:
        result = select(system.selector, question, tops)
        return AskResponse(result.answer.answer, result.probabilities[result.chosen],
                           "selector", candidates, timings)

    # cold-start fallback: max confidence, ties broken by solver priority
    best = max(tops, key=lambda c: (c.confidence, -SOLVER_ORDER.index(c.solver)))
    return AskResponse(best.answer, best.confidence, best.solver, candidates, timings)


def split_dataset(pairs: list[tuple[str, str]], train_fraction: float = 0.7, seed: int = 0) -> tuple[list, list]:
    """Seeded shuffle; train gets round(fraction * n) items."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    shuffled = list(pairs)
    random.Random(seed).shuffle(shuffled)
    cut = round(train_fraction * len(shuffled))
    return shuffled[:cut], shuffled[cut:]


def load_qa_pairs(path: str) -> list[tuple[str, str]]:
    """JSON Lines {"question": str, "answer": str}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out.append((obj["question"], obj["answer"]))
    return out


def evaluate(system: System, dataset: list[tuple[str, str]]) -> EvalReport:
    """Exact-match accuracy after normalization, plus per-solver hit rates."""
    if not dataset:
        raise EmptyDataset("evaluation dataset is empty")
    correct = 0
    hits = {tag: 0 for tag in SOLVER_ORDER}
    for question, gold in dataset:
        response = ask(system, question)
        gold_norm = normalize(gold)
        if response.answer is not None and normalize(response.answer) == gold_norm:
            correct += 1
        for tag in SOLVER_ORDER:
            cands = response.candidates.get(tag, [])
            if cands and normalize(cands[0].answer) == gold_norm:
                hits[tag] += 1
    rates = {tag: hits[tag] / len(dataset) for tag in SOLVER_ORDER}
    return EvalReport(total=len(dataset), correct=correct, per_solver_hit_rate=rates)


def make_selector_data(system: System, dataset: list[tuple[str, str]], out_path: str) -> tuple[int, int]:
    """Write selector training lines; returns (written, skipped).

    A question is written when at least two solver-top candidates exist
    and at least one matches the gold answer; the gold index is the first
    matching candidate.
    """
    if not dataset:
        raise EmptyDataset("dataset is empty")
    written = skipped = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for question, gold in dataset:
            candidates, _ = run_solvers(system, question)
            tops = [candidates[tag][0] for tag in SOLVER_ORDER if candidates[tag]]
            gold_norm = normalize(gold)
            matches = [i for i, c in enumerate(tops) if normalize(c.answer) == gold_norm]
            if len(tops) >= 2 and matches:
                fh.write(json.dumps({
                    "question": question,
                    "candidates": [c.answer for c in tops],
                    "gold": matches[0],
                }) + "\n")
                written += 1
            else:
                skipped += 1
    return written, skipped
