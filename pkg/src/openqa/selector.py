"""Transformer answer-selection head.

Each candidate answer is spliced with the question into one sequence,
encoded by a transformer layer, scored from the leading position by a
linear head, and the scores are softmaxed across candidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import nn
from .answers import AnswerCandidate
from .errors import EmptyInput, GoldOutOfRange, NoCandidates, SequenceTooLong
from .hyper import Hyper
from .text import CLS, SEP, Vocabulary, encode, tokenize

MAX_LEN = 64


@dataclass
class SelectorModel:
    params: nn.ModelParameters
    vocab: Vocabulary

    @property
    def heads(self) -> int:
        return int(self.params.arch.get("heads", 2))

    @property
    def layers(self) -> int:
        return int(self.params.arch.get("layers", 1))


@dataclass(frozen=True)
class SelectionResult:
    probabilities: tuple[float, ...]
    chosen: int
    answer: AnswerCandidate


def init_selector(vocab_size: int, hyper: Hyper) -> nn.ModelParameters:
    params = nn.ModelParameters(hyper.seed, {
        "kind": "selector", "d": hyper.d, "heads": hyper.heads,
        "layers": hyper.layers, "vocab": vocab_size,
    })
    params.add("emb", (vocab_size, hyper.d))
    params.add("pos", (MAX_LEN, hyper.d))
    for layer in range(hyper.layers):
        nn.init_transformer_layer(params, f"enc{layer}.", hyper.d, hyper.heads)
    params.add("head_W", (1, hyper.d))
    params.add_zeros("head_b", (1,))
    return params


def build_sequence(question: str, answer: str, vocab: Vocabulary) -> list[int]:
    """[CLS] question [SEP] answer [SEP], truncated to 64 ids.

    Truncation drops question-tail tokens first, then answer-tail tokens.
    """
    if not question or not answer:
        raise EmptyInput("question and answer must be non-empty")
    q_ids = encode(vocab, tokenize(question).tokens)
    a_ids = encode(vocab, tokenize(answer).tokens)
    overflow = 3 + len(q_ids) + len(a_ids) - MAX_LEN
    if overflow > 0:
        cut = min(overflow, len(q_ids))
        q_ids = q_ids[: len(q_ids) - cut]
        overflow -= cut
        if overflow > 0:
            a_ids = a_ids[: len(a_ids) - overflow]
    return [CLS] + q_ids + [SEP] + a_ids + [SEP]


def _forward(model: SelectorModel, ids: list[int]):
    params = model.params
    x = nn.embedding_lookup(params["emb"], ids) + params["pos"][: len(ids)]
    caches = []
    for layer in range(model.layers):
        x, cache = nn.transformer_encoder_layer(params, f"enc{layer}.", x, model.heads)
        caches.append(cache)
    score = float((params["head_W"] @ x[0] + params["head_b"])[0])
    return score, {"ids": ids, "caches": caches, "top": x}


def _backward(model: SelectorModel, cache, d_score: float) -> nn.Grads:
    params = model.params
    ids, top = cache["ids"], cache["top"]
    grads: nn.Grads = {
        "head_W": (d_score * top[0]).reshape(1, -1),
        "head_b": np.array([d_score]),
    }
    dx = np.zeros_like(top)
    dx[0] = d_score * params["head_W"][0]
    for layer_cache in reversed(cache["caches"]):
        layer_grads, dx = nn.transformer_encoder_layer_backward(params, layer_cache, dx)
        nn.accumulate(grads, layer_grads)
    grads["emb"] = nn.embedding_backward(dx, ids, params["emb"].shape[0])
    dpos = np.zeros_like(params["pos"])
    dpos[: len(ids)] = dx
    grads["pos"] = dpos
    return grads


def score_sequence(model: SelectorModel, ids: list[int]) -> float:
    if not 1 <= len(ids) <= MAX_LEN:
        raise SequenceTooLong(f"sequence length {len(ids)} outside [1, {MAX_LEN}]")
    score, _ = _forward(model, ids)
    return score


def select(model: SelectorModel, question: str, candidates: list[AnswerCandidate]) -> SelectionResult:
    """Softmax over per-candidate sequence scores; argmax wins (lowest index on ties)."""
    if not candidates:
        raise NoCandidates("selector needs at least one candidate")
    scores = np.array([
        score_sequence(model, build_sequence(question, c.answer, model.vocab))
        for c in candidates
    ])
    probs = nn.softmax(scores)
    chosen = int(np.argmax(probs))
    return SelectionResult(tuple(float(p) for p in probs), chosen, candidates[chosen])


def load_selector_data(path: str) -> list[tuple[str, list[str], int]]:
    """JSON Lines: {"question": str, "candidates": [str], "gold": int}."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out.append((obj["question"], list(obj["candidates"]), int(obj["gold"])))
    return out


def train_selector(dataset: list[tuple[str, list[str], int]], hyper: Hyper, vocab: Vocabulary) -> SelectorModel:
    """SGD on cross entropy over the per-example candidate softmax."""
    for idx, (_, cands, gold) in enumerate(dataset):
        if len(cands) < 2 or not 0 <= gold < len(cands):
            raise GoldOutOfRange(idx)

    model = SelectorModel(init_selector(vocab.size, hyper), vocab)
    losses: list[float] = []
    for _ in range(hyper.epochs):
        epoch_loss = 0.0
        for question, cands, gold in dataset:
            seqs = [build_sequence(question, a, vocab) for a in cands]
            forwards = [_forward(model, ids) for ids in seqs]
            scores = np.array([f[0] for f in forwards])
            loss, d_scores = nn.softmax_cross_entropy(scores, gold)
            epoch_loss += loss
            grads: nn.Grads = {}
            for (_, cache), ds in zip(forwards, d_scores):
                if ds != 0.0:
                    nn.accumulate(grads, _backward(model, cache, float(ds)))
            nn.sgd_step(model.params, grads, hyper.lr)
        losses.append(epoch_loss)
    model.params.arch["epoch_losses"] = losses
    return model
