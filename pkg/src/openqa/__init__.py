"""Hybrid question answering over a knowledge base and passages.

Three solvers run side by side — rule-based semantic parsing, a neural
KB parser, and BM25 retrieval plus an extractive reader — and a
transformer selection head fuses their candidate answers.
"""

from .answers import AnswerCandidate
from .hyper import Hyper
from .pipeline import AskResponse, EvalReport, System, SystemConfig, ask, evaluate, split_dataset

__version__ = "0.1.0"

__all__ = [
    "AnswerCandidate", "AskResponse", "EvalReport", "Hyper",
    "System", "SystemConfig", "ask", "evaluate", "split_dataset",
    "__version__",
]
