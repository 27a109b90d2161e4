"""Command-line front end.

Config comes from --config or the OPENQA_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import nn
from .errors import OpenQAError
from .hyper import Hyper
from .kb import build_entity_dictionary, load_triples
from .ld_solver import load_scorer_data, load_tagger_data, train_relation_scorer, train_tagger
from .pipeline import System, SystemConfig, ask, evaluate, load_qa_pairs, make_selector_data
from .reader import load_reader_data, train_reader
from .retrieval import build_index, load_passages, save_index, tag_passage
from .selector import load_selector_data, train_selector
from .service import serve
from .text import Vocabulary


def _load_config(args) -> SystemConfig:
    path = args.config or os.environ.get("OPENQA_CONFIG")
    if not path:
        raise SystemExit("no config: pass --config or set OPENQA_CONFIG")
    return SystemConfig.load(path)


def _hyper(config: SystemConfig, args) -> Hyper:
    hyper = Hyper(**vars(config.hyper).copy())
    if getattr(args, "epochs", None) is not None:
        hyper.epochs = args.epochs
    if getattr(args, "lr", None) is not None:
        hyper.lr = args.lr
    if getattr(args, "seed", None) is not None:
        hyper.seed = args.seed
    return hyper


def cmd_load_kb(args):
    kb = load_triples(args.tsv)
    print(f"loaded {len(kb)} triples, {len(kb.entities)} entities")


def cmd_index(args):
    config = _load_config(args)
    kb = load_triples(config.kb_path)
    dictionary = build_entity_dictionary(kb)
    from .retrieval import splice_triple

    docs = [splice_triple(t, i) for i, t in enumerate(kb.triples)]
    next_id = len(docs)
    for pid, text in load_passages(args.passages):
        docs.append(tag_passage(pid, text, dictionary, next_id))
        next_id += 1
    idx = build_index(docs)
    print(f"indexed {idx.doc_count} documents, {len(idx.postings)} terms")
    if args.out:
        save_index(idx, args.out)
        print(f"wrote {args.out}")


def cmd_train(args):
    config = _load_config(args)
    hyper = _hyper(config, args)
    vocab = Vocabulary.load(config.vocab_path)
    target = args.target
    out = args.out or getattr(config, f"{'scorer' if target == 'scorer' else target}_model", None)
    if out is None:
        raise SystemExit(f"no output path: pass --out or set {target}_model in the config")

    if target == "tagger":
        params = train_tagger(load_tagger_data(args.data), hyper, vocab)
    elif target == "scorer":
        params = train_relation_scorer(load_scorer_data(args.data), hyper, vocab)
    elif target == "reader":
        params = train_reader(load_reader_data(args.data), hyper, vocab).params
    else:
        params = train_selector(load_selector_data(args.data), hyper, vocab).params
    params.save(out)
    losses = params.arch.get("epoch_losses", [])
    first = losses[0] if losses else float("nan")
    final = losses[-1] if losses else float("nan")
    print(f"trained {target}: epochs={hyper.epochs} loss {first:.4f} -> {final:.4f}; wrote {out}")


def cmd_ask(args):
    system = System(_load_config(args))
    response = ask(system, args.question)
    if args.json:
        print(json.dumps(response.to_dict()))
    else:
        if response.answer is None:
            print("no answer")
        else:
            print(f"{response.answer}  (confidence {response.confidence:.3f}, via {response.solver})")


def cmd_repl(args):
    system = System(_load_config(args))
    print("openqa repl; empty line or Ctrl-D exits")
    while True:
        try:
            question = input("? ").strip()
        except EOFError:
            break
        if not question:
            break
        try:
            response = ask(system, question)
        except OpenQAError as exc:
            print(f"error: {exc}")
            continue
        if response.answer is None:
            print("no answer")
        else:
            print(f"{response.answer}  (confidence {response.confidence:.3f}, via {response.solver})")


def cmd_eval(args):
    system = System(_load_config(args))
    report = evaluate(system, load_qa_pairs(args.dataset))
    print(f"accuracy {report.accuracy:.4f} ({report.correct}/{report.total})")
    for tag, rate in report.per_solver_hit_rate.items():
        print(f"  {tag} hit rate {rate:.4f}")


def cmd_make_selector_data(args):
    system = System(_load_config(args))
    written, skipped = make_selector_data(system, load_qa_pairs(args.dataset), args.out)
    print(f"wrote {written} examples to {args.out} ({skipped} skipped)")


def cmd_serve(args):
    config = _load_config(args)
    system = System(config)
    addr = args.addr or config.http_addr
    print(f"serving on http://{addr}")
    serve(system, addr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="openqa", description="hybrid KB + passage question answering")
    parser.add_argument("--config", help="path to the system config JSON (or set OPENQA_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load-kb", help="validate and summarize a triples TSV")
    p.add_argument("tsv")
    p.set_defaults(fn=cmd_load_kb)

    p = sub.add_parser("index", help="build the two-field index")
    p.add_argument("passages")
    p.add_argument("--out", help="write the index JSON here")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("target", choices=["tagger", "scorer", "reader", "selector"])
    p.add_argument("data")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("question")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_ask)

    p = sub.add_parser("repl", help="interactive question loop")
    p.set_defaults(fn=cmd_repl)

    p = sub.add_parser("eval", help="exact-match accuracy on a QA JSONL file")
    p.add_argument("dataset")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("make-selector-data", help="generate selector training data")
    p.add_argument("dataset")
    p.add_argument("out")
    p.set_defaults(fn=cmd_make_selector_data)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--addr", help="host:port (default from config)")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except OpenQAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
