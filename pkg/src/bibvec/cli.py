"""Command-line pipeline: ingest -> train -> query/eval/serve.

The ingest step writes a data directory (vocabulary.json plus encoded
train/test JSONL); train reads it and writes a binary model file; the
remaining commands need only the model file (it embeds the vocabulary),
except eval, which also reads the data directory for test questions and the
optional baseline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpus, evaluation, modelfile, search
from .model import TrainConfig, init_model, train
from .search import UnknownTokenError

VOCAB_FILE = "vocabulary.json"
TRAIN_FILE = "train.jsonl"
TEST_FILE = "test.jsonl"
META_FILE = "meta.json"


def _cmd_ingest(args: argparse.Namespace) -> int:
    cfg = corpus.load_ingest_config(args.config) if args.config \
        else corpus.IngestConfig()
    papers = corpus.load_corpus(args.corpus)
    if cfg.phrases.enabled:
        papers = corpus.apply_phrases(papers, threshold=cfg.phrases.threshold,
                                      discount=cfg.phrases.discount,
                                      passes=cfg.phrases.passes)
    train_papers, test_papers = corpus.split_dataset(
        papers, args.test_size, seed=args.seed, chronological=args.chronological)
    vocab = corpus.build_vocabulary(train_papers, cfg.specs,
                                    unknown_policy=cfg.unknown_policy)
    unknown = "unk" if cfg.unknown_policy == "unk" else "drop"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus.save_vocabulary(vocab, out / VOCAB_FILE)
    corpus.save_encoded_papers(corpus.encode_papers(vocab, train_papers,
                                                    unknown=unknown),
                               out / TRAIN_FILE)
    corpus.save_encoded_papers(corpus.encode_papers(vocab, test_papers,
                                                    unknown=unknown),
                               out / TEST_FILE)
    meta = {
        "n_train": len(train_papers),
        "n_test": len(test_papers),
        "seed": args.seed,
        "chronological": args.chronological,
        "unknown_policy": cfg.unknown_policy,
        "phrases": vars(cfg.phrases),
        "categories": [{"name": s.name, "kind": s.kind, "min_freq": s.min_freq}
                       for s in cfg.specs],
    }
    (out / META_FILE).write_text(json.dumps(meta, indent=2) + "\n",
                                 encoding="utf-8")
    sizes = ", ".join(f"{n}={vocab.size(n)}" for n in vocab.category_names)
    print(f"ingested {len(papers)} papers -> {len(train_papers)} train / "
          f"{len(test_papers)} test; vocabulary: {sizes}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    data = Path(args.data)
    vocab = corpus.load_vocabulary(data / VOCAB_FILE)
    papers = corpus.load_encoded_papers(data / TRAIN_FILE)
    model = init_model(vocab, args.dim, seed=args.seed)
    config = TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                         negatives=args.negatives, seed=args.seed,
                         workers=args.workers)
    trace = train(model, papers, config)
    for epoch, loss in enumerate(trace, start=1):
        print(f"epoch {epoch}: mean NCE loss {loss:.4f}")
    modelfile.save_model(model, vocab, args.out)
    print(f"saved model ({model.parameter_count()} parameters) to {args.out}")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    model, vocab = modelfile.load_model(args.model)
    try:
        query = search.resolve_query(vocab, args.category, args.token)
    except UnknownTokenError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    items = search.top_k(model, vocab, query, args.target_category,
                         args.measure, k=args.k)
    for item in items:
        print(f"{item.token}\t{item.score:.6g}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    model, vocab = modelfile.load_model(args.model)
    data = Path(args.data)
    test_papers = corpus.load_encoded_papers(data / TEST_FILE)
    questions = evaluation.make_mcq(test_papers, vocab, n_choices=args.choices,
                                    seed=args.seed)
    answers = [evaluation.answer_mcq(model, q) for q in questions]
    report = {
        "questions": len(questions),
        "correct": sum(q.correct == a for q, a in zip(questions, answers)),
        "accuracy": evaluation.accuracy(questions, answers),
        "choices": args.choices,
        "seed": args.seed,
        "per_question": [
            {"paper_id": q.paper.paper_id, "correct": q.correct_token,
             "chosen": vocab.token(q.correct.category, a.index),
             "candidates": q.candidate_tokens, "is_correct": q.correct == a}
            for q, a in zip(questions, answers)
        ],
    }
    if args.baseline == "logistic":
        train_papers = corpus.load_encoded_papers(data / TRAIN_FILE)
        cfg = evaluation.BaselineConfig(seed=args.seed)
        base = evaluation.logistic_baseline(train_papers, questions, vocab, cfg)
        report["baseline"] = {
            "kind": "logistic",
            "hyperparameters": vars(cfg),
            "correct": sum(q.correct == a for q, a in zip(questions, base)),
            "accuracy": evaluation.accuracy(questions, base),
        }
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote report to {args.out} (accuracy "
              f"{report['accuracy']:.4f})")
    else:
        print(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    model_path = args.model or os.environ.get("BIBVEC_MODEL")
    if not model_path:
        print("no model: pass --model or set BIBVEC_MODEL", file=sys.stderr)
        return 1
    model, vocab = modelfile.load_model(model_path)
    from .service import serve
    serve(model, vocab, bind=args.bind, static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibvec",
        description="Bibliographic embeddings: ingestion, training, "
                    "similarity search, author-prediction evaluation, and a "
                    "model-serving API.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build vocabulary and encoded datasets")
    p.add_argument("--corpus", required=True, help="JSONL corpus file")
    p.add_argument("--config", help="category/threshold configuration JSON")
    p.add_argument("--out", required=True, help="output data directory")
    p.add_argument("--test-size", type=int, default=0, dest="test_size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chronological", action="store_true",
                   help="hold out the latest papers instead of a random split")
    p.set_defaults(func=_cmd_ingest)

    defaults = TrainConfig()
    p = sub.add_parser("train", help="train embeddings on an ingested dataset")
    p.add_argument("--data", required=True, help="ingest output directory")
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--epochs", type=int, default=None,
                   help="pass count (default: scaled to the corpus, "
                        "~1.5M total updates)")
    p.add_argument("--negatives", type=int, default=defaults.negatives)
    p.add_argument("--lr", type=float, default=defaults.learning_rate)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("query", help="rank elements related to a query element")
    p.add_argument("--model", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--token", required=True)
    p.add_argument("--target-category", required=True, dest="target_category")
    p.add_argument("--measure", choices=list(search.MEASURES), default="linear")
    p.add_argument("-k", type=int, default=20)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("eval", help="run the held-out author prediction task")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="ingest output directory")
    p.add_argument("--choices", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", choices=["logistic"])
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="serve the model over HTTP")
    p.add_argument("--model", help="model file (default: $BIBVEC_MODEL)")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--static", help="directory of UI assets to serve at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
