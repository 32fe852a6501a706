"""Command-line interface: extract, vocab, train, predict, evaluate, inspect-graph.

Exit codes: 0 success, 1 configuration or usage error, 2 bad input data,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, LogLevelGGNNError
from .evaluation import (
    evaluate_predictions, format_comparison, make_splits, random_predictions, sample_labels,
)
from .ggnn import EnsemblePredictor, LogLevelGGNN, UniformPredictor
from .ggnn.model import prepare_sample
from .ggnn.train import train
from .graph import dumps_graph, loads_graph
from .java.graph_builder import graph_from_source
from .logs import (
    LEVEL_NAMES, LabeledSample, extract_corpus, prediction_sites, read_sample_dir, read_samples,
    write_samples,
)
from .runconfig import RunConfig, load_run_config
from .vocab import Vocabulary, build_vocab

logger = logging.getLogger("loglevel_ggnn")

SAMPLES_DIR = "samples"
STATS_FILE = "extract_stats.json"
VOCAB_FILE = "vocab.json"
CHECKPOINT_FILE = "model.ckpt"
TRAINING_LOG_FILE = "training_log.json"
SPLIT_FILE = "split.json"


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _samples_dir(cfg: RunConfig) -> Path:
    return Path(cfg.samples) if cfg.samples else Path(cfg.output_dir) / SAMPLES_DIR


def _load_samples(cfg: RunConfig) -> list[LabeledSample]:
    path = _samples_dir(cfg)
    if path.is_file():
        return read_samples(path)
    if not path.is_dir():
        raise ConfigError(f"sample path {path} does not exist; run extract first")
    return read_sample_dir(path)


def _split(cfg: RunConfig, samples):
    seen = cfg.seen_projects or None
    return make_splits(samples, seen, cfg.unseen_projects, cfg.seed)


# ---- commands ---------------------------------------------------------------

def cmd_extract(cfg: RunConfig) -> int:
    if not cfg.corpus:
        raise ConfigError("extract needs a corpus directory (--corpus)")
    samples, stats = extract_corpus(cfg.corpus, cfg.min_hops, cfg.max_hops, cfg.n_jobs)
    out = Path(cfg.output_dir)
    sample_dir = _samples_dir(cfg)
    sample_dir.mkdir(parents=True, exist_ok=True)
    by_project: dict[str, list] = {}
    for s in samples:
        by_project.setdefault(s.project, []).append(s)
    for project, items in sorted(by_project.items()):
        write_samples(sample_dir / f"{project}.jsonl", items)
    _write_json(out / STATS_FILE, stats.to_dict())
    if not samples:
        logger.warning("no log statements found under %s", cfg.corpus)
    print(f"extracted {stats.samples} samples from {stats.files} files "
          f"({stats.files_with_logs} with log statements)")
    return 0


def _train_vocab(cfg: RunConfig, samples, plan) -> Vocabulary:
    train_samples = plan.select(samples, "train")
    return build_vocab([s.graph for s in train_samples], cfg.min_count)


def cmd_vocab(cfg: RunConfig) -> int:
    samples = _load_samples(cfg)
    plan = _split(cfg, samples)
    vocab = _train_vocab(cfg, samples, plan)
    path = Path(cfg.vocab) if cfg.vocab else Path(cfg.output_dir) / VOCAB_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    vocab.save(path)
    print(f"vocabulary of {len(vocab)} entries written to {path} (sha256 {vocab.hash[:12]})")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    samples = _load_samples(cfg)
    plan = _split(cfg, samples)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab_path = Path(cfg.vocab) if cfg.vocab else out / VOCAB_FILE
    if vocab_path.exists():
        vocab = Vocabulary.load(vocab_path)
    else:
        logger.info("no vocabulary at %s; building it from the training split", vocab_path)
        vocab = _train_vocab(cfg, samples, plan)
        vocab.save(vocab_path)
    train_samples = plan.select(samples, "train")
    valid_samples = plan.select(samples, "valid")
    if not train_samples:
        raise ConfigError("training split is empty (are all projects unseen?)")
    model = LogLevelGGNN(
        hidden_size=cfg.hidden_size, steps=cfg.steps, mlp_sizes=cfg.mlp_sizes,
        aggregation=cfg.aggregation, gru_activation=cfg.gru_activation,
        learning_rate=cfg.learning_rate, batch_size=cfg.batch_size, max_epochs=cfg.max_epochs,
        patience=cfg.patience, class_weighting=cfg.class_weighting, min_count=cfg.min_count,
        random_state=cfg.seed,
    )
    model.fit(train_samples, eval_set=(valid_samples, None) if valid_samples else None, vocabulary=vocab)
    ckpt = Path(cfg.checkpoint) if cfg.checkpoint else out / CHECKPOINT_FILE
    model.save(ckpt)
    model.training_log_.write(out / TRAINING_LOG_FILE)
    _write_json(out / SPLIT_FILE, plan.to_dict())
    train_acc = model.score(train_samples)
    print(f"trained {model.n_epochs_} epochs (best epoch {model.training_log_.best_epoch}); "
          f"train accuracy {train_acc:.3f}; checkpoint {ckpt}")
    return 0


def _load_model(cfg: RunConfig) -> LogLevelGGNN:
    ckpt = Path(cfg.checkpoint) if cfg.checkpoint else Path(cfg.output_dir) / CHECKPOINT_FILE
    vocab_path = Path(cfg.vocab) if cfg.vocab else ckpt.parent / VOCAB_FILE
    if not ckpt.is_file():
        raise ConfigError(f"checkpoint {ckpt} not found")
    if not vocab_path.is_file():
        raise ConfigError(f"vocabulary {vocab_path} not found")
    return LogLevelGGNN.load(ckpt, Vocabulary.load(vocab_path))


def _line_col(raw: bytes, offset: int) -> tuple[int, int]:
    line = raw.count(b"\n", 0, offset) + 1
    col = offset - (raw.rfind(b"\n", 0, offset) + 1) + 1
    return line, col


def cmd_predict(cfg: RunConfig, inputs: Sequence[str], as_json: bool = False) -> int:
    model = _load_model(cfg)
    for name in inputs:
        path = Path(name)
        if not path.is_file():
            raise ConfigError(f"input {path} not found")
        if path.suffix == ".jsonl":
            samples = read_samples(path)
            where = [f"{s.origin.file or path}#{i}" for i, s in enumerate(samples)]
        else:
            text = path.read_text(encoding="utf-8")
            raw = text.encode("utf-8")
            samples = prediction_sites(text, str(path), "", cfg.min_hops, cfg.max_hops)
            where = ["{}:{}:{}".format(path, *_line_col(raw, s.origin.span[0])) for s in samples]
        if not samples:
            continue
        probs = model.predict_proba(samples)
        for loc, sample, p in zip(where, samples, probs):
            level = LEVEL_NAMES[int(np.argmax(p))]
            if as_json:
                record = {"site": loc, "predicted": level, "probabilities": dict(zip(LEVEL_NAMES, p.tolist())),
                          "actual": None if sample.label is None else sample.label.label}
                print(json.dumps(record, sort_keys=True))
            else:
                arr = ", ".join(f"{v:.4f}" for v in p)
                actual = "" if sample.label is None else f"  (was {sample.label.label})"
                print(f"{loc}\t{level}\t[{arr}]{actual}")
    return 0


def cmd_evaluate(cfg: RunConfig, random_baseline: bool = False, ensemble_weight: Optional[float] = None,
                 ensemble_checkpoint: Optional[str] = None) -> int:
    samples = _load_samples(cfg)
    plan = _split(cfg, samples)
    parts = {"seen": plan.select(samples, "test"), "unseen": plan.select(samples, "unseen")}
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if random_baseline:
        name = "random"
        predictor = None
    else:
        model = _load_model(cfg)
        name = "ggnn"
        predictor = model
        if ensemble_weight is not None:
            if ensemble_checkpoint:
                other = LogLevelGGNN.load(ensemble_checkpoint, model.vocabulary_)
            else:
                other = UniformPredictor()
            predictor = EnsemblePredictor(model, other, ensemble_weight)
            name = f"ensemble(w={ensemble_weight:g})"

    rows = {name: {}}
    for part, items in parts.items():
        if not items:
            rows[name][part] = None
            continue
        labels = sample_labels(items)
        if predictor is None:
            probs = random_predictions(len(items), cfg.seed)
        else:
            probs = predictor.predict_proba(items)
        report = evaluate_predictions(probs, labels)
        report.write_json(out / f"report_{part}.json")
        report.write_confusion_csv(out / f"confusion_{part}.csv")
        rows[name][part] = report
        print(f"[{part}] {report.summary()}")
        print(report.confusion_table())
    print(format_comparison(rows))
    return 0


def cmd_inspect_graph(path: str, fmt: str = "text") -> int:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{p} not found")
    text = p.read_text(encoding="utf-8")
    graph = graph_from_source(text, str(p)) if p.suffix == ".java" else loads_graph(text)
    if fmt == "json":
        print(dumps_graph(graph))
        return 0
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges")
    for n in graph.nodes:
        print(f"node {n.id}\t{n.node_type.value}\t{n.text!r}")
    for e in graph.edges:
        print(f"edge {e.src} -> {e.dst}\t{e.etype.value}")
    return 0


# ---- argument parsing ---------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *keys: str) -> None:
    flags = {
        "corpus": dict(help="root directory of Java sources (one subdirectory per project)"),
        "samples": dict(help="sample directory or .jsonl file (default: OUTPUT_DIR/samples)"),
        "output_dir": dict(help="where results are written"),
        "vocab": dict(help="vocabulary file"),
        "checkpoint": dict(help="model checkpoint file"),
        "seen_projects": dict(help="comma-separated seen projects (default: all not unseen)"),
        "unseen_projects": dict(help="comma-separated projects held out entirely"),
        "min_hops": dict(type=int),
        "max_hops": dict(type=int),
        "hidden_size": dict(type=int),
        "steps": dict(type=int, help="propagation steps"),
        "mlp_sizes": dict(help="comma-separated hidden sizes of the readout MLP"),
        "aggregation": dict(choices=["mean", "max"]),
        "gru_activation": dict(choices=["tanh", "relu"]),
        "min_count": dict(type=int),
        "learning_rate": dict(type=float),
        "batch_size": dict(type=int),
        "max_epochs": dict(type=int),
        "patience": dict(type=int),
        "class_weighting": dict(action="store_const", const=True, help="inverse-frequency loss weights"),
        "seed": dict(type=int),
        "n_jobs": dict(type=int, help="worker processes for extraction"),
    }
    for key in keys:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **flags[key])


_SPLIT_KEYS = ("samples", "output_dir", "seen_projects", "unseen_projects", "seed")
_MODEL_KEYS = ("hidden_size", "steps", "mlp_sizes", "aggregation", "gru_activation", "learning_rate",
               "batch_size", "max_epochs", "patience", "class_weighting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loglevel-ggnn", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value run configuration file")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="turn a Java corpus into labeled samples")
    _add_common(p, "corpus", "samples", "output_dir", "min_hops", "max_hops", "n_jobs")

    p = sub.add_parser("vocab", help="build the vocabulary from the training split")
    _add_common(p, *_SPLIT_KEYS, "vocab", "min_count")

    p = sub.add_parser("train", help="train a model")
    _add_common(p, *_SPLIT_KEYS, "vocab", "checkpoint", "min_count", *_MODEL_KEYS)

    p = sub.add_parser("predict", help="predict levels for log sites in Java or sample files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--json", action="store_true", help="one JSON object per site")
    _add_common(p, "output_dir", "checkpoint", "vocab", "min_hops", "max_hops")

    p = sub.add_parser("evaluate", help="score a model on the seen test split and unseen projects")
    _add_common(p, *_SPLIT_KEYS, "vocab", "checkpoint")
    p.add_argument("--random-baseline", action="store_true", help="score uniformly random predictions")
    p.add_argument("--ensemble-weight", type=float, help="mix the model with a second predictor")
    p.add_argument("--ensemble-checkpoint", help="second model (default: uniform predictor)")

    p = sub.add_parser("inspect-graph", help="dump the program graph of a Java or graph file")
    p.add_argument("path")
    p.add_argument("--format", choices=["text", "json"], default="text")
    return parser


_COMMAND_ARGS = {"command", "config", "verbose", "inputs", "json", "random_baseline", "ensemble_weight",
                 "ensemble_checkpoint", "path", "format"}


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "inspect-graph":
        return cmd_inspect_graph(args.path, args.format)
    overrides = {k: v for k, v in vars(args).items() if k not in _COMMAND_ARGS}
    cfg = load_run_config(args.config, overrides)
    if args.command == "extract":
        return cmd_extract(cfg)
    if args.command == "vocab":
        return cmd_vocab(cfg)
    if args.command == "train":
        return cmd_train(cfg)
    if args.command == "predict":
        return cmd_predict(cfg, args.inputs, args.json)
    return cmd_evaluate(cfg, args.random_baseline, args.ensemble_weight, args.ensemble_checkpoint)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(argv)
    except LogLevelGGNNError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except UnicodeDecodeError as exc:
        print(f"error: input is not valid UTF-8: {exc}", file=sys.stderr)
        return DataError.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
