"""Command-line entry point.

Subcommands: ``train``, ``evaluate``, ``predict``, ``inspect-lookup``.
Option precedence is flags > ``DST_DATA_DIR`` environment variable > config
file defaults.  The config file is JSON; see the README for the key set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation, trainer
from .embeddings import EmbeddingTable
from .features import Featurizer, corpus_vocabulary
from .model import Checkpoint, load_checkpoint, save_checkpoint, count_parameters
from .multiwoz import load_multiwoz_ontology, load_multiwoz_restaurant
from .state import gold_change_indices, lookup_antecedent
from .types import Ontology, build_ontology, dialogue_to_dict, dialogues_from_json
from .woz import load_ontology_file, load_woz_corpus

DATASETS = ("woz", "multiwoz", "canonical")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextdst",
        description="Train and evaluate the context-aware dialogue state tracker.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "evaluate", "predict", "inspect-lookup"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="JSON run config")
        p.add_argument("--data-dir", type=Path, default=None)
        p.add_argument("--checkpoint", type=Path, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--split", default=None,
                       choices=("train", "validation", "test"))
        p.add_argument("--output-dir", type=Path, default=Path("runs"))
        p.add_argument("--variant", default=None,
                       choices=("global_only", "full_gle"))
        p.add_argument("--no-referential-context", action="store_true")
        p.add_argument("--no-fusion-scorer", action="store_true")
        if name == "inspect-lookup":
            p.add_argument("--dialogue", default=None,
                           help="restrict the dump to one dialogue id")
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def _resolve_data_dir(args, config: dict) -> Path:
    if args.data_dir is not None:
        return args.data_dir
    env = os.environ.get("DST_DATA_DIR")
    if env:
        return Path(env)
    if "data_dir" in config:
        return Path(config["data_dir"])
    raise SystemExit("no data directory: pass --data-dir, set DST_DATA_DIR, "
                     "or put data_dir in the config file")


def _load_split(dataset: str, data_dir: Path, split: str, ontology=None):
    if dataset == "woz":
        return load_woz_corpus(data_dir, split, ontology=ontology)
    if dataset == "multiwoz":
        return load_multiwoz_restaurant(data_dir, split)
    if dataset == "canonical":
        return dialogues_from_json(
            (data_dir / f"{split}.json").read_text(encoding="utf-8")
        )
    raise SystemExit(f"unknown dataset {dataset!r}; expected one of {DATASETS}")


def _resolve_ontology(config: dict, dataset: str, data_dir: Path, dialogues) -> Ontology:
    path = config.get("ontology")
    if path:
        path = Path(path)
        if not path.is_absolute():
            path = data_dir / path
        if dataset == "multiwoz":
            return load_multiwoz_ontology(path)
        return load_ontology_file(path)
    default = data_dir / "ontology.json"
    if default.exists():
        if dataset == "multiwoz":
            return load_multiwoz_ontology(default)
        return load_ontology_file(default)
    return build_ontology(dialogues)


def _build_table(config: dict, vocab: list[str], seed: int) -> EmbeddingTable:
    emb = config.get("embeddings", {})
    kind = emb.get("kind", "random")
    if kind == "files":
        return EmbeddingTable.from_text_files(
            emb["word_path"], emb.get("char_path"),
            char_dim=emb.get("char_dim", 100), vocab=vocab,
        )
    if kind == "random":
        return EmbeddingTable.random(
            vocab,
            word_dim=emb.get("word_dim", 300),
            char_dim=emb.get("char_dim", 100),
            seed=emb.get("seed", seed),
        )
    raise SystemExit(f"unknown embeddings kind {kind!r}")


def _train_config(args, config: dict) -> trainer.TrainConfig:
    cfg = trainer.TrainConfig.from_dict(config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threshold is not None:
        overrides["threshold"] = args.threshold
    if args.variant is not None:
        overrides["variant"] = args.variant
    if args.no_referential_context:
        overrides["referential_context"] = False
    if args.no_fusion_scorer:
        overrides["fusion_scorer"] = False
    if overrides:
        cfg = trainer.TrainConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def _cmd_train(args, config: dict) -> int:
    data_dir = _resolve_data_dir(args, config)
    dataset = config.get("dataset", "woz")
    train_dialogues = _load_split(dataset, data_dir, "train")
    validation_dialogues = _load_split(dataset, data_dir, "validation")
    ontology = _resolve_ontology(
        config, dataset, data_dir, train_dialogues + validation_dialogues
    )
    cfg = _train_config(args, config)
    vocab = corpus_vocabulary(train_dialogues + validation_dialogues, ontology)
    table = _build_table(config, vocab, cfg.seed)

    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    checkpoint = trainer.fit(
        cfg, train_dialogues, validation_dialogues, ontology, table,
        log_path=out / "metrics.jsonl",
    )
    save_checkpoint(out / "checkpoint.pt", checkpoint)
    summary = {
        "best_epoch": checkpoint.epoch,
        "metrics": checkpoint.metrics,
        "trainable_parameters": count_parameters(checkpoint.model),
        "train_config": checkpoint.train_config,
    }
    (out / "train_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"best epoch {checkpoint.epoch}: "
          f"validation joint goal {checkpoint.metrics['joint_goal_accuracy']:.4f} "
          f"-> {out / 'checkpoint.pt'}")
    return 0


def _require_checkpoint(args) -> Checkpoint:
    if args.checkpoint is None:
        raise SystemExit("--checkpoint is required for this command")
    if not args.checkpoint.exists():
        raise SystemExit(f"no such checkpoint: {args.checkpoint}")
    return load_checkpoint(args.checkpoint)


def _cmd_evaluate(args, config: dict) -> int:
    checkpoint = _require_checkpoint(args)
    data_dir = _resolve_data_dir(args, config)
    dataset = config.get("dataset", "woz")
    split = args.split or "test"
    dialogues = _load_split(dataset, data_dir, split)
    threshold = args.threshold if args.threshold is not None else 0.5
    corpus_ontology = None
    if config.get("ontology") or (data_dir / "ontology.json").exists():
        corpus_ontology = _resolve_ontology(config, dataset, data_dir, dialogues)
    report = evaluation.evaluate_corpus(
        checkpoint, dialogues, threshold, corpus_ontology=corpus_ontology
    )
    args.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = args.output_dir / f"report_{split}.json"
    out_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"{split}: joint goal {report.joint_goal_accuracy:.4f}, "
          f"request {report.turn_request_accuracy:.4f}, "
          f"inform {report.turn_inform_accuracy:.4f} -> {out_path}")
    return 0


def _cmd_predict(args, config: dict) -> int:
    checkpoint = _require_checkpoint(args)
    data_dir = _resolve_data_dir(args, config)
    dataset = config.get("dataset", "woz")
    split = args.split or "test"
    dialogues = _load_split(dataset, data_dir, split)
    threshold = args.threshold if args.threshold is not None else 0.5
    predictions = evaluation.track_corpus(checkpoint, dialogues, threshold)
    dump = []
    for dialogue, preds in zip(dialogues, predictions):
        record = dialogue_to_dict(dialogue)
        for turn_record, pred in zip(record["turns"], preds):
            turn_record["predicted_turn_label"] = [[s, v] for s, v in pred.turn_label]
            turn_record["predicted_goal_state"] = dict(sorted(pred.goal_state.items()))
            turn_record["predicted_requests"] = sorted(pred.requests)
        dump.append(record)
    args.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = args.output_dir / f"predictions_{split}.json"
    out_path.write_text(json.dumps(dump, indent=2), encoding="utf-8")
    print(f"wrote per-turn predictions for {len(dump)} dialogues -> {out_path}")
    return 0


def _cmd_inspect_lookup(args, config: dict) -> int:
    data_dir = _resolve_data_dir(args, config)
    dataset = config.get("dataset", "woz")
    split = args.split or "train"
    dialogues = _load_split(dataset, data_dir, split)
    if args.dialogue is not None:
        dialogues = [d for d in dialogues if d.dialogue_id == args.dialogue]
        if not dialogues:
            raise SystemExit(f"no dialogue with id {args.dialogue!r} in {split}")
    ontology = _resolve_ontology(config, dataset, data_dir, dialogues)
    dump = []
    for dialogue in dialogues:
        indices = gold_change_indices(dialogue)
        turns = []
        for turn, index in zip(dialogue.turns, indices):
            slots = {}
            for slot in ontology.slots:
                ctx = lookup_antecedent(index, slot, dialogue, turn.turn_index)
                slots[slot] = {
                    "last_change_turn": index.last_change_turn.get(slot),
                    "previous_value": index.previous_value.get(slot),
                    "antecedent_tokens": list(ctx.utterance_tokens),
                    "previous_value_tokens": list(ctx.previous_value_tokens),
                }
            turns.append({"turn_index": turn.turn_index, "slots": slots})
        dump.append({"dialogue_id": dialogue.dialogue_id, "turns": turns})
    args.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = args.output_dir / f"lookup_{split}.json"
    out_path.write_text(json.dumps(dump, indent=2, sort_keys=True), encoding="utf-8")
    print(f"wrote lookup dump for {len(dump)} dialogues -> {out_path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _load_config(args.config)
    try:
        if args.command == "train":
            return _cmd_train(args, config)
        if args.command == "evaluate":
            return _cmd_evaluate(args, config)
        if args.command == "predict":
            return _cmd_predict(args, config)
        if args.command == "inspect-lookup":
            return _cmd_inspect_lookup(args, config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
