"""Command-line entry point wiring the library into reproducible runs.

Configuration is a flat key-value file with dotted keys (``model.lstm_hidden
= 64``); flag overrides win over file values, and every run can write a
manifest recording the fully resolved configuration, input-file content
hashes, and the master seed, which together determine a rerun on this
deterministic CPU backend.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .annotate import AnnotationError, Annotator, SpacyAnnotator, load_fixture
from .corpus import (
    CorpusError,
    LabeledDataset,
    compute_stats,
    load_labeled,
    load_unlabeled,
    make_folds,
    split_validation,
)
from .embed import EmbeddingError, load_embeddings
from .evaluate import (
    EvaluationError,
    PipelineResources,
    ablation_table,
    cross_validate,
    emit_report,
    run_ablation,
)
from .lexfeat import FeatureError, fit_schema
from .metrics import MetricsError
from .model import (
    InputPipeline,
    ModelConfig,
    ModelError,
    TrainingError,
    load_checkpoint,
    save_checkpoint,
    train_supervised,
)
from .seeds import derive_seed
from .selftrain import SelfTrainConfig, SelfTrainError, SupervisedTrainer, TrainedClassifier, self_train

DATA_ROOT_ENV = "SUGMINE_DATA_ROOT"

COMMANDS = ("stats", "folds", "train", "selftrain", "evaluate", "ablate", "predict")

RUNTIME_ERRORS = (
    AnnotationError,
    CorpusError,
    EmbeddingError,
    EvaluationError,
    FeatureError,
    MetricsError,
    ModelError,
    SelfTrainError,
    TrainingError,
)


class ConfigError(Exception):
    """Bad configuration file, flag value, or missing input file (exit 2)."""


def _parse_config_file(path: Path) -> dict[str, object]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip()
        value = value.strip()
        try:
            values[key] = json.loads(value)
        except json.JSONDecodeError:
            values[key] = value
    return values


def _resolve_path(value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    root = os.environ.get(DATA_ROOT_ENV)
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def _sha256(path: Path) -> str:
    hasher = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


@dataclasses.dataclass
class ResolvedRun:
    """Everything a command needs, with defaults, file values, and flags merged."""

    command: str
    model: ModelConfig
    selftrain: SelfTrainConfig
    validation_fraction: float
    embedding_dim: int
    seed: int
    folds: int
    jobs: int
    paths: dict[str, Path | None]
    spacy_model: str | None

    def flat_config(self) -> dict[str, object]:
        flat: dict[str, object] = {}
        for field in dataclasses.fields(ModelConfig):
            value = getattr(self.model, field.name)
            flat[f"model.{field.name}"] = list(value) if isinstance(value, tuple) else value
        for name in ("per_class_add", "max_iterations", "patience"):
            flat[f"selftrain.{name}"] = getattr(self.selftrain, name)
        flat["corpus.validation_fraction"] = self.validation_fraction
        flat["embed.dim"] = self.embedding_dim
        flat["seed"] = self.seed
        flat["folds"] = self.folds
        flat["jobs"] = self.jobs
        return flat


def _build_run(args: argparse.Namespace) -> ResolvedRun:
    file_values = _parse_config_file(Path(args.config)) if args.config else {}

    model_kwargs = {f.name: f for f in dataclasses.fields(ModelConfig)}
    model_values: dict[str, object] = {}
    selftrain_values: dict[str, object] = {}
    validation_fraction = 0.1
    embedding_dim = 300
    spacy_model = None
    path_keys = {"paths.data": "data", "paths.unlabeled": "unlabeled",
                 "paths.embeddings": "embeddings", "paths.annotations": "annotations"}
    config_paths: dict[str, str] = {}

    for key, value in file_values.items():
        section, _, name = key.partition(".")
        if section == "model" and name in model_kwargs:
            model_values[name] = tuple(value) if isinstance(value, list) else value
        elif section == "selftrain" and name in ("per_class_add", "max_iterations", "patience"):
            selftrain_values[name] = value
        elif key == "corpus.validation_fraction":
            validation_fraction = float(value)
        elif key == "embed.dim":
            embedding_dim = int(value)
        elif key == "annotate.spacy_model":
            spacy_model = str(value)
        elif key in path_keys:
            config_paths[path_keys[key]] = str(value)
        else:
            raise ConfigError(f"unknown config key: {key}")

    if args.variant is not None:
        model_values["variant"] = args.variant
    if args.seed is not None:
        model_values["seed"] = args.seed
    seed = int(model_values.get("seed", 0))
    model_values["seed"] = seed

    try:
        model = ModelConfig(**model_values)
        selftrain = SelfTrainConfig(base=model, **selftrain_values)
    except (ModelError, SelfTrainError, TypeError) as exc:
        raise ConfigError(f"bad configuration: {exc}") from exc

    paths: dict[str, Path | None] = {}
    for name in ("data", "unlabeled", "embeddings", "annotations"):
        flag_value = getattr(args, name, None)
        raw = flag_value if flag_value is not None else config_paths.get(name)
        paths[name] = _resolve_path(raw)
    paths["model"] = Path(args.model) if getattr(args, "model", None) else None
    paths["input"] = _resolve_path(getattr(args, "input", None))

    return ResolvedRun(
        command=args.command,
        model=model,
        selftrain=selftrain,
        validation_fraction=validation_fraction,
        embedding_dim=embedding_dim,
        seed=seed,
        folds=args.folds if args.folds is not None else 5,
        jobs=args.jobs if args.jobs is not None else 1,
        paths=paths,
        spacy_model=spacy_model,
    )


def _require(run: ResolvedRun, *names: str) -> None:
    for name in names:
        path = run.paths.get(name)
        if path is None:
            raise ConfigError(f"command {run.command!r} requires --{name}")
        if not path.exists():
            raise ConfigError(f"--{name} file not found: {path}")


def _annotator(run: ResolvedRun) -> Annotator:
    if run.paths.get("annotations") is not None:
        return load_fixture(run.paths["annotations"])
    if run.spacy_model:
        return SpacyAnnotator(run.spacy_model)
    raise ConfigError(
        "no annotation backend: pass --annotations FIXTURE.jsonl "
        "or set annotate.spacy_model in the config"
    )


def _write_manifest(run: ResolvedRun, out_dir: Path | None, started: float, artifacts: list[str]) -> None:
    if out_dir is None:
        return
    inputs = {}
    for name, path in run.paths.items():
        if path is not None and path.exists() and path.is_file():
            inputs[name] = {"path": str(path), "sha256": _sha256(path)}
    manifest = {
        "command": run.command,
        "tool_version": __version__,
        "seed": run.seed,
        "config": run.flat_config(),
        "inputs": inputs,
        "artifacts": artifacts,
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _out_dir(args: argparse.Namespace, required: bool) -> Path | None:
    if args.out is None:
        if required:
            raise ConfigError(f"command {args.command!r} requires --out")
        return None
    if not str(args.out).strip():
        raise ConfigError("--out must not be empty")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(run: ResolvedRun) -> LabeledDataset:
    _require(run, "data")
    return load_labeled(run.paths["data"])


def _cmd_stats(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    dataset = _load_dataset(run)
    stats = compute_stats(dataset)
    print(f"n_total\t{stats.n_total}")
    print(f"n_positive\t{stats.n_positive}")
    print(f"n_negative\t{stats.n_negative}")
    print(f"imbalance_ratio\t{stats.imbalance_ratio:.6g}")
    print(f"class_ratio\t1:{stats.imbalance_ratio:.1f}")
    return []


def _cmd_folds(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    dataset = _load_dataset(run)
    out = _out_dir(args, required=True)
    folds = make_folds(dataset, run.folds, run.seed, run.validation_fraction)
    artifacts = []
    for fold in folds:
        path = out / f"fold_{fold.fold_index}.json"
        path.write_text(
            json.dumps(
                {
                    "fold_index": fold.fold_index,
                    "train_ids": list(fold.train_ids),
                    "validation_ids": list(fold.validation_ids),
                    "test_ids": list(fold.test_ids),
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        artifacts.append(path.name)
        print(f"fold {fold.fold_index}: train={len(fold.train_ids)} "
              f"validation={len(fold.validation_ids)} test={len(fold.test_ids)}")
    return artifacts


def _training_inputs(run: ResolvedRun) -> tuple[LabeledDataset, InputPipeline]:
    _require(run, "data", "embeddings")
    dataset = _load_dataset(run)
    table = load_embeddings(run.paths["embeddings"], dim=run.embedding_dim)
    annotator = _annotator(run)
    schema = None
    if run.model.uses_linguistic:
        parses = [annotator.parse(s.text) for s in dataset.sentences]
        schema = fit_schema(parses)
    pipeline = InputPipeline(table, annotator, schema, run.model.max_len)
    return dataset, pipeline


def _cmd_train(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    dataset, pipeline = _training_inputs(run)
    out = _out_dir(args, required=True)
    train_ids, val_ids = split_validation(
        dataset, dataset.ids, run.validation_fraction, derive_seed(run.seed, "validation")
    )
    model, history = train_supervised(
        dataset.subset(train_ids), dataset.subset(val_ids), run.model, pipeline
    )
    checkpoint = out / "checkpoint.pt"
    save_checkpoint(checkpoint, model, pipeline.table, pipeline.schema)
    history_path = out / "history.json"
    history_path.write_text(
        json.dumps(
            {
                "best_epoch": history.best_epoch,
                "stopped_early": history.stopped_early,
                "epochs": [dataclasses.asdict(e) for e in history.epochs],
            },
            sort_keys=True,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"trained {run.model.variant}: best epoch {history.best_epoch} "
          f"of {len(history.epochs)}, checkpoint {checkpoint}")
    return [checkpoint.name, history_path.name]


def _cmd_selftrain(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    _require(run, "unlabeled")
    dataset, pipeline = _training_inputs(run)
    out = _out_dir(args, required=True)
    pool = load_unlabeled(run.paths["unlabeled"], limit=args.limit)
    train_ids, val_ids = split_validation(
        dataset, dataset.ids, run.validation_fraction, derive_seed(run.seed, "validation")
    )
    trainer = SupervisedTrainer(config=run.model, pipeline=pipeline)
    best, st_run = self_train(
        dataset.subset(train_ids), list(pool.sentences), dataset.subset(val_ids),
        run.selftrain, trainer,
    )
    checkpoint = out / "checkpoint.pt"
    assert isinstance(best, TrainedClassifier)
    save_checkpoint(checkpoint, best.model, pipeline.table, pipeline.schema)
    artifacts = [p.name for p in emit_report(st_run, out)] + [checkpoint.name]
    best_record = st_run.best_record
    print(f"self-training: {len(st_run.iterations)} iterations, "
          f"best iteration {st_run.best_iteration} (validation F1 {best_record.validation_f1:.3f})")
    return artifacts


def _cmd_evaluate(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    dataset, pipeline = _training_inputs(run)
    out = _out_dir(args, required=True)
    pool = (
        load_unlabeled(run.paths["unlabeled"], limit=args.limit)
        if run.paths.get("unlabeled") is not None
        else None
    )
    resources = PipelineResources(
        table=pipeline.table, annotator=pipeline.annotator,
        validation_fraction=run.validation_fraction,
    )
    config = run.selftrain if pool is not None else run.model
    result = cross_validate(dataset, pool, config, run.folds, run.seed, resources, jobs=run.jobs)
    artifacts = [p.name for p in emit_report(result, out)]
    summary = result.summary()["macro_f1"]
    print(f"{run.folds}-fold macro F1: {summary['mean']:.3f} (sd {summary['sd']:.3f})")
    return artifacts


def _cmd_ablate(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    dataset, pipeline = _training_inputs(run)
    out = _out_dir(args, required=True)
    pool = (
        load_unlabeled(run.paths["unlabeled"], limit=args.limit)
        if run.paths.get("unlabeled") is not None
        else None
    )
    resources = PipelineResources(
        table=pipeline.table, annotator=pipeline.annotator,
        validation_fraction=run.validation_fraction,
    )
    config = run.selftrain if pool is not None else run.model
    results = run_ablation(dataset, pool, config, run.folds, run.seed, resources, jobs=run.jobs)
    table_text = ablation_table(results)
    (out / "ablation.tsv").write_text(table_text, encoding="utf-8")
    (out / "ablation.json").write_text(
        json.dumps({v: r.as_dict() for v, r in results.items()}, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    print(table_text, end="")
    return ["ablation.tsv", "ablation.json"]


def _cmd_predict(run: ResolvedRun, args: argparse.Namespace) -> list[str]:
    if run.paths.get("model") is None:
        raise ConfigError("command 'predict' requires --model CHECKPOINT")
    if run.paths.get("input") is None:
        raise ConfigError("command 'predict' requires --input FILE")
    _require(run, "model", "input")
    out = _out_dir(args, required=False)

    model, table, schema = load_checkpoint(run.paths["model"])
    annotator = _annotator(run)
    pipeline = InputPipeline(table, annotator, schema, model.config.max_len)
    sentences = load_unlabeled(run.paths["input"]).sentences
    trained = TrainedClassifier(model=model, pipeline=pipeline)
    rows = [
        f"{s.id}\t{p.prob_suggestive:.6f}\t{p.label}"
        for s, p in zip(sentences, trained.predict_proba(sentences))
    ]
    text = "\n".join(rows) + ("\n" if rows else "")
    sys.stdout.write(text)
    if out is not None:
        (out / "predictions.tsv").write_text(text, encoding="utf-8")
        return ["predictions.tsv"]
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sugmine",
        description="Suggestion mining over review sentences: train, bootstrap, evaluate.",
    )
    parser.add_argument("--version", action="version", version=f"sugmine {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="flat key=value configuration file")
        p.add_argument("--data", metavar="PATH", help="labeled TSV (label<TAB>text)")
        p.add_argument("--unlabeled", metavar="PATH", help="unlabeled sentences, one per line")
        p.add_argument("--embeddings", metavar="PATH", help="word vectors, token + values per line")
        p.add_argument("--annotations", metavar="PATH", help="frozen parse fixture (JSONL)")
        p.add_argument("--out", metavar="DIR", help="output directory for artifacts + manifest")
        p.add_argument("--seed", type=int, metavar="N", help="master seed (default 0)")
        p.add_argument("--folds", type=int, metavar="K", help="number of CV folds (default 5)")
        p.add_argument("--variant", metavar="NAME", help="model variant (default hybrid)")
        p.add_argument("--jobs", type=int, metavar="N", help="parallel fold workers (default 1)")
        p.add_argument("--limit", type=int, metavar="N", help="cap on unlabeled sentences")

    descriptions = {
        "stats": "print dataset statistics as key-value records",
        "folds": "write stratified cross-validation fold id files",
        "train": "train a supervised model, write checkpoint + history",
        "selftrain": "bootstrap with unlabeled data, write best checkpoint + curve",
        "evaluate": "k-fold cross-validation report (self-training when --unlabeled given)",
        "ablate": "cross-validate the hybrid and its leave-one-branch-out variants",
        "predict": "label a sentence file with a trained checkpoint",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=descriptions[name])
        add_common(p)
        if name == "predict":
            p.add_argument("--model", metavar="CHECKPOINT", help="trained checkpoint path")
            p.add_argument("--input", metavar="PATH", help="sentences to label, one per line")
    return parser


HANDLERS = {
    "stats": _cmd_stats,
    "folds": _cmd_folds,
    "train": _cmd_train,
    "selftrain": _cmd_selftrain,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
    "predict": _cmd_predict,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    started = time.time()
    try:
        run = _build_run(args)
        artifacts = HANDLERS[args.command](run, args)
        _write_manifest(run, Path(args.out) if args.out else None, started, artifacts)
        return 0
    except ConfigError as exc:
        print(f"sugmine {args.command}: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"sugmine {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sugmine {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
