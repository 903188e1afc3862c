"""Cross-validation orchestration, ablations, and report emission.

Folds are stratified and per-fold feature schemas are fitted on the fold's
training part only, so evaluation vocabulary never leaks into the feature
space. Fold results are aggregated as mean and sample standard deviation
(ddof=1) of each metric. Reports are written deterministically: rerunning
from the same inputs on the same backend reproduces the metrics files byte
for byte.
"""

from __future__ import annotations

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .annotate import Annotator, annotate
from .corpus import FoldSplit, LabeledDataset, UnlabeledPool, make_folds
from .embed import EmbeddingTable
from .lexfeat import fit_schema
from .metrics import ClassMetrics, prf_metrics
from .model import InputPipeline, ModelConfig
from .seeds import derive_seed
from .selftrain import SelfTrainConfig, SelfTrainRun, SupervisedTrainer, TrainFn, self_train

ABLATION_VARIANTS = ("hybrid", "hybrid_minus_cnn", "hybrid_minus_rnn", "hybrid_minus_linguistic")

SUMMARY_METRICS = (
    "precision_pos", "recall_pos", "f1_pos",
    "precision_neg", "recall_neg", "f1_neg",
    "macro_precision", "macro_recall", "macro_f1",
)


class EvaluationError(RuntimeError):
    """Fold construction or per-fold training failure."""


@dataclass
class PipelineResources:
    """Shared inputs for building per-fold pipelines."""

    table: EmbeddingTable
    annotator: Annotator
    validation_fraction: float = 0.1


@dataclass
class CvResult:
    folds: list[ClassMetrics]
    selftrain_runs: list[SelfTrainRun] | None = None

    @property
    def k(self) -> int:
        return len(self.folds)

    def values(self, metric: str) -> list[float]:
        return [getattr(m, metric) for m in self.folds]

    def summary(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for metric in SUMMARY_METRICS:
            vals = np.array(self.values(metric), dtype=np.float64)
            out[metric] = {
                "mean": float(vals.mean()),
                "sd": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
            }
        return out

    def as_dict(self) -> dict:
        payload = {
            "k": self.k,
            "folds": [m.as_dict() for m in self.folds],
            "summary": self.summary(),
            "conventions": {"zero_division": 0.0, "sd_ddof": 1, "positive_class": 1},
        }
        if self.selftrain_runs is not None:
            payload["selftrain"] = [run.as_dict() for run in self.selftrain_runs]
        return payload


def _normalize_configs(
    config: ModelConfig | SelfTrainConfig, pool: UnlabeledPool | None
) -> tuple[ModelConfig, SelfTrainConfig | None]:
    if isinstance(config, SelfTrainConfig):
        return config.base, (config if pool is not None else None)
    if pool is not None:
        return config, SelfTrainConfig(base=config)
    return config, None


def fold_schema(dataset: LabeledDataset, fold: FoldSplit, annotator: Annotator):
    """Fit the feature schema on one fold's training part (never its test part).

    The training part includes the validation subset, which is carved out of
    training data; only the test part must stay unseen.
    """
    sentences = dataset.subset(fold.train_ids) + dataset.subset(fold.validation_ids)
    return fit_schema([annotate(s.text, annotator) for s in sentences])


def _fold_metrics(
    fold: FoldSplit,
    dataset: LabeledDataset,
    pool: UnlabeledPool | None,
    base: ModelConfig,
    st_config: SelfTrainConfig | None,
    resources: PipelineResources,
    seed: int,
    train_fn: TrainFn | None,
) -> tuple[ClassMetrics, SelfTrainRun | None]:
    train_s = dataset.subset(fold.train_ids)
    val_s = dataset.subset(fold.validation_ids)
    test_s = dataset.subset(fold.test_ids)
    fold_seed = derive_seed(seed, f"fold{fold.fold_index}")

    schema = fold_schema(dataset, fold, resources.annotator) if base.uses_linguistic else None
    pipeline = InputPipeline(resources.table, resources.annotator, schema, base.max_len)
    fn = train_fn if train_fn is not None else SupervisedTrainer(config=base, pipeline=pipeline)

    run = None
    try:
        if st_config is not None and pool is not None:
            fold_config = replace(st_config, base=replace(base, seed=fold_seed))
            model, run = self_train(train_s, list(pool.sentences), val_s, fold_config, fn)
        else:
            model, _ = fn(train_s, val_s, fold_seed)
    except Exception as exc:
        raise EvaluationError(f"training failed on fold {fold.fold_index}: {exc}") from exc

    predicted = [p.label for p in model.predict_proba(test_s)]
    return prf_metrics(predicted, [s.label for s in test_s]), run


def _fold_worker(args: tuple) -> tuple[ClassMetrics, SelfTrainRun | None]:
    return _fold_metrics(*args)


def cross_validate(
    dataset: LabeledDataset,
    pool: UnlabeledPool | None,
    config: ModelConfig | SelfTrainConfig,
    k: int,
    seed: int,
    resources: PipelineResources,
    train_fn: TrainFn | None = None,
    jobs: int = 1,
) -> CvResult:
    """Stratified k-fold evaluation; self-training is used when a pool is given.

    Each fold fits its own feature schema, trains from scratch, and is scored
    on its test part. ``train_fn`` can replace the default supervised trainer
    (it must be picklable when ``jobs`` > 1, where folds run in parallel
    processes).
    """
    base, st_config = _normalize_configs(config, pool)
    folds = make_folds(dataset, k, seed, resources.validation_fraction)
    arg_list = [
        (fold, dataset, pool, base, st_config, resources, seed, train_fn) for fold in folds
    ]
    if jobs > 1:
        context = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(jobs, k), mp_context=context) as pool_exec:
            outcomes = list(pool_exec.map(_fold_worker, arg_list))
    else:
        outcomes = [_fold_worker(args) for args in arg_list]
    fold_metrics = [m for m, _ in outcomes]
    runs = [r for _, r in outcomes]
    return CvResult(
        folds=fold_metrics,
        selftrain_runs=list(runs) if all(r is not None for r in runs) else None,
    )


def run_ablation(
    dataset: LabeledDataset,
    pool: UnlabeledPool | None,
    base_config: ModelConfig | SelfTrainConfig,
    k: int,
    seed: int,
    resources: PipelineResources,
    train_fn: TrainFn | None = None,
    jobs: int = 1,
) -> dict[str, CvResult]:
    """Cross-validate the hybrid model and its three leave-one-branch-out variants."""
    base, st_config = _normalize_configs(base_config, pool)
    results: dict[str, CvResult] = {}
    for variant in ABLATION_VARIANTS:
        variant_base = replace(base, variant=variant)
        config: ModelConfig | SelfTrainConfig = (
            replace(st_config, base=variant_base) if st_config is not None else variant_base
        )
        results[variant] = cross_validate(
            dataset, pool, config, k, seed, resources, train_fn=train_fn, jobs=jobs
        )
    return results


def ablation_table(results: dict[str, CvResult]) -> str:
    """Delimited summary table: one row per variant, mean P/R/F1 (macro)."""
    lines = ["variant\tmacro_precision\tmacro_recall\tmacro_f1"]
    for variant, result in results.items():
        summary = result.summary()
        lines.append(
            f"{variant}"
            f"\t{summary['macro_precision']['mean']:.3f}"
            f"\t{summary['macro_recall']['mean']:.3f}"
            f"\t{summary['macro_f1']['mean']:.3f}"
        )
    return "\n".join(lines) + "\n"


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _confusion_tsv(metrics: ClassMetrics) -> str:
    # Rows are gold labels, columns are predictions; class 1 = suggestive.
    return (
        "gold\\pred\t1\t0\n"
        f"1\t{metrics.tp}\t{metrics.fn}\n"
        f"0\t{metrics.fp}\t{metrics.tn}\n"
    )


def _plot_confusion(mean_confusion: np.ndarray, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(3.2, 2.8))
    ax.imshow(mean_confusion, cmap="Blues")
    for (i, j), value in np.ndenumerate(mean_confusion):
        ax.text(j, i, f"{value:.1f}", ha="center", va="center")
    ax.set_xticks([0, 1], ["1", "0"])
    ax.set_yticks([0, 1], ["1", "0"])
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    ax.set_title("mean confusion over folds (1 = suggestive)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_selftrain_curve(run: SelfTrainRun, path: Path) -> None:
    iterations = [r.iteration for r in run.iterations]
    fig, ax = plt.subplots(figsize=(4.5, 3.0))
    ax.plot(iterations, [r.validation_precision for r in run.iterations], marker="o", label="precision")
    ax.plot(iterations, [r.validation_recall for r in run.iterations], marker="s", label="recall")
    ax.plot(iterations, [r.validation_f1 for r in run.iterations], marker="^", label="F1")
    ax.axvline(run.best_iteration, color="gray", linestyle="--", linewidth=1)
    best = run.best_record
    ax.scatter([best.iteration], [best.validation_f1], s=80, facecolors="none", edgecolors="red",
               zorder=5, label=f"best (iteration {run.best_iteration})")
    ax.set_xticks(iterations)
    ax.set_xlabel("self-training iteration")
    ax.set_ylabel("validation score")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_report(results: CvResult | SelfTrainRun, out_dir: str | Path) -> list[Path]:
    """Write report files for a cross-validation result or a self-training run.

    CvResult: metrics.json, one confusion_fold{i}.tsv per fold, confusion.png.
    SelfTrainRun: selftrain_history.json plus the validation-score curve with
    the best iteration marked.
    """
    if not str(out_dir).strip():
        raise EvaluationError("output directory path is empty")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise EvaluationError(f"output directory {out} is not writable: {exc}") from exc

    written: list[Path] = []
    if isinstance(results, SelfTrainRun):
        history_path = out / "selftrain_history.json"
        _dump_json(results.as_dict(), history_path)
        written.append(history_path)
        curve_path = out / "selftrain_curve.png"
        _plot_selftrain_curve(results, curve_path)
        written.append(curve_path)
        return written

    metrics_path = out / "metrics.json"
    _dump_json(results.as_dict(), metrics_path)
    written.append(metrics_path)
    for i, fold in enumerate(results.folds):
        fold_path = out / f"confusion_fold{i}.tsv"
        fold_path.write_text(_confusion_tsv(fold), encoding="utf-8")
        written.append(fold_path)
    mean_confusion = np.mean([m.confusion() for m in results.folds], axis=0)
    confusion_path = out / "confusion.png"
    _plot_confusion(mean_confusion, confusion_path)
    written.append(confusion_path)
    return written
