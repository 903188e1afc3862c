"""Self-training: bootstrap a classifier with its own confident pseudo-labels.

Each iteration trains a fresh model on the current labeled set, records its
validation scores, then moves the most confidently predicted pool sentences
(per class, capped) into the labeled set with their predicted labels. The
loop keeps the best validation-F1 model and stops once F1 fails to beat the
best for a fixed number of consecutive iterations, at the iteration cap, or
when the pool runs dry. Gold labels are never overwritten; pseudo-labeled
sentences are flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence

from .corpus import LabeledSentence, UnlabeledSentence
from .metrics import ClassMetrics, prf_metrics
from .model import (
    HybridClassifier,
    InputPipeline,
    ModelConfig,
    Prediction,
    TrainHistory,
    predict_proba,
    train_supervised,
)
from .seeds import derive_seed


class SelfTrainError(ValueError):
    """Invalid self-training configuration or inputs."""


@dataclass
class SelfTrainConfig:
    per_class_add: int = 100
    max_iterations: int = 6
    patience: int = 3
    base: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self) -> None:
        if self.per_class_add < 1:
            raise SelfTrainError("per_class_add must be >= 1")
        if self.max_iterations < 1:
            raise SelfTrainError("max_iterations must be >= 1")
        if self.patience < 1:
            raise SelfTrainError("patience must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int  # 1-based; the first trained model is iteration 1
    validation_precision: float
    validation_recall: float
    validation_f1: float
    added_positive_ids: tuple[str, ...]
    added_negative_ids: tuple[str, ...]
    pool_remaining: int

    @property
    def added_positive(self) -> int:
        return len(self.added_positive_ids)

    @property
    def added_negative(self) -> int:
        return len(self.added_negative_ids)


@dataclass
class SelfTrainRun:
    iterations: list[IterationRecord]
    best_iteration: int

    @property
    def best_record(self) -> IterationRecord:
        return self.iterations[self.best_iteration - 1]

    def as_dict(self) -> dict:
        return {
            "best_iteration": self.best_iteration,
            "iterations": [
                {
                    "iteration": r.iteration,
                    "validation_precision": r.validation_precision,
                    "validation_recall": r.validation_recall,
                    "validation_f1": r.validation_f1,
                    "added_positive_ids": list(r.added_positive_ids),
                    "added_negative_ids": list(r.added_negative_ids),
                    "pool_remaining": r.pool_remaining,
                }
                for r in self.iterations
            ],
        }


class PoolClassifier(Protocol):
    """What self-training needs from a trained model."""

    def predict_proba(self, sentences: Sequence[UnlabeledSentence]) -> list[Prediction]: ...


# (train sentences, validation sentences, seed) -> (model, validation metrics)
TrainFn = Callable[
    [list[LabeledSentence], list[LabeledSentence], int],
    tuple[PoolClassifier, ClassMetrics],
]


@dataclass
class TrainedClassifier:
    """A trained model bound to its input pipeline, predicting from raw sentences."""

    model: HybridClassifier
    pipeline: InputPipeline
    history: TrainHistory | None = None

    def predict_proba(
        self, sentences: Sequence[LabeledSentence | UnlabeledSentence]
    ) -> list[Prediction]:
        if not sentences:
            return []
        return predict_proba(self.model, self.pipeline.encode_batch(sentences))

    def predict_labels(self, sentences: Sequence[LabeledSentence | UnlabeledSentence]) -> list[int]:
        return [p.label for p in self.predict_proba(sentences)]


@dataclass
class SupervisedTrainer:
    """Default TrainFn: trains the hybrid model and scores it on validation."""

    config: ModelConfig
    pipeline: InputPipeline

    def __call__(
        self,
        train: list[LabeledSentence],
        validation: list[LabeledSentence],
        seed: int,
    ) -> tuple[TrainedClassifier, ClassMetrics]:
        cfg = replace(self.config, seed=seed)
        model, history = train_supervised(train, validation, cfg, self.pipeline)
        trained = TrainedClassifier(model=model, pipeline=self.pipeline, history=history)
        metrics = prf_metrics(trained.predict_labels(validation), [s.label for s in validation])
        return trained, metrics


def select_confident(
    pool_predictions: Sequence[tuple[UnlabeledSentence, Prediction]],
    per_class: int,
) -> tuple[
    list[tuple[UnlabeledSentence, Prediction]],
    list[tuple[UnlabeledSentence, Prediction]],
]:
    """Pick the most confidently predicted sentences of each class.

    For class c, candidates are the sentences whose argmax is c, ranked by
    P(c) descending with ties broken by sentence id; at most ``per_class``
    are returned per class. The two lists are disjoint by construction.
    """
    picks: list[list[tuple[UnlabeledSentence, Prediction]]] = [[], []]
    for cls in (0, 1):
        candidates = [(s, p) for s, p in pool_predictions if p.label == cls]
        candidates.sort(key=lambda sp: (-sp[1].probs[cls], sp[0].id))
        picks[cls] = candidates[:per_class]
    return picks[1], picks[0]


def self_train(
    labeled: Sequence[LabeledSentence],
    pool: Sequence[UnlabeledSentence],
    validation: Sequence[LabeledSentence],
    config: SelfTrainConfig,
    train_fn: TrainFn,
) -> tuple[PoolClassifier, SelfTrainRun]:
    """Run the bootstrapping loop and return the best model with its history.

    The validation set is held fixed across iterations so the F1 curve is
    comparable. Pool sentences are added at most once (selections are removed
    from the pool) and enter the labeled set flagged as pseudo-labeled.
    """
    for name, split in (("labeled", labeled), ("validation", validation)):
        if {s.label for s in split} != {0, 1}:
            raise SelfTrainError(f"{name} set must contain both classes")
    labeled_ids = {s.id for s in labeled}
    if any(s.id in labeled_ids for s in pool):
        raise SelfTrainError("pool ids must be disjoint from labeled ids")

    current: list[LabeledSentence] = list(labeled)
    pool_left: list[UnlabeledSentence] = list(pool)
    history: list[IterationRecord] = []
    best_f1 = -1.0
    best_iteration = 0
    best_model: PoolClassifier | None = None
    bad_iterations = 0

    for iteration in range(1, config.max_iterations + 1):
        seed = derive_seed(config.base.seed, f"selftrain-iteration{iteration}")
        model, metrics = train_fn(current, list(validation), seed)
        if metrics.macro_f1 > best_f1:
            best_f1 = metrics.macro_f1
            best_iteration = iteration
            best_model = model
            bad_iterations = 0
        else:
            bad_iterations += 1

        # Augment before the stop check: every completed iteration moves up to
        # per_class_add sentences per class out of the pool.
        predictions = model.predict_proba(pool_left) if pool_left else []
        positives, negatives = select_confident(list(zip(pool_left, predictions)), config.per_class_add)
        taken = {s.id for s, _ in positives} | {s.id for s, _ in negatives}
        for sentence, pred in positives:
            current.append(LabeledSentence(id=sentence.id, text=sentence.text, label=1, pseudo=True))
        for sentence, pred in negatives:
            current.append(LabeledSentence(id=sentence.id, text=sentence.text, label=0, pseudo=True))
        pool_left = [s for s in pool_left if s.id not in taken]

        history.append(
            IterationRecord(
                iteration=iteration,
                validation_precision=metrics.macro_precision,
                validation_recall=metrics.macro_recall,
                validation_f1=metrics.macro_f1,
                added_positive_ids=tuple(s.id for s, _ in positives),
                added_negative_ids=tuple(s.id for s, _ in negatives),
                pool_remaining=len(pool_left),
            )
        )
        if bad_iterations >= config.patience:
            break
        if not pool_left:
            break  # pool exhausted: recorded in the history, loop ends early

    assert best_model is not None
    return best_model, SelfTrainRun(iterations=history, best_iteration=best_iteration)
