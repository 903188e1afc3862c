import json

import numpy as np
import pytest

from sugmine.annotate import FixtureAnnotator, ParsedSentence, Token
from sugmine.corpus import LabeledDataset, LabeledSentence, make_folds
from sugmine.embed import build_table
from sugmine.evaluate import (
    EvaluationError,
    PipelineResources,
    ablation_table,
    cross_validate,
    emit_report,
    fold_schema,
    run_ablation,
)
from sugmine.metrics import ClassMetrics, prf_metrics
from sugmine.model import ModelConfig, Prediction
from sugmine.selftrain import IterationRecord, SelfTrainRun


class ConstantModel:
    """Always predicts the suggestive class with probability 0.9."""

    def predict_proba(self, sentences):
        return [Prediction.from_probs(0.1, 0.9) for _ in sentences]


class ConstantTrainer:
    def __call__(self, train, validation, seed):
        model = ConstantModel()
        metrics = prf_metrics(
            [p.label for p in model.predict_proba(validation)], [s.label for s in validation]
        )
        return model, metrics


def word_dataset(labels, prefix="s"):
    """Each sentence carries one unique marker token plus shared filler."""
    sentences = []
    parses = {}
    for i, lbl in enumerate(labels):
        text = f"marker{prefix}{i:03d} shared filler"
        sentences.append(LabeledSentence(id=f"{prefix}{i:03d}", text=text, label=lbl))
        tokens = tuple(Token(j, w, "XX") for j, w in enumerate(text.split()))
        parses[text] = ParsedSentence(tokens=tokens, arcs=())
    return LabeledDataset(tuple(sentences)), FixtureAnnotator(parses)


@pytest.fixture()
def stub_world():
    dataset, annotator = word_dataset([1] * 8 + [0] * 32)
    table = build_table(["shared", "filler"], np.ones((2, 4), dtype=np.float32))
    resources = PipelineResources(table=table, annotator=annotator, validation_fraction=0.2)
    return dataset, resources


def analytic_constant_metrics(dataset, fold) -> ClassMetrics:
    n_pos = sum(dataset.sentence(i).label for i in fold.test_ids)
    n_neg = len(fold.test_ids) - n_pos
    return ClassMetrics.from_counts(tp=n_pos, fp=n_neg, fn=0, tn=0)


class TestCrossValidate:
    def test_constant_stub_matches_analytic_fold_metrics(self, stub_world):
        dataset, resources = stub_world
        config = ModelConfig(variant="hybrid", max_len=4)
        result = cross_validate(
            dataset, None, config, k=4, seed=5, resources=resources, train_fn=ConstantTrainer()
        )
        folds = make_folds(dataset, 4, 5, resources.validation_fraction)
        assert result.k == 4
        for fold, got in zip(folds, result.folds):
            assert got == analytic_constant_metrics(dataset, fold)

    def test_parallel_fold_workers_match_sequential(self, stub_world):
        dataset, resources = stub_world
        config = ModelConfig(variant="cnn_only", max_len=4)
        sequential = cross_validate(
            dataset, None, config, k=2, seed=7, resources=resources, train_fn=ConstantTrainer()
        )
        parallel = cross_validate(
            dataset, None, config, k=2, seed=7, resources=resources,
            train_fn=ConstantTrainer(), jobs=2,
        )
        assert parallel.folds == sequential.folds

    def test_summary_reports_mean_and_sd(self, stub_world):
        dataset, resources = stub_world
        config = ModelConfig(variant="cnn_only", max_len=4)
        result = cross_validate(
            dataset, None, config, k=4, seed=5, resources=resources, train_fn=ConstantTrainer()
        )
        summary = result.summary()
        values = np.array(result.values("macro_f1"))
        assert summary["macro_f1"]["mean"] == pytest.approx(values.mean())
        assert summary["macro_f1"]["sd"] == pytest.approx(values.std(ddof=1))


class TestNoTestFoldLeakage:
    def test_schema_never_contains_test_only_tokens(self, stub_world):
        dataset, annotator = word_dataset([1] * 8 + [0] * 32)
        for fold in make_folds(dataset, 4, seed=3, validation_fraction=0.2):
            schema = fold_schema(dataset, fold, annotator)
            vocab = set(schema.word_vocabs[1].entries)
            test_markers = {f"marker{sid.lower()}" for sid in fold.test_ids}
            train_markers = {
                f"marker{sid.lower()}" for sid in fold.train_ids + fold.validation_ids
            }
            assert not vocab & test_markers
            assert train_markers <= vocab


class TestAblation:
    def test_stub_gives_identical_results_per_variant(self, stub_world):
        dataset, resources = stub_world
        results = run_ablation(
            dataset, None, ModelConfig(max_len=4), k=3, seed=2,
            resources=resources, train_fn=ConstantTrainer(),
        )
        assert set(results) == {
            "hybrid", "hybrid_minus_cnn", "hybrid_minus_rnn", "hybrid_minus_linguistic"
        }
        baseline = results["hybrid"].folds
        for variant, result in results.items():
            assert result.folds == baseline, variant

    def test_table_layout(self, stub_world):
        dataset, resources = stub_world
        results = run_ablation(
            dataset, None, ModelConfig(max_len=4), k=2, seed=2,
            resources=resources, train_fn=ConstantTrainer(),
        )
        text = ablation_table(results)
        lines = text.strip().splitlines()
        assert lines[0].split("\t") == ["variant", "macro_precision", "macro_recall", "macro_f1"]
        assert len(lines) == 5


def selftrain_run_fixture():
    records = [
        IterationRecord(
            iteration=i,
            validation_precision=0.5 + i / 100,
            validation_recall=0.6 + i / 100,
            validation_f1=[0.60, 0.62, 0.63, 0.61, 0.62, 0.60][i - 1],
            added_positive_ids=tuple(f"p{i}{j}" for j in range(3)),
            added_negative_ids=tuple(f"n{i}{j}" for j in range(3)),
            pool_remaining=100 - 6 * i,
        )
        for i in range(1, 7)
    ]
    return SelfTrainRun(iterations=records, best_iteration=3)


class TestEmitReport:
    def test_cv_report_files_and_consistency(self, tmp_path, stub_world):
        dataset, resources = stub_world
        result = cross_validate(
            dataset, None, ModelConfig(max_len=4), k=3, seed=1,
            resources=resources, train_fn=ConstantTrainer(),
        )
        written = emit_report(result, tmp_path / "report")
        names = {p.name for p in written}
        assert names == {"metrics.json", "confusion_fold0.tsv", "confusion_fold1.tsv",
                         "confusion_fold2.tsv", "confusion.png"}

        payload = json.loads((tmp_path / "report" / "metrics.json").read_text())
        assert payload["k"] == 3
        for i, fold in enumerate(result.folds):
            lines = (tmp_path / "report" / f"confusion_fold{i}.tsv").read_text().splitlines()
            _, tp, fn = lines[1].split("\t")
            _, fp, tn = lines[2].split("\t")
            again = ClassMetrics.from_counts(int(tp), int(fp), int(fn), int(tn))
            # Emitted metrics must be recomputable from the emitted matrix.
            assert abs(again.macro_f1 - fold.macro_f1) <= 1e-9
            assert abs(again.precision_pos - fold.precision_pos) <= 1e-9
            assert abs(again.recall_pos - fold.recall_pos) <= 1e-9

    def test_selftrain_report(self, tmp_path):
        run = selftrain_run_fixture()
        written = emit_report(run, tmp_path / "st")
        names = {p.name for p in written}
        assert names == {"selftrain_history.json", "selftrain_curve.png"}
        payload = json.loads((tmp_path / "st" / "selftrain_history.json").read_text())
        assert payload["best_iteration"] == 3
        assert len(payload["iterations"]) == 6
        assert (tmp_path / "st" / "selftrain_curve.png").stat().st_size > 0

    def test_empty_out_dir_rejected(self):
        with pytest.raises(EvaluationError, match="empty"):
            emit_report(selftrain_run_fixture(), "   ")

    def test_byte_identical_reruns(self, tmp_path, stub_world):
        dataset, resources = stub_world
        config = ModelConfig(max_len=4)
        blobs = []
        for attempt in ("one", "two"):
            result = cross_validate(
                dataset, None, config, k=2, seed=9,
                resources=resources, train_fn=ConstantTrainer(),
            )
            emit_report(result, tmp_path / attempt)
            blobs.append((tmp_path / attempt / "metrics.json").read_bytes())
        assert blobs[0] == blobs[1]
