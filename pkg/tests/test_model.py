import math
from dataclasses import replace

import numpy as np
import pytest
import torch

from sugmine import synth
from sugmine.corpus import split_validation
from sugmine.lexfeat import fit_schema
from sugmine.metrics import prf_metrics
from sugmine.model import (
    EarlyStopping,
    EncodedBatch,
    HybridClassifier,
    InputPipeline,
    ModelConfig,
    ModelError,
    Prediction,
    TrainingError,
    attention_pool,
    classify_one,
    conv_global_maxpool,
    load_checkpoint,
    predict_proba,
    save_checkpoint,
    train_supervised,
    weighted_loss,
    weighted_loss_from_logits,
)
from sugmine.selftrain import TrainedClassifier

TINY = dict(
    cnn_filters=2, cnn_width=3, cnn_dense=2, cnn_dropout=0.0,
    lstm_hidden=3, rnn_dense=(3, 2), rnn_dropout=0.0,
    ling_hidden=(3, 2), ling_dropout=0.0, max_len=4,
)


def tiny_model(variant="hybrid", seed=0, feature_dim=4, **overrides):
    config = ModelConfig(variant=variant, seed=seed, **{**TINY, **overrides})
    matrix = np.vstack(
        [np.zeros((2, 5)), np.random.default_rng(seed).normal(0, 0.5, (6, 5))]
    ).astype(np.float32)
    dim = feature_dim if config.uses_linguistic else 0
    return HybridClassifier(config, matrix, dim), config


def tiny_batch(config, feature_dim=4, n=3, seed=1):
    rng = np.random.default_rng(seed)
    indices = torch.tensor(rng.integers(0, 8, size=(n, config.max_len)), dtype=torch.long)
    lengths = torch.tensor(rng.integers(1, config.max_len + 1, size=n), dtype=torch.long)
    features = (
        torch.tensor(rng.integers(0, 2, size=(n, feature_dim)), dtype=torch.float32)
        if config.uses_linguistic
        else None
    )
    labels = torch.tensor(rng.integers(0, 2, size=n), dtype=torch.long)
    return EncodedBatch(indices=indices, lengths=lengths, features=features, labels=labels,
                        ids=tuple(f"b{i}" for i in range(n)))


class TestModelConfig:
    def test_unknown_variant(self):
        with pytest.raises(ModelError, match="unknown variant"):
            ModelConfig(variant="transformer")

    def test_dropout_range(self):
        with pytest.raises(ModelError, match="cnn_dropout"):
            ModelConfig(cnn_dropout=1.0)

    def test_positive_weight_positive(self):
        with pytest.raises(ModelError, match="positive_weight"):
            ModelConfig(positive_weight=0.0)

    def test_default_fusion_widths(self):
        # Hybrid feeds 250 + 25 + 25 into the softmax head.
        assert ModelConfig(variant="hybrid").fusion_width == 300
        assert ModelConfig(variant="hybrid_minus_cnn").fusion_width == 50
        assert ModelConfig(variant="hybrid_minus_rnn").fusion_width == 275
        assert ModelConfig(variant="hybrid_minus_linguistic").fusion_width == 275
        assert ModelConfig(variant="cnn_only").fusion_width == 250
        assert ModelConfig(variant="lstm_only").fusion_width == 25
        assert ModelConfig(variant="lstm_attention").fusion_width == 25

    def test_paper_defaults(self):
        config = ModelConfig()
        assert config.cnn_filters == 250
        assert config.cnn_width == 5
        assert config.lstm_hidden == 64
        assert config.rnn_dense == (150, 25)
        assert config.ling_hidden == (150, 25)
        assert config.cnn_dropout == 0.75
        assert config.rnn_dropout == 0.2
        assert config.positive_weight == 10.0


def attention_oracle(states, true_length, proj_w, proj_b, query):
    """Step-by-step recomputation: scores, softmax over valid steps, weighted sum."""
    scores = np.array([query @ np.tanh(proj_w @ states[t] + proj_b) for t in range(true_length)])
    shifted = np.exp(scores - scores.max())
    valid = shifted / shifted.sum()
    weights = np.zeros(states.shape[0])
    weights[:true_length] = valid
    pooled = sum(weights[t] * states[t] for t in range(true_length))
    return pooled, weights


class TestAttentionPool:
    def params(self, h, seed=0):
        rng = np.random.default_rng(seed)
        return rng.normal(size=(h, h)), rng.normal(size=h), rng.normal(size=h)

    def test_identical_states_get_uniform_weights(self):
        state = np.array([0.3, -1.2, 0.8])
        states = np.tile(state, (5, 1))
        pooled, weights = attention_pool(states, 4, *self.params(3))
        np.testing.assert_allclose(weights[:4], 0.25, atol=1e-12)
        assert weights[4] == 0.0
        np.testing.assert_allclose(pooled, state, atol=1e-12)

    def test_single_valid_position(self):
        states = np.random.default_rng(3).normal(size=(4, 3))
        pooled, weights = attention_pool(states, 1, *self.params(3))
        np.testing.assert_array_equal(weights, [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(pooled, states[0], atol=1e-12)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for trial in range(25):
            t, h = rng.integers(2, 8), rng.integers(2, 6)
            states = rng.normal(size=(t, h))
            length = int(rng.integers(1, t + 1))
            params = rng.normal(size=(h, h)), rng.normal(size=h), rng.normal(size=h)
            pooled, weights = attention_pool(states, length, *params)
            oracle_pooled, oracle_weights = attention_oracle(states, length, *params)
            np.testing.assert_allclose(pooled, oracle_pooled, atol=1e-9)
            np.testing.assert_allclose(weights, oracle_weights, atol=1e-9)

    def test_zero_length_rejected(self):
        with pytest.raises(ModelError, match="true_length"):
            attention_pool(np.zeros((3, 2)), 0, np.eye(2), np.zeros(2), np.ones(2))

    def test_weights_normalize_and_mask(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            t, h = int(rng.integers(1, 11)), int(rng.integers(1, 9))
            length = int(rng.integers(1, t + 1))
            _, weights = attention_pool(
                rng.normal(size=(t, h)), length,
                rng.normal(size=(h, h)), rng.normal(size=h), rng.normal(size=h),
            )
            assert abs(weights[:length].sum() - 1.0) < 1e-6
            assert np.all(weights[length:] == 0.0)


def conv_oracle(x, weight, bias):
    """Explicit loops: same-padded cross-correlation then global max per filter."""
    t, d = x.shape
    f, _, k = weight.shape
    left = (k - 1) // 2
    padded = np.vstack([np.zeros((left, d)), x, np.zeros((k - 1 - left, d))])
    out = np.empty(f)
    for fi in range(f):
        best = -np.inf
        for ti in range(t):
            acc = bias[fi]
            for ki in range(k):
                acc += weight[fi, :, ki] @ padded[ti + ki]
            best = max(best, acc)
        out[fi] = best
    return out


class TestConvGlobalMaxpool:
    def test_zero_input_pools_each_bias(self):
        weight = np.random.default_rng(0).normal(size=(4, 3, 5))
        bias = np.array([0.5, -1.0, 0.0, 2.5])
        pooled = conv_global_maxpool(np.zeros((8, 3)), weight, bias)
        np.testing.assert_allclose(pooled, bias, atol=1e-12)

    def test_translation_invariance_away_from_borders(self):
        rng = np.random.default_rng(5)
        weight, bias = rng.normal(size=(3, 2, 3)), rng.normal(size=3)
        pattern = rng.normal(size=(3, 2)) + 5.0  # dominates the zero background
        base = np.zeros((12, 2))
        base[2:5] = pattern
        shifted = np.zeros((12, 2))
        shifted[6:9] = pattern
        np.testing.assert_allclose(
            conv_global_maxpool(base, weight, bias),
            conv_global_maxpool(shifted, weight, bias),
            atol=1e-9,
        )

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            t, d, f, k = rng.integers(3, 10), rng.integers(1, 5), rng.integers(1, 6), 5
            x = rng.normal(size=(t, d))
            weight = rng.normal(size=(f, d, k))
            bias = rng.normal(size=f)
            np.testing.assert_allclose(
                conv_global_maxpool(x, weight, bias), conv_oracle(x, weight, bias), atol=1e-9
            )


class TestForward:
    def rigged(self, bias):
        model, config = tiny_model("cnn_only")
        with torch.no_grad():
            model.fusion.weight.zero_()
            model.fusion.bias.copy_(torch.tensor(bias))
        return model, config

    def test_equal_logits_give_even_split(self):
        model, config = self.rigged([0.0, 0.0])
        batch = tiny_batch(config, n=2)
        for p in predict_proba(model, batch):
            assert p.probs == pytest.approx((0.5, 0.5), abs=1e-6)

    def test_log_nine_margin_gives_ten_ninety(self):
        model, config = self.rigged([1.0, 1.0 + math.log(9.0)])
        batch = tiny_batch(config, n=2)
        for p in predict_proba(model, batch):
            assert p.probs == pytest.approx((0.1, 0.9), abs=1e-6)
            assert p.label == 1

    def test_probabilities_sum_to_one(self):
        model, config = tiny_model("hybrid", seed=4)
        for p in predict_proba(model, tiny_batch(config, n=16, seed=5)):
            assert abs(sum(p.probs) - 1.0) <= 1e-6

    def test_argmax_matches_logits(self):
        model, config = tiny_model("hybrid", seed=6)
        batch = tiny_batch(config, n=16, seed=7)
        model.eval()
        with torch.no_grad():
            logits = model(batch.indices, batch.lengths, batch.features)
        for p, row in zip(predict_proba(model, batch), logits):
            assert p.label == int(torch.argmax(row))

    def test_feature_width_mismatch(self):
        model, config = tiny_model("hybrid")
        batch = tiny_batch(config, feature_dim=9)
        with pytest.raises(ModelError, match="width"):
            model(batch.indices, batch.lengths, batch.features)

    def test_prediction_validates_distribution(self):
        with pytest.raises(ModelError, match="distribution"):
            Prediction(probs=(0.7, 0.7), label=1)


class TestWeightedLoss:
    def test_positive_closed_form(self):
        assert weighted_loss([[0.5, 0.5]], [1], 10.0) == pytest.approx(10 * math.log(2))

    def test_negative_closed_form(self):
        assert weighted_loss([[0.5, 0.5]], [0], 10.0) == pytest.approx(math.log(2))

    def test_mixed_batch_mean(self):
        loss = weighted_loss([[0.5, 0.5], [0.5, 0.5]], [1, 0], 10.0)
        assert loss == pytest.approx(5.5 * math.log(2))

    def test_true_class_probability_zero_is_clamped(self):
        loss = weighted_loss([[1.0, 0.0]], [1], 10.0)
        assert math.isfinite(loss)
        assert loss == pytest.approx(10 * -math.log(1e-7))

    def test_empty_batch_rejected(self):
        with pytest.raises(ModelError, match="non-empty"):
            weighted_loss(np.zeros((0, 2)), [], 10.0)

    def test_matches_logits_path(self):
        rng = np.random.default_rng(2)
        logits = torch.tensor(rng.normal(size=(16, 2)))
        labels = torch.tensor(rng.integers(0, 2, size=16))
        from_logits = float(weighted_loss_from_logits(logits, labels, 10.0))
        probs = torch.softmax(logits, dim=-1).numpy()
        assert from_logits == pytest.approx(weighted_loss(probs, labels.numpy(), 10.0), rel=1e-9)


class TestEarlyStopping:
    def test_injected_loss_trace(self):
        stopper = EarlyStopping(patience=2)
        outcomes = [stopper.update(e, v) for e, v in enumerate([1.0, 0.9, 0.95, 0.97], start=1)]
        assert outcomes == [False, False, False, True]
        assert stopper.best_epoch == 2

    def test_patience_resets_on_improvement(self):
        stopper = EarlyStopping(patience=2)
        values = [1.0, 0.99, 1.1, 0.5, 0.6, 0.7]
        outcomes = [stopper.update(e, v) for e, v in enumerate(values, start=1)]
        assert outcomes == [False, False, False, False, False, True]
        assert stopper.best_epoch == 4


@pytest.fixture(scope="module")
def small_world():
    corpus = synth.make_corpus(n_labeled=300, n_unlabeled=0, seed=21, embedding_dim=16)
    train_ids, val_ids = split_validation(corpus.labeled, corpus.labeled.ids, 0.15, seed=1)
    train = corpus.labeled.subset(train_ids)
    val = corpus.labeled.subset(val_ids)
    schema = fit_schema([corpus.annotator.parse(s.text) for s in train + val])
    config = ModelConfig(
        variant="hybrid", max_len=12, max_epochs=20, patience=5, seed=13,
        cnn_filters=32, cnn_dense=32, lstm_hidden=16, rnn_dense=(32, 16),
        ling_hidden=(32, 16),
    )
    pipeline = InputPipeline(corpus.table, corpus.annotator, schema, config.max_len)
    return corpus, train, val, config, pipeline


class TestTrainSupervised:
    def test_learns_separable_synthetic_rule(self, small_world):
        corpus, train, val, config, pipeline = small_world
        model, history = train_supervised(train, val, config, pipeline)
        assert len(history.epochs) <= 20
        trained = TrainedClassifier(model=model, pipeline=pipeline, history=history)
        metrics = prf_metrics(trained.predict_labels(val), [s.label for s in val])
        assert metrics.macro_f1 >= 0.95

    def test_deterministic_given_seed(self, small_world):
        corpus, train, val, config, pipeline = small_world
        short = replace(config, max_epochs=3, patience=3)
        _, first = train_supervised(train, val, short, pipeline)
        _, second = train_supervised(train, val, short, pipeline)
        assert [e.validation_loss for e in first.epochs] == [
            e.validation_loss for e in second.epochs
        ]

    def test_best_epoch_has_lowest_validation_loss(self, small_world):
        corpus, train, val, config, pipeline = small_world
        _, history = train_supervised(train, val, replace(config, max_epochs=6), pipeline)
        losses = {e.epoch: e.validation_loss for e in history.epochs}
        assert losses[history.best_epoch] == min(losses.values())

    def test_single_class_split_rejected(self, small_world):
        corpus, train, val, config, pipeline = small_world
        positives = [s for s in train if s.label == 1]
        with pytest.raises(TrainingError, match="both classes"):
            train_supervised(positives, val, config, pipeline)
        with pytest.raises(TrainingError, match="both classes"):
            train_supervised(train, [s for s in val if s.label == 0], config, pipeline)

    def test_divergence_aborts_with_diagnostic(self, small_world):
        from sugmine.model import TrainingDiverged

        corpus, train, val, config, pipeline = small_world
        absurd = replace(config, variant="cnn_only", learning_rate=1e18, max_epochs=3)
        bare = InputPipeline(corpus.table, corpus.annotator, None, config.max_len)
        with pytest.raises(TrainingDiverged, match="non-finite"):
            train_supervised(train, val, absurd, bare)


class TestGradientCheck:
    def test_attention_and_fusion_gradients_match_finite_differences(self):
        model, config = tiny_model("hybrid", seed=3)
        model.double()
        batch = tiny_batch(config, n=3, seed=4)
        features = batch.features.double()

        def compute_loss():
            logits = model(batch.indices, batch.lengths, features)
            return weighted_loss_from_logits(logits, batch.labels, config.positive_weight)

        model.eval()
        model.zero_grad()
        compute_loss().backward()
        tracked = {
            "attention.proj.weight": model.rnn.attention.proj.weight,
            "attention.proj.bias": model.rnn.attention.proj.bias,
            "attention.query": model.rnn.attention.query,
            "fusion.weight": model.fusion.weight,
            "fusion.bias": model.fusion.bias,
        }
        h = 1e-6
        for name, param in tracked.items():
            analytic = param.grad.detach().clone()
            flat = param.data.view(-1)
            for j in range(flat.numel()):
                original = flat[j].item()
                flat[j] = original + h
                with torch.no_grad():
                    up = compute_loss().item()
                flat[j] = original - h
                with torch.no_grad():
                    down = compute_loss().item()
                flat[j] = original
                numeric = (up - down) / (2 * h)
                reference = analytic.view(-1)[j].item()
                diff = abs(numeric - reference)
                rel = diff / max(abs(numeric), abs(reference), 1e-8)
                # Central differences carry ~1e-10 roundoff in float64; for
                # near-zero gradients that noise floor, not the analytic
                # gradient, dominates the relative error.
                assert rel <= 1e-4 or diff <= 1e-9, (
                    f"{name}[{j}]: analytic {reference} vs numeric {numeric}"
                )


class TestPredict:
    def test_empty_batch(self):
        model, config = tiny_model("cnn_only")
        empty = EncodedBatch(
            indices=torch.zeros((0, config.max_len), dtype=torch.long),
            lengths=torch.zeros(0, dtype=torch.long),
            features=None,
            labels=None,
            ids=(),
        )
        assert predict_proba(model, empty) == []

    def test_repeatable(self):
        model, config = tiny_model("hybrid", seed=8)
        batch = tiny_batch(config, n=6, seed=9)
        assert predict_proba(model, batch) == predict_proba(model, batch)

    def test_batch_invariance(self):
        model, config = tiny_model("hybrid", seed=10)
        batch = tiny_batch(config, n=8, seed=11)
        whole = predict_proba(model, batch)
        for i in range(len(batch)):
            alone = predict_proba(model, batch.select([i]))[0]
            assert alone.probs == pytest.approx(whole[i].probs, abs=1e-6)

    def test_dropout_only_affects_train_mode(self):
        model, config = tiny_model("cnn_only", cnn_dropout=0.75, seed=12)
        rng = np.random.default_rng(13)
        from sugmine.embed import EncodedSequence

        encoded = EncodedSequence(indices=tuple(rng.integers(2, 8, size=4)), true_length=4)
        torch.manual_seed(0)
        train_outputs = {classify_one(model, encoded, mode="train").probs for _ in range(8)}
        infer_outputs = {classify_one(model, encoded, mode="infer").probs for _ in range(8)}
        assert len(train_outputs) > 1
        assert len(infer_outputs) == 1


class TestVariants:
    @pytest.mark.parametrize(
        "variant",
        ["hybrid", "cnn_only", "lstm_only", "lstm_attention",
         "hybrid_minus_cnn", "hybrid_minus_rnn", "hybrid_minus_linguistic"],
    )
    def test_forward_shapes(self, variant):
        model, config = tiny_model(variant, seed=2)
        batch = tiny_batch(config, n=4, seed=3)
        model.eval()
        with torch.no_grad():
            logits = model(batch.indices, batch.lengths, batch.features)
        assert logits.shape == (4, 2)
        assert model.fusion.in_features == config.fusion_width

    def test_linguistic_variant_requires_features(self):
        model, config = tiny_model("hybrid")
        batch = tiny_batch(config)
        with pytest.raises(ModelError, match="linguistic"):
            model(batch.indices, batch.lengths, None)


class TestCheckpoint:
    def test_round_trip_exact(self, tmp_path, small_world):
        corpus, train, val, config, pipeline = small_world
        short = replace(config, max_epochs=2)
        model, _ = train_supervised(train, val, short, pipeline)
        path = tmp_path / "model.pt"
        save_checkpoint(path, model, pipeline.table, pipeline.schema)
        reloaded, table, schema = load_checkpoint(path)

        assert reloaded.config == model.config
        assert schema.schema_id == pipeline.schema.schema_id
        assert table.vocab == pipeline.table.vocab
        for key, value in model.state_dict().items():
            assert torch.equal(reloaded.state_dict()[key], value), key

        batch = pipeline.encode_batch(val[:8])
        assert predict_proba(reloaded, batch) == predict_proba(model, batch)

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "other.pt"
        torch.save({"format": "something"}, str(path))
        with pytest.raises(ModelError, match="not a sugmine checkpoint"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelError, match="not found"):
            load_checkpoint(tmp_path / "none.pt")
