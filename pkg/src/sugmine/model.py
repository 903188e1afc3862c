"""The hybrid suggestion classifier and its supervised training loop.

Three branches over a review sentence: a convolutional encoder (1-D filters,
global max pooling, dense), a recurrent encoder (LSTM with feed-forward
attention pooling, dense layers), and a perceptron over binary linguistic
features. Active branch outputs are concatenated and fed to a two-neuron
softmax head. Ablation and baseline variants reuse the same branch
definitions with a subset active.

Training minimizes class-weighted cross entropy (positive class weighted
10x by default) with Adam and early stopping on validation loss. All
randomness fans out from ``ModelConfig.seed``; on CPU, runs with the same
seed and data are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .annotate import Annotator, ParsedSentence, annotate
from .corpus import LabeledSentence, UnlabeledSentence
from .embed import PAD_INDEX, RESERVED_ROWS, EmbeddingTable, EncodedSequence, encode
from .lexfeat import FeatureSchema, LinguisticFeatureVector, extract, schema_from_payload
from .seeds import derive_seed

VARIANTS = (
    "hybrid",
    "cnn_only",
    "lstm_only",
    "lstm_attention",
    "hybrid_minus_cnn",
    "hybrid_minus_rnn",
    "hybrid_minus_linguistic",
)

CHECKPOINT_FORMAT = "sugmine-checkpoint"
CHECKPOINT_VERSION = 1


class ModelError(ValueError):
    """Invalid configuration or mismatched model inputs."""


class TrainingError(RuntimeError):
    """Unusable training inputs (e.g. a single-class split)."""


class TrainingDiverged(TrainingError):
    """Loss became non-finite during optimization."""


@dataclass
class ModelConfig:
    variant: str = "hybrid"
    cnn_filters: int = 250
    cnn_width: int = 5
    cnn_dense: int = 250
    cnn_dropout: float = 0.75
    lstm_hidden: int = 64
    rnn_dense: tuple[int, int] = (150, 25)
    rnn_dropout: float = 0.2
    ling_hidden: tuple[int, int] = (150, 25)
    ling_dropout: float = 0.2
    positive_weight: float = 10.0
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 50
    patience: int = 3
    seed: int = 0
    max_len: int = 60
    bidirectional: bool = False
    finetune_embeddings: bool = False

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        for name in ("cnn_filters", "cnn_width", "cnn_dense", "lstm_hidden",
                     "batch_size", "max_epochs", "patience", "max_len"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be positive")
        self.rnn_dense = tuple(self.rnn_dense)
        self.ling_hidden = tuple(self.ling_hidden)
        if any(w < 1 for w in self.rnn_dense + self.ling_hidden):
            raise ModelError("dense layer widths must be positive")
        for name in ("cnn_dropout", "rnn_dropout", "ling_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ModelError(f"{name} must be in [0, 1)")
        if self.positive_weight <= 0:
            raise ModelError("positive_weight must be > 0")
        if self.learning_rate <= 0:
            raise ModelError("learning_rate must be > 0")

    @property
    def uses_cnn(self) -> bool:
        return self.variant in ("hybrid", "cnn_only", "hybrid_minus_rnn", "hybrid_minus_linguistic")

    @property
    def uses_rnn(self) -> bool:
        return self.variant in ("hybrid", "lstm_only", "lstm_attention",
                                "hybrid_minus_cnn", "hybrid_minus_linguistic")

    @property
    def uses_attention(self) -> bool:
        return self.uses_rnn and self.variant != "lstm_only"

    @property
    def uses_linguistic(self) -> bool:
        return self.variant in ("hybrid", "hybrid_minus_cnn", "hybrid_minus_rnn")

    @property
    def fusion_width(self) -> int:
        width = 0
        if self.uses_cnn:
            width += self.cnn_dense
        if self.uses_rnn:
            width += self.rnn_dense[-1]
        if self.uses_linguistic:
            width += self.ling_hidden[-1]
        return width


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, float]  # (non-suggestive, suggestive)
    label: int

    def __post_init__(self) -> None:
        p0, p1 = self.probs
        if p0 < 0 or p1 < 0 or abs(p0 + p1 - 1.0) > 1e-5:
            raise ModelError(f"probabilities {self.probs} are not a distribution")
        if self.label not in (0, 1):
            raise ModelError(f"label {self.label} not in {{0, 1}}")

    @classmethod
    def from_probs(cls, p0: float, p1: float) -> "Prediction":
        return cls(probs=(p0, p1), label=int(p1 > p0))

    @property
    def prob_suggestive(self) -> float:
        return self.probs[1]


def _attention_core(
    states: torch.Tensor,  # (B, T, H)
    lengths: torch.Tensor,  # (B,)
    proj_weight: torch.Tensor,  # (A, H)
    proj_bias: torch.Tensor,  # (A,)
    query: torch.Tensor,  # (A,)
) -> tuple[torch.Tensor, torch.Tensor]:
    """Feed-forward attention: scores v.tanh(W h_t + b), softmax over valid steps."""
    scores = torch.tanh(states @ proj_weight.T + proj_bias) @ query  # (B, T)
    positions = torch.arange(states.shape[1], device=states.device)
    mask = positions.unsqueeze(0) >= lengths.unsqueeze(1)
    scores = scores.masked_fill(mask, float("-inf"))
    weights = torch.softmax(scores, dim=-1)  # exp(-inf) gives exact zeros at padding
    pooled = (weights.unsqueeze(-1) * states).sum(dim=1)
    return pooled, weights


def attention_pool(
    hidden_states: np.ndarray,
    true_length: int,
    proj_weight: np.ndarray,
    proj_bias: np.ndarray,
    query: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Pool a (T, H) hidden-state matrix into one H-vector by attention.

    Returns (pooled, weights). Weights over the first ``true_length``
    positions sum to 1; padded positions get exactly zero weight.
    """
    if true_length < 1:
        raise ModelError("attention requires true_length >= 1")
    hidden_states = np.asarray(hidden_states)
    if true_length > hidden_states.shape[0]:
        raise ModelError("true_length exceeds the number of hidden states")
    dtype = torch.float64 if hidden_states.dtype == np.float64 else torch.float32
    states = torch.as_tensor(hidden_states, dtype=dtype).unsqueeze(0)
    pooled, weights = _attention_core(
        states,
        torch.tensor([true_length]),
        torch.as_tensor(np.asarray(proj_weight), dtype=dtype),
        torch.as_tensor(np.asarray(proj_bias), dtype=dtype),
        torch.as_tensor(np.asarray(query), dtype=dtype),
    )
    return pooled[0].numpy(), weights[0].numpy()


def _conv_maxpool_core(
    embedded: torch.Tensor,  # (B, T, D)
    weight: torch.Tensor,  # (F, D, W)
    bias: torch.Tensor,  # (F,)
) -> torch.Tensor:
    """Width-W convolutions over time with same-padding, then per-filter global max."""
    maps = nn.functional.conv1d(embedded.transpose(1, 2), weight, bias, padding="same")
    return maps.amax(dim=-1)


def conv_global_maxpool(
    embedded: np.ndarray, weight: np.ndarray, bias: np.ndarray
) -> np.ndarray:
    """Pool one (T, D) embedded sentence into an F-vector of per-filter maxima."""
    embedded = np.asarray(embedded)
    dtype = torch.float64 if embedded.dtype == np.float64 else torch.float32
    pooled = _conv_maxpool_core(
        torch.as_tensor(embedded, dtype=dtype).unsqueeze(0),
        torch.as_tensor(np.asarray(weight), dtype=dtype),
        torch.as_tensor(np.asarray(bias), dtype=dtype),
    )
    return pooled[0].numpy()


class FeedForwardAttention(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.proj = nn.Linear(width, width)
        self.query = nn.Parameter(torch.empty(width))
        nn.init.uniform_(self.query, -1.0 / math.sqrt(width), 1.0 / math.sqrt(width))

    def forward(self, states: torch.Tensor, lengths: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return _attention_core(states, lengths, self.proj.weight, self.proj.bias, self.query)


class CnnBranch(nn.Module):
    def __init__(self, config: ModelConfig, emb_dim: int):
        super().__init__()
        self.conv = nn.Conv1d(emb_dim, config.cnn_filters, config.cnn_width, padding="same")
        self.dense = nn.Linear(config.cnn_filters, config.cnn_dense)
        self.dropout = nn.Dropout(config.cnn_dropout)

    def forward(self, embedded: torch.Tensor) -> torch.Tensor:
        pooled = _conv_maxpool_core(embedded, self.conv.weight, self.conv.bias)
        return self.dropout(torch.relu(self.dense(pooled)))


class RnnBranch(nn.Module):
    def __init__(self, config: ModelConfig, emb_dim: int):
        super().__init__()
        self.lstm = nn.LSTM(
            emb_dim, config.lstm_hidden, batch_first=True, bidirectional=config.bidirectional
        )
        out_width = config.lstm_hidden * (2 if config.bidirectional else 1)
        self.attention = FeedForwardAttention(out_width) if config.uses_attention else None
        d1, d2 = config.rnn_dense
        self.dense1 = nn.Linear(out_width, d1)
        self.dense2 = nn.Linear(d1, d2)
        self.dropout = nn.Dropout(config.rnn_dropout)

    def forward(self, embedded: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        states, _ = self.lstm(embedded)
        if self.attention is not None:
            context, _ = self.attention(states, lengths)
        else:
            # No attention: the hidden state at the last valid position.
            rows = torch.arange(states.shape[0], device=states.device)
            context = states[rows, lengths - 1]
        x = self.dropout(torch.relu(self.dense1(context)))
        return self.dropout(torch.relu(self.dense2(x)))


class LinguisticBranch(nn.Module):
    def __init__(self, config: ModelConfig, feature_dim: int):
        super().__init__()
        d1, d2 = config.ling_hidden
        self.dense1 = nn.Linear(feature_dim, d1)
        self.dense2 = nn.Linear(d1, d2)
        self.dropout = nn.Dropout(config.ling_dropout)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        x = self.dropout(torch.relu(self.dense1(features)))
        return self.dropout(torch.relu(self.dense2(x)))


class HybridClassifier(nn.Module):
    """Fusion of the active branches into a two-class softmax head.

    Construction is deterministic: parameters are initialized under a seed
    derived from ``config.seed``, so rebuilding with the same config and
    embedding matrix reproduces identical weights.
    """

    def __init__(self, config: ModelConfig, embedding_matrix: np.ndarray, feature_dim: int = 0):
        super().__init__()
        if config.uses_linguistic and feature_dim < 1:
            raise ModelError(f"variant {config.variant!r} needs a linguistic feature dimension")
        torch.manual_seed(derive_seed(config.seed, "init"))
        self.config = config
        self.feature_dim = feature_dim
        matrix = torch.as_tensor(np.asarray(embedding_matrix, dtype=np.float32))
        self.embedding = nn.Embedding.from_pretrained(
            matrix, freeze=not config.finetune_embeddings, padding_idx=PAD_INDEX
        )
        self.cnn = CnnBranch(config, matrix.shape[1]) if config.uses_cnn else None
        self.rnn = RnnBranch(config, matrix.shape[1]) if config.uses_rnn else None
        self.linguistic = LinguisticBranch(config, feature_dim) if config.uses_linguistic else None
        self.fusion = nn.Linear(config.fusion_width, 2)

    def forward(
        self,
        indices: torch.Tensor,
        lengths: torch.Tensor,
        features: torch.Tensor | None = None,
    ) -> torch.Tensor:
        embedded = self.embedding(indices)
        parts: list[torch.Tensor] = []
        if self.cnn is not None:
            parts.append(self.cnn(embedded))
        if self.rnn is not None:
            parts.append(self.rnn(embedded, lengths))
        if self.linguistic is not None:
            if features is None:
                raise ModelError("this variant requires linguistic features")
            if features.shape[-1] != self.feature_dim:
                raise ModelError(
                    f"feature width {features.shape[-1]} does not match model width {self.feature_dim}"
                )
            parts.append(self.linguistic(features))
        fused = torch.cat(parts, dim=-1)
        return self.fusion(fused)


@dataclass
class EncodedBatch:
    """Tensor view of a list of sentences, in input order."""

    indices: torch.Tensor  # long (B, max_len)
    lengths: torch.Tensor  # long (B,)
    features: torch.Tensor | None  # float32 (B, F)
    labels: torch.Tensor | None  # long (B,)
    ids: tuple[str, ...]

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def select(self, rows: np.ndarray | Sequence[int]) -> "EncodedBatch":
        rows = torch.as_tensor(np.asarray(rows, dtype=np.int64))
        return EncodedBatch(
            indices=self.indices[rows],
            lengths=self.lengths[rows],
            features=None if self.features is None else self.features[rows],
            labels=None if self.labels is None else self.labels[rows],
            ids=tuple(self.ids[int(r)] for r in rows),
        )


class InputPipeline:
    """Sentence -> model-input conversion shared by training, prediction, and CV.

    Bundles the embedding table, the annotation backend, and (when the model
    variant uses linguistic features) a fitted feature schema. Parses and
    feature vectors are cached per sentence text.
    """

    def __init__(
        self,
        table: EmbeddingTable,
        annotator: Annotator,
        schema: FeatureSchema | None = None,
        max_len: int = 60,
    ):
        self.table = table
        self.annotator = annotator
        self.schema = schema
        self.max_len = max_len
        self._cache: dict[str, tuple[EncodedSequence, np.ndarray | None]] = {}

    @property
    def feature_dim(self) -> int:
        return self.schema.total_dim if self.schema is not None else 0

    def parse(self, text: str) -> ParsedSentence:
        return annotate(text, self.annotator)

    def _encode_text(self, text: str) -> tuple[EncodedSequence, np.ndarray | None]:
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        parsed = self.parse(text)
        if not parsed.tokens:
            raise ModelError(f"annotator produced no tokens for {text!r}")
        encoded = encode(parsed.token_texts(), self.table, self.max_len)
        feats = extract(parsed, self.schema).values if self.schema is not None else None
        self._cache[text] = (encoded, feats)
        return encoded, feats

    def encode_batch(
        self, sentences: Sequence[LabeledSentence | UnlabeledSentence]
    ) -> EncodedBatch:
        encoded: list[EncodedSequence] = []
        feats: list[np.ndarray] = []
        for s in sentences:
            enc, f = self._encode_text(s.text)
            encoded.append(enc)
            if f is not None:
                feats.append(f)
        indices = torch.tensor([e.indices for e in encoded], dtype=torch.long).reshape(
            len(encoded), self.max_len
        )
        lengths = torch.tensor([e.true_length for e in encoded], dtype=torch.long)
        features = (
            torch.tensor(np.stack(feats), dtype=torch.float32) if self.schema is not None else None
        )
        labels = None
        if sentences and all(isinstance(s, LabeledSentence) for s in sentences):
            labels = torch.tensor([s.label for s in sentences], dtype=torch.long)
        return EncodedBatch(
            indices=indices,
            lengths=lengths,
            features=features,
            labels=labels,
            ids=tuple(s.id for s in sentences),
        )


def weighted_loss(
    probs: np.ndarray | Sequence[Sequence[float]],
    labels: Sequence[int],
    positive_weight: float,
    epsilon: float = 1e-7,
) -> float:
    """Mean class-weighted negative log likelihood over a probability batch.

    True-class probabilities are clamped below at ``epsilon`` so a confident
    wrong prediction yields a large finite loss instead of infinity.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] == 0 or probs.shape[0] != labels_arr.shape[0]:
        raise ModelError("probs must be (batch, 2) aligned with labels, batch non-empty")
    p_true = np.clip(probs[np.arange(len(labels_arr)), labels_arr], epsilon, None)
    weights = np.where(labels_arr == 1, positive_weight, 1.0)
    return float(np.mean(weights * -np.log(p_true)))


def weighted_loss_from_logits(
    logits: torch.Tensor, labels: torch.Tensor, positive_weight: float
) -> torch.Tensor:
    """Numerically stable training-path equivalent of :func:`weighted_loss`."""
    log_probs = torch.log_softmax(logits, dim=-1)
    nll = -log_probs[torch.arange(logits.shape[0]), labels]
    weights = torch.where(labels == 1, positive_weight, 1.0)
    return (weights * nll).mean()


@dataclass
class EarlyStopping:
    """Stop when the tracked value fails to improve ``patience`` times in a row."""

    patience: int
    best: float = math.inf
    best_epoch: int = 0
    bad_epochs: int = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record one epoch's value; returns True when training should stop."""
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.bad_epochs >= self.patience


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    validation_loss: float


@dataclass
class TrainHistory:
    epochs: list[EpochRecord]
    best_epoch: int
    stopped_early: bool


def _check_two_classes(sentences: Sequence[LabeledSentence], name: str) -> None:
    labels = {s.label for s in sentences}
    if labels != {0, 1}:
        raise TrainingError(f"{name} split must contain both classes, found labels {sorted(labels)}")


def train_supervised(
    train: Sequence[LabeledSentence],
    validation: Sequence[LabeledSentence],
    config: ModelConfig,
    pipeline: InputPipeline,
) -> tuple[HybridClassifier, TrainHistory]:
    """Train a classifier with Adam and validation-loss early stopping.

    Returns the model restored to its best-validation-loss epoch, plus the
    per-epoch history. Raises TrainingDiverged if any loss goes non-finite.
    """
    _check_two_classes(train, "training")
    _check_two_classes(validation, "validation")
    if config.uses_linguistic and pipeline.schema is None:
        raise ModelError(f"variant {config.variant!r} requires a fitted feature schema")

    train_batch = pipeline.encode_batch(train)
    val_batch = pipeline.encode_batch(validation)
    model = HybridClassifier(config, pipeline.table.matrix, pipeline.feature_dim)
    torch.manual_seed(derive_seed(config.seed, "dropout"))
    shuffle_rng = np.random.default_rng(derive_seed(config.seed, "shuffle"))
    optimizer = torch.optim.Adam(
        (p for p in model.parameters() if p.requires_grad), lr=config.learning_rate
    )

    stopper = EarlyStopping(patience=config.patience)
    history: list[EpochRecord] = []
    best_state: dict[str, torch.Tensor] | None = None
    n = len(train_batch)
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        perm = shuffle_rng.permutation(n)
        epoch_losses: list[float] = []
        for start in range(0, n, config.batch_size):
            batch = train_batch.select(perm[start : start + config.batch_size])
            optimizer.zero_grad()
            logits = model(batch.indices, batch.lengths, batch.features)
            loss = weighted_loss_from_logits(logits, batch.labels, config.positive_weight)
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))

        model.eval()
        with torch.no_grad():
            val_logits = model(val_batch.indices, val_batch.lengths, val_batch.features)
            val_loss = float(
                weighted_loss_from_logits(val_logits, val_batch.labels, config.positive_weight)
            )
        if not math.isfinite(val_loss):
            raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")
        history.append(
            EpochRecord(epoch=epoch, train_loss=float(np.mean(epoch_losses)), validation_loss=val_loss)
        )
        improved = val_loss < stopper.best
        should_stop = stopper.update(epoch, val_loss)
        if improved:
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
        if should_stop:
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    stopped_early = len(history) < config.max_epochs
    return model, TrainHistory(epochs=history, best_epoch=stopper.best_epoch, stopped_early=stopped_early)


def predict_proba(model: HybridClassifier, batch: EncodedBatch) -> list[Prediction]:
    """Inference-mode predictions (dropout disabled); deterministic."""
    if len(batch) == 0:
        return []
    model.eval()
    with torch.no_grad():
        logits = model(batch.indices, batch.lengths, batch.features)
        probs = torch.softmax(logits, dim=-1).numpy().astype(np.float64)
    # Renormalize away float32 rounding so each pair sums to 1 exactly.
    probs /= probs.sum(axis=1, keepdims=True)
    return [Prediction.from_probs(float(p0), float(p1)) for p0, p1 in probs]


def classify_one(
    model: HybridClassifier,
    encoded: EncodedSequence,
    features: LinguisticFeatureVector | None = None,
    mode: str = "infer",
) -> Prediction:
    """Single-sentence forward pass; ``mode='train'`` keeps dropout active."""
    if mode not in ("train", "infer"):
        raise ModelError(f"mode must be 'train' or 'infer', got {mode!r}")
    if model.config.uses_linguistic:
        if features is None:
            raise ModelError("this variant requires linguistic features")
        if len(features.values) != model.feature_dim:
            raise ModelError(
                f"feature width {len(features.values)} does not match model width {model.feature_dim}"
            )
    indices = torch.tensor([encoded.indices], dtype=torch.long)
    lengths = torch.tensor([encoded.true_length], dtype=torch.long)
    feats = (
        torch.tensor(features.values[None, :].astype(np.float32))
        if features is not None and model.config.uses_linguistic
        else None
    )
    model.train(mode == "train")
    context = torch.enable_grad() if mode == "train" else torch.no_grad()
    with context:
        logits = model(indices, lengths, feats)
        probs = torch.softmax(logits, dim=-1)[0].detach().numpy().astype(np.float64)
    model.eval()
    probs = probs / probs.sum()
    return Prediction.from_probs(float(probs[0]), float(probs[1]))


def save_checkpoint(
    path: str | Path,
    model: HybridClassifier,
    table: EmbeddingTable,
    schema: FeatureSchema | None = None,
) -> None:
    """Write a self-contained checkpoint (config, schema, vocab, parameters)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "feature_dim": model.feature_dim,
        "schema": schema._payload() if schema is not None else None,
        "schema_id": schema.schema_id if schema is not None else "",
        "embedding_fingerprint": table.fingerprint,
        "vocab": list(table.vocab.keys()),
        "state_dict": model.state_dict(),
    }
    torch.save(payload, str(path))


def load_checkpoint(path: str | Path) -> tuple[HybridClassifier, EmbeddingTable, FeatureSchema | None]:
    """Rebuild a model, its embedding table, and its schema from a checkpoint."""
    path = Path(path)
    if not path.exists():
        raise ModelError(f"checkpoint not found: {path}")
    payload = torch.load(str(path), weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ModelError(f"{path}: not a sugmine checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ModelError(f"{path}: unsupported checkpoint version {payload.get('version')!r}")
    config = ModelConfig(**payload["config"])
    matrix = payload["state_dict"]["embedding.weight"].numpy()
    vocab = {tok: i + RESERVED_ROWS for i, tok in enumerate(payload["vocab"])}
    table = EmbeddingTable(
        dim=matrix.shape[1],
        vocab=vocab,
        matrix=matrix,
        fingerprint=payload["embedding_fingerprint"],
    )
    schema = schema_from_payload(payload["schema"]) if payload["schema"] is not None else None
    model = HybridClassifier(config, matrix, payload["feature_dim"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, table, schema
