"""Pretrained word-vector loading and fixed-length index encoding.

The table reserves row 0 for padding (all zeros) and row 1 for
out-of-vocabulary tokens (zeros too, so OOV handling needs no seed). Lookups
are over lowercased tokens; sequences are right-padded or right-truncated to
a fixed length for batching.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

PAD_INDEX = 0
OOV_INDEX = 1
RESERVED_ROWS = 2


class EmbeddingError(ValueError):
    """Malformed embedding file."""


@dataclass
class EmbeddingTable:
    dim: int
    vocab: dict[str, int]  # token -> matrix row, rows >= RESERVED_ROWS
    matrix: np.ndarray  # (len(vocab) + 2, dim) float32
    fingerprint: str  # stable content hash, recorded in checkpoints/manifests

    def __post_init__(self) -> None:
        if self.matrix.shape != (len(self.vocab) + RESERVED_ROWS, self.dim):
            raise EmbeddingError(
                f"matrix shape {self.matrix.shape} does not match vocab size {len(self.vocab)}"
            )
        if np.any(self.matrix[PAD_INDEX] != 0.0):
            raise EmbeddingError("padding row must be all zeros")

    def __len__(self) -> int:
        return len(self.vocab)

    def index_of(self, token: str) -> int:
        return self.vocab.get(token.lower(), OOV_INDEX)


@dataclass(frozen=True)
class EncodedSequence:
    indices: tuple[int, ...]
    true_length: int

    def __post_init__(self) -> None:
        if self.true_length > len(self.indices):
            raise EmbeddingError("true_length exceeds the padded length")


def table_fingerprint(tokens: Sequence[str], matrix: np.ndarray) -> str:
    hasher = hashlib.sha256()
    hasher.update(str(matrix.shape).encode("utf-8"))
    hasher.update("\n".join(tokens).encode("utf-8"))
    hasher.update(np.ascontiguousarray(matrix, dtype=np.float32).tobytes())
    return hasher.hexdigest()[:16]


def build_table(tokens: Sequence[str], vectors: np.ndarray) -> EmbeddingTable:
    """Assemble a table from parallel token/vector arrays (first occurrence wins)."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim != 2 or len(tokens) != vectors.shape[0]:
        raise EmbeddingError("tokens and vectors must align one row per token")
    dim = vectors.shape[1]
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    for token, vec in zip(tokens, vectors):
        if token in vocab:
            continue
        vocab[token] = len(rows) + RESERVED_ROWS
        rows.append(vec)
    matrix = np.zeros((len(rows) + RESERVED_ROWS, dim), dtype=np.float32)
    if rows:
        matrix[RESERVED_ROWS:] = np.stack(rows)
    return EmbeddingTable(
        dim=dim, vocab=vocab, matrix=matrix, fingerprint=table_fingerprint(list(vocab), matrix)
    )


def load_embeddings(path: str | Path, dim: int = 300) -> EmbeddingTable:
    """Load a text embedding file: one ``token v1 ... v_dim`` line per token.

    Lines with the wrong arity are reported with their line number; duplicate
    tokens keep their first occurrence.
    """
    path = Path(path)
    if not path.exists():
        raise EmbeddingError(f"embedding file not found: {path}")
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float32)
            except ValueError as exc:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric value: {exc}") from exc
            tokens.append(parts[0])
            rows.append(vec)
    vectors = np.stack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return build_table(tokens, vectors)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for token, row in table.vocab.items():
            values = " ".join(repr(float(v)) for v in table.matrix[row])
            fh.write(f"{token} {values}\n")


def encode(tokens: Sequence[str], table: EmbeddingTable, max_len: int = 60) -> EncodedSequence:
    """Map tokens to table indices, right-truncated and right-padded to max_len."""
    if max_len < 1:
        raise EmbeddingError(f"max_len must be >= 1, got {max_len}")
    kept = list(tokens)[:max_len]
    indices = [table.index_of(t) for t in kept]
    indices.extend([PAD_INDEX] * (max_len - len(indices)))
    return EncodedSequence(indices=tuple(indices), true_length=len(kept))
