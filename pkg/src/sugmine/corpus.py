"""Loading, validation, statistics, and splitting of review-sentence datasets.

Labeled files are UTF-8 TSV with one ``label<TAB>text`` line per sentence
(label 1 = suggestive, 0 = non-suggestive). Unlabeled files hold one sentence
per line. Texts are stored verbatim; any normalization happens downstream.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .seeds import derive_seed


class CorpusError(ValueError):
    """Malformed dataset file or invalid split request."""


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    text: str
    label: int
    pseudo: bool = False  # label came from self-training, not a human

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise CorpusError(f"sentence {self.id!r}: empty text")
        if self.label not in (0, 1):
            raise CorpusError(f"sentence {self.id!r}: label {self.label!r} not in {{0, 1}}")


@dataclass(frozen=True)
class UnlabeledSentence:
    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise CorpusError(f"sentence {self.id!r}: empty text")


@dataclass(frozen=True)
class DatasetStats:
    n_total: int
    n_positive: int
    n_negative: int
    imbalance_ratio: float  # negatives per positive


@dataclass(frozen=True)
class FoldSplit:
    """One cross-validation fold; the three id sets partition the dataset."""

    fold_index: int
    train_ids: tuple[str, ...]
    validation_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def _check_unique_ids(ids: Iterable[str], what: str) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise CorpusError(f"duplicate id {i!r} in {what}")
        seen.add(i)


@dataclass
class LabeledDataset:
    sentences: tuple[LabeledSentence, ...]
    _by_id: dict[str, LabeledSentence] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.sentences = tuple(self.sentences)
        _check_unique_ids((s.id for s in self.sentences), "labeled dataset")
        self._by_id = {s.id: s for s in self.sentences}

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sentences)

    def sentence(self, sid: str) -> LabeledSentence:
        return self._by_id[sid]

    def subset(self, ids: Sequence[str]) -> list[LabeledSentence]:
        return [self._by_id[i] for i in ids]

    def labels(self, ids: Sequence[str]) -> list[int]:
        return [self._by_id[i].label for i in ids]


@dataclass
class UnlabeledPool:
    sentences: tuple[UnlabeledSentence, ...]

    def __post_init__(self) -> None:
        self.sentences = tuple(self.sentences)
        _check_unique_ids((s.id for s in self.sentences), "unlabeled pool")

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sentences)


def load_labeled(path: str | Path, id_prefix: str = "s") -> LabeledDataset:
    """Load a labeled TSV file, assigning sequential ids in file order."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"labeled file not found: {path}")
    sentences: list[LabeledSentence] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            label_str, sep, text = line.partition("\t")
            if not sep:
                raise CorpusError(f"{path}:{lineno}: expected 'label<TAB>text'")
            if label_str not in ("0", "1"):
                raise CorpusError(f"{path}:{lineno}: label {label_str!r} not in {{0, 1}}")
            if not text.strip():
                raise CorpusError(f"{path}:{lineno}: empty sentence text")
            sentences.append(
                LabeledSentence(id=f"{id_prefix}{len(sentences):06d}", text=text, label=int(label_str))
            )
    if not sentences:
        raise CorpusError(f"{path}: empty dataset")
    return LabeledDataset(tuple(sentences))


def save_labeled(dataset: LabeledDataset, path: str | Path) -> None:
    """Write a dataset back to labeled-TSV; ids regenerate on reload in file order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for s in dataset.sentences:
            if "\n" in s.text:
                raise CorpusError(f"sentence {s.id!r}: newline in text cannot round-trip")
            fh.write(f"{s.label}\t{s.text}\n")


def load_unlabeled(path: str | Path, limit: int | None = None, id_prefix: str = "u") -> UnlabeledPool:
    """Load an unlabeled pool, keeping at most ``limit`` sentences in file order."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"unlabeled file not found: {path}")
    sentences: list[UnlabeledSentence] = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if limit is not None and len(sentences) >= limit:
                break
            text = line.rstrip("\n").rstrip("\r")
            if not text.strip():
                continue
            sentences.append(UnlabeledSentence(id=f"{id_prefix}{len(sentences):06d}", text=text))
    return UnlabeledPool(tuple(sentences))


def compute_stats(dataset: LabeledDataset) -> DatasetStats:
    if len(dataset) == 0:
        raise CorpusError("empty dataset")
    n_pos = sum(1 for s in dataset.sentences if s.label == 1)
    n_neg = len(dataset) - n_pos
    ratio = n_neg / n_pos if n_pos > 0 else math.inf
    return DatasetStats(n_total=len(dataset), n_positive=n_pos, n_negative=n_neg, imbalance_ratio=ratio)


def _ids_by_label(dataset: LabeledDataset, ids: Sequence[str]) -> dict[int, list[str]]:
    grouped: dict[int, list[str]] = {0: [], 1: []}
    for i in ids:
        grouped[dataset.sentence(i).label].append(i)
    return grouped


def split_validation(
    dataset: LabeledDataset,
    ids: Sequence[str],
    fraction: float,
    seed: int,
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Stratified split of ``ids`` into (train, validation).

    The validation size is round(fraction * n); it is apportioned across
    classes by largest remainder so each class is represented proportionally
    (within one instance). Errors if either part would end up empty.
    """
    ids = list(ids)
    n = len(ids)
    if not 0.0 < fraction < 1.0:
        raise CorpusError(f"validation fraction {fraction} not in (0, 1)")
    if n == 0:
        raise CorpusError("cannot split an empty id set")
    target = math.floor(fraction * n + 0.5)
    if target == 0:
        raise CorpusError(f"fraction {fraction} yields an empty validation part")
    if target == n:
        raise CorpusError(f"fraction {fraction} yields an empty training part")

    grouped = _ids_by_label(dataset, ids)
    labels = [lbl for lbl in (0, 1) if grouped[lbl]]
    shares = {lbl: fraction * len(grouped[lbl]) for lbl in labels}
    counts = {lbl: min(math.floor(shares[lbl]), len(grouped[lbl])) for lbl in labels}
    # Distribute leftover validation slots by largest fractional remainder;
    # ties go to the larger class, then to the lower label.
    remaining = target - sum(counts.values())
    order = sorted(labels, key=lambda l: (-(shares[l] - math.floor(shares[l])), -len(grouped[l]), l))
    idx = 0
    while remaining > 0:
        lbl = order[idx % len(order)]
        if counts[lbl] < len(grouped[lbl]):
            counts[lbl] += 1
            remaining -= 1
        idx += 1

    rng = random.Random(seed)
    train_ids: list[str] = []
    val_ids: list[str] = []
    for lbl in labels:
        pool = list(grouped[lbl])
        rng.shuffle(pool)
        val_ids.extend(pool[: counts[lbl]])
        train_ids.extend(pool[counts[lbl] :])
    if not train_ids:
        raise CorpusError(f"fraction {fraction} yields an empty training part")
    if not val_ids:
        raise CorpusError(f"fraction {fraction} yields an empty validation part")
    # Restore dataset order so downstream batching is reproducible.
    position = {sid: k for k, sid in enumerate(ids)}
    train_ids.sort(key=position.__getitem__)
    val_ids.sort(key=position.__getitem__)
    return tuple(train_ids), tuple(val_ids)


def make_folds(
    dataset: LabeledDataset,
    k: int,
    seed: int,
    validation_fraction: float = 0.1,
) -> list[FoldSplit]:
    """Stratified k-fold splits with a validation part carved from each training part.

    Per class, test-fold sizes differ by at most one; leftover instances are
    placed so overall fold sizes stay balanced too. Deterministic for a fixed
    seed.
    """
    if k < 2:
        raise CorpusError(f"k must be >= 2, got {k}")
    stats = compute_stats(dataset)
    for lbl, count in ((1, stats.n_positive), (0, stats.n_negative)):
        if count < k:
            raise CorpusError(f"class {lbl} has {count} instances, fewer than k={k}")

    grouped = _ids_by_label(dataset, dataset.ids)
    rng = random.Random(derive_seed(seed, "folds"))
    test_ids: list[list[str]] = [[] for _ in range(k)]
    totals = [0] * k
    for lbl in (0, 1):
        ids_c = list(grouped[lbl])
        rng.shuffle(ids_c)
        base, rem = divmod(len(ids_c), k)
        counts = [base] * k
        for f in sorted(range(k), key=lambda f: (totals[f], f))[:rem]:
            counts[f] += 1
        pos = 0
        for f in range(k):
            test_ids[f].extend(ids_c[pos : pos + counts[f]])
            pos += counts[f]
            totals[f] += counts[f]

    position = {sid: i for i, sid in enumerate(dataset.ids)}
    folds: list[FoldSplit] = []
    for f in range(k):
        test = sorted(test_ids[f], key=position.__getitem__)
        test_set = set(test)
        rest = [sid for sid in dataset.ids if sid not in test_set]
        train, val = split_validation(
            dataset, rest, validation_fraction, derive_seed(seed, f"validation-fold{f}")
        )
        folds.append(FoldSplit(fold_index=f, train_ids=train, validation_ids=val, test_ids=tuple(test)))
    return folds
