"""Linguistic feature extraction for suggestion classification.

Four binary feature families over a parsed sentence: presence of suggestive
keywords, bags of word n-grams and PoS n-grams fitted on training data, an
imperative-mood flag (base-form verb sentence-initial or with no nominal
subject), and (head-PoS, dependent-PoS) pairs of nominal-subject arcs.

Word n-grams are counted over lowercased tokens with punctuation kept; PoS
tags are used verbatim. Top-k selection breaks frequency ties
lexicographically so fitting is deterministic.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .annotate import ParsedSentence

# Fixed inventory of suggestive keywords, matched against lowercased tokens.
SUGGESTION_KEYWORDS: tuple[str, ...] = (
    "advice", "suggest", "may", "suggestion", "ask", "warn", "recommend",
    "do", "advise", "request", "warning", "tip", "recommendation", "not",
    "should", "can", "would", "will",
)

SCHEMA_FORMAT = "sugmine-feature-schema"
SCHEMA_VERSION = 1

WORD_NGRAM_CAPACITIES = {1: 300, 2: 100, 3: 100}
POS_NGRAM_CAPACITY = 50
NSUBJ_PAIR_CAPACITY = 50


class FeatureError(ValueError):
    """Invalid fitting input or corrupt schema file."""


@dataclass
class NgramVocab:
    order: int
    entries: tuple[str, ...]  # n-grams joined by single spaces, frequency-ranked
    capacity: int
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.entries = tuple(self.entries)
        if len(self.entries) > self.capacity:
            raise FeatureError(f"{len(self.entries)} entries exceed capacity {self.capacity}")
        if len(set(self.entries)) != len(self.entries):
            raise FeatureError("duplicate n-gram entries")
        self._index = {e: i for i, e in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def index(self, ngram: str) -> int | None:
        return self._index.get(ngram)


@dataclass
class FeatureSchema:
    keywords: tuple[str, ...]
    word_vocabs: dict[int, NgramVocab]  # orders 1..3
    pos_vocabs: dict[int, NgramVocab]  # orders 1..3
    nsubj_pairs: tuple[tuple[str, str], ...]
    nsubj_relation: str = "nsubj"
    lowercase: bool = True
    _pair_index: dict[tuple[str, str], int] = field(init=False, repr=False)
    schema_id: str = field(init=False)

    def __post_init__(self) -> None:
        self.keywords = tuple(self.keywords)
        self.nsubj_pairs = tuple(tuple(p) for p in self.nsubj_pairs)
        self._pair_index = {p: i for i, p in enumerate(self.nsubj_pairs)}
        self.schema_id = hashlib.sha256(
            json.dumps(self._payload(), sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]

    @property
    def total_dim(self) -> int:
        return (
            len(self.keywords)
            + sum(len(v) for v in self.word_vocabs.values())
            + sum(len(v) for v in self.pos_vocabs.values())
            + 1  # imperative-VB flag
            + len(self.nsubj_pairs)
        )

    def _payload(self) -> dict:
        return {
            "format": SCHEMA_FORMAT,
            "version": SCHEMA_VERSION,
            "lowercase": self.lowercase,
            "nsubj_relation": self.nsubj_relation,
            "keywords": list(self.keywords),
            "word_vocabs": {
                str(n): {"capacity": v.capacity, "entries": list(v.entries)}
                for n, v in sorted(self.word_vocabs.items())
            },
            "pos_vocabs": {
                str(n): {"capacity": v.capacity, "entries": list(v.entries)}
                for n, v in sorted(self.pos_vocabs.items())
            },
            "nsubj_pairs": [list(p) for p in self.nsubj_pairs],
        }


@dataclass(frozen=True)
class LinguisticFeatureVector:
    values: np.ndarray  # uint8, {0, 1}
    schema_ref: str

    def __len__(self) -> int:
        return len(self.values)


def _ngrams(items: Sequence[str], order: int) -> list[str]:
    return [" ".join(items[i : i + order]) for i in range(len(items) - order + 1)]


def _top_k(counts: Counter, capacity: int) -> tuple[str, ...]:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(key for key, _ in ranked[:capacity])


def fit_schema(
    train: Sequence[ParsedSentence],
    word_capacities: dict[int, int] | None = None,
    pos_capacity: int = POS_NGRAM_CAPACITY,
    pair_capacity: int = NSUBJ_PAIR_CAPACITY,
    nsubj_relation: str = "nsubj",
) -> FeatureSchema:
    """Fit n-gram vocabularies and the nsubj-pair vocabulary on training parses.

    Vocabularies hold the top-k items by occurrence count; ties break
    lexicographically. Fitting sees training data only, so feature spaces
    cannot leak evaluation vocabulary.
    """
    if not train:
        raise FeatureError("cannot fit a feature schema on an empty training set")
    word_capacities = dict(word_capacities or WORD_NGRAM_CAPACITIES)

    word_counts: dict[int, Counter] = {n: Counter() for n in word_capacities}
    pos_counts: dict[int, Counter] = {n: Counter() for n in (1, 2, 3)}
    pair_counts: Counter = Counter()
    for parsed in train:
        words = [t.lower() for t in parsed.token_texts()]
        tags = parsed.pos_tags()
        for n in word_counts:
            word_counts[n].update(_ngrams(words, n))
        for n in pos_counts:
            pos_counts[n].update(_ngrams(tags, n))
        for arc in parsed.arcs:
            if arc.relation == nsubj_relation:
                pair_counts[(tags[arc.head], tags[arc.dependent])] += 1

    word_vocabs = {
        n: NgramVocab(order=n, entries=_top_k(word_counts[n], cap), capacity=cap)
        for n, cap in sorted(word_capacities.items())
    }
    pos_vocabs = {
        n: NgramVocab(order=n, entries=_top_k(pos_counts[n], pos_capacity), capacity=pos_capacity)
        for n in (1, 2, 3)
    }
    pair_entries = sorted(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:pair_capacity]
    return FeatureSchema(
        keywords=SUGGESTION_KEYWORDS,
        word_vocabs=word_vocabs,
        pos_vocabs=pos_vocabs,
        nsubj_pairs=tuple(p for p, _ in pair_entries),
        nsubj_relation=nsubj_relation,
    )


def imperative_vb_feature(parsed: ParsedSentence, nsubj_relation: str = "nsubj") -> int:
    """1 iff the sentence starts with a VB token, or some VB token touches no nsubj arc."""
    if not parsed.tokens:
        return 0
    if parsed.tokens[0].pos == "VB":
        return 1
    in_nsubj: set[int] = set()
    for arc in parsed.arcs:
        if arc.relation == nsubj_relation:
            in_nsubj.add(arc.head)
            in_nsubj.add(arc.dependent)
    return int(any(t.pos == "VB" and t.index not in in_nsubj for t in parsed.tokens))


def nsubj_pair_features(parsed: ParsedSentence, schema: FeatureSchema) -> np.ndarray:
    """Presence bits for in-vocabulary (head-PoS, dependent-PoS) pairs over nsubj arcs."""
    bits = np.zeros(len(schema.nsubj_pairs), dtype=np.uint8)
    tags = parsed.pos_tags()
    for arc in parsed.arcs:
        if arc.relation == schema.nsubj_relation:
            idx = schema._pair_index.get((tags[arc.head], tags[arc.dependent]))
            if idx is not None:
                bits[idx] = 1
    return bits


def _keyword_bits(parsed: ParsedSentence, schema: FeatureSchema) -> np.ndarray:
    bits = np.zeros(len(schema.keywords), dtype=np.uint8)
    present = {t.lower() for t in parsed.token_texts()}
    for i, kw in enumerate(schema.keywords):
        if kw in present:
            bits[i] = 1
    return bits


def _vocab_bits(items: Sequence[str], vocab: NgramVocab) -> np.ndarray:
    bits = np.zeros(len(vocab), dtype=np.uint8)
    for gram in set(_ngrams(items, vocab.order)):
        idx = vocab.index(gram)
        if idx is not None:
            bits[idx] = 1
    return bits


def extract(parsed: ParsedSentence, schema: FeatureSchema) -> LinguisticFeatureVector:
    """Extract the full binary feature vector for one parsed sentence.

    Layout, in schema order: keyword bits | word 1/2/3-gram bits |
    PoS 1/2/3-gram bits | imperative-VB bit | nsubj-pair bits.
    Out-of-vocabulary items simply contribute zeros. Pure function of
    (parse, schema).
    """
    words = [t.lower() for t in parsed.token_texts()] if schema.lowercase else parsed.token_texts()
    tags = parsed.pos_tags()
    parts = [_keyword_bits(parsed, schema)]
    for n in sorted(schema.word_vocabs):
        parts.append(_vocab_bits(words, schema.word_vocabs[n]))
    for n in sorted(schema.pos_vocabs):
        parts.append(_vocab_bits(tags, schema.pos_vocabs[n]))
    parts.append(np.array([imperative_vb_feature(parsed, schema.nsubj_relation)], dtype=np.uint8))
    parts.append(nsubj_pair_features(parsed, schema))
    values = np.concatenate(parts)
    assert len(values) == schema.total_dim
    return LinguisticFeatureVector(values=values, schema_ref=schema.schema_id)


def save_schema(schema: FeatureSchema, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(schema._payload(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def schema_from_payload(payload: dict) -> FeatureSchema:
    if payload.get("format") != SCHEMA_FORMAT:
        raise FeatureError("not a feature schema record")
    if payload.get("version") != SCHEMA_VERSION:
        raise FeatureError(f"unsupported schema version {payload.get('version')!r}")
    word_vocabs = {
        int(n): NgramVocab(order=int(n), entries=tuple(v["entries"]), capacity=v["capacity"])
        for n, v in payload["word_vocabs"].items()
    }
    pos_vocabs = {
        int(n): NgramVocab(order=int(n), entries=tuple(v["entries"]), capacity=v["capacity"])
        for n, v in payload["pos_vocabs"].items()
    }
    return FeatureSchema(
        keywords=tuple(payload["keywords"]),
        word_vocabs=word_vocabs,
        pos_vocabs=pos_vocabs,
        nsubj_pairs=tuple(tuple(p) for p in payload["nsubj_pairs"]),
        nsubj_relation=payload["nsubj_relation"],
        lowercase=payload["lowercase"],
    )


def load_schema(path: str | Path) -> FeatureSchema:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FeatureError(f"cannot read schema file {path}: {exc}") from exc
    try:
        return schema_from_payload(payload)
    except (KeyError, TypeError) as exc:
        raise FeatureError(f"{path}: malformed schema file: {exc}") from exc
    except FeatureError as exc:
        raise FeatureError(f"{path}: {exc}") from exc
