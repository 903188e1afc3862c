"""Synthetic review-sentence corpora with known labels and frozen parses.

Sentences come from templates whose tokens carry fixed PoS tags and
dependency arcs, so the generator doubles as its own annotation backend.
The label rule is the one the classifier is supposed to learn: a sentence is
suggestive iff its template is imperative (sentence-initial base verb, no
nominal subject) or carries a suggestion keyword (should / would / recommend
/ tip / ask / do / not ...). Negative templates are declarative statements
that avoid every keyword.

Used for offline end-to-end runs, benchmark-shaped stats fixtures, and CLI
tests; real experiments load real data instead.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotate import DependencyArc, FixtureAnnotator, ParsedSentence, Token, save_fixture
from .corpus import LabeledDataset, LabeledSentence, UnlabeledPool, UnlabeledSentence, save_labeled
from .embed import EmbeddingTable, build_table, save_embeddings
from .seeds import derive_seed

NOUNS = (
    "hotel", "room", "pool", "lobby", "balcony", "beach", "breakfast", "shuttle",
    "spa", "menu", "camera", "battery", "charger", "lens", "screen", "player",
    "router", "keyboard", "speaker", "tripod",
)
ADJECTIVES = (
    "small", "clean", "noisy", "bright", "cheap", "slow", "comfortable",
    "friendly", "heavy", "quiet", "sturdy", "dim", "spacious", "modern",
)
PAST_VERBS = (
    "stayed", "visited", "liked", "enjoyed", "booked", "bought", "used",
    "tested", "returned", "admired",
)
PRESENT_VERBS = ("love", "like", "enjoy", "use", "own", "prefer", "carry", "keep")
THIRD_VERBS = ("looks", "feels", "works", "seems", "sounds", "lasts")
BASE_VERBS = (
    "book", "take", "grab", "pack", "bring", "visit", "check", "avoid",
    "call", "reserve", "charge", "upgrade",
)
MONTHS = (
    "january", "february", "march", "april", "june", "july",
    "august", "september", "october", "november",
)
HOURS = ("7", "8", "9", "10", "11")


def _sentence(words_tags: list[tuple[str, str]], arcs: list[tuple[int, int, str]]) -> tuple[str, ParsedSentence]:
    tokens = tuple(Token(index=i, text=w, pos=t) for i, (w, t) in enumerate(words_tags))
    parsed = ParsedSentence(
        tokens=tokens,
        arcs=tuple(DependencyArc(head=h, dependent=d, relation=r) for h, d, r in arcs),
    )
    return " ".join(w for w, _ in words_tags), parsed


def _positive(rng: random.Random) -> tuple[str, ParsedSentence]:
    kind = rng.randrange(6)
    nn = rng.choice(NOUNS)
    vb = rng.choice(BASE_VERBS)
    if kind == 0:  # bare imperative
        words = [(vb, "VB"), ("the", "DT"), (nn, "NN"), ("before", "IN"),
                 (rng.choice(HOURS), "CD"), ("am", "NN")]
        arcs = [(0, 1, "det"), (0, 2, "dobj"), (0, 3, "prep"), (3, 5, "pobj"), (5, 4, "nummod")]
    elif kind == 1:  # negated imperative: keywords "do", "not"
        words = [("do", "VB"), ("not", "RB"), (vb, "VB"), ("the", "DT"), (nn, "NN")]
        arcs = [(2, 0, "aux"), (2, 1, "neg"), (4, 3, "det"), (2, 4, "dobj")]
    elif kind == 2:  # modal advice: keyword "should"
        words = [("you", "PRP"), ("should", "MD"), (vb, "VB"), ("the", "DT"), (nn, "NN")]
        arcs = [(2, 0, "nsubj"), (2, 1, "aux"), (4, 3, "det"), (2, 4, "dobj")]
    elif kind == 3:  # keywords "would", "recommend"
        words = [("i", "PRP"), ("would", "MD"), ("recommend", "VB"), ("the", "DT"), (nn, "NN")]
        arcs = [(2, 0, "nsubj"), (2, 1, "aux"), (4, 3, "det"), (2, 4, "dobj")]
    elif kind == 4:  # keyword "tip"
        words = [("my", "PRP$"), ("tip", "NN"), ("is", "VBZ"), ("to", "TO"),
                 (vb, "VB"), ("the", "DT"), (nn, "NN"), ("early", "RB")]
        arcs = [(1, 0, "poss"), (2, 1, "nsubj"), (2, 4, "xcomp"), (4, 3, "aux"),
                (6, 5, "det"), (4, 6, "dobj"), (4, 7, "advmod")]
    else:  # imperative with keyword "ask"
        words = [("ask", "VB"), ("the", "DT"), ("staff", "NN"), ("for", "IN"),
                 ("a", "DT"), (nn, "NN")]
        arcs = [(0, 2, "dobj"), (2, 1, "det"), (0, 3, "prep"), (3, 5, "pobj"), (5, 4, "det")]
    return _sentence(words, arcs)


def _negative(rng: random.Random) -> tuple[str, ParsedSentence]:
    kind = rng.randrange(5)
    nn = rng.choice(NOUNS)
    adj = rng.choice(ADJECTIVES)
    if kind == 0:
        words = [("we", "PRP"), (rng.choice(PAST_VERBS), "VBD"), ("the", "DT"),
                 (nn, "NN"), ("in", "IN"), (rng.choice(MONTHS), "NNP")]
        arcs = [(1, 0, "nsubj"), (3, 2, "det"), (1, 3, "dobj"), (1, 4, "prep"), (4, 5, "pobj")]
    elif kind == 1:
        words = [("the", "DT"), (nn, "NN"), ("was", "VBD"), (adj, "JJ"),
                 ("and", "CC"), (rng.choice(ADJECTIVES), "JJ")]
        arcs = [(1, 0, "det"), (2, 1, "nsubj"), (2, 3, "acomp"), (3, 4, "cc"), (3, 5, "conj")]
    elif kind == 2:
        words = [("i", "PRP"), (rng.choice(PRESENT_VERBS), "VBP"), ("the", "DT"),
                 (adj, "JJ"), (nn, "NN")]
        arcs = [(1, 0, "nsubj"), (4, 2, "det"), (4, 3, "amod"), (1, 4, "dobj")]
    elif kind == 3:
        words = [("the", "DT"), (nn, "NN"), (rng.choice(THIRD_VERBS), "VBZ"), (adj, "JJ")]
        arcs = [(1, 0, "det"), (2, 1, "nsubj"), (2, 3, "acomp")]
    else:
        words = [("the", "DT"), (nn, "NN"), ("near", "IN"), ("the", "DT"),
                 (rng.choice(NOUNS), "NN"), ("was", "VBD"), (adj, "JJ")]
        arcs = [(1, 0, "det"), (5, 1, "nsubj"), (1, 2, "prep"), (2, 4, "pobj"),
                (4, 3, "det"), (5, 6, "acomp")]
    return _sentence(words, arcs)


def vocabulary() -> list[str]:
    """Every surface token the templates can emit, in a stable order."""
    fixed = [
        "the", "a", "do", "not", "you", "should", "i", "would", "recommend",
        "my", "tip", "is", "to", "early", "ask", "staff", "for", "we", "in",
        "was", "and", "near", "before", "am",
    ]
    words = list(
        dict.fromkeys(
            fixed
            + list(NOUNS) + list(ADJECTIVES) + list(PAST_VERBS) + list(PRESENT_VERBS)
            + list(THIRD_VERBS) + list(BASE_VERBS) + list(MONTHS) + list(HOURS)
        )
    )
    return words


def make_embedding_table(dim: int = 50, seed: int = 0) -> EmbeddingTable:
    """Random but per-token-stable vectors for the template vocabulary."""
    tokens = vocabulary()
    vectors = np.stack(
        [
            np.random.default_rng(derive_seed(seed, f"embedding:{tok}")).normal(0.0, 0.5, dim)
            for tok in tokens
        ]
    ).astype(np.float32)
    return build_table(tokens, vectors)


@dataclass
class SyntheticCorpus:
    labeled: LabeledDataset
    unlabeled: UnlabeledPool
    annotator: FixtureAnnotator
    table: EmbeddingTable
    parses: dict[str, ParsedSentence]


def _generate(rng: random.Random, positive: bool) -> tuple[str, ParsedSentence]:
    return _positive(rng) if positive else _negative(rng)


def make_labeled(
    n_positive: int, n_negative: int, seed: int, id_prefix: str = "s"
) -> tuple[LabeledDataset, dict[str, ParsedSentence]]:
    """A labeled dataset with exact class counts, shuffled into one order."""
    rng = random.Random(derive_seed(seed, "labeled"))
    flags = [1] * n_positive + [0] * n_negative
    rng.shuffle(flags)
    sentences: list[LabeledSentence] = []
    parses: dict[str, ParsedSentence] = {}
    for i, label in enumerate(flags):
        text, parsed = _generate(rng, positive=bool(label))
        parses[text] = parsed
        sentences.append(LabeledSentence(id=f"{id_prefix}{i:06d}", text=text, label=label))
    return LabeledDataset(tuple(sentences)), parses


def make_corpus(
    n_labeled: int = 2000,
    n_unlabeled: int = 5000,
    positive_fraction: float = 0.1,
    seed: int = 0,
    embedding_dim: int = 50,
) -> SyntheticCorpus:
    """Labeled set, unlabeled pool, fixture annotator, and embeddings in one bundle."""
    n_positive = round(n_labeled * positive_fraction)
    labeled, parses = make_labeled(n_positive, n_labeled - n_positive, seed)

    rng = random.Random(derive_seed(seed, "unlabeled"))
    pool: list[UnlabeledSentence] = []
    for i in range(n_unlabeled):
        text, parsed = _generate(rng, positive=rng.random() < positive_fraction)
        parses[text] = parsed
        pool.append(UnlabeledSentence(id=f"u{i:06d}", text=text))

    return SyntheticCorpus(
        labeled=labeled,
        unlabeled=UnlabeledPool(tuple(pool)),
        annotator=FixtureAnnotator(parses),
        table=make_embedding_table(dim=embedding_dim, seed=seed),
        parses=parses,
    )


def write_corpus_files(corpus: SyntheticCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write the corpus in the CLI's file formats; returns the path of each artifact."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "labeled": out / "labeled.tsv",
        "unlabeled": out / "unlabeled.txt",
        "parses": out / "parses.jsonl",
        "embeddings": out / "embeddings.txt",
    }
    save_labeled(corpus.labeled, paths["labeled"])
    with paths["unlabeled"].open("w", encoding="utf-8") as fh:
        for s in corpus.unlabeled.sentences:
            fh.write(s.text + "\n")
    save_fixture(corpus.parses, paths["parses"])
    save_embeddings(corpus.table, paths["embeddings"])
    return paths


def write_benchmark_stats_fixtures(out_dir: str | Path, seed: int = 0) -> dict[str, Path]:
    """Benchmark-shaped fixture files matching the reference dataset sizes.

    hotel.tsv holds 407 suggestive / 7127 other sentences (ratio 17.5);
    electronics.tsv holds 273 / 3509 (ratio 12.9).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shapes = {"hotel": (407, 7127), "electronics": (273, 3509)}
    paths: dict[str, Path] = {}
    for name, (n_pos, n_neg) in shapes.items():
        dataset, _ = make_labeled(n_pos, n_neg, derive_seed(seed, f"stats:{name}"))
        path = out / f"{name}.tsv"
        save_labeled(dataset, path)
        paths[name] = path
    return paths
