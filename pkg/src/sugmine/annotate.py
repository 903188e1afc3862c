"""PoS tags and dependency arcs via pluggable parser backends.

The live backend wraps spaCy as an adapter; offline runs and every test use a
frozen fixture backend (line-delimited JSON records mapping sentence text to
tokens and arcs) so feature extraction never depends on a live parser.
Backends must return self-consistent parses; inconsistent ones are rejected,
not repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol


class AnnotationError(ValueError):
    """Backend failure or inconsistent parse."""


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    pos: str  # Penn-Treebank-style tag, passed through from the backend


@dataclass(frozen=True)
class DependencyArc:
    head: int
    dependent: int
    relation: str


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[Token, ...]
    arcs: tuple[DependencyArc, ...]
    source_id: str = ""

    def __post_init__(self) -> None:
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise AnnotationError(f"token indices not contiguous: position {i} holds index {tok.index}")
            if not tok.pos:
                raise AnnotationError(f"token {tok.text!r} has an empty PoS tag")
        n = len(self.tokens)
        for arc in self.arcs:
            if arc.head == arc.dependent:
                raise AnnotationError(f"self-loop arc on token {arc.head}")
            if not (0 <= arc.head < n and 0 <= arc.dependent < n):
                raise AnnotationError(
                    f"arc ({arc.head}, {arc.dependent}, {arc.relation!r}) references a missing token"
                )

    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def pos_tags(self) -> list[str]:
        return [t.pos for t in self.tokens]


class Annotator(Protocol):
    def parse(self, text: str) -> ParsedSentence: ...


def annotate(text: str, backend: Annotator, source_id: str = "") -> ParsedSentence:
    """Annotate one sentence with the given backend.

    Deterministic for a fixed backend version; raises on empty input or on a
    backend returning an inconsistent parse.
    """
    if not text.strip():
        raise AnnotationError("cannot annotate empty text")
    parsed = backend.parse(text)
    # Reconstruct so the invariant checks always run: a backend handing back
    # inconsistent indices is rejected here, not repaired.
    return ParsedSentence(
        tokens=parsed.tokens, arcs=parsed.arcs, source_id=source_id or parsed.source_id
    )


def parse_to_record(text: str, parsed: ParsedSentence) -> dict:
    return {
        "text": text,
        "tokens": [{"text": t.text, "pos": t.pos} for t in parsed.tokens],
        "arcs": [{"head": a.head, "dep": a.dependent, "rel": a.relation} for a in parsed.arcs],
    }


def record_to_parse(record: Mapping, source_id: str = "") -> ParsedSentence:
    tokens = tuple(
        Token(index=i, text=t["text"], pos=t["pos"]) for i, t in enumerate(record["tokens"])
    )
    arcs = tuple(
        DependencyArc(head=a["head"], dependent=a["dep"], relation=a["rel"]) for a in record["arcs"]
    )
    return ParsedSentence(tokens=tokens, arcs=arcs, source_id=source_id)


class FixtureAnnotator:
    """Immutable text -> parse mapping; answers only for known sentences."""

    def __init__(self, parses: Mapping[str, ParsedSentence]):
        self._parses = dict(parses)

    def __len__(self) -> int:
        return len(self._parses)

    def __contains__(self, text: str) -> bool:
        return text in self._parses

    def parse(self, text: str) -> ParsedSentence:
        try:
            return self._parses[text]
        except KeyError:
            raise AnnotationError(f"sentence not in fixture: {text!r}") from None


def load_fixture(path: str | Path) -> FixtureAnnotator:
    """Load a line-delimited JSON fixture; invalid records are rejected with line numbers."""
    path = Path(path)
    if not path.exists():
        raise AnnotationError(f"fixture file not found: {path}")
    parses: dict[str, ParsedSentence] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                text = record["text"]
                parses[text] = record_to_parse(record)
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise AnnotationError(f"{path}:{lineno}: malformed fixture record: {exc}") from exc
            except AnnotationError as exc:
                raise AnnotationError(f"{path}:{lineno}: {exc}") from exc
    return FixtureAnnotator(parses)


def save_fixture(parses: Mapping[str, ParsedSentence], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for text, parsed in parses.items():
            fh.write(json.dumps(parse_to_record(text, parsed), ensure_ascii=False) + "\n")


class SpacyAnnotator:
    """Adapter around a spaCy pipeline (PTB tags from ``token.tag_``).

    spaCy is an optional dependency; constructing this without it installed
    raises AnnotationError. Parses are deterministic for a fixed model
    version. spaCy pipelines are not thread-safe for concurrent calls; wrap
    in a lock if sharing across threads.
    """

    def __init__(self, model: str = "en_core_web_sm"):
        try:
            import spacy
        except ImportError as exc:
            raise AnnotationError(
                "spaCy backend unavailable: install the 'spacy' extra and the model "
                f"{model!r}, or use a fixture backend"
            ) from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise AnnotationError(f"spaCy model {model!r} not installed") from exc

    def parse(self, text: str) -> ParsedSentence:
        doc = self._nlp(text)
        tokens = tuple(Token(index=t.i, text=t.text, pos=t.tag_) for t in doc)
        arcs = tuple(
            DependencyArc(head=t.head.i, dependent=t.i, relation=t.dep_)
            for t in doc
            if t.head.i != t.i  # spaCy roots point at themselves
        )
        return ParsedSentence(tokens=tokens, arcs=arcs)


def annotate_all(
    texts: Iterable[str], backend: Annotator, source_ids: Iterable[str] | None = None
) -> list[ParsedSentence]:
    if source_ids is None:
        return [annotate(t, backend) for t in texts]
    return [annotate(t, backend, source_id=i) for t, i in zip(texts, source_ids)]
