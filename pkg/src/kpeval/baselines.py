"""Reference prediction generators that bound the task.

ORACLE runs annotations through the sequence codec and back, giving the best
score any system built on that framing can reach.  RANDOM draws uniform
per-token labels, bounding the task from below.  GAZETTEER memorizes the
training keyphrase list and string-matches it, the classic "remember the
training set" baseline.

All generators emit ordinary annotation corpora, so their output flows
through the scorer exactly like a participant submission.  RANDOM derives an
independent substream per (seed, doc_id), which makes output independent of
document processing order.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .brat import Corpus
from .codec import (
    LabeledSequence,
    decode_document,
    encode_document,
    tokenize,
    tokenize_document,
)
from .model import (
    TYPE_PRIORITY,
    Document,
    KeyphraseType,
    canonicalize_document,
    make_document,
)
from .scoring import Scenario

_BOUNDARY_LABELS = ("O", "B", "I")
_TYPE_LABELS = ("O", "M", "P", "T")
_SPAN_TYPE_LABELS = ("M", "P", "T")
_CELL_LABELS = ("O", "S", "H")


class BaselineKind(enum.Enum):
    ORACLE = "oracle"
    RANDOM = "random"
    GAZETTEER = "gazetteer"


def oracle_predict(gold: Corpus, snap: bool = False) -> Corpus:
    """decode(encode(doc)) for every document; a projection, hence idempotent."""
    return Corpus(
        {
            doc.doc_id: decode_document(
                encode_document(doc, snap)[0], doc.text, doc.doc_id
            )
            for doc in gold
        }
    )


def _doc_rng(seed: int, doc_id: str) -> random.Random:
    # String seeding hashes all bits deterministically across runs/platforms.
    return random.Random(f"{seed}\x1f{doc_id}")


def random_predict(texts: Corpus, scenario: Scenario, seed: int) -> Corpus:
    """Uniform random labels per token, repaired by the ordinary decode rules.

    Scenario 1 draws boundary and type labels for every token; scenario 2
    keeps the given boundaries and draws one type per span; scenario 3 keeps
    boundaries and types.  Relation grid cells are drawn uniformly over
    {O, S, H} for every ordered pair of span head tokens in all scenarios.
    The output is fully determined by (seed, doc_id).
    """
    documents = {}
    for doc in texts:
        rng = _doc_rng(seed, doc.doc_id)
        if scenario is Scenario.S1:
            sequences = _random_sequences(doc, rng)
        else:
            sequences, _ = encode_document(doc)
            sequences = [_redraw(seq, scenario, rng) for seq in sequences]
        documents[doc.doc_id] = decode_document(sequences, doc.text, doc.doc_id)
    return Corpus(documents)


def _random_sequences(doc: Document, rng: random.Random) -> list[LabeledSequence]:
    sequences = []
    for sent in tokenize_document(doc.text):
        n = len(sent.tokens)
        labels_a = [rng.choice(_BOUNDARY_LABELS) for _ in range(n)]
        labels_b = [rng.choice(_TYPE_LABELS) for _ in range(n)]
        # Heads after the I-after-O repair: every (O|start)->I becomes a B.
        heads = [
            i
            for i, a in enumerate(labels_a)
            if a == "B" or (a == "I" and (i == 0 or labels_a[i - 1] == "O"))
        ]
        cells = _random_cells(heads, rng)
        sequences.append(
            LabeledSequence(sent, tuple(labels_a), tuple(labels_b), cells)
        )
    return sequences


def _redraw(seq: LabeledSequence, scenario: Scenario, rng: random.Random) -> LabeledSequence:
    labels_b = list(seq.labels_b)
    if scenario is Scenario.S2:
        letter = "M"
        for i, a in enumerate(seq.labels_a):
            if a == "B":
                letter = rng.choice(_SPAN_TYPE_LABELS)
            if a != "O":
                labels_b[i] = letter
    heads = [i for i, a in enumerate(seq.labels_a) if a == "B"]
    cells = _random_cells(heads, rng)
    return LabeledSequence(seq.tokenization, seq.labels_a, tuple(labels_b), cells)


def _random_cells(heads: list[int], rng: random.Random) -> dict[tuple[int, int], str]:
    cells = {}
    for i in heads:
        for j in heads:
            if i != j:
                value = rng.choice(_CELL_LABELS)
                if value != "O":
                    cells[(i, j)] = value
    return cells


@dataclass(frozen=True)
class Gazetteer:
    """Normalized training surfaces with their majority type and frequency."""

    entries: dict[str, tuple[KeyphraseType, int]]
    max_tokens: int

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, surface: str) -> bool:
        return normalize_surface(surface) in self.entries


def normalize_surface(surface: str) -> str:
    """Case-fold and collapse internal whitespace runs to single spaces."""
    return " ".join(surface.casefold().split())


def gazetteer_build(train: Corpus) -> Gazetteer:
    """Collect every gold surface from a training corpus.

    Each normalized surface maps to its majority observed type (ties break by
    the fixed Material > Process > Task priority) and its total mention count.
    """
    if not len(train):
        raise ValueError("cannot build a gazetteer from an empty corpus")
    counts: dict[str, dict[KeyphraseType, int]] = {}
    for doc in train:
        for kp in doc.keyphrases:
            key = normalize_surface(kp.surface)
            if not key:
                continue
            per_type = counts.setdefault(key, {})
            per_type[kp.ktype] = per_type.get(kp.ktype, 0) + 1
    entries = {}
    max_tokens = 1
    for key, per_type in counts.items():
        best = max(
            per_type.items(),
            key=lambda item: (item[1], -TYPE_PRIORITY.index(item[0])),
        )[0]
        entries[key] = (best, sum(per_type.values()))
        max_tokens = max(max_tokens, len(tokenize(key, (0, len(key)))))
    return Gazetteer(entries, max_tokens)


def gazetteer_predict(gaz: Gazetteer, texts: Corpus) -> Corpus:
    """Longest-match, left-to-right, non-overlapping lookup at token boundaries.

    Matches become keyphrases of the stored type; no relations are predicted.
    A surface absent from the training set can never be produced.
    """
    documents = {}
    for doc in texts:
        tokens = [t for sent in tokenize_document(doc.text) for t in sent.tokens]
        spans: list[tuple[str, KeyphraseType, int, int]] = []
        i = 0
        count = 0
        while i < len(tokens):
            hit = None
            for j in range(min(len(tokens), i + gaz.max_tokens) - 1, i - 1, -1):
                candidate = doc.text[tokens[i].start : tokens[j].end]
                entry = gaz.entries.get(normalize_surface(candidate))
                if entry is not None:
                    hit = (j, entry[0])
                    break
            if hit is None:
                i += 1
            else:
                j, ktype = hit
                count += 1
                spans.append((f"T{count}", ktype, tokens[i].start, tokens[j].end))
                i = j + 1
        documents[doc.doc_id] = canonicalize_document(
            make_document(doc.doc_id, doc.text, spans)
        )
    return Corpus(documents)
