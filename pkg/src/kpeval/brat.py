"""Reading and writing paired .txt / .ann stand-off annotation files.

File conventions (one document = `<stem>.txt` + `<stem>.ann`, both UTF-8):

  * `<stem>.txt` holds one plain-text paragraph.  Bytes are preserved as-is
    (no re-wrapping); a leading BOM, if present, is stripped before offset 0
    is assigned.  Offsets count Unicode code points of the resulting string.
  * `<stem>.ann` is newline-delimited and tab-separated:
      - entities:     ``T<k>\\t<Type> <start> <end>\\t<surface>``
      - hyponymy:     ``R<k>\\tHyponym-of Arg1:T<i> Arg2:T<j>``
      - synonymy:     ``*\\tSynonym-of T<i> T<j> [T<l> ...]``
    Type strings are matched case-insensitively.  ``R`` lines with type
    Synonym-of are tolerated (some prediction files emit them) and normalized
    to canonical pairs.  The surface column is only validated against the
    text slice; offsets are the source of truth.

Parsing of distinct documents is pure and may run concurrently.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .model import (
    Document,
    Keyphrase,
    KeyphraseType,
    Relation,
    RelationType,
    ValidationReport,
    validate_document,
)

MISSING_ANN = "MISSING_ANN"
MISSING_TXT = "MISSING_TXT"
MALFORMED_LINE = "MALFORMED_LINE"


class MalformedLine(ValueError):
    """A .ann line that cannot be parsed; knows its position when available."""

    def __init__(self, reason: str, line: str, lineno: int | None = None,
                 filename: str | None = None):
        self.reason = reason
        self.line = line
        self.lineno = lineno
        self.filename = filename
        where = ""
        if filename is not None:
            where += f"{filename} "
        if lineno is not None:
            where += f"line {lineno}: "
        super().__init__(f"{where}{reason}: {line!r}")


class AnnKind(enum.Enum):
    ENTITY = "entity"
    RELATION = "relation"
    EQUIVALENCE = "equivalence"


@dataclass(frozen=True)
class AnnLine:
    """One parsed .ann line, before document assembly."""

    kind: AnnKind
    id: str | None = None
    ktype: KeyphraseType | None = None
    rtype: RelationType | None = None
    start: int = -1
    end: int = -1
    surface: str = ""
    args: tuple[str, ...] = ()


@dataclass
class Corpus:
    """Documents keyed and iterated by doc_id."""

    documents: dict[str, Document] = dataclasses.field(default_factory=dict)

    def __post_init__(self) -> None:
        self.documents = dict(sorted(self.documents.items()))

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.documents

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[doc_id]

    def doc_ids(self) -> list[str]:
        return list(self.documents)


def parse_ann_line(line: str) -> AnnLine:
    """Parse one non-empty .ann line into its structured form.

    Raises MalformedLine for a wrong field count, non-integer offsets, an
    unknown leading sigil, or an unknown type string.
    """
    line = line.rstrip("\r\n")
    fields = line.split("\t")
    sigil = fields[0][:1]
    if sigil == "T":
        if len(fields) < 3:
            raise MalformedLine("entity line needs 3 tab-separated fields", line)
        middle = fields[1].split()
        if len(middle) != 3:
            raise MalformedLine("entity line needs '<Type> <start> <end>'", line)
        type_str, start_str, end_str = middle
        try:
            ktype = KeyphraseType.parse(type_str)
        except ValueError:
            raise MalformedLine(f"unknown keyphrase type {type_str!r}", line) from None
        try:
            start, end = int(start_str), int(end_str)
        except ValueError:
            raise MalformedLine("offsets must be integers", line) from None
        if start < 0 or end < 0:
            raise MalformedLine("offsets must be non-negative", line)
        return AnnLine(AnnKind.ENTITY, id=fields[0], ktype=ktype,
                       start=start, end=end, surface=fields[2])
    if sigil == "R":
        if len(fields) < 2:
            raise MalformedLine("relation line needs 2 tab-separated fields", line)
        parts = fields[1].split()
        if len(parts) != 3:
            raise MalformedLine("relation line needs '<Type> Arg1:<id> Arg2:<id>'", line)
        try:
            rtype = RelationType.parse(parts[0])
        except ValueError:
            raise MalformedLine(f"unknown relation type {parts[0]!r}", line) from None
        args = {}
        for part in parts[1:]:
            label, sep, ref = part.partition(":")
            if not sep or label.casefold() not in ("arg1", "arg2"):
                raise MalformedLine(f"bad relation argument {part!r}", line)
            args[label.casefold()] = ref
        if set(args) != {"arg1", "arg2"}:
            raise MalformedLine("relation needs exactly Arg1 and Arg2", line)
        return AnnLine(AnnKind.RELATION, id=fields[0], rtype=rtype,
                       args=(args["arg1"], args["arg2"]))
    if sigil == "*":
        if len(fields) < 2:
            raise MalformedLine("equivalence line needs 2 tab-separated fields", line)
        parts = fields[1].split()
        if len(parts) < 3:
            raise MalformedLine("equivalence line needs a type and >= 2 ids", line)
        try:
            rtype = RelationType.parse(parts[0])
        except ValueError:
            raise MalformedLine(f"unknown relation type {parts[0]!r}", line) from None
        if rtype is not RelationType.SYNONYM_OF:
            raise MalformedLine("equivalence lines must be Synonym-of", line)
        return AnnLine(AnnKind.EQUIVALENCE, rtype=rtype, args=tuple(parts[1:]))
    raise MalformedLine(f"unknown leading sigil {fields[0]!r}", line)


# Characters that would break the one-line .ann layout if written verbatim in
# the surface column; the validator applies the same mapping to the text slice.
_FLATTEN = str.maketrans({"\n": " ", "\r": " ", "\t": " "})


def parse_document_pair(
    doc_id: str, text: str, ann: str
) -> tuple[Document, ValidationReport]:
    """Assemble a Document from raw .txt content and .ann content.

    Malformed lines are recorded as MALFORMED_LINE errors with their line
    number and skipped; no line is ever dropped silently.  Equivalence lines
    with k ids expand to all k*(k-1)/2 synonym pairs.  The report also carries
    the full validate_document output for the assembled document.
    """
    report = ValidationReport()
    if text.startswith("﻿"):
        text = text[1:]
    keyphrases: list[Keyphrase] = []
    relations: list[Relation] = []
    n = len(text)
    for lineno, raw in enumerate(ann.splitlines(), 1):
        if not raw.strip():
            continue
        try:
            parsed = parse_ann_line(raw)
        except MalformedLine as exc:
            report.error(doc_id, MALFORMED_LINE,
                         f"{doc_id}.ann line {lineno}: {exc.reason}")
            continue
        if parsed.kind is AnnKind.ENTITY:
            surface = text[parsed.start : parsed.end] if parsed.end <= n else ""
            kp = Keyphrase(id=parsed.id, ktype=parsed.ktype,
                           start=parsed.start, end=parsed.end, surface=surface)
            keyphrases.append(kp)
            if surface and surface.translate(_FLATTEN) != parsed.surface:
                report.error(
                    doc_id,
                    "SURFACE_MISMATCH",
                    f"{doc_id}.ann line {lineno}: {parsed.id} column "
                    f"{parsed.surface!r} != text slice {surface!r}",
                )
        elif parsed.kind is AnnKind.RELATION:
            relations.append(Relation(parsed.rtype, parsed.args[0], parsed.args[1]))
        else:
            for a1, a2 in itertools.combinations(parsed.args, 2):
                relations.append(Relation(RelationType.SYNONYM_OF, a1, a2))
    doc = Document(doc_id, text, tuple(keyphrases), tuple(relations))
    report.extend(validate_document(doc))
    return doc, report


def serialize_annotations(doc: Document) -> str:
    """Render a canonical document back to .ann bytes.

    Output is deterministic: entities in canonical order renumbered T1..Tn,
    one ``*`` line per synonym pair, hyponym lines numbered R1..Rm.  A document
    with no annotations serializes to the empty string.  Re-parsing and
    re-serializing the output is a byte-level fixed point.
    """
    from .model import canonicalize_document

    canonical = canonicalize_document(doc)
    if canonical != doc:
        raise ValueError(f"document {doc.doc_id} is not canonical; "
                         "run canonicalize_document first")
    lines = []
    for kp in doc.keyphrases:
        lines.append(f"{kp.id}\t{kp.ktype.value} {kp.start} {kp.end}\t"
                     f"{kp.surface.translate(_FLATTEN)}")
    for rel in doc.relations:
        if rel.rtype is RelationType.SYNONYM_OF:
            lines.append(f"*\t{rel.rtype.value} {rel.arg1} {rel.arg2}")
    r_count = 0
    for rel in doc.relations:
        if rel.rtype is RelationType.HYPONYM_OF:
            r_count += 1
            lines.append(f"R{r_count}\t{rel.rtype.value} "
                         f"Arg1:{rel.arg1} Arg2:{rel.arg2}")
    return "".join(line + "\n" for line in lines)


def read_text(path: Path) -> str:
    text = path.read_text(encoding="utf-8")
    if text.startswith("﻿"):
        text = text[1:]
    return text


def load_corpus(dir_path: str | Path) -> tuple[Corpus, ValidationReport]:
    """Load every `<stem>.txt` + `<stem>.ann` pair from a directory.

    A .txt without its .ann (or vice versa) produces an error entry naming the
    stem.  Per-file parse problems are aggregated into the report rather than
    aborting the load; the rest of the corpus still comes back usable.
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise NotADirectoryError(f"not a directory: {dir_path}")
    report = ValidationReport()
    txt_stems = {p.stem for p in dir_path.glob("*.txt")}
    ann_stems = {p.stem for p in dir_path.glob("*.ann")}
    for stem in sorted(txt_stems - ann_stems):
        report.error(stem, MISSING_ANN, f"{stem}.txt has no matching {stem}.ann")
    for stem in sorted(ann_stems - txt_stems):
        report.error(stem, MISSING_TXT, f"{stem}.ann has no matching {stem}.txt")
    documents = {}
    for stem in sorted(txt_stems & ann_stems):
        text = read_text(dir_path / f"{stem}.txt")
        ann = (dir_path / f"{stem}.ann").read_text(encoding="utf-8")
        doc, doc_report = parse_document_pair(stem, text, ann)
        documents[stem] = doc
        report.extend(doc_report)
    return Corpus(documents), report


def load_predictions(dir_path: str | Path, reference: Corpus) -> tuple[Corpus, ValidationReport]:
    """Load a prediction directory of bare .ann files against reference texts.

    Prediction directories mirror the input corpus but need not repeat the
    .txt files; each `<stem>.ann` is paired with the reference document's
    text.  A stem absent from the reference is an error; a reference document
    without a prediction file loads as an empty prediction.
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise NotADirectoryError(f"not a directory: {dir_path}")
    report = ValidationReport()
    documents = {}
    for path in sorted(dir_path.glob("*.ann")):
        if path.stem not in reference:
            report.error(path.stem, MISSING_TXT,
                         f"{path.name} has no document in the gold corpus")
            continue
        text = reference[path.stem].text
        doc, doc_report = parse_document_pair(path.stem, text, path.read_text(encoding="utf-8"))
        documents[path.stem] = doc
        report.extend(doc_report)
    for doc_id in reference.doc_ids():
        documents.setdefault(doc_id, Document(doc_id, reference[doc_id].text))
    return Corpus(documents), report


def save_corpus(corpus: Corpus, dir_path: str | Path, write_text: bool = False) -> None:
    """Write one .ann file per document (plus .txt when requested)."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for doc in corpus:
        (dir_path / f"{doc.doc_id}.ann").write_text(
            serialize_annotations(doc), encoding="utf-8"
        )
        if write_text:
            (dir_path / f"{doc.doc_id}.txt").write_text(doc.text, encoding="utf-8")
