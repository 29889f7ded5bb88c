"""Command-line front end.

Exit codes: 0 on success, 1 when the requested work ran but reported problems
(validation errors, malformed prediction files), 2 on usage or I/O errors.
Reports go to stdout, diagnostics to stderr.  All randomness sits behind
--seed and output directories are written atomically (temp dir + rename), so
identical invocations on identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytics, baselines, brat, codec, model, scoring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpeval",
        description="Corpus toolkit and scorer for mention-level keyphrase "
        "and relation annotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus directory")
    p.add_argument("dir", type=Path)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("dir", type=Path)
    p.add_argument("--top", type=int, default=10, metavar="K")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--pool", choices=("bc", "abc"), default="bc")
    p.add_argument("--by-genre", type=Path, metavar="MAPFILE",
                   help="TSV doc_id<TAB>genre; adds one report per genre")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("convert", help="convert between .ann and sequence TSV")
    p.add_argument("--to", choices=("seq", "ann"), required=True)
    p.add_argument("--in", dest="in_dir", type=Path, required=True)
    p.add_argument("--out", dest="out_dir", type=Path, required=True)
    p.add_argument("--snap", action="store_true",
                   help="expand misaligned spans to token boundaries")
    p.add_argument("--force", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("baseline", help="generate a reference prediction")
    p.add_argument("--kind", choices=[k.value for k in baselines.BaselineKind],
                   required=True)
    p.add_argument("--in", dest="in_dir", type=Path, required=True)
    p.add_argument("--out", dest="out_dir", type=Path, required=True)
    p.add_argument("--train", type=Path, help="training corpus (gazetteer)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--snap", action="store_true")
    p.add_argument("--force", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("agreement", help="inter-annotator agreement")
    p.add_argument("--a", dest="dir_a", type=Path, required=True)
    p.add_argument("--b", dest="dir_b", type=Path, required=True)
    p.add_argument("--granularity", choices=("token_a", "token_b"),
                   default="token_a")
    p.add_argument("--json", action="store_true")

    return parser


def _load(dir_path: Path) -> tuple[brat.Corpus, brat.ValidationReport]:
    try:
        return brat.load_corpus(dir_path)
    except (NotADirectoryError, OSError) as exc:
        raise SystemExit(_usage_error(str(exc)))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _print_report_entries(report: brat.ValidationReport) -> None:
    for doc_id, code, message in report.errors:
        print(f"ERROR   [{code}] {message}", file=sys.stderr)
    for doc_id, code, message in report.warnings:
        print(f"WARNING [{code}] {message}", file=sys.stderr)


def _prepare_corpus(
    corpus: brat.Corpus, report: brat.ValidationReport, jobs: int = 1
) -> brat.Corpus:
    """Canonicalize for scoring, dropping whatever cannot be scored."""

    def prepare(doc):
        clean, dropped = model.drop_invalid(doc)
        return doc.doc_id, model.canonicalize_document(clean), dropped

    prepared = _parallel(jobs, prepare, list(corpus))
    documents = {}
    for doc_id, doc, dropped in prepared:
        for message in dropped:
            print(f"WARNING [DROPPED] {doc_id}: {message}", file=sys.stderr)
        documents[doc_id] = doc
    return brat.Corpus(documents)


def _write_atomic(out_dir: Path, force: bool, writer) -> None:
    """Populate `out_dir` via a temp directory and a final rename."""
    if out_dir.exists():
        if not force:
            raise SystemExit(
                _usage_error(f"{out_dir} exists; pass --force to overwrite")
            )
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent))
    try:
        writer(tmp)
        if out_dir.exists():
            shutil.rmtree(out_dir)
        tmp.rename(out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _parallel(jobs: int, func, values: list) -> list:
    if jobs <= 1 or len(values) <= 1:
        return [func(v) for v in values]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, values))


def cmd_validate(args: argparse.Namespace) -> int:
    corpus, report = _load(args.dir)
    _print_report_entries(report)
    print(f"documents: {len(corpus)}")
    print(f"errors:    {len(report.errors)}")
    print(f"warnings:  {len(report.warnings)}")
    return 0 if report.ok else 1


def cmd_stats(args: argparse.Namespace) -> int:
    corpus, report = _load(args.dir)
    _print_report_entries(report)
    stats = analytics.corpus_stats(corpus, k=args.top)
    out = analytics.stats_to_json(stats) if args.json else analytics.stats_to_text(stats)
    print(out, end="")
    return 0 if report.ok else 1


def cmd_score(args: argparse.Namespace) -> int:
    gold_raw, gold_report = _load(args.gold)
    try:
        pred_raw, pred_report = brat.load_predictions(args.pred, gold_raw)
    except NotADirectoryError as exc:
        return _usage_error(str(exc))
    _print_report_entries(gold_report)
    _print_report_entries(pred_report)
    gold = _prepare_corpus(gold_raw, gold_report, jobs=args.jobs)
    pred = _prepare_corpus(pred_raw, pred_report, jobs=args.jobs)
    scenario = scoring.Scenario(args.scenario)

    doc_ids = gold.doc_ids()
    try:
        report = scoring.score_scenario(gold, pred, scenario, pool=args.pool)
    except ValueError as exc:
        return _usage_error(str(exc))
    for message in report.diagnostics:
        print(f"WARNING [GIVEN_DEVIATION] {message}", file=sys.stderr)
    if args.by_genre:
        genres = _read_genre_map(args.by_genre)
        sections = [(None, report)]
        for genre in sorted(set(genres.get(d, "unmapped") for d in doc_ids)):
            ids = [d for d in doc_ids if genres.get(d, "unmapped") == genre]
            sub_gold = brat.Corpus({d: gold[d] for d in ids})
            sub_pred = brat.Corpus({d: pred[d] for d in ids if d in pred})
            sections.append(
                (genre, scoring.score_scenario(sub_gold, sub_pred, scenario, pool=args.pool))
            )
        for genre, rep in sections:
            if genre is not None:
                print(f"--- genre: {genre} ---")
            print(
                scoring.report_to_json(rep) if args.json else scoring.report_to_text(rep),
                end="",
            )
    else:
        print(
            scoring.report_to_json(report) if args.json else scoring.report_to_text(report),
            end="",
        )
    ok = gold_report.ok and pred_report.ok
    return 0 if ok else 1


def _read_genre_map(path: Path) -> dict[str, str]:
    genres = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            doc_id, _, genre = line.partition("\t")
            genres[doc_id.strip()] = genre.strip() or "unmapped"
    return genres


def cmd_convert(args: argparse.Namespace) -> int:
    if args.to == "seq":
        corpus_raw, report = _load(args.in_dir)
        _print_report_entries(report)
        corpus = _prepare_corpus(corpus_raw, report)

        def render(doc):
            sequences, _ = codec.encode_document(doc, snap=args.snap)
            return doc.doc_id, codec.sequences_to_tsv(sequences), doc.text

        rendered = _parallel(args.jobs, render, list(corpus))

        def writer(tmp: Path) -> None:
            for doc_id, tsv, text in sorted(rendered):
                (tmp / f"{doc_id}.seq").write_text(tsv, encoding="utf-8")
                (tmp / f"{doc_id}.txt").write_text(text, encoding="utf-8")

        _write_atomic(args.out_dir, args.force, writer)
        return 0 if report.ok else 1
    else:
        if not args.in_dir.is_dir():
            return _usage_error(f"not a directory: {args.in_dir}")
        seq_paths = sorted(args.in_dir.glob("*.seq"))
        if not seq_paths:
            return _usage_error(f"no .seq files in {args.in_dir}")

        def decode(path: Path):
            txt = path.with_suffix(".txt")
            if not txt.exists():
                raise SystemExit(_usage_error(f"{path.name} has no matching .txt"))
            text = brat.read_text(txt)
            sequences = codec.sequences_from_tsv(path.read_text(encoding="utf-8"))
            doc = codec.decode_document(sequences, text, path.stem)
            return path.stem, brat.serialize_annotations(doc), text

        rendered = _parallel(args.jobs, decode, seq_paths)

        def writer(tmp: Path) -> None:
            for doc_id, ann, text in sorted(rendered):
                (tmp / f"{doc_id}.ann").write_text(ann, encoding="utf-8")
                (tmp / f"{doc_id}.txt").write_text(text, encoding="utf-8")

        _write_atomic(args.out_dir, args.force, writer)
        return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    corpus_raw, report = _load(args.in_dir)
    _print_report_entries(report)
    corpus = _prepare_corpus(corpus_raw, report)
    kind = baselines.BaselineKind(args.kind)
    if kind is baselines.BaselineKind.ORACLE:
        predicted = baselines.oracle_predict(corpus, snap=args.snap)
    elif kind is baselines.BaselineKind.RANDOM:
        scenario = scoring.Scenario(args.scenario)

        def predict_one(doc):
            single = brat.Corpus({doc.doc_id: doc})
            return baselines.random_predict(single, scenario, args.seed)[doc.doc_id]

        docs = _parallel(args.jobs, predict_one, list(corpus))
        predicted = brat.Corpus({d.doc_id: d for d in docs})
    else:
        if not args.train:
            return _usage_error("--kind gazetteer requires --train")
        train_raw, train_report = _load(args.train)
        _print_report_entries(train_report)
        gaz = baselines.gazetteer_build(_prepare_corpus(train_raw, train_report))
        predicted = baselines.gazetteer_predict(gaz, corpus)

    def writer(tmp: Path) -> None:
        brat.save_corpus(predicted, tmp)

    _write_atomic(args.out_dir, args.force, writer)
    return 0 if report.ok else 1


def cmd_agreement(args: argparse.Namespace) -> int:
    corpus_a, report_a = _load(args.dir_a)
    corpus_b, report_b = _load(args.dir_b)
    _print_report_entries(report_a)
    _print_report_entries(report_b)
    try:
        report = analytics.agreement_report(
            _prepare_corpus(corpus_a, report_a),
            _prepare_corpus(corpus_b, report_b),
            granularity=args.granularity,
        )
    except ValueError as exc:
        return _usage_error(str(exc))
    out = (
        analytics.agreement_to_json(report)
        if args.json
        else analytics.agreement_to_text(report)
    )
    print(out, end="")
    return 0 if report_a.ok and report_b.ok else 1


_COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "score": cmd_score,
    "convert": cmd_convert,
    "baseline": cmd_baseline,
    "agreement": cmd_agreement,
}


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through.
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
