"""Subcommand front-end: ingest, cascades, metrics, motifs, falsehood, report,
synth, and the full pipeline.

Stages communicate only via documented files, so any stage can be rerun
or replaced.  Each run appends a manifest entry (inputs with content
digests, parameters, outputs); a rerun whose input digests changed since
the recorded entry triggers a stale-manifest warning.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, cascade, falsehood, ingest, metrics, motifs, report, synth

logger = logging.getLogger("cascadekit")


class CliError(SystemExit):
    def __init__(self, message: str):
        logger.error("%s", message)
        super().__init__(2)


# ---------------------------------------------------------------------------
# Manifest


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest_append(out_dir: Path, stage: str, inputs: Sequence[Path], params: dict, outputs: Sequence[Path]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    digests = {str(p): _digest(p) for p in inputs if p.exists()}
    if manifest.exists():
        for line in manifest.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            if entry.get("stage") != stage:
                continue
            for path, digest in entry.get("inputs", {}).items():
                if path in digests and digests[path] != digest:
                    logger.warning(
                        "stale manifest: %s input %s changed since last run", stage, path
                    )
    entry = {
        "stage": stage,
        "version": __version__,
        "inputs": digests,
        "params": params,
        "outputs": [str(p) for p in outputs],
    }
    with manifest.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Shared I/O helpers


def _read_messages(path: Path) -> list[ingest.Message]:
    if not path.exists():
        raise CliError(f"messages file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        return ingest.read_messages(fh)


def _read_cascades(path: Path) -> list[cascade.Cascade]:
    if not path.exists():
        raise CliError(f"cascades file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        return cascade.read_cascades(fh)


def _read_labels(path: Path) -> dict[str, str]:
    if not path.exists():
        raise CliError(f"labels file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        return {lab.group_id: lab.category for lab in ingest.parse_labels(fh)}


def _read_falsehood_labels(path: Optional[Path]) -> dict[str, str]:
    if path is None:
        return {}
    if not path.exists():
        raise CliError(f"falsehood labels file not found: {path}")
    out = {}
    with path.open(encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["cascade_id"]] = row["falsehood"]
    return out


def _read_wordfile(path: Optional[Path]) -> frozenset[str]:
    if path is None:
        return frozenset()
    return frozenset(
        w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines() if w.strip()
    )


def _read_lemma_table(path: Optional[Path]) -> dict[str, str]:
    if path is None:
        return {}
    table = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split(",")
        if len(parts) != 2:
            raise CliError(f"bad lemma table line: {line!r}")
        table[parts[0].strip().lower()] = parts[1].strip().lower()
    return table


# ---------------------------------------------------------------------------
# Stages


def cmd_ingest(args) -> int:
    salt = None
    if args.salt_file:
        salt = Path(args.salt_file).read_text(encoding="utf-8").strip()
        if not salt:
            raise CliError(f"salt file {args.salt_file} is empty")
    in_path = Path(args.input)
    if not in_path.exists():
        raise CliError(f"input log not found: {in_path}")
    with in_path.open(encoding="utf-8") as fh:
        messages, warnings = ingest.parse_log(fh, args.log_format, salt=salt, assume_utc=args.assume_utc)
    for w in warnings:
        logger.warning("line %d [%s]: %s", w.line_no, w.code, w.detail)

    labels = []
    if args.labels:
        with Path(args.labels).open(encoding="utf-8") as fh:
            labels = ingest.parse_labels(fh)
    try:
        summary = ingest.validate_corpus(messages, labels, require_labels=bool(args.labels))
    except ingest.CorpusValidationError as exc:
        raise CliError(str(exc))

    out = Path(args.out) / "messages.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        ingest.write_messages(messages, fh)
    _manifest_append(
        Path(args.out),
        "ingest",
        [in_path] + ([Path(args.labels)] if args.labels else []),
        {"format": args.log_format, "assume_utc": args.assume_utc},
        [out],
    )
    _emit_summary(args, {**summary.to_dict(), "n_warnings": len(warnings)})
    return 0


def cmd_cascades(args) -> int:
    messages = _read_messages(Path(args.messages))
    try:
        cascades = cascade.build_cascades_by_group(messages)
    except cascade.CascadeInvariantError as exc:
        raise CliError(f"{args.messages}: {exc}")
    out = Path(args.out) / "cascades.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        cascade.write_cascades(cascades, fh)
    _manifest_append(Path(args.out), "cascades", [Path(args.messages)], {}, [out])
    _emit_summary(args, {"n_cascades": len(cascades)})
    return 0


def _metrics_rows(args):
    messages = _read_messages(Path(args.messages))
    cascades = _read_cascades(Path(args.cascades))
    by_id = {m.message_id: m for m in messages}
    categories = _read_labels(Path(args.labels))
    falsehood_labels = _read_falsehood_labels(Path(args.falsehood_labels) if args.falsehood_labels else None)
    rows = []
    for c in cascades:
        if c.group_id not in categories:
            raise CliError(f"group {c.group_id!r} has no label in {args.labels}")
        m = metrics.compute_metrics(c, by_id)
        rows.append(
            (m, categories[c.group_id], falsehood_labels.get(c.cascade_id, "unclassified"))
        )
    return cascades, rows


def cmd_metrics(args) -> int:
    _, rows = _metrics_rows(args)
    out = Path(args.out) / "metrics.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(metrics.METRICS_CSV_COLUMNS)
        for m, category, falsehood_state in rows:
            writer.writerow(metrics.metrics_csv_row(m, category, falsehood_state))
    inputs = [Path(args.messages), Path(args.cascades), Path(args.labels)]
    if args.falsehood_labels:
        inputs.append(Path(args.falsehood_labels))
    _manifest_append(Path(args.out), "metrics", inputs, {}, [out])
    _emit_summary(args, {"n_rows": len(rows)})
    return 0


def cmd_motifs(args) -> int:
    messages = _read_messages(Path(args.messages))
    cascades = _read_cascades(Path(args.cascades))
    by_id = {m.message_id: m for m in messages}
    out = Path(args.out) / "motifs.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(motifs.MOTIF_CSV_COLUMNS)
        for c in cascades:
            try:
                g = motifs.user_graph(c, by_id)
            except motifs.AuthorLookupError as exc:
                raise CliError(f"{args.cascades}: {exc}")
            writer.writerow(motifs.motif_csv_row(motifs.detect_motifs(g)))
            n += 1
    _manifest_append(Path(args.out), "motifs", [Path(args.messages), Path(args.cascades)], {}, [out])
    _emit_summary(args, {"n_reports": n})
    return 0


def cmd_falsehood(args) -> int:
    messages = _read_messages(Path(args.messages))
    cascades = _read_cascades(Path(args.cascades))
    stopwords = _read_wordfile(Path(args.stopwords) if args.stopwords else None)
    lemma_table = _read_lemma_table(Path(args.lemmas) if args.lemmas else None)

    cascade_message_ids = set()
    for c in cascades:
        cascade_message_ids |= c.nodes

    url_cache: dict[str, falsehood.FetchResult] = {}
    if args.url_cache and Path(args.url_cache).exists():
        with Path(args.url_cache).open(encoding="utf-8") as fh:
            url_cache = falsehood.read_url_cache(fh)

    texts: list[tuple[str, str]] = []
    for m in messages:
        if m.message_id not in cascade_message_ids or m.kind != ingest.KIND_TEXT:
            continue
        if m.text:
            texts.append((m.message_id, m.text))
        for url in m.urls:
            result = url_cache.get(url)
            if result is None and args.fetch_urls:
                result = falsehood.fetch_article_text(url)
                url_cache[url] = result
            if result is not None and result.text:
                texts.append((m.message_id, result.text))

    outputs = []
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = [Path(args.messages), Path(args.cascades)]

    if args.factchecks:
        with Path(args.factchecks).open(encoding="utf-8") as fh:
            factchecks = falsehood.read_factchecks(fh)
        if not factchecks:
            raise CliError(f"fact-check corpus {args.factchecks} is empty")
        candidates = falsehood.match_corpus(
            texts, factchecks, stopwords, lemma_table, threshold=args.threshold
        )
        cand_path = out_dir / "candidates.jsonl"
        with cand_path.open("w", encoding="utf-8") as fh:
            falsehood.write_matches(candidates, fh)
        outputs.append(cand_path)
        inputs.append(Path(args.factchecks))
        _emit_summary(args, {"n_candidates": len(candidates)})

    if args.review:
        with Path(args.review).open(encoding="utf-8") as fh:
            reviewed = falsehood.read_matches(fh)
        confirmed = [m for m in reviewed if m.status == falsehood.CONFIRMED]
        try:
            labels, root_fraction = falsehood.label_cascades(
                cascades, confirmed, {m.message_id for m in messages}
            )
        except falsehood.MatchDataError as exc:
            raise CliError(f"{args.review}: {exc}")
        labels_path = out_dir / "falsehood_labels.csv"
        with labels_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("cascade_id", "falsehood"))
            for cid in sorted(labels):
                writer.writerow((cid, labels[cid]))
        outputs.append(labels_path)
        inputs.append(Path(args.review))
        _emit_summary(
            args,
            {
                "n_falsehood": sum(1 for v in labels.values() if v == "falsehood"),
                "root_match_fraction": root_fraction,
            },
        )

    if args.url_cache:
        with Path(args.url_cache).open("w", encoding="utf-8") as fh:
            falsehood.write_url_cache(sorted(url_cache.values(), key=lambda r: r.url), fh)

    _manifest_append(out_dir, "falsehood", inputs, {"threshold": args.threshold}, outputs)
    return 0


def cmd_report(args) -> int:
    cascades = _read_cascades(Path(args.cascades))
    messages = _read_messages(Path(args.messages))
    by_id = {m.message_id: m for m in messages}
    categories = _read_labels(Path(args.labels))
    falsehood_labels = _read_falsehood_labels(Path(args.falsehood_labels) if args.falsehood_labels else None)

    all_metrics = []
    classes = {}
    motif_reports = []
    for c in cascades:
        if c.group_id not in categories:
            raise CliError(f"group {c.group_id!r} has no label in {args.labels}")
        all_metrics.append(metrics.compute_metrics(c, by_id))
        classes[c.cascade_id] = report.class_of(
            categories[c.group_id], falsehood_labels.get(c.cascade_id, "unclassified")
        )
        motif_reports.append(motifs.detect_motifs(motifs.user_graph(c, by_id)))

    out_dir = Path(args.out) / "report"
    summary = report.emit_report(
        out_dir,
        all_metrics,
        classes,
        cascades,
        motif_reports,
        render_figures=not args.no_figures,
    )
    inputs = [Path(args.messages), Path(args.cascades), Path(args.labels)]
    if args.falsehood_labels:
        inputs.append(Path(args.falsehood_labels))
    _manifest_append(Path(args.out), "report", inputs, {}, [out_dir / "summary.json"])
    _emit_summary(args, summary)
    return 0


def cmd_synth(args) -> int:
    cfg_dict = {}
    if args.config:
        cfg_dict = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    cfg = synth.SynthConfig.from_dict(cfg_dict)
    result = synth.generate(cfg)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    with corpus_path.open("w", encoding="utf-8") as fh:
        ingest.write_messages(result.messages, fh)
    truth_path = out_dir / "truth.json"
    with truth_path.open("w", encoding="utf-8") as fh:
        synth.dump_truth(result.truth, fh)
    labels_path = out_dir / "labels.csv"
    with labels_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("group_id", "category"))
        for gid in sorted(result.group_labels):
            writer.writerow((gid, result.group_labels[gid]))
    fc_path = out_dir / "factchecks.jsonl"
    with fc_path.open("w", encoding="utf-8") as fh:
        for fid, text in result.factchecks:
            fh.write(json.dumps({"factcheck_id": fid, "source": "synth", "text": text}) + "\n")

    _manifest_append(
        out_dir,
        "synth",
        [Path(args.config)] if args.config else [],
        cfg.to_dict(),
        [corpus_path, truth_path, labels_path, fc_path],
    )
    _emit_summary(args, {"n_messages": len(result.messages), "n_cascades": len(result.truth["cascades"])})
    return 0


def cmd_pipeline(args) -> int:
    """Chain ingest -> cascades -> metrics -> motifs [-> falsehood] -> report."""
    out = Path(args.out)
    ns = argparse.Namespace(**vars(args))
    cmd_ingest(ns)
    ns.messages = str(out / "messages.jsonl")
    cmd_cascades(ns)
    ns.cascades = str(out / "cascades.jsonl")

    ns.falsehood_labels = None
    if args.factchecks:
        ns.stopwords = args.stopwords
        ns.lemmas = args.lemmas
        ns.url_cache = args.url_cache
        ns.fetch_urls = args.fetch_urls
        ns.review = args.review
        cmd_falsehood(ns)
        if args.review:
            ns.falsehood_labels = str(out / "falsehood_labels.csv")

    cmd_metrics(ns)
    cmd_report(ns)
    return 0


def _emit_summary(args, payload: dict) -> None:
    if getattr(args, "output_format", "text") == "json":
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascadekit", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--jobs", type=int, default=1, help="reserved; stages are currently single-process")
    parser.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an exported chat log")
    p.add_argument("--input", required=True)
    p.add_argument("--format", dest="log_format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labels")
    p.add_argument("--salt-file")
    p.add_argument("--assume-utc", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cascades", help="extract reply-tree cascades")
    p.add_argument("--messages", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cascades)

    p = sub.add_parser("metrics", help="per-cascade structural/temporal attributes")
    p.add_argument("--messages", required=True)
    p.add_argument("--cascades", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--falsehood-labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("motifs", help="user-graph motif detection")
    p.add_argument("--messages", required=True)
    p.add_argument("--cascades", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_motifs)

    p = sub.add_parser("falsehood", help="fact-check similarity matching and cascade labeling")
    p.add_argument("--messages", required=True)
    p.add_argument("--cascades", required=True)
    p.add_argument("--factchecks")
    p.add_argument("--stopwords")
    p.add_argument("--lemmas")
    p.add_argument("--threshold", type=float, default=falsehood.DEFAULT_THRESHOLD)
    p.add_argument("--review", help="reviewed candidates JSONL; produces cascade labels")
    p.add_argument("--url-cache")
    p.add_argument("--fetch-urls", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_falsehood)

    p = sub.add_parser("report", help="aggregate views: CCDFs, profiles, time series, motifs")
    p.add_argument("--messages", required=True)
    p.add_argument("--cascades", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--falsehood-labels")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run all stages end to end")
    p.add_argument("--input", required=True)
    p.add_argument("--format", dest="log_format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--labels", required=True)
    p.add_argument("--salt-file")
    p.add_argument("--assume-utc", action="store_true")
    p.add_argument("--factchecks")
    p.add_argument("--stopwords")
    p.add_argument("--lemmas")
    p.add_argument("--threshold", type=float, default=falsehood.DEFAULT_THRESHOLD)
    p.add_argument("--review")
    p.add_argument("--url-cache")
    p.add_argument("--fetch-urls", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    try:
        return args.func(args)
    except CliError:
        raise
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
