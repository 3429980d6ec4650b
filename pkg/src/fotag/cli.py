"""Command-line driver for the tagging pipeline.

Every stage reads and writes plain files so that runs can be repeated and
inspected stage by stage.  Parameters may come from a ``key = value`` config
file (``--config``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import corpora, dolce, evaluation, migration, propagation, tagging, verbs
from .wordnet import NOUN, VERB, LexicalGraph, SynsetId, WordNetError, normalize_pos, parse_wordnet

log = logging.getLogger("fotag")

WORDNET_ENV = "FOTAG_WORDNET"

COMPONENT_ERRORS = (
    WordNetError, dolce.TaxonomyError, dolce.AlignmentError, migration.MappingFormatError,
    verbs.OverrideError, corpora.CorpusError, tagging.ColumnFormatError,
    evaluation.AlignmentMismatch, KeyError, ValueError, OSError,
)


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _hash(path: Path) -> str:
    h = hashlib.sha256()
    if path.is_dir():
        for f in sorted(path.iterdir()):
            if f.is_file():
                h.update(f.name.encode())
                h.update(f.read_bytes())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()


def log_run(args: argparse.Namespace) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    log.info("command %s params %s", args.command, json.dumps(params, default=str, sort_keys=True))
    for key, value in params.items():
        values = value if isinstance(value, list) else [value]
        for v in values:
            if not isinstance(v, str):
                continue
            p = Path(v.split("=", 1)[-1])
            if key not in ("output", "diagnostics", "report", "stats") and p.exists():
                log.info("input %s %s sha256 %s", key, p, _hash(p))


def _write(text: str, output: Optional[str]) -> None:
    if output and output != "-":
        Path(output).write_text(text, "utf-8")
        log.info("wrote %s", output)
    else:
        sys.stdout.write(text)


def _wordnet(args) -> LexicalGraph:
    if not args.wordnet:
        raise UsageError(f"--wordnet DIR is required (or set {WORDNET_ENV})")
    return parse_wordnet(args.wordnet)


def _taxonomy(args):
    return dolce.load_taxonomy(args.taxonomy) if getattr(args, "taxonomy", None) else \
        dolce.default_taxonomy()


def _alignments(args, taxonomy=None) -> dolce.AlignmentStore:
    if not args.alignments:
        raise UsageError("--alignments FILE is required")
    return dolce.load_alignments(args.alignments, taxonomy or _taxonomy(args))


def _synset_arg(graph: LexicalGraph, text: str) -> SynsetId:
    """Accept ``00594621-v`` or ``lemma.pos.rank`` (rank defaults to 1)."""
    try:
        return SynsetId.parse(text)
    except ValueError:
        pass
    parts = text.rsplit(".", 2)
    if len(parts) == 2:
        parts.append("1")
    if len(parts) != 3:
        raise UsageError(f"cannot read synset {text!r}")
    lemma, pos, rank = parts[0], normalize_pos(parts[1]), int(parts[2])
    senses = graph.senses(lemma, pos)
    if not 1 <= rank <= len(senses):
        raise UsageError(f"{lemma}/{pos} has no sense {rank}")
    return senses[rank - 1].synset


def _jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


# -- subcommands ---------------------------------------------------------------------

def cmd_ingest(args) -> int:
    graph = _wordnet(args)
    summary = {
        "synsets": {pos: graph.count(pos) for pos in ("n", "v", "a", "r")},
        "top_level": {pos: len(propagation.roots(graph, pos)) for pos in (NOUN, VERB)},
        "hypernym_cycles": {pos: [[str(s) for s in c]
                                  for c in propagation.hypernym_cycles(graph, pos)]
                            for pos in (NOUN, VERB)},
        "lemmas": len(graph.sense_index),
        "sense_keys": len(graph.sense_keys),
    }
    _write(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_migrate(args) -> int:
    seeds = _alignments(args)
    vmap = migration.parse_version_map(args.map, args.pos)
    store, report = migration.migrate(seeds, vmap, args.threshold)
    _write(dolce.format_alignments(store), args.output)
    if args.report:
        Path(args.report).write_text(report.to_jsonl(), "utf-8")
    log.info("migrated %d, dropped %d, merged %d", report.migrated, len(report.dropped),
             len(report.merged))
    return 0


def cmd_propagate(args) -> int:
    graph = _wordnet(args)
    seeds = _alignments(args)
    config = propagation.PropagationConfig(conflict_policy=args.conflict_policy)
    store, diagnostics = propagation.propagate(graph, seeds, config)
    _write(dolce.format_alignments(store), args.output)
    if args.diagnostics:
        Path(args.diagnostics).write_text(propagation.diagnostics_jsonl(diagnostics), "utf-8")
    for pos in sorted({s.pos for s in seeds}):
        cov = propagation.coverage(graph, store, pos)
        log.info("coverage %s: %d/%d (%.2f%%)", pos, cov.mapped, cov.total, 100 * cov.fraction)
    return 0


def _suggestions(graph, store, verb, args, taxonomy) -> dict:
    direct = verbs.direct_candidates(graph, verb, store, taxonomy)
    indirect = verbs.indirect_paths(graph, verb, store, args.max_depth, taxonomy)
    heuristic = verbs.gloss_heuristics(graph.synset(verb))
    similar = verbs.similar_glosses(graph, verb, store)
    synset = graph.synset(verb)
    return {
        "verb": str(verb), "lemmas": list(synset.lemmas), "gloss": synset.definition,
        "direct": [c.to_dict() | {"describe": c.describe()} for c in direct],
        "indirect": [c.to_dict() | {"describe": c.describe()} for c in indirect],
        "heuristic": heuristic.to_dict() | {"describe": heuristic.describe()} if heuristic else None,
        "similar": [{"synset": str(s), "score": round(x, 4), "class": c} for x, s, c in similar],
    }


def _render_suggestion(s: dict) -> str:
    lines = [f"{s['verb']} {', '.join(s['lemmas'])}: {s['gloss']}"]
    for kind in ("direct", "indirect"):
        for c in s[kind]:
            lines.append(f"  {c['describe']}")
    if s["heuristic"]:
        lines.append(f"  {s['heuristic']['describe']}")
    for x in s["similar"]:
        lines.append(f"  similar gloss {x['synset']} ({x['score']}): {x['class']}")
    return "\n".join(lines)


def cmd_suggest(args) -> int:
    graph = _wordnet(args)
    taxonomy = _taxonomy(args)
    store = _alignments(args, taxonomy)
    overrides = verbs.load_overrides(args.overrides) if args.overrides else verbs.OverrideFile()
    store = verbs.apply_overrides(store, overrides, graph)
    targets = [_synset_arg(graph, t) for t in args.synset] or propagation.roots(graph, VERB)
    out = [_suggestions(graph, store, v, args, taxonomy) for v in targets]
    if args.format == "json":
        _write(_jsonl(out), args.output)
    else:
        _write("\n\n".join(_render_suggestion(s) for s in out) + "\n", args.output)
    return 0


def cmd_curate(args, stdin=None, stdout=None) -> int:
    """Walk unresolved top-level verbs and record the curator's choices."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    if not args.overrides:
        raise UsageError("--overrides FILE is required for curate")
    graph = _wordnet(args)
    taxonomy = _taxonomy(args)
    nouns = _alignments(args, taxonomy)
    existing = verbs.load_overrides(args.overrides)
    _, _, decisions = verbs.classify_top_verbs(graph, nouns, existing, args.max_depth,
                                                   taxonomy, args.workers)
    todo = [d for d in decisions if d.record is None]
    stdout.write(f"{len(todo)} unresolved top-level verbs; "
                 f"enter a number, a class name, 's' to skip or 'q' to stop\n")
    rows = []
    for d in todo:
        options = d.indirect + ([d.heuristic] if d.heuristic and d.heuristic.proposed_class else [])
        stdout.write(_render_suggestion(_suggestions(graph, nouns, d.verb, args, taxonomy)) + "\n")
        for i, c in enumerate(options, 1):
            stdout.write(f"  [{i}] {c.describe()}\n")
        stdout.write(f"  classes: {', '.join(dolce.VERB_CLASSES)}\n> ")
        stdout.flush()
        answer = stdin.readline()
        if not answer or answer.strip() == "q":
            break
        answer = answer.strip()
        if answer in ("", "s"):
            continue
        if answer.isdigit() and 1 <= int(answer) <= len(options):
            choice = options[int(answer) - 1]
            rows.append(verbs.OverrideRow(d.verb, choice.proposed_class, choice.describe()))
        elif answer.split()[0] in dolce.VERB_CLASSES:
            cls, _, note = answer.partition(" ")
            rows.append(verbs.OverrideRow(d.verb, cls, note.strip() or "curator choice"))
        else:
            stdout.write(f"not a verb class: {answer!r}; skipped\n")
    verbs.append_overrides(args.overrides, rows)
    stdout.write(f"recorded {len(rows)} override(s) in {args.overrides}\n")
    return 0


def cmd_classify_verbs(args) -> int:
    graph = _wordnet(args)
    taxonomy = _taxonomy(args)
    nouns = _alignments(args, taxonomy)
    overrides = verbs.load_overrides(args.overrides) if args.overrides else None
    store, stats, diagnostics = verbs.build_verb_alignment(
        graph, nouns, overrides, args.max_depth, taxonomy, args.workers)
    _write(dolce.format_alignments(store), args.output)
    if args.stats:
        Path(args.stats).write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n",
                                    "utf-8")
    if args.diagnostics:
        Path(args.diagnostics).write_text(propagation.diagnostics_jsonl(diagnostics), "utf-8")
    log.info("routes %s", json.dumps(stats.counts, sort_keys=True))
    return 0


def _store_with_overrides(args, graph, taxonomy):
    store = _alignments(args, taxonomy)
    if getattr(args, "overrides", None):
        store = verbs.apply_overrides(store, verbs.load_overrides(args.overrides), graph)
    return store


def cmd_tag(args) -> int:
    graph = _wordnet(args)
    store = _store_with_overrides(args, graph, _taxonomy(args))
    corpus = tagging.read_columns(args.input, "gold")
    blank = tagging.AnnotatedCorpus([tagging.Sentence(list(s.tokens)) for s in corpus.sentences],
                                    corpus.name)
    pred = tagging.tag_corpus(blank, args.mode, graph, store,
                              tagging.load_stopwords(args.stopwords), args.seed, args.workers)
    gold = corpus if any(s.units for s in corpus.sentences) else None
    _write(tagging.format_columns(pred, gold), args.output)
    return 0


def cmd_build_gold(args) -> int:
    graph = _wordnet(args)
    store = _store_with_overrides(args, graph, _taxonomy(args))
    diagnostics: list = []
    if args.semcor:
        corpus = corpora.parse_semcor(args.semcor, diagnostics)
    else:
        annotations = corpora.parse_xwn(args.xwn) if args.xwn else None
        if annotations is not None:
            log.info("XWN glosses %d, skipped %d", len(annotations.glosses), annotations.skipped)
        pos_set = [normalize_pos(p) for p in args.pos.split(",")]
        synsets = sorted(annotations.glosses) if annotations is not None else None
        corpus = corpora.build_gloss_corpus(graph, pos_set, annotations, synsets)
        expected = sum(graph.count(p) for p in pos_set)
        log.info("gloss sentences %d; synsets in WordNet %d; delta %d",
                 len(corpus), expected, expected - len(corpus))
    gold = corpora.build_gold(corpus, graph, store, tagging.load_stopwords(args.stopwords),
                              diagnostics)
    _write(tagging.format_columns(gold), args.output)
    if args.diagnostics:
        Path(args.diagnostics).write_text(_jsonl(diagnostics), "utf-8")
    log.info("sentences %d, diagnostics %d", len(gold), len(diagnostics))
    return 0


def _corpus_specs(specs: list[str]) -> dict[str, str]:
    out = {}
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).stem, spec
        out[name] = path
    return out


def cmd_evaluate(args) -> int:
    if not args.corpus:
        raise UsageError("at least one --corpus NAME=FILE is required")
    modes = tuple(args.mode) if args.mode else tagging.MODES
    if not args.wordnet:
        raise UsageError(f"--wordnet DIR is required (or set {WORDNET_ENV})")
    config = evaluation.EvaluationConfig(
        wordnet=args.wordnet, alignments=args.alignments, corpora=_corpus_specs(args.corpus),
        modes=modes, seed=args.seed, repetitions=args.repetitions, stopwords=args.stopwords,
        taxonomy=args.taxonomy, workers=args.workers)
    report = evaluation.evaluate_run(config)
    _write(report.to_json() if args.format == "json" else report.render_table(), args.output)
    return 0


def cmd_stats(args) -> int:
    graph = _wordnet(args)
    store = _alignments(args)
    result = dolce.stats(store, graph, normalize_pos(args.pos))
    if args.format == "json":
        _write(json.dumps(result.to_dict(), indent=2) + "\n", args.output)
    else:
        _write(result.render_table() + "\n", args.output)
    return 0


# -- parser ----------------------------------------------------------------------------

def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags win over its values")
    common.add_argument("--wordnet", metavar="DIR", default=os.environ.get(WORDNET_ENV),
                        help=f"WordNet dict directory (default ${WORDNET_ENV})")
    common.add_argument("--taxonomy", metavar="FILE", help="DOLCE class file (default: bundled)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--output", "-o", metavar="FILE", help="output file (default stdout)")
    common.add_argument("--log-level", default="INFO")

    parser = argparse.ArgumentParser(prog="fotag", description="Foundational ontology tagging.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    add("ingest", cmd_ingest, "parse a WordNet database and print its counts")

    p = add("migrate", cmd_migrate, "move seed alignments to another WordNet version")
    p.add_argument("--alignments", metavar="FILE", help="seed alignment TSV")
    p.add_argument("--map", required=True, metavar="FILE", help="synset mapping file")
    p.add_argument("--pos", default="n")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--report", metavar="FILE", help="JSONL migration report")

    p = add("propagate", cmd_propagate, "propagate seed classes down the hyponym taxonomy")
    p.add_argument("--alignments", metavar="FILE")
    p.add_argument("--conflict-policy", choices=propagation.CONFLICT_POLICIES,
                   default="first-parent")
    p.add_argument("--diagnostics", metavar="FILE")

    p = add("suggest", cmd_suggest, "show class candidates for verbs")
    p.add_argument("--alignments", metavar="FILE", help="noun alignment")
    p.add_argument("--overrides", metavar="FILE")
    p.add_argument("--synset", action="append", default=[],
                   help="verb as 00594621-v or lemma.pos.rank (default: all top-level verbs)")
    p.add_argument("--max-depth", type=int, default=verbs.DEFAULT_MAX_DEPTH)
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = add("curate", cmd_curate, "interactively record verb classes (append-only)")
    p.add_argument("--alignments", metavar="FILE", help="noun alignment")
    p.add_argument("--overrides", metavar="FILE")
    p.add_argument("--max-depth", type=int, default=verbs.DEFAULT_MAX_DEPTH)

    p = add("classify-verbs", cmd_classify_verbs, "align top-level verbs and propagate")
    p.add_argument("--alignments", metavar="FILE", help="noun alignment")
    p.add_argument("--overrides", metavar="FILE")
    p.add_argument("--max-depth", type=int, default=verbs.DEFAULT_MAX_DEPTH)
    p.add_argument("--stats", metavar="FILE", help="route statistics JSON")
    p.add_argument("--diagnostics", metavar="FILE")

    p = add("tag", cmd_tag, "label a column-format corpus")
    p.add_argument("--alignments", metavar="FILE")
    p.add_argument("--overrides", metavar="FILE")
    p.add_argument("--stopwords", metavar="FILE")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--mode", choices=tagging.MODES, default="mcs")
    p.add_argument("--seed", type=int, default=0)

    p = add("build-gold", cmd_build_gold, "build a gold-labeled column corpus")
    p.add_argument("--alignments", metavar="FILE")
    p.add_argument("--overrides", metavar="FILE")
    p.add_argument("--stopwords", metavar="FILE")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--semcor", metavar="DIR", help="SemCor directory")
    src.add_argument("--xwn", nargs="+", metavar="FILE", help="XWN gloss XML files")
    p.add_argument("--pos", default="n,v", help="gloss corpus parts of speech")
    p.add_argument("--diagnostics", metavar="FILE")

    p = add("evaluate", cmd_evaluate, "tag gold corpora and score them")
    p.add_argument("--alignments", metavar="FILE")
    p.add_argument("--stopwords", metavar="FILE")
    p.add_argument("--corpus", action="append", default=[], metavar="NAME=FILE")
    p.add_argument("--mode", action="append", choices=tagging.MODES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repetitions", type=int, default=evaluation.DEFAULT_REPETITIONS)
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = add("stats", cmd_stats, "per-class synset counts")
    p.add_argument("--alignments", metavar="FILE")
    p.add_argument("--pos", default="v")
    p.add_argument("--format", choices=("json", "table"), default="table")
    parser.commands = sub.choices
    return parser


_LIST_KEYS = {"corpus", "mode", "synset", "xwn"}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser.commands[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key not in known or key in ("config", "help", "func"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        action = known[key]
        if key in _LIST_KEYS:
            if getattr(args, key):
                continue  # given on the command line, which replaces the config list
            items = _csv_list(value)
            if action.choices:
                bad = [v for v in items if v not in action.choices]
                if bad:
                    raise UsageError(f"{args.config}: bad {key} value(s) {bad}")
            defaults[key] = items
        else:
            conv = action.type or str
            defaults[key] = conv(value)
            if action.choices and defaults[key] not in action.choices:
                raise UsageError(f"{args.config}: bad {key} value {value!r}")
    # command-line flags win: reparse with config values as defaults
    original = {k: known[k].default for k in defaults}
    sub.set_defaults(**defaults)
    try:
        return parser.parse_args(argv)
    finally:
        sub.set_defaults(**original)


def run_cli(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"fotag: error: {exc}\n")
        return 2
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        log_run(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"fotag {args.command}: error: {exc}\n")
        return 2
    except COMPONENT_ERRORS as exc:
        sys.stderr.write(f"fotag {args.command}: error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
