"""Foundational-ontology tagging of annotation units.

Sentences are split into annotation units (single words or multiword
WordNet entries).  Each unit is labeled with the DOLCE class of its
most-common sense, or of a randomly drawn sense for the baseline.  Function
words, adjectives and adverbs get the null label.
"""

from __future__ import annotations

import logging
import os
import random
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .dolce import NULL, AlignmentStore
from .wordnet import (ADJ, ADV, NOUN, VERB, LexicalGraph, SenseEntry, SynsetId,
                      lemma_key, normalize_lemma)

log = logging.getLogger(__name__)

OTHER = "x"  # known part of speech outside WordNet's four
UNIT_POS = (NOUN, VERB, ADJ, ADV, OTHER)
MODES = ("mcs", "random")


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: Optional[str] = None
    pos: Optional[str] = None
    sense_rank: Optional[int] = None
    sense_key: Optional[str] = None
    unit: Optional[int] = None  # corpus-provided unit grouping

    def __post_init__(self):
        if self.sense_rank is not None and (self.lemma is None or self.pos is None):
            raise ValueError(f"token {self.surface!r} has a sense number but no lemma/pos")


@dataclass(frozen=True)
class AnnotationUnit:
    start: int
    end: int  # exclusive
    lemma: Optional[str]
    pos: Optional[str] = None
    label: Optional[str] = None  # None = not labeled yet, NULL = null label
    sense_rank: Optional[int] = None
    sense_key: Optional[str] = None
    synset: Optional[SynsetId] = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class Sentence:
    tokens: list[Token]
    units: list[AnnotationUnit] = field(default_factory=list)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def check_units(self) -> None:
        pos = 0
        for u in self.units:
            if u.start < pos or u.end <= u.start or u.end > len(self.tokens):
                raise ValueError(f"bad unit span {u.span} in sentence of {len(self.tokens)} tokens")
            pos = u.end


@dataclass
class AnnotatedCorpus:
    sentences: list[Sentence] = field(default_factory=list)
    name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def units(self) -> Iterator[AnnotationUnit]:
        for s in self.sentences:
            yield from s.units

    def with_labels(self, labels: Sequence[Sequence[Optional[str]]]) -> "AnnotatedCorpus":
        sentences = []
        for s, row in zip(self.sentences, labels):
            sentences.append(Sentence(list(s.tokens),
                                      [replace(u, label=lab) for u, lab in zip(s.units, row)]))
        return AnnotatedCorpus(sentences, self.name)

    def unlabeled(self) -> "AnnotatedCorpus":
        return self.with_labels([[None] * len(s.units) for s in self.sentences])


def load_stopwords(file: Union[str, os.PathLike, None] = None) -> frozenset[str]:
    if file is None:
        text = resources.files("fotag.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(file).read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines()
                     if w.strip() and not w.startswith("#"))


# -- segmentation ------------------------------------------------------------

def _base_form(graph: LexicalGraph, token: Token) -> str:
    if token.lemma:
        return lemma_key(token.lemma)
    poses = [token.pos] if token.pos in (NOUN, VERB, ADJ, ADV) else [NOUN, VERB]
    for pos in poses:
        found = normalize_lemma(graph, token.surface, pos)
        if found:
            return found[0]
    return lemma_key(token.surface)


def _unit_from_group(tokens: Sequence[Token], start: int, end: int) -> AnnotationUnit:
    head = tokens[start]
    lemma = head.lemma or "_".join(lemma_key(t.surface) for t in tokens[start:end])
    return AnnotationUnit(start, end, lemma_key(lemma), head.pos, None,
                          head.sense_rank, head.sense_key)


def segment_units(sentence: Sequence[Token], graph: LexicalGraph) -> list[AnnotationUnit]:
    """Group tokens into annotation units.

    Corpus-provided groupings are kept.  Remaining tokens are matched
    greedily, longest run first, against multiword entries of the noun and
    then the verb index.
    """
    tokens = list(sentence)
    units: list[AnnotationUnit] = []
    i = 0
    n = len(tokens)
    base = [_base_form(graph, t) if t.unit is None else "" for t in tokens]
    surface = [lemma_key(t.surface) for t in tokens]
    while i < n:
        tok = tokens[i]
        if tok.unit is not None:
            j = i + 1
            while j < n and tokens[j].unit == tok.unit:
                j += 1
            unit = _unit_from_group(tokens, i, j)
            if (j - i > 1 and unit.pos in (NOUN, VERB) and unit.sense_key is None
                    and not graph.has_lemma(unit.lemma, unit.pos)):
                log.info("multiword %r has no %s entry; splitting into single tokens",
                         unit.lemma, unit.pos)
                for k in range(i, j):
                    t = tokens[k]
                    units.append(AnnotationUnit(k, k + 1, _base_form(graph, replace(t, lemma=None)),
                                                t.pos))
            else:
                units.append(unit)
            i = j
            continue
        matched = None
        for forms in (base, surface):
            key = forms[i]
            j = i + 1
            while (j < n and tokens[j].unit is None and j - i < graph.max_lemma_words
                   and graph.is_multiword_prefix(key)):
                key = f"{key}_{forms[j]}"
                j += 1
                pos = next((p for p in (NOUN, VERB) if graph.has_lemma(key, p)), None)
                if pos and (matched is None or j > matched.end):
                    matched = AnnotationUnit(i, j, key, pos)
        if matched is None:
            matched = AnnotationUnit(i, i + 1, base[i], tok.pos, None,
                                     tok.sense_rank, tok.sense_key)
        units.append(matched)
        i = matched.end
    return units


def segment_corpus(corpus: AnnotatedCorpus, graph: LexicalGraph) -> AnnotatedCorpus:
    """Segment every sentence that does not carry units yet."""
    out = []
    for s in corpus.sentences:
        units = s.units if s.units else segment_units(s.tokens, graph)
        out.append(Sentence(list(s.tokens), list(units)))
    return AnnotatedCorpus(out, corpus.name)


# -- labeling ------------------------------------------------------------------

def unit_senses(unit: AnnotationUnit, graph: LexicalGraph, stopwords: Iterable[str],
                merge_pos: bool = False) -> list[SenseEntry]:
    """Senses a tagger may choose from; empty means the null label.

    With an unknown part of speech the noun senses are used when present,
    otherwise the verb senses; *merge_pos* pools both instead.
    """
    if not unit.lemma:
        return []
    lemma = lemma_key(unit.lemma)
    if lemma in stopwords or unit.pos in (ADJ, ADV, OTHER):
        return []
    poses = [unit.pos] if unit.pos in (NOUN, VERB) else [NOUN, VERB]
    pooled: list[SenseEntry] = []
    for pos in poses:
        senses = list(graph.senses(lemma, pos))
        if not senses:
            base = normalize_lemma(graph, lemma, pos)
            if base:
                senses = list(graph.senses(base[0], pos))
        if senses and not merge_pos:
            return senses
        pooled.extend(senses)
    return pooled


def _label(store: AlignmentStore, sense: SenseEntry) -> str:
    return store.class_of(sense.synset) or NULL


def tag_mcs(unit: AnnotationUnit, graph: LexicalGraph, store: AlignmentStore,
            stopwords: Iterable[str]) -> str:
    senses = unit_senses(unit, graph, stopwords)
    return _label(store, senses[0]) if senses else NULL


def tag_random(unit: AnnotationUnit, graph: LexicalGraph, store: AlignmentStore,
               stopwords: Iterable[str], rng_seed) -> str:
    """Label of a uniformly drawn sense; deterministic for a given *rng_seed*."""
    senses = unit_senses(unit, graph, stopwords, merge_pos=True)
    if not senses:
        return NULL
    return _label(store, random.Random(rng_seed).choice(senses))


def _tag_sentence(args) -> list[str]:
    index, sentence, mode, graph, store, stopwords, seed = args
    labels = []
    for k, unit in enumerate(sentence.units):
        if mode == "mcs":
            labels.append(tag_mcs(unit, graph, store, stopwords))
        else:
            labels.append(tag_random(unit, graph, store, stopwords, f"{seed}:{index}:{k}"))
    return labels


def tag_corpus(corpus: AnnotatedCorpus, mode: str, graph: LexicalGraph, store: AlignmentStore,
               stopwords: Iterable[str], seed=0, workers: int = 1) -> AnnotatedCorpus:
    """Label every unit; sentences without units are segmented first.

    Random draws are seeded per unit from (*seed*, sentence, unit), so the
    result does not depend on *workers*.
    """
    if mode not in MODES:
        raise ValueError(f"unknown tagging mode {mode!r}")
    corpus = segment_corpus(corpus, graph)
    stopwords = frozenset(stopwords)
    jobs = [(i, s, mode, graph, store, stopwords, seed) for i, s in enumerate(corpus.sentences)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            labels = list(pool.map(_tag_sentence, jobs))
    else:
        labels = [_tag_sentence(j) for j in jobs]
    return corpus.with_labels(labels)


# -- column format ---------------------------------------------------------------
#
# surface  lemma  pos  sense  unit  gold  pred     ("-" marks an empty field)

COLUMNS = ("surface", "lemma", "pos", "sense", "unit", "gold", "pred")


class ColumnFormatError(ValueError):
    pass


def _field(value) -> str:
    if value is None or value == "":
        return "-"
    return str(value).replace("\t", " ")


def _sense_field(rank: Optional[int], key: Optional[str]) -> str:
    if rank is None and key is None:
        return "-"
    if key is None:
        return str(rank)
    if rank is None:
        return key
    return f"{rank}|{key}"


def format_columns(corpus: AnnotatedCorpus, gold: Optional[AnnotatedCorpus] = None) -> str:
    """Render *corpus* (predicted labels) and optionally *gold* side by side.

    When *gold* is omitted the corpus labels go in the gold column.
    """
    lines = []
    for si, sentence in enumerate(corpus.sentences):
        unit_of = {}
        for k, u in enumerate(sentence.units):
            for t in range(u.start, u.end):
                unit_of[t] = (k, u)
        gold_of = {}
        if gold is not None:
            for u in gold.sentences[si].units:
                for t in range(u.start, u.end):
                    gold_of[t] = u.label
        for ti, tok in enumerate(sentence.tokens):
            k, u = unit_of.get(ti, (None, None))
            lemma = u.lemma if u else tok.lemma
            pos = u.pos if u else tok.pos
            rank = u.sense_rank if u else tok.sense_rank
            key = u.sense_key if u else tok.sense_key
            if gold is None:
                g, p = (u.label if u else None), None
            else:
                g, p = gold_of.get(ti), (u.label if u else None)
            lines.append("\t".join([_field(tok.surface), _field(lemma), _field(pos),
                                    _sense_field(rank, key), _field(k), _field(g), _field(p)]))
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_columns(text: str, label_column: str = "gold", name: str = "",
                  where: str = "<columns>") -> AnnotatedCorpus:
    """Read the column format; unit labels come from *label_column*."""
    if label_column not in ("gold", "pred"):
        raise ValueError("label_column must be 'gold' or 'pred'")
    col = COLUMNS.index(label_column)
    sentences: list[Sentence] = []
    rows: list[list[str]] = []

    def flush():
        if rows:
            sentences.append(_sentence_from_rows(rows, col, where))
            rows.clear()

    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("#"):
            continue
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        if len(parts) < 5:
            raise ColumnFormatError(f"{where}:{lineno}: expected at least 5 columns")
        parts += ["-"] * (len(COLUMNS) - len(parts))
        rows.append(parts + [str(lineno)])
    flush()
    return AnnotatedCorpus(sentences, name)


def _sense_parts(value: str, where: str) -> tuple[Optional[int], Optional[str]]:
    if value == "-":
        return None, None
    rank_text, _, key = value.partition("|")
    if not key and "%" in rank_text:
        return None, rank_text
    try:
        return int(rank_text), key or None
    except ValueError:
        raise ColumnFormatError(f"{where}: bad sense field {value!r}") from None


def _sentence_from_rows(rows: list[list[str]], label_col: int, where: str) -> Sentence:
    tokens = []
    for r in rows:
        loc = f"{where}:{r[-1]}"
        rank, key = _sense_parts(r[3], loc)
        pos = None if r[2] == "-" else r[2]
        if pos is not None and pos not in UNIT_POS:
            raise ColumnFormatError(f"{loc}: unknown pos {pos!r}")
        try:
            unit = None if r[4] == "-" else int(r[4])
        except ValueError:
            raise ColumnFormatError(f"{loc}: bad unit index {r[4]!r}") from None
        lemma = None if r[1] == "-" else r[1]
        try:
            tokens.append(Token(r[0], lemma, pos, rank, key, unit))
        except ValueError as exc:
            raise ColumnFormatError(f"{loc}: {exc}") from None
    units = []
    if tokens and all(t.unit is not None for t in tokens):
        i = 0
        while i < len(tokens):
            j = i + 1
            while j < len(tokens) and tokens[j].unit == tokens[i].unit:
                j += 1
            head = tokens[i]
            label = rows[i][label_col]
            units.append(AnnotationUnit(i, j, head.lemma, head.pos,
                                        None if label == "-" else label,
                                        head.sense_rank, head.sense_key))
            i = j
    return Sentence(tokens, units)


def read_columns(file: Union[str, os.PathLike], label_column: str = "gold",
                 name: Optional[str] = None) -> AnnotatedCorpus:
    path = Path(file)
    return parse_columns(path.read_text("utf-8"), label_column,
                         name if name is not None else path.stem, str(path))


def write_columns(corpus: AnnotatedCorpus, file: Union[str, os.PathLike],
                  gold: Optional[AnnotatedCorpus] = None) -> None:
    Path(file).write_text(format_columns(corpus, gold), "utf-8")
