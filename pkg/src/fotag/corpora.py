"""Corpus readers and gold-standard construction.

Three sources of sentences are supported: SemCor-style SGML tagfiles, gloss
sentences built from the WordNet itself ("dog is a domestic animal"), and
eXtended-WordNet-style XML sense annotations of those glosses.
"""

from __future__ import annotations

import logging
import os
import re
import xml.etree.ElementTree as ET
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .dolce import NULL, AlignmentStore
from .tagging import (OTHER, AnnotatedCorpus, AnnotationUnit, Sentence, Token,
                      segment_corpus)
from .wordnet import ADJ, ADV, NOUN, VERB, LexicalGraph, SynsetId, lemma_key

log = logging.getLogger(__name__)


class CorpusError(Exception):
    pass


def penn_to_pos(tag: Optional[str]) -> Optional[str]:
    """Map a Penn Treebank tag to n/v/a/r, or 'x' for anything else."""
    if not tag:
        return None
    tag = tag.upper()
    if tag.startswith("NN"):
        return NOUN
    if tag.startswith("VB"):
        return VERB
    if tag.startswith("JJ"):
        return ADJ
    if tag.startswith("RB"):
        return ADV
    return OTHER


# -- SemCor -------------------------------------------------------------------------

_ATTR = re.compile(r'([\w-]+)=("[^"]*"|[^\s>]+)')
_SENTENCE = re.compile(r"<s\b[^>]*>(.*?)</s>", re.S)
_ELEMENT = re.compile(r"<(wf|punc)\b([^>]*)>(.*?)</\1>", re.S)


def _attrs(text: str) -> dict[str, str]:
    return {k.lower(): v.strip('"') for k, v in _ATTR.findall(text)}


def _first_int(value: Optional[str]) -> Optional[int]:
    """SemCor sense numbers may list alternatives ("1;2"); keep the first."""
    if not value:
        return None
    try:
        n = int(re.split(r"[;,]", value)[0])
    except ValueError:
        return None
    return n if n > 0 else None


def parse_semcor_text(text: str, where: str = "<semcor>",
                      diagnostics: Optional[list] = None) -> list[Sentence]:
    sentences = []
    for sm in _SENTENCE.finditer(text):
        tokens: list[Token] = []
        unit = 0
        for em in _ELEMENT.finditer(sm.group(1)):
            kind, attr_text, body = em.groups()
            surface = body.strip()
            if not surface:
                if diagnostics is not None:
                    diagnostics.append({"event": "skipped-element", "file": where,
                                        "element": em.group(0)[:80]})
                continue
            if kind == "punc":
                tokens.append(Token(surface, None, OTHER, unit=unit))
                unit += 1
                continue
            a = _attrs(attr_text)
            pos = penn_to_pos(a.get("pos"))
            lemma = a.get("lemma")
            rank = _first_int(a.get("wnsn")) if lemma and pos in (NOUN, VERB, ADJ, ADV) else None
            key = None
            if lemma and a.get("lexsn"):
                key = f"{lemma.lower()}%{a['lexsn'].split(';')[0]}"
            # the annotation lives on the first token of a multiword unit
            for i, part in enumerate(p for p in surface.split("_") if p):
                if i == 0:
                    tokens.append(Token(part, lemma, pos, rank, key, unit))
                else:
                    tokens.append(Token(part, None, pos, unit=unit))
            unit += 1
        if tokens:
            sentences.append(Sentence(tokens))
        elif diagnostics is not None:
            diagnostics.append({"event": "empty-sentence", "file": where})
    return sentences


def _tagfiles(directory: Path) -> list[Path]:
    parts = [directory / b / "tagfiles" for b in ("brown1", "brown2")]
    dirs = [p for p in parts if p.is_dir()] or [directory]
    files = []
    for d in dirs:
        files.extend(sorted(p for p in d.iterdir() if p.is_file() and not p.name.startswith(".")))
    return files


def parse_semcor(directory: Union[str, os.PathLike],
                 diagnostics: Optional[list] = None) -> AnnotatedCorpus:
    """Read the brown1 and brown2 tagfiles below *directory*.

    A directory without that layout is read as a flat set of tagfiles.
    Multiword word forms share one unit index; empty sentences are dropped.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"SemCor directory not found: {directory}")
    sentences = []
    for path in _tagfiles(directory):
        try:
            text = path.read_text("utf-8", errors="replace")
        except OSError as exc:
            raise CorpusError(f"cannot read {path}: {exc}") from None
        sentences.extend(parse_semcor_text(text, str(path), diagnostics))
    return AnnotatedCorpus(sentences, "semcor")


# -- glosses --------------------------------------------------------------------------

_PARENS = re.compile(r"\([^()]*\)")
_GLOSS_TOKEN = re.compile(r"[\w'-]+|[^\w\s]")


def gloss_text(gloss: str) -> str:
    """Definition part of a gloss: no quoted examples, no parenthesized notes."""
    text = gloss.split('"', 1)[0]
    prev = None
    while prev != text:
        prev, text = text, _PARENS.sub(" ", text)
    return " ".join(text.split()).strip(" ;")


def tokenize_gloss(text: str) -> list[str]:
    return _GLOSS_TOKEN.findall(text)


@dataclass
class XwnAnnotations:
    glosses: dict[SynsetId, list[Token]] = field(default_factory=dict)
    skipped: int = 0


_GLOSS_BLOCK = re.compile(r"<gloss\b.*?</gloss>", re.S)
_XWN_POS = {"NOUN": NOUN, "VERB": VERB, "ADJ": ADJ, "ADV": ADV}


def parse_xwn_text(text: str, annotations: Optional[XwnAnnotations] = None) -> XwnAnnotations:
    """Collect (token, lemma, sense) triples from eXtended WordNet gloss XML.

    Each ``<gloss>`` element is parsed on its own; elements that fail to
    parse are counted in ``skipped``.
    """
    out = annotations or XwnAnnotations()
    for block in _GLOSS_BLOCK.findall(text):
        try:
            gloss = ET.fromstring(block)
            pos = _XWN_POS[gloss.get("pos", "").upper()]
            sid = SynsetId(int(gloss.get("synsetID", "")), pos)
        except (ET.ParseError, KeyError, ValueError):
            out.skipped += 1
            continue
        wsd = gloss.find("wsd")
        if wsd is None:
            out.skipped += 1
            continue
        tokens: list[Token] = []
        for unit, wf in enumerate(wsd.iter("wf")):
            surface = (wf.text or "").strip()
            if not surface:
                continue
            tpos = penn_to_pos(wf.get("pos"))
            lemma = wf.get("lemma")
            rank = _first_int(wf.get("wnsn")) if lemma and tpos in (NOUN, VERB, ADJ, ADV) else None
            for i, part in enumerate(p for p in surface.split("_") if p):
                tokens.append(Token(part, lemma if i == 0 else None, tpos,
                                    rank if i == 0 else None, None, unit))
        if tokens:
            out.glosses[sid] = tokens
        else:
            out.skipped += 1
    return out


def parse_xwn(files: Iterable[Union[str, os.PathLike]]) -> XwnAnnotations:
    out = XwnAnnotations()
    for f in sorted(Path(p) for p in files):
        try:
            text = f.read_text("utf-8", errors="replace")
        except OSError as exc:
            raise CorpusError(f"cannot read {f}: {exc}") from None
        parse_xwn_text(text, out)
    return out


def gloss_sentence(graph: LexicalGraph, sid: SynsetId,
                   annotated: Optional[list[Token]] = None) -> Sentence:
    synset = graph.synset(sid)
    head = synset.head
    sense = graph.sense_for(head, sid.pos, sid)
    rank = sense.rank if sense else None
    parts = head.split("_")
    tokens = [Token(parts[0], head, sid.pos, rank, unit=0)]
    tokens.extend(Token(p, None, sid.pos, unit=0) for p in parts[1:])
    tokens.append(Token("is", "be", VERB, unit=1))
    if annotated is not None:
        offset = 2
        tokens.extend(replace(t, unit=None if t.unit is None else t.unit + offset)
                      for t in annotated)
    else:
        tokens.extend(Token(w) for w in tokenize_gloss(gloss_text(synset.gloss)))
    return Sentence(tokens)


def build_gloss_corpus(graph: LexicalGraph, pos_set: Iterable[str] = (NOUN, VERB),
                       annotations: Optional[XwnAnnotations] = None,
                       synsets: Optional[Iterable[SynsetId]] = None) -> AnnotatedCorpus:
    """One "<head> is <gloss>" sentence per synset, segmented.

    *synsets* restricts the corpus to a given list (for instance the synsets
    an annotation release covers); otherwise every synset of *pos_set* is used.
    """
    pos_set = tuple(pos_set)
    bad = [p for p in pos_set if p not in (NOUN, VERB)]
    if bad:
        raise ValueError(f"gloss corpora cover nouns and verbs only, got {bad}")
    ids = [s for s in synsets if s.pos in pos_set] if synsets is not None else \
        [s for p in pos_set for s in graph.ids(p)]
    glosses = annotations.glosses if annotations else {}
    sentences = [gloss_sentence(graph, sid, glosses.get(sid)) for sid in ids]
    return segment_corpus(AnnotatedCorpus(sentences, "glosses"), graph)


# -- gold labels ------------------------------------------------------------------------

def resolve_unit(unit: AnnotationUnit, graph: LexicalGraph) -> tuple[Optional[SynsetId], Optional[str]]:
    """Synset of an annotated unit, or (None, reason)."""
    if unit.sense_key and unit.sense_key in graph.sense_keys:
        return graph.sense_keys[unit.sense_key].synset, None
    if unit.sense_rank is None:
        return None, "unannotated" if not unit.sense_key else "unknown-sense-key"
    senses = graph.senses(lemma_key(unit.lemma or ""), unit.pos or "")
    if not senses:
        return None, "unknown-lemma"
    if unit.sense_rank > len(senses):
        return None, "rank-out-of-range"
    return senses[unit.sense_rank - 1].synset, None


def build_gold(corpus: AnnotatedCorpus, graph: LexicalGraph, store: AlignmentStore,
               stopwords: Iterable[str],
               diagnostics: Optional[list] = None) -> AnnotatedCorpus:
    """Label every unit with the class of its annotated sense.

    Adjectives, adverbs, stopwords and unannotated units get the null label,
    as do annotated units whose synset cannot be resolved or is unaligned
    (those two are reported through *diagnostics*).
    """
    stopwords = frozenset(stopwords)
    corpus = segment_corpus(corpus, graph)
    out = []
    for si, sentence in enumerate(corpus.sentences):
        units = []
        for ui, unit in enumerate(sentence.units):
            label, synset = NULL, None
            lemma = lemma_key(unit.lemma or "")
            if unit.pos in (NOUN, VERB) and lemma not in stopwords:
                synset, reason = resolve_unit(unit, graph)
                if synset is None:
                    if reason != "unannotated" and diagnostics is not None:
                        diagnostics.append({"event": reason, "sentence": si, "unit": ui,
                                            "lemma": unit.lemma, "pos": unit.pos,
                                            "sense_rank": unit.sense_rank,
                                            "sense_key": unit.sense_key})
                else:
                    cls = store.class_of(synset)
                    if cls is None:
                        if diagnostics is not None:
                            diagnostics.append({"event": "unmapped-synset", "sentence": si,
                                                "unit": ui, "synset": str(synset)})
                    else:
                        label = cls
            units.append(replace(unit, label=label, synset=synset))
        out.append(Sentence(list(sentence.tokens), units))
    return AnnotatedCorpus(out, corpus.name)

