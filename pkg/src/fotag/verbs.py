"""Classify top-level verbs through their links to perdurant nouns.

Four routes, in order of preference:

* direct: a derivationally related noun whose class is a perdurant;
* indirect: a breadth-first path over antonym, verb-group and
  derivational links ending at an aligned noun or verb;
* gloss heuristics: suggestions only, never applied automatically;
* curated overrides, which always win.
"""

from __future__ import annotations

import datetime as _dt
import os
import re
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .dolce import (AlignmentRecord, AlignmentStore, DolceTaxonomy, VERB_CLASSES,
                    default_taxonomy)
from .propagation import PropagationConfig, propagate, roots
from .wordnet import NOUN, VERB, LexicalGraph, Relation, Synset, SynsetId, related

OCCURRENCE_CUES = ("the act of", "the process of", "the state of")
CUE_VARIANTS = ("an act of", "a process of", "a state of")
LINK_RELATIONS = (Relation.ANTONYM, Relation.VERB_GROUP, Relation.DERIVATIONALLY_RELATED)
REQUIRES_REVIEW = "requires review"
DEFAULT_MAX_DEPTH = 3


class OverrideError(ValueError):
    pass


@dataclass(frozen=True)
class Hop:
    relation: Relation
    target: SynsetId
    lemma: Optional[str] = None

    def __str__(self) -> str:
        name = f"{self.lemma}[{self.target}]" if self.lemma else str(self.target)
        return f"{self.relation.value}->{name}"


@dataclass(frozen=True)
class Candidate:
    verb: SynsetId
    proposed_class: Optional[str]
    route: str
    path: tuple[Hop, ...] = ()
    confidence_notes: str = ""
    cue: Optional[str] = None

    @property
    def requires_review(self) -> bool:
        return REQUIRES_REVIEW in self.confidence_notes

    @property
    def terminal(self) -> Optional[SynsetId]:
        return self.path[-1].target if self.path else None

    def describe(self) -> str:
        hops = " ".join(str(h) for h in self.path)
        text = f"{self.route}: {self.proposed_class or '-'}"
        if hops:
            text += f" via {hops}"
        if self.confidence_notes:
            text += f" ({self.confidence_notes})"
        return text

    def to_dict(self) -> dict:
        return {
            "verb": str(self.verb), "class": self.proposed_class, "route": self.route,
            "path": [{"relation": h.relation.value, "target": str(h.target), "lemma": h.lemma}
                     for h in self.path],
            "notes": self.confidence_notes, "cue": self.cue,
        }


def occurrence_cue(gloss: str) -> tuple[Optional[str], bool]:
    """Return the occurrence cue opening *gloss* and whether it is a variant."""
    text = " ".join(gloss.lower().split())
    for cue in OCCURRENCE_CUES:
        if text.startswith(cue + " "):
            return cue, False
    for cue in CUE_VARIANTS:
        if text.startswith(cue + " "):
            return cue, True
    return None, False


def _rank(c: Candidate) -> tuple:
    if c.cue is None:
        cue_rank = 2
    else:
        cue_rank = 1 if c.cue in CUE_VARIANTS else 0
    return (cue_rank, len(c.path), c.terminal or c.verb)


def direct_candidates(graph: LexicalGraph, verb: SynsetId, noun_store: AlignmentStore,
                      taxonomy: Optional[DolceTaxonomy] = None) -> list[Candidate]:
    """Derivationally related nouns that can stand for the verb's occurrence.

    A noun qualifies when its aligned class falls under one of the verb
    classes.  Nouns whose gloss opens with an occurrence cue ("the act of",
    ...) rank first.
    """
    taxonomy = taxonomy or default_taxonomy()
    out = []
    seen = set()
    for link in related(graph, verb, Relation.DERIVATIONALLY_RELATED):
        if link.target.pos != NOUN or link.target in seen:
            continue
        seen.add(link.target)
        noun_class = noun_store.class_of(link.target)
        verb_class = taxonomy.verb_class(noun_class) if noun_class else None
        if verb_class is None:
            continue
        cue, variant = occurrence_cue(graph.synset(link.target).gloss)
        notes = [f"noun class {noun_class}"]
        if cue:
            notes.append(f"gloss cue '{cue}'" + (" (variant)" if variant else ""))
        out.append(Candidate(verb, verb_class, "direct",
                             (Hop(Relation.DERIVATIONALLY_RELATED, link.target, link.target_lemma),),
                             "; ".join(notes), cue))
    return sorted(out, key=_rank)


def _link_hops(graph: LexicalGraph, sid: SynsetId) -> list[Hop]:
    hops = []
    for p in graph.synset(sid).pointers:
        if p.relation in LINK_RELATIONS:
            hops.append(Hop(p.relation, p.target, graph.lemma_of(p.target, p.target_word)
                            or graph.synset(p.target).head))
    return hops


def _terminal_class(sid: SynsetId, store: AlignmentStore, taxonomy: DolceTaxonomy) -> Optional[str]:
    cls = store.class_of(sid)
    if cls is None:
        return None
    if sid.pos == VERB:
        return cls if cls in VERB_CLASSES else None
    if sid.pos == NOUN:
        return taxonomy.verb_class(cls)
    return None


def indirect_paths(graph: LexicalGraph, verb: SynsetId, store: AlignmentStore,
                   max_depth: int = DEFAULT_MAX_DEPTH,
                   taxonomy: Optional[DolceTaxonomy] = None) -> list[Candidate]:
    """Breadth-first search from *verb* to the nearest aligned nodes.

    Paths never revisit a synset and stop at the first aligned node they
    reach.  Candidates come back ordered by path length, then terminal id.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    taxonomy = taxonomy or default_taxonomy()
    graph.synset(verb)
    visited = {verb}
    level: list[tuple[SynsetId, tuple[Hop, ...]]] = [(verb, ())]
    found = []
    for _ in range(max_depth):
        following = []
        for node, path in level:
            for hop in _link_hops(graph, node):
                if hop.target in visited:
                    continue
                visited.add(hop.target)
                steps = path + (hop,)
                cls = _terminal_class(hop.target, store, taxonomy)
                if cls is None:
                    following.append((hop.target, steps))
                    continue
                notes = [f"terminal class {store.class_of(hop.target)}"]
                if any(h.relation is Relation.ANTONYM for h in steps):
                    notes.append(REQUIRES_REVIEW)
                found.append(Candidate(verb, cls, "indirect", steps, "; ".join(notes)))
        level = following
    return sorted(found, key=lambda c: (len(c.path), c.terminal))


_BE = re.compile(r"be\b")
_FORM = re.compile(r"form\b")


def gloss_heuristics(synset: Synset) -> Optional[Candidate]:
    """Suggest a class from the wording of a verb gloss.

    Glosses opening with "be" point to a state; glosses opening with
    "form" only ask the curator to compare similar glosses.
    """
    text = synset.gloss.lower().lstrip()
    if _BE.match(text):
        return Candidate(synset.id, "state", "gloss-heuristic", (),
                         "gloss begins with 'be'", "be")
    if _FORM.match(text):
        return Candidate(synset.id, None, "gloss-heuristic", (),
                         "compare sibling glosses", "form")
    return None


_TOKEN = re.compile(r"[a-z]+")
_GLOSS_STOP = frozenset(
    "a an the of or and to in on over for with by be from into as at is its it".split())


def similar_glosses(graph: LexicalGraph, verb: SynsetId, store: AlignmentStore,
                    limit: int = 5) -> list[tuple[float, SynsetId, str]]:
    """Aligned verbs whose definitions share the most content words with *verb*."""
    def words(sid):
        return set(_TOKEN.findall(graph.synset(sid).definition.lower())) - _GLOSS_STOP

    mine = words(verb)
    if not mine:
        return []
    scored = []
    for sid, rec in store.items():
        if sid.pos != VERB or sid == verb:
            continue
        other = words(sid)
        overlap = len(mine & other)
        if overlap:
            scored.append((overlap / len(mine | other), sid, rec.dolce_class))
    scored.sort(key=lambda x: (-x[0], x[1]))
    return scored[:limit]


# -- overrides ---------------------------------------------------------------------

@dataclass(frozen=True)
class OverrideRow:
    synset: SynsetId
    dolce_class: str
    justification: str = ""


@dataclass
class OverrideFile:
    rows: list[OverrideRow] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.synset in seen:
                raise OverrideError(f"more than one override row for {row.synset}")
            seen.add(row.synset)

    def __len__(self) -> int:
        return len(self.rows)

    def by_synset(self) -> dict[SynsetId, OverrideRow]:
        return {r.synset: r for r in self.rows}


def parse_overrides(text: str, where: str = "<overrides>") -> OverrideFile:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 2:
            parts.append("")
        if len(parts) != 3:
            raise OverrideError(f"{where}:{lineno}: expected 'synset_id<TAB>class<TAB>justification'")
        try:
            sid = SynsetId.parse(parts[0])
        except ValueError as exc:
            raise OverrideError(f"{where}:{lineno}: {exc}") from None
        rows.append(OverrideRow(sid, parts[1].strip(), parts[2].strip()))
    try:
        return OverrideFile(rows)
    except OverrideError as exc:
        raise OverrideError(f"{where}: {exc}") from None


def load_overrides(file: Union[str, os.PathLike]) -> OverrideFile:
    path = Path(file)
    if not path.exists():
        return OverrideFile()
    return parse_overrides(path.read_text("utf-8"), str(path))


def append_overrides(file: Union[str, os.PathLike], rows: Sequence[OverrideRow],
                     session_date: Optional[_dt.date] = None) -> None:
    """Append *rows* under a session header; earlier content is never rewritten."""
    if not rows:
        return
    session_date = session_date or _dt.date.today()
    with open(file, "a", encoding="utf-8") as fh:
        fh.write(f"# curation session {session_date.isoformat()}\n")
        for r in rows:
            fh.write(f"{r.synset}\t{r.dolce_class}\t{' '.join(r.justification.split())}\n")


def apply_overrides(store: AlignmentStore, overrides: OverrideFile,
                    graph: Optional[LexicalGraph] = None,
                    diagnostics: Optional[list] = None) -> AlignmentStore:
    """Insert or replace override rows with provenance ``manual``.

    Replaced records are reported through *diagnostics* when given.
    """
    bad = [r for r in overrides.rows
           if r.synset.pos == VERB and r.dolce_class not in VERB_CLASSES]
    if bad:
        listing = ", ".join(f"{r.synset}\t{r.dolce_class}" for r in bad)
        raise OverrideError(f"non-perdurant class for verb override rows: {listing}")
    if graph is not None:
        missing = [str(r.synset) for r in overrides.rows if r.synset not in graph]
        if missing:
            raise OverrideError(f"override synsets not in WordNet: {', '.join(missing)}")
    new = []
    for r in overrides.rows:
        old = store.get(r.synset)
        if old is not None and diagnostics is not None:
            diagnostics.append({
                "event": "override", "synset": str(r.synset),
                "old_class": old.dolce_class, "old_provenance": old.provenance,
                "old_evidence": old.evidence, "new_class": r.dolce_class,
            })
        new.append(AlignmentRecord(r.synset, r.dolce_class, "manual", r.justification))
    return store.with_records(new)


# -- top-level classification ------------------------------------------------------

@dataclass
class RootDecision:
    verb: SynsetId
    record: Optional[AlignmentRecord]
    direct: list[Candidate]
    indirect: list[Candidate]
    heuristic: Optional[Candidate]

    @property
    def route(self) -> str:
        return self.record.provenance if self.record else "unresolved"

    @property
    def pending_review(self) -> bool:
        return self.record is None and any(c.requires_review for c in self.indirect)


@dataclass
class RouteStats:
    counts: dict[str, int]
    total: int
    unresolved: list[SynsetId] = field(default_factory=list)
    pending_review: list[SynsetId] = field(default_factory=list)

    def fraction(self, route: str) -> float:
        return self.counts.get(route, 0) / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": dict(self.counts),
            "percent": {k: round(100 * self.fraction(k), 2) for k in self.counts},
            "unresolved": [str(s) for s in self.unresolved],
            "pending_review": [str(s) for s in self.pending_review],
        }


def decide_root(graph: LexicalGraph, verb: SynsetId, noun_store: AlignmentStore,
                overrides: dict[SynsetId, OverrideRow], search_store: AlignmentStore,
                max_depth: int = DEFAULT_MAX_DEPTH,
                taxonomy: Optional[DolceTaxonomy] = None) -> RootDecision:
    taxonomy = taxonomy or default_taxonomy()
    direct = direct_candidates(graph, verb, noun_store, taxonomy)
    indirect = [] if direct else indirect_paths(graph, verb, search_store, max_depth, taxonomy)
    heuristic = gloss_heuristics(graph.synset(verb))
    record = None
    row = overrides.get(verb)
    if row is not None:
        confirmed = next((c for c in indirect
                          if c.requires_review and c.proposed_class == row.dolce_class), None)
        if confirmed is not None and not any(not c.requires_review for c in indirect):
            record = AlignmentRecord(verb, row.dolce_class, "indirect",
                                     f"{confirmed.describe()}; confirmed by curator")
        else:
            record = AlignmentRecord(verb, row.dolce_class, "manual", row.justification)
    elif direct:
        best = direct[0]
        record = AlignmentRecord(verb, best.proposed_class, "direct", best.describe())
    else:
        auto = [c for c in indirect if not c.requires_review]
        if auto:
            record = AlignmentRecord(verb, auto[0].proposed_class, "indirect", auto[0].describe())
    return RootDecision(verb, record, direct, indirect, heuristic)


def classify_top_verbs(graph: LexicalGraph, noun_store: AlignmentStore,
                       overrides: Optional[OverrideFile] = None,
                       max_depth: int = DEFAULT_MAX_DEPTH,
                       taxonomy: Optional[DolceTaxonomy] = None,
                       workers: int = 1) -> tuple[AlignmentStore, RouteStats, list[RootDecision]]:
    """Align every top-level verb; unresolved roots are listed, not raised.

    Indirect search sees the noun alignment plus the override rows, never
    other automatically classified verbs, so each root is decided
    independently of processing order.
    """
    taxonomy = taxonomy or default_taxonomy()
    overrides = overrides or OverrideFile()
    rows = overrides.by_synset()
    apply_overrides(AlignmentStore(), overrides, graph)  # validates rows
    search_store = noun_store.for_pos(NOUN).with_records(
        AlignmentRecord(r.synset, r.dolce_class, "manual", r.justification)
        for r in overrides.rows)
    top = roots(graph, VERB)

    def decide(verb):
        return decide_root(graph, verb, noun_store, rows, search_store, max_depth, taxonomy)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            decisions = list(pool.map(decide, top))
    else:
        decisions = [decide(v) for v in top]

    counts = {"direct": 0, "indirect": 0, "manual": 0, "unresolved": 0}
    for d in decisions:
        counts[d.route] += 1
    stats = RouteStats(counts, len(top),
                       [d.verb for d in decisions if d.record is None],
                       [d.verb for d in decisions if d.pending_review])
    store = AlignmentStore(d.record for d in decisions if d.record is not None)
    return store, stats, decisions


def build_verb_alignment(graph: LexicalGraph, noun_store: AlignmentStore,
                         overrides: Optional[OverrideFile] = None,
                         max_depth: int = DEFAULT_MAX_DEPTH,
                         taxonomy: Optional[DolceTaxonomy] = None,
                         workers: int = 1):
    """Classify the top-level verbs, then propagate down the troponym links."""
    top_store, stats, decisions = classify_top_verbs(
        graph, noun_store, overrides, max_depth, taxonomy, workers)
    # overrides may also pin verbs below the top level
    extra = [r for r in (overrides or OverrideFile()).rows
             if r.synset.pos == VERB and r.synset not in top_store]
    seeds = apply_overrides(top_store, OverrideFile(extra), graph)
    verbs, diagnostics = propagate(graph, seeds, PropagationConfig({Relation.HYPONYM}))
    return verbs, stats, diagnostics
