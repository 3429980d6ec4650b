"""DOLCE class inventory and the synset-to-class alignment store."""

from __future__ import annotations

import functools
import os
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .wordnet import LexicalGraph, SynsetId, VERB

PROVENANCES = ("seed", "direct", "indirect", "manual", "inherited")
VERB_CLASSES = ("event", "state", "process", "cognitive-event", "cognitive-state")
PERDURANT = "perdurant"
ROOT_CLASS = "particular"
NULL = "NULL"


class TaxonomyError(ValueError):
    pass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class DolceClass:
    name: str
    parent: Optional[str] = None


class DolceTaxonomy:
    """A class tree rooted at ``particular``."""

    def __init__(self, classes: Iterable[DolceClass]):
        table: dict[str, DolceClass] = {}
        for c in classes:
            if c.name in table:
                raise TaxonomyError(f"duplicate class {c.name!r}")
            table[c.name] = c
        self._classes = table
        self._validate()
        self._ancestors = {name: tuple(self._walk(name)) for name in table}

    def _walk(self, name: str) -> Iterator[str]:
        while name is not None:
            yield name
            name = self._classes[name].parent

    def _validate(self) -> None:
        roots = [c.name for c in self._classes.values() if c.parent is None]
        for c in self._classes.values():
            if c.parent is not None and c.parent not in self._classes:
                raise TaxonomyError(f"class {c.name!r} has unknown parent {c.parent!r}")
        for c in self._classes.values():
            seen = set()
            name: Optional[str] = c.name
            while name is not None:
                if name in seen:
                    raise TaxonomyError(f"cycle in taxonomy at class {c.name!r}")
                seen.add(name)
                name = self._classes[name].parent
        if roots != [ROOT_CLASS]:
            raise TaxonomyError(f"taxonomy must have the single root {ROOT_CLASS!r}, found {roots}")
        for v in VERB_CLASSES:
            if v not in self._classes:
                raise TaxonomyError(f"verb class {v!r} missing from taxonomy")

    def __contains__(self, name) -> bool:
        return name in self._classes

    def __iter__(self) -> Iterator[str]:
        return iter(self._classes)

    def __len__(self) -> int:
        return len(self._classes)

    def __getitem__(self, name: str) -> DolceClass:
        return self._classes[name]

    def ancestors(self, name: str) -> tuple[str, ...]:
        """*name* followed by its ancestors up to the root."""
        try:
            return self._ancestors[name]
        except KeyError:
            raise TaxonomyError(f"unknown DOLCE class {name!r}") from None

    def is_a(self, name: str, ancestor: str) -> bool:
        return ancestor in self.ancestors(name)

    def is_perdurant(self, name: str) -> bool:
        return name in self._classes and PERDURANT in self._ancestors[name]

    def verb_class(self, name: str) -> Optional[str]:
        """Nearest ancestor-or-self of *name* usable as a verb label."""
        if name not in self._classes:
            return None
        for a in self._ancestors[name]:
            if a in VERB_CLASSES:
                return a
        return None


def load_taxonomy(file: Union[str, os.PathLike, None] = None) -> DolceTaxonomy:
    """Read ``child<TAB>parent`` lines; ``None`` loads the bundled DLP file."""
    if file is None:
        text = resources.files("fotag.data").joinpath("dlp_taxonomy.tsv").read_text("utf-8")
        where = "dlp_taxonomy.tsv"
    else:
        text = Path(file).read_text("utf-8")
        where = str(file)
    classes = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) > 2 or not parts[0]:
            raise TaxonomyError(f"{where}:{lineno}: expected 'class<TAB>parent'")
        parent = parts[1] if len(parts) == 2 and parts[1] else None
        if parent == parts[0]:
            raise TaxonomyError(f"cycle in taxonomy at class {parts[0]!r} (own parent)")
        classes.append(DolceClass(parts[0], parent))
    return DolceTaxonomy(classes)


@functools.lru_cache(maxsize=None)
def default_taxonomy() -> DolceTaxonomy:
    return load_taxonomy()


@dataclass(frozen=True)
class AlignmentRecord:
    synset: SynsetId
    dolce_class: str
    provenance: str = "seed"
    evidence: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise AlignmentError(f"unknown provenance {self.provenance!r} for {self.synset}")


class AlignmentStore(Mapping):
    """Synset id to :class:`AlignmentRecord`, at most one record per synset.

    Stores are values: the ``with_*`` methods return new stores.
    """

    def __init__(self, records: Iterable[AlignmentRecord] = ()):
        table: dict[SynsetId, AlignmentRecord] = {}
        for r in records:
            if r.synset in table:
                raise AlignmentError(f"duplicate alignment for synset {r.synset}")
            table[r.synset] = r
        self._records = dict(sorted(table.items()))

    def __getitem__(self, sid: SynsetId) -> AlignmentRecord:
        return self._records[sid]

    def __iter__(self) -> Iterator[SynsetId]:
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __eq__(self, other) -> bool:
        if isinstance(other, AlignmentStore):
            return self._records == other._records
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"AlignmentStore({len(self)} records)"

    def class_of(self, sid: SynsetId) -> Optional[str]:
        r = self._records.get(sid)
        return r.dolce_class if r else None

    def records(self) -> list[AlignmentRecord]:
        return list(self._records.values())

    def with_records(self, records: Iterable[AlignmentRecord]) -> "AlignmentStore":
        """New store where *records* insert or replace existing entries."""
        table = dict(self._records)
        for r in records:
            table[r.synset] = r
        return AlignmentStore(table.values())

    def for_pos(self, pos: str) -> "AlignmentStore":
        return AlignmentStore(r for r in self._records.values() if r.synset.pos == pos)

    def merged(self, *others: "AlignmentStore") -> "AlignmentStore":
        """Union of stores; a synset present in more than one is an error."""
        out = list(self._records.values())
        for o in others:
            out.extend(o.records())
        return AlignmentStore(out)

    def validate(self, taxonomy: DolceTaxonomy) -> None:
        for r in self._records.values():
            if r.dolce_class not in taxonomy:
                raise AlignmentError(f"{r.synset}: unknown DOLCE class {r.dolce_class!r}")
            if r.synset.pos == VERB and r.dolce_class not in VERB_CLASSES:
                raise AlignmentError(
                    f"{r.synset}: verb aligned to {r.dolce_class!r}, expected one of {VERB_CLASSES}")


def _clean(text: str) -> str:
    return " ".join(text.split())


def format_alignments(store: AlignmentStore) -> str:
    lines = ["# synset_id\tclass\tprovenance\tevidence"]
    for r in store.values():
        lines.append(f"{r.synset}\t{r.dolce_class}\t{r.provenance}\t{_clean(r.evidence)}")
    return "\n".join(lines) + "\n"


def parse_alignments(text: str, taxonomy: Optional[DolceTaxonomy] = None,
                     where: str = "<string>") -> AlignmentStore:
    taxonomy = taxonomy or default_taxonomy()
    records = []
    seen: dict[SynsetId, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 3:
            parts.append("")
        if len(parts) != 4:
            raise AlignmentError(f"{where}:{lineno}: expected 4 tab-separated columns")
        try:
            sid = SynsetId.parse(parts[0])
        except ValueError as exc:
            raise AlignmentError(f"{where}:{lineno}: {exc}") from None
        if sid in seen:
            raise AlignmentError(
                f"{where}:{lineno}: duplicate synset id {sid} (first on line {seen[sid]})")
        seen[sid] = lineno
        cls = parts[1].strip()
        if cls not in taxonomy:
            raise AlignmentError(f"{where}:{lineno}: unknown DOLCE class {cls!r}")
        records.append(AlignmentRecord(sid, cls, parts[2].strip(), parts[3].strip()))
    store = AlignmentStore(records)
    store.validate(taxonomy)
    return store


def load_alignments(file: Union[str, os.PathLike],
                    taxonomy: Optional[DolceTaxonomy] = None) -> AlignmentStore:
    return parse_alignments(Path(file).read_text("utf-8"), taxonomy, str(file))


def save_alignments(store: AlignmentStore, file: Union[str, os.PathLike]) -> None:
    Path(file).write_text(format_alignments(store), "utf-8")


@dataclass
class ClassStats:
    """Per-class (top-level, full-taxonomy) synset counts for one POS."""

    pos: str
    rows: dict[str, tuple[int, int]] = field(default_factory=dict)
    total_top: int = 0
    total_full: int = 0
    synsets_top: int = 0
    synsets_full: int = 0

    def to_dict(self) -> dict:
        return {
            "pos": self.pos,
            "classes": {k: {"top": t, "full": f} for k, (t, f) in self.rows.items()},
            "total": {"top": self.total_top, "full": self.total_full},
            "synsets": {"top": self.synsets_top, "full": self.synsets_full},
        }

    def render_table(self) -> str:
        width = max([len("DOLCE class"), len("Total")] + [len(k) for k in self.rows])
        out = [f"{'DOLCE class':<{width}}  {'Top Synsets':>11}  {'Full Taxonomy':>13}"]
        out.append("-" * len(out[0]))
        for name, (top, full) in self.rows.items():
            out.append(f"{name:<{width}}  {top:>11,}  {full:>13,}")
        out.append("-" * len(out[0]))
        out.append(f"{'Total':<{width}}  {self.total_top:>11,}  {self.total_full:>13,}")
        return "\n".join(out)


def stats(store: AlignmentStore, graph: LexicalGraph, pos: str) -> ClassStats:
    from .propagation import roots

    top = set(roots(graph, pos))
    counts: dict[str, list[int]] = {}
    for sid, rec in store.items():
        if sid.pos != pos or sid not in graph:
            continue
        c = counts.setdefault(rec.dolce_class, [0, 0])
        c[1] += 1
        if sid in top:
            c[0] += 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1][0], -kv[1][1], kv[0]))
    result = ClassStats(pos, {k: (t, f) for k, (t, f) in ordered})
    result.total_top = sum(t for t, _ in result.rows.values())
    result.total_full = sum(f for _, f in result.rows.values())
    result.synsets_top = len(top)
    result.synsets_full = graph.count(pos)
    return result
