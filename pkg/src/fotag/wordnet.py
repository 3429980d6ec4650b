"""Reader for the WordNet 3.0 plain-text database.

The whole database is loaded into a :class:`LexicalGraph`, an immutable
container holding every synset, the per-lemma sense ordering from the
``index.*`` files, the ``index.sense`` key table and the morphological
exception lists.  Only the pointer types needed downstream are kept; the
remaining pointer symbols are skipped while parsing.
"""

from __future__ import annotations

import enum
import os
import re
import threading
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Optional, Union

NOUN, VERB, ADJ, ADV = "n", "v", "a", "r"
POS_TAGS = (NOUN, VERB, ADJ, ADV)
POS_NAMES = {NOUN: "noun", VERB: "verb", ADJ: "adjective", ADV: "adverb"}
FILE_SUFFIX = {NOUN: "noun", VERB: "verb", ADJ: "adj", ADV: "adv"}
# ss_type digit used inside sense keys
SENSE_KEY_POS = {"1": NOUN, "2": VERB, "3": ADJ, "4": ADV, "5": ADJ}

_POS_ALIASES = {
    "n": NOUN, "noun": NOUN,
    "v": VERB, "verb": VERB,
    "a": ADJ, "s": ADJ, "adj": ADJ, "adjective": ADJ,
    "r": ADV, "adv": ADV, "adverb": ADV,
}


def normalize_pos(pos: str) -> str:
    try:
        return _POS_ALIASES[pos.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown part of speech: {pos!r}") from None


class WordNetError(Exception):
    """Raised when a database file is missing or malformed."""


class UnknownSynsetError(KeyError):
    pass


class Relation(str, enum.Enum):
    HYPERNYM = "hypernym"
    HYPONYM = "hyponym"
    INSTANCE_HYPERNYM = "instance_hypernym"
    INSTANCE_HYPONYM = "instance_hyponym"
    ANTONYM = "antonym"
    DERIVATIONALLY_RELATED = "derivationally_related"
    VERB_GROUP = "verb_group"

    @property
    def sense_level(self) -> bool:
        return self in (Relation.ANTONYM, Relation.DERIVATIONALLY_RELATED)

    @property
    def symbol(self) -> str:
        return _RELATION_SYMBOLS[self]


POINTER_SYMBOLS = {
    "@": Relation.HYPERNYM,
    "~": Relation.HYPONYM,
    "@i": Relation.INSTANCE_HYPERNYM,
    "~i": Relation.INSTANCE_HYPONYM,
    "!": Relation.ANTONYM,
    "+": Relation.DERIVATIONALLY_RELATED,
    "$": Relation.VERB_GROUP,
}
_RELATION_SYMBOLS = {rel: sym for sym, rel in POINTER_SYMBOLS.items()}

INVERSE = {
    Relation.HYPERNYM: Relation.HYPONYM,
    Relation.HYPONYM: Relation.HYPERNYM,
    Relation.INSTANCE_HYPERNYM: Relation.INSTANCE_HYPONYM,
    Relation.INSTANCE_HYPONYM: Relation.INSTANCE_HYPERNYM,
    Relation.ANTONYM: Relation.ANTONYM,
    Relation.DERIVATIONALLY_RELATED: Relation.DERIVATIONALLY_RELATED,
    Relation.VERB_GROUP: Relation.VERB_GROUP,
}

# Suffix detachment table from the WordNet morphy(7) manual page.
MORPHY_RULES = {
    NOUN: (("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
           ("shes", "sh"), ("men", "man"), ("ies", "y")),
    VERB: (("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"),
           ("ed", ""), ("ing", "e"), ("ing", "")),
    ADJ: (("er", ""), ("est", ""), ("er", "e"), ("est", "e")),
    ADV: (),
}

_ADJ_MARKER = re.compile(r"\((?:a|p|ip)\)$")


@dataclass(frozen=True, order=True)
class SynsetId:
    """Synset identifier rendered as ``"00002325-v"``."""

    offset: int
    pos: str

    def __post_init__(self):
        if not 0 <= self.offset <= 99_999_999:
            raise ValueError(f"synset offset out of range: {self.offset}")
        if self.pos not in POS_TAGS:
            object.__setattr__(self, "pos", normalize_pos(self.pos))

    def __str__(self) -> str:
        return f"{self.offset:08d}-{self.pos}"

    @classmethod
    def parse(cls, text: str) -> "SynsetId":
        m = re.fullmatch(r"(\d{1,8})-([nvasr])", text.strip())
        if not m:
            raise ValueError(f"not a synset id: {text!r}")
        return cls(int(m.group(1)), m.group(2))


@dataclass(frozen=True)
class Pointer:
    relation: Relation
    target: SynsetId
    source_word: int = 0  # 1-based word number, 0 = whole synset
    target_word: int = 0


@dataclass(frozen=True)
class Synset:
    id: SynsetId
    lemmas: tuple[str, ...]
    gloss: str
    pointers: tuple[Pointer, ...] = ()
    lex_filenum: int = 0
    lex_ids: tuple[int, ...] = ()
    satellite: bool = False

    def __post_init__(self):
        if not self.lemmas:
            raise ValueError(f"synset {self.id} has no lemmas")

    @property
    def head(self) -> str:
        return self.lemmas[0]

    @property
    def definition(self) -> str:
        """Gloss text with the quoted usage examples removed."""
        text = self.gloss.split('"', 1)[0]
        return text.strip().rstrip(";").strip()

    def targets(self, relation: Relation) -> list[Pointer]:
        return [p for p in self.pointers if p.relation is relation]


@dataclass(frozen=True)
class SenseEntry:
    lemma: str
    pos: str
    rank: int
    synset: SynsetId


@dataclass(frozen=True)
class SenseLink:
    """Target of a lexical (lemma-to-lemma) pointer."""

    source_lemma: Optional[str]
    target_lemma: Optional[str]
    target: SynsetId


def lemma_key(text: str) -> str:
    return "_".join(text.strip().lower().split())


class LexicalGraph:
    """Read-only view over a parsed WordNet database."""

    def __init__(self, synsets: Mapping[SynsetId, Synset],
                 senses: Mapping[tuple[str, str], tuple[SenseEntry, ...]],
                 exceptions: Optional[Mapping[str, Mapping[str, tuple[str, ...]]]] = None,
                 sense_keys: Optional[Mapping[str, SenseEntry]] = None):
        self._synsets = MappingProxyType(dict(synsets))
        self._senses = MappingProxyType(dict(senses))
        exceptions = exceptions or {}
        self._exceptions = MappingProxyType({
            pos: MappingProxyType(dict(exceptions.get(pos, {}))) for pos in POS_TAGS
        })
        self._sense_keys = MappingProxyType(dict(sense_keys or {}))
        self._validate()
        self._children_cache: dict = {}
        self._cache_lock = threading.Lock()
        self._max_words = max(
            (lemma.count("_") + 1 for lemma, _ in self._senses), default=1)
        prefixes = set()
        for lemma, pos in self._senses:
            if pos in (NOUN, VERB) and "_" in lemma:
                parts = lemma.split("_")
                prefixes.update("_".join(parts[:k]) for k in range(1, len(parts)))
        self._prefixes = frozenset(prefixes)

    @classmethod
    def from_synsets(cls, synsets: Iterable[Synset], exceptions=None) -> "LexicalGraph":
        """Build a graph whose sense ranks follow synset order.

        Convenience for small hand-made graphs: lemma ranks are assigned in
        the order synsets are given.
        """
        table: dict[SynsetId, Synset] = {}
        senses: dict[tuple[str, str], list[SenseEntry]] = {}
        for s in synsets:
            table[s.id] = s
            for lemma in s.lemmas:
                key = (lemma_key(lemma), s.id.pos)
                entries = senses.setdefault(key, [])
                entries.append(SenseEntry(key[0], s.id.pos, len(entries) + 1, s.id))
        return cls(table, {k: tuple(v) for k, v in senses.items()}, exceptions)

    def _validate(self) -> None:
        for s in self._synsets.values():
            for p in s.pointers:
                if p.target not in self._synsets:
                    raise WordNetError(
                        f"synset {s.id}: {p.relation.value} target {p.target} not found")
        for entries in self._senses.values():
            for rank, e in enumerate(entries, 1):
                if e.rank != rank:
                    raise WordNetError(f"sense ranks for {e.lemma!r}/{e.pos} are not contiguous")
                if e.synset not in self._synsets:
                    raise WordNetError(f"sense {e.lemma}#{e.pos}#{e.rank} points to missing {e.synset}")

    # -- mapping-like access ------------------------------------------------

    @property
    def synsets(self) -> Mapping[SynsetId, Synset]:
        return self._synsets

    @property
    def sense_index(self) -> Mapping[tuple[str, str], tuple[SenseEntry, ...]]:
        return self._senses

    @property
    def exceptions(self) -> Mapping[str, Mapping[str, tuple[str, ...]]]:
        return self._exceptions

    @property
    def sense_keys(self) -> Mapping[str, SenseEntry]:
        return self._sense_keys

    @property
    def max_lemma_words(self) -> int:
        return self._max_words

    def is_multiword_prefix(self, text: str) -> bool:
        """True if some noun or verb multiword lemma starts with *text* + '_'."""
        return text in self._prefixes

    def __contains__(self, sid: SynsetId) -> bool:
        return sid in self._synsets

    def __len__(self) -> int:
        return len(self._synsets)

    def synset(self, sid: SynsetId) -> Synset:
        try:
            return self._synsets[sid]
        except KeyError:
            raise UnknownSynsetError(str(sid)) from None

    def ids(self, pos: Optional[str] = None) -> list[SynsetId]:
        ids = self._synsets if pos is None else (i for i in self._synsets if i.pos == pos)
        return sorted(ids)

    def count(self, pos: str) -> int:
        return sum(1 for i in self._synsets if i.pos == pos)

    def senses(self, lemma: str, pos: str) -> tuple[SenseEntry, ...]:
        return self._senses.get((lemma_key(lemma), pos), ())

    def has_lemma(self, lemma: str, pos: str) -> bool:
        return (lemma_key(lemma), pos) in self._senses

    def sense_for(self, lemma: str, pos: str, synset: SynsetId) -> Optional[SenseEntry]:
        for e in self.senses(lemma, pos):
            if e.synset == synset:
                return e
        return None

    def lemma_of(self, sid: SynsetId, word_number: int) -> Optional[str]:
        if word_number <= 0:
            return None
        lemmas = self.synset(sid).lemmas
        return lemmas[word_number - 1] if word_number <= len(lemmas) else None

    # -- taxonomy helpers ------------------------------------------------------

    def parents(self, sid: SynsetId, downward: Iterable[Relation]) -> list[SynsetId]:
        """Synsets that reach *sid* through one of the *downward* relations.

        Order follows the pointer order in *sid*'s own record (its hypernym
        list); parents only known from their side are appended by id.
        """
        return list(self._links(frozenset(downward))[1].get(sid, ()))

    def children(self, sid: SynsetId, downward: Iterable[Relation]) -> list[SynsetId]:
        """Targets of *downward* pointers of *sid*, plus synsets pointing back
        at it with the inverse relation (so one-sided databases still work)."""
        return list(self._links(frozenset(downward))[0].get(sid, ()))

    def _links(self, downward: frozenset):
        cached = self._children_cache.get(downward)
        if cached is not None:
            return cached
        with self._cache_lock:
            cached = self._children_cache.get(downward)
            if cached is not None:
                return cached
            upward = {INVERSE[r] for r in downward}
            down: dict[SynsetId, list[SynsetId]] = {}
            up: dict[SynsetId, list[SynsetId]] = {}
            for s in self._synsets.values():
                for p in s.pointers:
                    if p.relation in downward:
                        down.setdefault(s.id, []).append(p.target)
                    elif p.relation in upward:
                        up.setdefault(s.id, []).append(p.target)
            children: dict[SynsetId, list[SynsetId]] = {}
            parents: dict[SynsetId, list[SynsetId]] = {}
            for parent, targets in down.items():
                for child in targets:
                    _add(children, parent, child)
            for child, targets in up.items():
                for parent in targets:
                    _add(parents, child, parent)
            # inverse-side edges go after the record's own pointers, by id
            extra_children: dict[SynsetId, set] = {}
            for child, ps in parents.items():
                for parent in ps:
                    if child not in children.get(parent, ()):
                        extra_children.setdefault(parent, set()).add(child)
            extra_parents: dict[SynsetId, set] = {}
            for parent, cs in children.items():
                for child in cs:
                    if parent not in parents.get(child, ()):
                        extra_parents.setdefault(child, set()).add(parent)
            for parent, cs in extra_children.items():
                children.setdefault(parent, []).extend(sorted(cs))
            for child, ps in extra_parents.items():
                parents.setdefault(child, []).extend(sorted(ps))
            cached = ({k: tuple(v) for k, v in children.items()},
                      {k: tuple(v) for k, v in parents.items()})
            self._children_cache[downward] = cached
            return cached

    def is_root(self, sid: SynsetId) -> bool:
        """No hypernym or instance hypernym, from either side of the link."""
        return not self.parents(sid, (Relation.HYPONYM, Relation.INSTANCE_HYPONYM))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LexicalGraph):
            return NotImplemented
        return (dict(self._synsets) == dict(other._synsets)
                and dict(self._senses) == dict(other._senses)
                and {p: dict(m) for p, m in self._exceptions.items()}
                == {p: dict(m) for p, m in other._exceptions.items()}
                and dict(self._sense_keys) == dict(other._sense_keys))

    __hash__ = None  # type: ignore[assignment]


def _add(table: dict, key, value) -> None:
    values = table.setdefault(key, [])
    if value not in values:
        values.append(value)


# -- parsing ------------------------------------------------------------------

def _lines(path: Path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8", errors="surrogateescape") as fh:
        for lineno, line in enumerate(fh, 1):
            # license header lines start with two spaces
            if line.startswith("  ") or not line.strip():
                continue
            yield lineno, line.rstrip("\n")


def parse_data_line(line: str, pos: str, where: str = "") -> tuple[Synset, int]:
    """Parse one ``data.*`` record; returns the synset and skipped pointer count."""
    body, sep, gloss = line.partition("|")
    fields = body.split()
    try:
        offset = int(fields[0])
        lex_filenum = int(fields[1])
        ss_type = fields[2]
        w_cnt = int(fields[3], 16)
        i = 4
        lemmas, lex_ids = [], []
        for _ in range(w_cnt):
            lemmas.append(_ADJ_MARKER.sub("", fields[i]))
            lex_ids.append(int(fields[i + 1], 16))
            i += 2
        p_cnt = int(fields[i])
        i += 1
        pointers = []
        skipped = 0
        for _ in range(p_cnt):
            symbol, target, tpos, st = fields[i:i + 4]
            if len(st) != 4:
                raise ValueError(f"bad source/target field {st!r}")
            i += 4
            rel = POINTER_SYMBOLS.get(symbol)
            if rel is None:
                skipped += 1
                continue
            pointers.append(Pointer(rel, SynsetId(int(target), normalize_pos(tpos)),
                                    int(st[:2], 16), int(st[2:], 16)))
        if ss_type == VERB and i < len(fields):
            f_cnt = int(fields[i])
            i += 1
            for _ in range(f_cnt):
                if fields[i] != "+":
                    raise ValueError("bad verb frame")
                int(fields[i + 1]), int(fields[i + 2], 16)
                i += 3
        if i != len(fields) or not sep:
            raise ValueError("trailing or missing fields")
        ss_pos = normalize_pos(ss_type)
        if ss_pos != pos:
            raise ValueError(f"record of type {ss_type!r} in {POS_NAMES[pos]} file")
    except (IndexError, ValueError) as exc:
        raise WordNetError(f"{where}: malformed data record ({exc})") from None
    synset = Synset(SynsetId(offset, pos), tuple(lemmas), gloss.strip(), tuple(pointers),
                    lex_filenum, tuple(lex_ids), ss_type == "s")
    return synset, skipped


def _require(directory: Path, name: str) -> Path:
    path = directory / name
    if not path.is_file():
        raise WordNetError(f"missing WordNet file: {path}")
    return path


def parse_wordnet(database_directory: Union[str, os.PathLike]) -> LexicalGraph:
    """Load a WordNet 3.0 ``dict`` directory into a :class:`LexicalGraph`."""
    directory = Path(database_directory)
    paths = {}
    for pos, suffix in FILE_SUFFIX.items():
        paths[pos] = (_require(directory, f"data.{suffix}"),
                      _require(directory, f"index.{suffix}"),
                      _require(directory, f"{suffix}.exc"))
    sense_path = _require(directory, "index.sense")

    synsets: dict[SynsetId, Synset] = {}
    for pos, (data_path, _, _) in paths.items():
        for lineno, line in _lines(data_path):
            synset, _ = parse_data_line(line, pos, f"{data_path}:{lineno}")
            if synset.id in synsets:
                raise WordNetError(f"{data_path}:{lineno}: duplicate synset {synset.id}")
            synsets[synset.id] = synset

    senses: dict[tuple[str, str], tuple[SenseEntry, ...]] = {}
    for pos, (_, index_path, _) in paths.items():
        for lineno, line in _lines(index_path):
            fields = line.split()
            try:
                lemma, ipos, synset_cnt = fields[0], normalize_pos(fields[1]), int(fields[2])
                p_cnt = int(fields[3])
                offsets = fields[4 + p_cnt + 2:]
                if len(offsets) != synset_cnt or ipos != pos:
                    raise ValueError("synset count mismatch")
                entries = tuple(SenseEntry(lemma, pos, rank, SynsetId(int(off), pos))
                                for rank, off in enumerate(offsets, 1))
            except (IndexError, ValueError) as exc:
                raise WordNetError(f"{index_path}:{lineno}: malformed index record ({exc})") from None
            senses[(lemma, pos)] = entries

    exceptions: dict[str, dict[str, tuple[str, ...]]] = {}
    for pos, (_, _, exc_path) in paths.items():
        table = exceptions.setdefault(pos, {})
        for lineno, line in _lines(exc_path):
            fields = line.split()
            if len(fields) < 2:
                raise WordNetError(f"{exc_path}:{lineno}: malformed exception line")
            table[fields[0]] = tuple(table.get(fields[0], ())) + tuple(fields[1:])

    sense_keys: dict[str, SenseEntry] = {}
    for lineno, line in _lines(sense_path):
        fields = line.split()
        try:
            key, offset, number = fields[0], int(fields[1]), int(fields[2])
            lemma, lexsn = key.split("%", 1)
            pos = SENSE_KEY_POS[lexsn[0]]
        except (IndexError, ValueError, KeyError):
            raise WordNetError(f"{sense_path}:{lineno}: malformed sense key line") from None
        sense_keys[key] = SenseEntry(lemma, pos, number, SynsetId(offset, pos))

    try:
        return LexicalGraph(synsets, senses, exceptions, sense_keys)
    except WordNetError as exc:
        raise WordNetError(f"{directory}: {exc}") from None


# -- queries --------------------------------------------------------------------

def lookup_senses(graph: LexicalGraph, lemma: str, pos: str) -> list[SenseEntry]:
    """Senses of *lemma* in rank order (rank 1 = most frequent)."""
    return list(graph.senses(lemma, normalize_pos(pos)))


def normalize_lemma(graph: LexicalGraph, surface: str, pos: str) -> list[str]:
    """Base-form candidates for *surface*, restricted to lemmas in the index.

    Exception-list hits come first, then suffix detachment results, then the
    surface form itself.
    """
    pos = normalize_pos(pos)
    form = lemma_key(surface)
    if not form:
        return []
    candidates = list(graph.exceptions[pos].get(form, ()))
    for suffix, ending in MORPHY_RULES[pos]:
        if form.endswith(suffix) and len(form) > len(suffix):
            candidates.append(form[: len(form) - len(suffix)] + ending)
    candidates.append(form)
    out: list[str] = []
    for c in candidates:
        if c not in out and graph.has_lemma(c, pos):
            out.append(c)
    return out


def related(graph: LexicalGraph, source: SynsetId, relation: Relation) -> list:
    """Targets of *relation* from *source* in file order.

    Sense-level relations give :class:`SenseLink` triples, synset-level ones
    plain :class:`SynsetId` values.
    """
    synset = graph.synset(source)
    pointers = synset.targets(relation)
    if not relation.sense_level:
        return [p.target for p in pointers]
    return [SenseLink(graph.lemma_of(source, p.source_word),
                      graph.lemma_of(p.target, p.target_word), p.target)
            for p in pointers]


# -- writing ----------------------------------------------------------------------

def format_data_line(synset: Synset) -> str:
    ss_type = "s" if synset.satellite else synset.id.pos
    lex_ids = synset.lex_ids or (0,) * len(synset.lemmas)
    parts = [f"{synset.id.offset:08d}", f"{synset.lex_filenum:02d}", ss_type,
             f"{len(synset.lemmas):02x}"]
    for lemma, lex_id in zip(synset.lemmas, lex_ids):
        parts += [lemma, f"{lex_id:x}"]
    parts.append(f"{len(synset.pointers):03d}")
    for p in synset.pointers:
        parts += [p.relation.symbol, f"{p.target.offset:08d}", p.target.pos,
                  f"{p.source_word:02x}{p.target_word:02x}"]
    if synset.id.pos == VERB:
        parts.append("00")
    return " ".join(parts) + " | " + synset.gloss + "  "


def write_database(graph: LexicalGraph, directory: Union[str, os.PathLike]) -> None:
    """Write *graph* back out in the ``dict`` file layout.

    Offsets are kept as identifiers; they are not recomputed as byte offsets.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for pos, suffix in FILE_SUFFIX.items():
        with open(directory / f"data.{suffix}", "w", encoding="utf-8") as fh:
            for sid in graph.ids(pos):
                fh.write(format_data_line(graph.synset(sid)) + "\n")
        with open(directory / f"index.{suffix}", "w", encoding="utf-8") as fh:
            for (lemma, lpos), entries in sorted(graph.sense_index.items()):
                if lpos != pos:
                    continue
                offsets = " ".join(f"{e.synset.offset:08d}" for e in entries)
                fh.write(f"{lemma} {pos} {len(entries)} 0 {len(entries)} 0 {offsets}  \n")
        with open(directory / f"{suffix}.exc", "w", encoding="utf-8") as fh:
            for form, bases in sorted(graph.exceptions[pos].items()):
                fh.write(f"{form} {' '.join(bases)}\n")
    with open(directory / "index.sense", "w", encoding="utf-8") as fh:
        for key, e in sorted(graph.sense_keys.items()):
            fh.write(f"{key} {e.synset.offset:08d} {e.rank} 0\n")
