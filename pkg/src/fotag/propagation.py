"""Push seed classes down the hyponym taxonomy.

A synset takes the class of its nearest aligned ancestor, distance counted in
downward hops.  When several parents sit at that distance with different
classes the conflict policy decides: ``first-parent`` follows the order of
the synset's own hypernym pointers, ``report-only`` leaves the synset
unaligned.  Both cases are logged.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Optional

from .dolce import AlignmentRecord, AlignmentStore
from .wordnet import INVERSE, LexicalGraph, Relation, SynsetId

UPWARD = (Relation.HYPERNYM, Relation.INSTANCE_HYPERNYM)
CONFLICT_POLICIES = ("first-parent", "report-only")


@dataclass(frozen=True)
class PropagationConfig:
    downward_relations: frozenset = field(
        default_factory=lambda: frozenset({Relation.HYPONYM, Relation.INSTANCE_HYPONYM}))
    conflict_policy: str = "first-parent"

    def __post_init__(self):
        object.__setattr__(self, "downward_relations",
                           frozenset(Relation(r) for r in self.downward_relations))
        if not self.downward_relations:
            raise ValueError("downward_relations must not be empty")
        if self.conflict_policy not in CONFLICT_POLICIES:
            raise ValueError(f"unknown conflict policy {self.conflict_policy!r}")


def _strongly_connected(nodes: list[SynsetId], edges) -> list[list[SynsetId]]:
    """Iterative Tarjan; *edges(node)* yields successors."""
    index: dict[SynsetId, int] = {}
    low: dict[SynsetId, int] = {}
    on_stack: set[SynsetId] = set()
    stack: list[SynsetId] = []
    components = []
    counter = 0
    for start in nodes:
        if start in index:
            continue
        work = [(start, iter(edges(start)))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges(succ))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(sorted(comp))
    return components


def hypernym_cycles(graph: LexicalGraph, pos: str,
                    relations: Iterable[Relation] = UPWARD) -> list[list[SynsetId]]:
    """Cycles (as sorted member lists) in the given relation graph."""
    relations = frozenset(relations)

    def edges(sid):
        return graph.children(sid, relations)

    cycles = []
    for comp in _strongly_connected(graph.ids(pos), edges):
        if len(comp) > 1 or comp[0] in edges(comp[0]):
            cycles.append(comp)
    return sorted(cycles)


def roots(graph: LexicalGraph, pos: str) -> list[SynsetId]:
    """Top-level synsets of *pos*, sorted by id.

    These are the synsets without hypernym or instance-hypernym pointers,
    plus the smallest member of every hypernym cycle whose members have no
    hypernym outside the cycle (otherwise that part of the taxonomy would
    have no top).
    """
    top = [sid for sid in graph.ids(pos) if graph.is_root(sid)]
    for cycle in hypernym_cycles(graph, pos):
        members = set(cycle)
        escapes = any(t not in members
                      for m in cycle for t in graph.children(m, UPWARD))
        if not escapes:
            top.append(cycle[0])
    return sorted(top)


def propagate(graph: LexicalGraph, seeds: AlignmentStore,
              config: Optional[PropagationConfig] = None) -> tuple[AlignmentStore, list[dict]]:
    """Expand *seeds* to every synset reachable downward from them.

    Returns the expanded store (seed records untouched, new records with
    provenance ``inherited``) and a list of diagnostic records.
    """
    config = config or PropagationConfig()
    downward = config.downward_relations
    diagnostics: list[dict] = []

    positions = sorted({sid.pos for sid in seeds if sid in graph})
    for pos in positions:
        for cycle in hypernym_cycles(graph, pos, {INVERSE[r] for r in downward}):
            diagnostics.append({"event": "cycle", "members": [str(s) for s in cycle]})

    label: dict[SynsetId, str] = {}
    origin: dict[SynsetId, SynsetId] = {}
    for sid, rec in seeds.items():
        if sid in graph:
            label[sid] = rec.dolce_class
            origin[sid] = sid
    finalized = set(label)
    frontier = sorted(label)
    distance = 0
    new_records = []
    while frontier:
        distance += 1
        frontier_set = set(frontier)
        pending = set()
        for sid in frontier:
            for child in graph.children(sid, downward):
                if child not in finalized:
                    pending.add(child)
        next_frontier = []
        for child in sorted(pending):
            finalized.add(child)
            parents = [p for p in graph.parents(child, downward) if p in frontier_set]
            classes = []
            for p in parents:
                if label[p] not in classes:
                    classes.append(label[p])
            if len(classes) > 1:
                chosen = classes[0] if config.conflict_policy == "first-parent" else None
                diagnostics.append({
                    "event": "conflict", "synset": str(child),
                    "parents": [str(p) for p in parents],
                    "parent_classes": [label[p] for p in parents],
                    "chosen": chosen,
                })
                if chosen is None:
                    continue
            parent = parents[0]
            label[child] = label[parent]
            origin[child] = origin[parent]
            next_frontier.append(child)
            new_records.append(AlignmentRecord(
                child, label[child], "inherited",
                f"from {origin[child]} via {parent} (depth {distance})"))
        frontier = next_frontier
    return seeds.with_records(new_records), diagnostics


def diagnostics_jsonl(diagnostics: Iterable[dict]) -> str:
    return "".join(json.dumps(d, sort_keys=True) + "\n" for d in diagnostics)


@dataclass
class Coverage:
    pos: str
    mapped: int
    total: int
    unmapped: list[SynsetId]

    @property
    def fraction(self) -> float:
        return self.mapped / self.total if self.total else 0.0


def coverage(graph: LexicalGraph, store: AlignmentStore, pos: str) -> Coverage:
    ids = graph.ids(pos)
    unmapped = [sid for sid in ids if sid not in store]
    return Coverage(pos, len(ids) - len(unmapped), len(ids), unmapped)
