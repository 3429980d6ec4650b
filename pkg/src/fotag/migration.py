"""Carry seed alignments across WordNet versions using synset mapping files.

Mapping files list a source offset followed by one or more
``target score`` pairs; a source may also be repeated over several lines.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Union

from .dolce import AlignmentRecord, AlignmentStore
from .wordnet import SynsetId, normalize_pos


class MappingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class VersionMap:
    pos: str
    entries: dict[SynsetId, tuple[tuple[SynsetId, float], ...]]

    def targets(self, source: SynsetId) -> tuple[tuple[SynsetId, float], ...]:
        return self.entries.get(source, ())

    def __contains__(self, source: SynsetId) -> bool:
        return source in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def parse_version_map_lines(lines: Iterable[str], pos: str, where: str = "<map>") -> VersionMap:
    pos = normalize_pos(pos)
    grouped: dict[SynsetId, dict[SynsetId, float]] = {}
    for lineno, line in enumerate(lines, 1):
        fields = line.split()
        if not fields or fields[0].startswith("#"):
            continue
        if len(fields) < 3 or len(fields) % 2 == 0:
            raise MappingFormatError(f"{where}:{lineno}: expected 'source target score ...'")
        try:
            source = SynsetId(int(fields[0]), pos)
            pairs = [(SynsetId(int(fields[i]), pos), float(fields[i + 1]))
                     for i in range(1, len(fields), 2)]
        except ValueError:
            raise MappingFormatError(f"{where}:{lineno}: non-numeric offset or score") from None
        targets = grouped.setdefault(source, {})
        for target, score in pairs:
            if not 0.0 <= score <= 1.0:
                raise MappingFormatError(f"{where}:{lineno}: score {score} outside [0, 1]")
            targets[target] = max(score, targets.get(target, 0.0))
    entries = {
        src: tuple(sorted(t.items(), key=lambda ts: (-ts[1], ts[0])))
        for src, t in sorted(grouped.items())
    }
    return VersionMap(pos, entries)


def parse_version_map(file: Union[str, os.PathLike], pos: str) -> VersionMap:
    with open(file, encoding="utf-8") as fh:
        return parse_version_map_lines(fh, pos, str(file))


@dataclass(frozen=True)
class Merge:
    target: SynsetId
    sources: tuple[SynsetId, ...]
    classes: tuple[str, ...]
    chosen: SynsetId
    conflict: bool


@dataclass
class MigrationReport:
    migrated: int = 0
    dropped: list[tuple[SynsetId, str]] = field(default_factory=list)
    merged: list[Merge] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"event": "summary", "migrated": self.migrated,
                             "dropped": len(self.dropped), "merged": len(self.merged)})]
        for sid, reason in self.dropped:
            lines.append(json.dumps({"event": "dropped", "source": str(sid), "reason": reason}))
        for m in self.merged:
            lines.append(json.dumps({
                "event": "merged", "target": str(m.target),
                "sources": [str(s) for s in m.sources], "classes": list(m.classes),
                "chosen": str(m.chosen), "conflict": m.conflict,
            }))
        return "\n".join(lines) + "\n"


def migrate(seeds: AlignmentStore, version_map: VersionMap,
            threshold: float = 0.0) -> tuple[AlignmentStore, MigrationReport]:
    """Move every seed to its best-scoring target at or above *threshold*.

    Sources landing on the same target are merged; on a class conflict the
    higher-scoring source wins, ties going to the smaller source id.
    """
    report = MigrationReport()
    landed: dict[SynsetId, list[tuple[float, SynsetId, AlignmentRecord]]] = {}
    for sid, rec in seeds.items():
        targets = version_map.targets(sid)
        if not targets:
            report.dropped.append((sid, "no-mapping"))
            continue
        qualifying = [(t, s) for t, s in targets if s >= threshold]
        if not qualifying:
            report.dropped.append((sid, "below-threshold"))
            continue
        target, score = qualifying[0]
        landed.setdefault(target, []).append((score, sid, rec))
        report.migrated += 1

    out = []
    for target in sorted(landed):
        group = sorted(landed[target], key=lambda x: (-x[0], x[1]))
        score, source, rec = group[0]
        evidence = f"migrated from {source} (score {score:g})"
        if rec.evidence:
            evidence = f"{rec.evidence}; {evidence}"
        out.append(AlignmentRecord(target, rec.dolce_class, rec.provenance, evidence))
        if len(group) > 1:
            classes = tuple(r.dolce_class for _, _, r in group)
            report.merged.append(Merge(target, tuple(s for _, s, _ in group), classes,
                                       source, len(set(classes)) > 1))
    return AlignmentStore(out), report
