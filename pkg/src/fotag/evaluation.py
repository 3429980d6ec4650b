"""Chunk-level scoring of predicted labels against a gold corpus.

A predicted unit counts as correct only when the gold corpus has a unit with
the same token span and the same label, the usual conlleval convention.
Null-labeled units are never positives.
"""

from __future__ import annotations

import json
import logging
import os
import statistics
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

from .dolce import NULL, AlignmentStore, load_alignments, load_taxonomy
from .tagging import (MODES, AnnotatedCorpus, Sentence, load_stopwords, read_columns,
                      tag_corpus)
from .wordnet import LexicalGraph, parse_wordnet

log = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 30


class AlignmentMismatch(ValueError):
    """Predicted and gold corpora do not share the same token sequence."""

    def __init__(self, sentence: Optional[int], message: str):
        super().__init__(message)
        self.sentence = sentence


def _positive(label: Optional[str]) -> bool:
    return label is not None and label != NULL


def _chunks(sentence: Sentence) -> set[tuple[int, int, str]]:
    return {(u.start, u.end, u.label) for u in sentence.units if _positive(u.label)}


def _token_labels(sentence: Sentence) -> list[str]:
    labels = [NULL] * len(sentence.tokens)
    for u in sentence.units:
        for t in range(u.start, u.end):
            labels[t] = u.label if _positive(u.label) else NULL
    return labels


@dataclass
class _Counts:
    correct: Counter = field(default_factory=Counter)
    gold: Counter = field(default_factory=Counter)
    pred: Counter = field(default_factory=Counter)
    tokens: int = 0
    tokens_correct: int = 0

    def add(self, other: "_Counts") -> None:
        self.correct.update(other.correct)
        self.gold.update(other.gold)
        self.pred.update(other.pred)
        self.tokens += other.tokens
        self.tokens_correct += other.tokens_correct


def _sentence_counts(pair: tuple[Sentence, Sentence]) -> _Counts:
    pred, gold = pair
    c = _Counts()
    g, p = _chunks(gold), _chunks(pred)
    c.gold.update(lab for _, _, lab in g)
    c.pred.update(lab for _, _, lab in p)
    c.correct.update(lab for _, _, lab in g & p)
    gl, pl = _token_labels(gold), _token_labels(pred)
    c.tokens = len(gl)
    c.tokens_correct = sum(a == b for a, b in zip(gl, pl))
    return c


def _prf(correct: int, gold: int, pred: int) -> tuple[float, float, float]:
    p = 100.0 * correct / pred if pred else 0.0
    r = 100.0 * correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


@dataclass
class ClassScore:
    correct: int
    gold: int
    predicted: int

    @property
    def prf(self) -> tuple[float, float, float]:
        return _prf(self.correct, self.gold, self.predicted)


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f1: float
    correct: int
    gold_positives: int
    predicted_positives: int
    per_class: dict[str, ClassScore] = field(default_factory=dict)
    precision_undefined: bool = False
    token_accuracy: float = 0.0

    def to_dict(self) -> dict:
        return {
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f1": round(self.f1, 4),
            "correct": self.correct,
            "gold_positives": self.gold_positives,
            "predicted_positives": self.predicted_positives,
            "precision_undefined": self.precision_undefined,
            "token_accuracy": round(self.token_accuracy, 4),
            "per_class": {
                k: {"correct": c.correct, "gold": c.gold, "predicted": c.predicted,
                    "f1": round(c.prf[2], 4)}
                for k, c in self.per_class.items()
            },
        }

    def render(self) -> str:
        lines = [f"precision {self.precision:6.2f}  recall {self.recall:6.2f}  "
                 f"F1 {self.f1:6.2f}  (correct {self.correct}, gold {self.gold_positives}, "
                 f"predicted {self.predicted_positives})"]
        if self.precision_undefined:
            lines.append("note: no positive predictions, precision reported as 0")
        width = max([5] + [len(k) for k in self.per_class])
        for k, c in self.per_class.items():
            p, r, f = c.prf
            lines.append(f"  {k:<{width}}  {p:6.2f}  {r:6.2f}  {f:6.2f}  "
                         f"{c.correct}/{c.gold}/{c.predicted}")
        return "\n".join(lines)


def check_alignment(pred: AnnotatedCorpus, gold: AnnotatedCorpus) -> None:
    if len(pred.sentences) != len(gold.sentences):
        first = min(len(pred.sentences), len(gold.sentences))
        raise AlignmentMismatch(first, f"sentence counts differ: predicted {len(pred.sentences)}, "
                                       f"gold {len(gold.sentences)} (first missing sentence {first})")
    for i, (p, g) in enumerate(zip(pred.sentences, gold.sentences)):
        if p.surfaces() != g.surfaces():
            raise AlignmentMismatch(i, f"token sequences differ at sentence {i}")


def score(pred: AnnotatedCorpus, gold: AnnotatedCorpus, workers: int = 1) -> ScoreReport:
    check_alignment(pred, gold)
    pairs = list(zip(pred.sentences, gold.sentences))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_sentence_counts, pairs, chunksize=256))
    else:
        parts = [_sentence_counts(x) for x in pairs]
    total = _Counts()
    for part in parts:
        total.add(part)
    correct, g, p = (sum(total.correct.values()), sum(total.gold.values()),
                     sum(total.pred.values()))
    precision, recall, f1 = _prf(correct, g, p)
    classes = sorted(set(total.gold) | set(total.pred))
    return ScoreReport(
        precision, recall, f1, correct, g, p,
        {k: ClassScore(total.correct[k], total.gold[k], total.pred[k]) for k in classes},
        precision_undefined=p == 0,
        token_accuracy=100.0 * total.tokens_correct / total.tokens if total.tokens else 0.0,
    )


# -- experiments -------------------------------------------------------------------------

@dataclass
class ModeResult:
    mode: str
    runs: list[ScoreReport]

    def _values(self, attr: str) -> list[float]:
        return [getattr(r, attr) for r in self.runs]

    def mean(self, attr: str) -> float:
        return statistics.fmean(self._values(attr))

    def sd(self, attr: str) -> float:
        values = self._values(attr)
        return statistics.stdev(values) if len(values) > 1 else 0.0

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "repetitions": len(self.runs)}
        for attr in ("precision", "recall", "f1"):
            out[attr] = round(self.mean(attr), 4)
            out[f"{attr}_sd"] = round(self.sd(attr), 4)
        out["runs"] = [r.to_dict() for r in self.runs] if len(self.runs) > 1 else None
        out["report"] = self.runs[0].to_dict() if len(self.runs) == 1 else None
        return out


@dataclass
class RunReport:
    results: dict[str, dict[str, ModeResult]]

    def delta(self, corpus: str) -> Optional[float]:
        modes = self.results[corpus]
        if "mcs" in modes and "random" in modes:
            return modes["mcs"].mean("f1") - modes["random"].mean("f1")
        return None

    def to_dict(self) -> dict:
        out = {}
        for name, modes in self.results.items():
            entry = {m: r.to_dict() for m, r in modes.items()}
            d = self.delta(name)
            entry["delta_f1"] = None if d is None else round(d, 4)
            out[name] = entry
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_table(self) -> str:
        width = max([6] + [len(n) for n in self.results])
        lines = [f"{'corpus':<{width}}  {'mode':<6}  {'Precision':>13}  {'Recall':>13}  {'F1':>13}"]
        lines.append("-" * len(lines[0]))
        for name, modes in self.results.items():
            for mode, res in modes.items():
                cells = []
                for attr in ("precision", "recall", "f1"):
                    if len(res.runs) > 1:
                        cells.append(f"{res.mean(attr):.2f}±{res.sd(attr):.2f}")
                    else:
                        cells.append(f"{res.mean(attr):6.2f}")
                lines.append(f"{name:<{width}}  {mode:<6}  " + "  ".join(f"{c:>13}" for c in cells))
            d = self.delta(name)
            if d is not None:
                lines.append(f"{name:<{width}}  delta F1 (mcs - random): {d:+.2f}")
        return "\n".join(lines) + "\n"


def evaluate_corpora(gold_corpora: Mapping[str, AnnotatedCorpus], graph: LexicalGraph,
                     store: AlignmentStore, stopwords: Iterable[str],
                     modes: Sequence[str] = MODES, seed: int = 0,
                     repetitions: int = DEFAULT_REPETITIONS, workers: int = 1) -> RunReport:
    """Tag each gold corpus in every mode and score it.

    The tagger sees only the tokens (with any corpus unit grouping), never
    the gold labels or sense numbers.
    """
    stopwords = frozenset(stopwords)
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    results: dict[str, dict[str, ModeResult]] = {}
    for name, gold in gold_corpora.items():
        blank = AnnotatedCorpus([Sentence(list(s.tokens)) for s in gold.sentences], name)
        per_mode = {}
        for mode in modes:
            runs = []
            for rep in range(repetitions if mode == "random" else 1):
                pred = tag_corpus(blank, mode, graph, store, stopwords,
                                  seed=f"{seed}:{rep}", workers=workers)
                runs.append(score(pred, gold, workers))
            per_mode[mode] = ModeResult(mode, runs)
            log.info("%s/%s: F1 %.2f", name, mode, per_mode[mode].mean("f1"))
        results[name] = per_mode
    return RunReport(results)


@dataclass
class EvaluationConfig:
    wordnet: Union[str, os.PathLike]
    alignments: Union[str, os.PathLike]
    corpora: dict[str, Union[str, os.PathLike]]  # name -> gold column file
    modes: tuple[str, ...] = MODES
    seed: int = 0
    repetitions: int = DEFAULT_REPETITIONS
    stopwords: Optional[Union[str, os.PathLike]] = None
    taxonomy: Optional[Union[str, os.PathLike]] = None
    workers: int = 1


def evaluate_run(config: EvaluationConfig, graph: Optional[LexicalGraph] = None) -> RunReport:
    """Load everything *config* names and run :func:`evaluate_corpora`."""
    graph = graph or parse_wordnet(config.wordnet)
    taxonomy = load_taxonomy(config.taxonomy) if config.taxonomy else None
    store = load_alignments(config.alignments, taxonomy)
    stopwords = load_stopwords(config.stopwords)
    gold = {name: read_columns(path, "gold", name) for name, path in config.corpora.items()}
    return evaluate_corpora(gold, graph, store, stopwords, config.modes, config.seed,
                            config.repetitions, config.workers)
