"""Field-by-field scoring against a gold key, and intercoder agreement.

Scoring compares Temporal Units slot by slot. For every field a pair lands
in exactly one of five bins:

=========  =============================================
correct    system and key agree on a non-null value
incorrect  system and key differ on non-null values
missing    system null, key non-null
extra      system non-null, key null
null       both null
=========  =============================================

Accuracy is ``(correct + null) / (correct + incorrect + missing + null)``,
precision ``(correct + null) / (correct + incorrect + extra + null)``. Extra
answers do not hurt accuracy and missing ones do not hurt precision.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, fields, replace
from typing import Hashable, Iterable, Optional, Sequence

from .core import END_FIELDS, NULL_TU, START_FIELDS, FieldName, TemporalUnit
from .engine import EngineConfig, resolve_dialog


@dataclass
class Counts:
    correct: int = 0
    incorrect: int = 0
    missing: int = 0
    extra: int = 0
    null: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def total(self) -> int:
        return self.correct + self.incorrect + self.missing + self.extra + self.null

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.correct, self.incorrect, self.missing, self.extra, self.null)


class FieldCounts(dict):
    """Counts per FieldName; every field is always present."""

    def __init__(self, items=None):
        super().__init__({name: Counts() for name in FieldName})
        if items:
            for name, counts in dict(items).items():
                self[FieldName(name)] = counts

    def __add__(self, other: "FieldCounts") -> "FieldCounts":
        return FieldCounts({name: self[name] + other[name] for name in FieldName})

    def overall(self) -> Counts:
        total = Counts()
        for counts in self.values():
            total = total + counts
        return total


def align_tus(system: Sequence[TemporalUnit], key: Sequence[TemporalUnit]):
    """Pair TUs by order of mention, padding the shorter side with null TUs."""
    return list(itertools.zip_longest(system, key, fillvalue=NULL_TU))


def score_counts(pairs: Iterable[tuple[TemporalUnit, TemporalUnit]]) -> FieldCounts:
    """Tally ``(system, key)`` TU pairs field by field. Years are ignored."""
    counts = FieldCounts()
    for system, key in pairs:
        for name in FieldName:
            s, k = system.get(name), key.get(name)
            c = counts[name]
            if s is None and k is None:
                c.null += 1
            elif s is None:
                c.missing += 1
            elif k is None:
                c.extra += 1
            elif s == k:
                c.correct += 1
            else:
                c.incorrect += 1
    return counts


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


def accuracy(c: Counts) -> Optional[float]:
    """None when there is nothing to divide by."""
    return _ratio(c.correct + c.null, c.correct + c.incorrect + c.missing + c.null)


def precision(c: Counts) -> Optional[float]:
    return _ratio(c.correct + c.null, c.correct + c.incorrect + c.extra + c.null)


def input_error(c: Counts) -> Optional[float]:
    """One minus precision: the error rate of an un-resolved input run."""
    p = precision(c)
    return None if p is None else 1.0 - p


def score_dialog(ailts, key: dict[int, list[TemporalUnit]]) -> FieldCounts:
    """Score one dialog; ``key`` maps every utterance id to its gold TUs."""
    by_id = {a.utterance_id: a for a in ailts}
    pairs = []
    for uid, gold in key.items():
        system = by_id[uid].when if uid in by_id else ()
        pairs.extend(align_tus(system, gold) if (system or gold) else [(NULL_TU, NULL_TU)])
    return score_counts(pairs)


def evaluate(corpus, config: EngineConfig = EngineConfig(),
             first_alternative_only: bool = False) -> FieldCounts:
    """Resolve and score ``(dialog, key)`` pairs, summing the counts."""
    total = FieldCounts()
    for dialog, key in corpus:
        ailts = resolve_dialog(dialog, config, first_alternative_only=first_alternative_only)
        total = total + score_dialog(ailts, key)
    return total


def lower_bound(corpus, config: EngineConfig = EngineConfig()) -> tuple[FieldCounts, Optional[float]]:
    """Scores with every rule disabled and the first-ranked parse of each utterance."""
    counts = evaluate(corpus, replace(config, use_rules=False), first_alternative_only=True)
    return counts, accuracy(counts.overall())


@dataclass(frozen=True)
class ScoreRow:
    label: str
    counts: Counts
    acc_lb: Optional[float] = None

    @property
    def acc(self) -> Optional[float]:
        return accuracy(self.counts)

    @property
    def prec(self) -> Optional[float]:
        return precision(self.counts)

    def as_dict(self) -> dict:
        return {
            "label": self.label, "cor": self.counts.correct, "inc": self.counts.incorrect,
            "mis": self.counts.missing, "ext": self.counts.extra, "nul": self.counts.null,
            "acc_lb": self.acc_lb, "acc": self.acc, "prec": self.prec,
        }


_LABELS = {"month": "Month", "date": "Date", "weekday": "WeekDay",
           "hour_minute": "HourMin", "time_of_day": "TimeDay"}


def score_rows(counts: FieldCounts, lower: Optional[FieldCounts] = None) -> list[ScoreRow]:
    """Per-field rows in the order start fields, end fields, then ``overall``."""
    rows = []
    for name in START_FIELDS + END_FIELDS:
        lb = accuracy(lower[name]) if lower is not None else None
        rows.append(ScoreRow(f"{name.slot} {_LABELS[name.attr]}", counts[name], lb))
    lb = accuracy(lower.overall()) if lower is not None else None
    rows.append(ScoreRow("overall", counts.overall(), lb))
    return rows


def format_table(rows: Sequence[ScoreRow]) -> str:
    """Aligned text: Label Cor Inc Mis Ext Nul AccLB Acc Prec."""
    def num(x):
        return "    -" if x is None else f"{x:.3f}"

    lines = [f"{'Label':<8} {'Cor':>4} {'Inc':>4} {'Mis':>4} {'Ext':>4} {'Nul':>4} "
             f"{'AccLB':>6} {'Acc':>6} {'Prec':>6}"]
    slot = None
    for row in rows:
        head, _, label = row.label.partition(" ")
        if not label:
            head, label = None, row.label
        if head != slot and head is not None:
            lines.append(head)
            slot = head
        c = row.counts
        lines.append(f"{label:<8} {c.correct:>4} {c.incorrect:>4} {c.missing:>4} {c.extra:>4} "
                     f"{c.null:>4} {num(row.acc_lb):>6} {num(row.acc):>6} {num(row.prec):>6}")
    return "\n".join(lines)


# -- agreement -------------------------------------------------------------

@dataclass(frozen=True)
class AgreementTable:
    """Items x raters matrix of category labels. ``None`` is a label too."""

    rows: tuple[tuple[Hashable, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("agreement table has no items")
        width = len(self.rows[0])
        if width < 2:
            raise ValueError("agreement needs at least two raters")
        if any(len(r) != width for r in self.rows):
            raise ValueError("every item needs a label from every rater")

    @classmethod
    def from_rows(cls, rows) -> "AgreementTable":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n_raters(self) -> int:
        return len(self.rows[0])

    def column(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def columns(self, js: Sequence[int]) -> "AgreementTable":
        return AgreementTable(tuple(tuple(r[j] for j in js) for r in self.rows))


def kappa_from(pa: float, pe: float) -> Optional[float]:
    if pe >= 1.0:
        return None
    return (pa - pe) / (1.0 - pe)


def observed_agreement(table: AgreementTable, mode: str = "item") -> float:
    """Pa.

    ``item``: per item, the share of rater pairs that agree, averaged over
    items. ``pooled``: the share of items on which all raters agree.
    """
    if mode == "item":
        n = table.n_raters
        pairs = n * (n - 1)
        per_item = [sum(c * (c - 1) for c in Counter(r).values()) / pairs for r in table.rows]
        return sum(per_item) / len(per_item)
    if mode == "pooled":
        return sum(len(set(r)) == 1 for r in table.rows) / len(table.rows)
    raise ValueError(f"unknown agreement mode {mode!r}")


def expected_agreement(table: AgreementTable, chance: str = "pooled") -> float:
    """Pe.

    ``pooled``: sum of squared category shares over all ratings.
    ``per_rater``: each rater keeps its own marginals; the product for a
    pair of raters summed over categories, averaged over rater pairs. For
    two raters this is Cohen's chance term.
    """
    if chance == "pooled":
        labels = Counter(label for r in table.rows for label in r)
        total = sum(labels.values())
        return sum((c / total) ** 2 for c in labels.values())
    if chance == "per_rater":
        n_items = len(table.rows)
        marginals = [Counter(table.column(j)) for j in range(table.n_raters)]
        terms = []
        for a, b in itertools.combinations(marginals, 2):
            terms.append(sum(a[k] * b[k] for k in a) / n_items ** 2)
        return sum(terms) / len(terms)
    raise ValueError(f"unknown chance model {chance!r}")


def kappa(table: AgreementTable, mode: str = "item", chance: str = "pooled") -> Optional[float]:
    """(Pa - Pe) / (1 - Pe); None when Pe is 1 (a single category throughout)."""
    return kappa_from(observed_agreement(table, mode), expected_agreement(table, chance))


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> Optional[float]:
    """Two-rater kappa from the confusion matrix."""
    if len(a) != len(b) or not a:
        raise ValueError("rating sequences must be non-empty and equally long")
    n = len(a)
    confusion = Counter(zip(a, b))
    pa = sum(v for (x, y), v in confusion.items() if x == y) / n
    ma, mb = Counter(a), Counter(b)
    pe = sum(ma[k] * mb[k] for k in ma) / n ** 2
    return kappa_from(pa, pe)


def pairwise_expert_kappa(table: AgreementTable, expert_column: int) -> Optional[float]:
    """Mean over the non-expert raters of their two-rater kappa with the expert."""
    expert = table.column(expert_column)
    scores = [cohen_kappa(table.column(j), expert)
              for j in range(table.n_raters) if j != expert_column]
    if any(s is None for s in scores):
        return None
    return sum(scores) / len(scores)
