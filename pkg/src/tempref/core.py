"""Temporal Units, the specificity ordering, the focus list and merge algebra.

A Temporal Unit (TU) describes an interval with two endpoints. Each endpoint
carries five optional fields::

    (month, date, weekday, hour_minute, time_of_day)

``hour_minute`` is stored as minutes since midnight, ``weekday`` as 0-6 with
Monday = 0 (the same numbering as :meth:`datetime.date.weekday`). A null field
is ``None``. ``year`` rides along for calendar arithmetic; it is never scored
and never affects specificity.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

MONTHS = ("jan", "feb", "mar", "apr", "may", "jun",
          "jul", "aug", "sep", "oct", "nov", "dec")
WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
TIMES_OF_DAY = ("am", "pm", "morning", "afternoon", "evening")

ENDPOINT_ATTRS = ("month", "date", "weekday", "hour_minute", "time_of_day")


class SpecLevel(enum.IntEnum):
    """Rank of a field in the specificity ordering.

    Weekday and date are incomparable in the partial order; both share DAY.
    NONE is returned for a TU without any filled field.
    """

    NONE = -1
    MONTH = 0
    DAY = 1
    TIME_OF_DAY = 2
    HOUR_MINUTE = 3


ATTR_LEVEL = {
    "month": SpecLevel.MONTH,
    "date": SpecLevel.DAY,
    "weekday": SpecLevel.DAY,
    "time_of_day": SpecLevel.TIME_OF_DAY,
    "hour_minute": SpecLevel.HOUR_MINUTE,
}


class FieldName(str, enum.Enum):
    START_MONTH = "start_month"
    START_DATE = "start_date"
    START_WEEKDAY = "start_weekday"
    START_HOUR_MINUTE = "start_hour_minute"
    START_TIME_OF_DAY = "start_time_of_day"
    END_MONTH = "end_month"
    END_DATE = "end_date"
    END_WEEKDAY = "end_weekday"
    END_HOUR_MINUTE = "end_hour_minute"
    END_TIME_OF_DAY = "end_time_of_day"

    @property
    def slot(self) -> str:
        return self.value.split("_", 1)[0]

    @property
    def attr(self) -> str:
        return self.value.split("_", 1)[1]

    @property
    def level(self) -> SpecLevel:
        return ATTR_LEVEL[self.attr]

    def __str__(self) -> str:
        return self.value


START_FIELDS = tuple(f for f in FieldName if f.slot == "start")
END_FIELDS = tuple(f for f in FieldName if f.slot == "end")


@dataclass(frozen=True)
class Endpoint:
    month: Optional[int] = None
    date: Optional[int] = None
    weekday: Optional[int] = None
    hour_minute: Optional[int] = None
    time_of_day: Optional[str] = None

    def is_null(self) -> bool:
        return all(getattr(self, a) is None for a in ENDPOINT_ATTRS)

    def items(self) -> Iterator[tuple[str, object]]:
        for a in ENDPOINT_ATTRS:
            yield a, getattr(self, a)


NULL_ENDPOINT = Endpoint()


@dataclass(frozen=True)
class TemporalUnit:
    start: Endpoint = NULL_ENDPOINT
    end: Endpoint = NULL_ENDPOINT
    year: Optional[int] = None

    @classmethod
    def from_fields(cls, values: dict, year: Optional[int] = None) -> "TemporalUnit":
        """Build a TU from a mapping of FieldName (or its string value) to value."""
        start, end = {}, {}
        for key, value in values.items():
            name = FieldName(key)
            (start if name.slot == "start" else end)[name.attr] = value
        return cls(Endpoint(**start), Endpoint(**end), year)

    @classmethod
    def point(cls, year: Optional[int] = None, **values) -> "TemporalUnit":
        """A TU whose start and end are the same (e.g. "It is now 3pm")."""
        ep = Endpoint(**values)
        return cls(ep, ep, year)

    @classmethod
    def starting(cls, year: Optional[int] = None, **values) -> "TemporalUnit":
        return cls(Endpoint(**values), NULL_ENDPOINT, year)

    def get(self, name: FieldName):
        return getattr(getattr(self, name.slot), name.attr)

    def fields(self) -> dict[FieldName, object]:
        return {name: self.get(name) for name in FieldName}

    def filled(self) -> dict[FieldName, object]:
        return {name: v for name, v in self.fields().items() if v is not None}

    def is_null(self) -> bool:
        return self.start.is_null() and self.end.is_null()

    def with_fields(self, **changes) -> "TemporalUnit":
        """Return a copy with ``start_month=...`` style overrides applied."""
        start = {}
        end = {}
        year = changes.pop("year", self.year)
        for key, value in changes.items():
            name = FieldName(key)
            (start if name.slot == "start" else end)[name.attr] = value
        return TemporalUnit(replace(self.start, **start), replace(self.end, **end), year)

    def __str__(self) -> str:
        return f"({format_endpoint(self.start)}) ({format_endpoint(self.end)})"


NULL_TU = TemporalUnit()


def format_endpoint(ep: Endpoint) -> str:
    parts = [
        MONTHS[ep.month - 1].capitalize() if ep.month else "-",
        str(ep.date) if ep.date else "-",
        WEEKDAYS[ep.weekday].capitalize() if ep.weekday is not None else "-",
        format_hour_minute(ep.hour_minute) if ep.hour_minute is not None else "-",
        ep.time_of_day or "-",
    ]
    return ", ".join(parts)


def format_hour_minute(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_hour_minute(text: str) -> int:
    hours, minutes = text.split(":")
    value = int(hours) * 60 + int(minutes)
    if not 0 <= value < 24 * 60:
        raise ValueError(f"hour_minute out of range: {text!r}")
    return value


def specificity(tu: TemporalUnit) -> SpecLevel:
    """Level of the most specific filled field, start and end pooled."""
    level = SpecLevel.NONE
    for name, value in tu.fields().items():
        if value is not None and name.level > level:
            level = name.level
    return level


def starting_fields(tu: TemporalUnit) -> set[FieldName]:
    return {name for name in START_FIELDS if tu.get(name) is not None}


def most_specific(names: Iterable[FieldName]) -> SpecLevel:
    return max((n.level for n in names), default=SpecLevel.NONE)


def _merge_endpoint(a: Endpoint, b: Endpoint) -> Optional[Endpoint]:
    values = {}
    for attr in ENDPOINT_ATTRS:
        x, y = getattr(a, attr), getattr(b, attr)
        if x is not None and y is not None and x != y:
            return None
        values[attr] = x if x is not None else y
    return Endpoint(**values)


def merge(tu1: TemporalUnit, tu2: TemporalUnit) -> Optional[TemporalUnit]:
    """Slot-wise union of two TUs, or None if any slot has conflicting fillers.

    Years conflict like any other filler; a null year unifies with anything.
    """
    if tu1.year is not None and tu2.year is not None and tu1.year != tu2.year:
        return None
    start = _merge_endpoint(tu1.start, tu2.start)
    if start is None:
        return None
    end = _merge_endpoint(tu1.end, tu2.end)
    if end is None:
        return None
    return TemporalUnit(start, end, tu1.year if tu1.year is not None else tu2.year)


def drop_levels(tu: TemporalUnit, keep) -> TemporalUnit:
    """Null every field (both slots) whose level fails ``keep(level)``.

    The year goes with the month: it is dropped when months are.
    """
    def filt(ep: Endpoint) -> Endpoint:
        return Endpoint(**{a: (v if keep(ATTR_LEVEL[a]) else None) for a, v in ep.items()})

    year = tu.year if keep(SpecLevel.MONTH) else None
    return TemporalUnit(filt(tu.start), filt(tu.end), year)


def merge_upper(tu1: TemporalUnit, tu2: TemporalUnit) -> Optional[TemporalUnit]:
    """Merge, keeping only the fields of ``tu1`` no more specific than ``tu2``."""
    bound = specificity(tu2)
    if bound is SpecLevel.NONE:
        raise ValueError("merge_upper needs a second TU with at least one filled field")
    return merge(drop_levels(tu1, lambda level: level <= bound), tu2)


@dataclass(frozen=True)
class DiscourseEntity:
    tu: TemporalUnit
    utterance_index: int
    mention_index: int = 0


@dataclass(frozen=True)
class FocusList:
    """Recency-ordered discourse entities, most recent last. Append-only."""

    entities: tuple[DiscourseEntity, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.entities)

    def __iter__(self):
        return iter(self.entities)

    def most_recent_first(self) -> Iterator[tuple[int, DiscourseEntity]]:
        """Yield ``(distance, entity)`` pairs, distance 0 being the newest."""
        n = len(self.entities)
        for i in range(n - 1, -1, -1):
            yield n - 1 - i, self.entities[i]

    def distance(self, de: DiscourseEntity) -> int:
        for k, other in self.most_recent_first():
            if other is de or other == de:
                return k
        raise ValueError("discourse entity is not on the focus list")


def push_focus(fl: FocusList, tus: Iterable[TemporalUnit], utterance_index: int) -> FocusList:
    """Append one entity per non-null TU, in order of mention."""
    if fl.entities and utterance_index < fl.entities[-1].utterance_index:
        raise ValueError(
            f"utterance index {utterance_index} precedes the focus list tail "
            f"({fl.entities[-1].utterance_index})")
    new = [DiscourseEntity(tu, utterance_index, i)
           for i, tu in enumerate(t for t in tus if not t.is_null())]
    if not new:
        return fl
    return FocusList(fl.entities + tuple(new))


__all__ = [
    "MONTHS", "WEEKDAYS", "TIMES_OF_DAY", "SpecLevel", "FieldName", "Endpoint",
    "TemporalUnit", "NULL_TU", "START_FIELDS", "END_FIELDS", "specificity",
    "starting_fields", "most_specific", "merge", "merge_upper", "drop_levels",
    "DiscourseEntity", "FocusList", "push_focus", "format_hour_minute",
    "parse_hour_minute",
]
