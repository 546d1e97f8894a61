"""The temporal resolution rules.

Each rule looks at the current (normalized) TU and either returns a partial
interpretation with a certainty factor or ``None``. The non-anaphoric rules
work from the dialog date; the anaphoric ones scan the focus list newest
first and stop at the first entity for which their relation holds.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Optional

from .core import (
    DiscourseEntity,
    Endpoint,
    FocusList,
    SpecLevel,
    TemporalUnit,
    drop_levels,
    merge,
    merge_upper,
    most_specific,
    specificity,
    starting_fields,
)
from .dates import (
    CalendarError,
    day_tu,
    endpoint_dates,
    next_matching,
    next_month_start,
    resolve_deictic,
)

BASE_CERTAINTY = {
    "NA1": 0.9,
    "A1": 0.8,
    "A3": 0.6,
    "A2": 0.5,
    "A4": 0.5,
    "NA2": 0.4,
}
RULE_ORDER = ("NA1", "A1", "A3", "A2", "A4", "NA2")


@dataclass(frozen=True)
class DistancePenalty:
    per_position: float = 0.05
    cap: float = 0.3

    def __post_init__(self):
        if self.per_position < 0:
            raise ValueError("per_position must be non-negative")
        if not 0 <= self.cap < 0.5:
            raise ValueError("cap must lie in [0, 0.5)")


@dataclass(frozen=True)
class Pailt:
    """What one rule would contribute to the utterance's interpretation."""

    when: TemporalUnit
    certainty: float
    rule_id: str
    antecedent: Optional[DiscourseEntity] = None
    distance: Optional[int] = None


def distance_factor(de: DiscourseEntity, fl: FocusList,
                    penalty: DistancePenalty = DistancePenalty()) -> float:
    return penalty_for(fl.distance(de), penalty)


def penalty_for(k: int, penalty: DistancePenalty) -> float:
    return min(penalty.cap, penalty.per_position * k)


def _anaphoric(rule_id: str, when: TemporalUnit, de: DiscourseEntity, k: int,
               penalty: DistancePenalty) -> Pailt:
    cf = round(BASE_CERTAINTY[rule_id] - penalty_for(k, penalty), 10)
    return Pailt(when, cf, rule_id, de, k)


def _forward_field(tu: TemporalUnit) -> SpecLevel:
    """Level of the most specific starting field above time of day."""
    return most_specific(f for f in starting_fields(tu) if f.level < SpecLevel.TIME_OF_DAY)


def _forward(tu: TemporalUnit, rf: dt.date, inclusive: bool = False) -> Optional[dt.date]:
    """Next day after ``rf`` matching the TU's starting month/date/weekday."""
    s = tu.start
    try:
        if _forward_field(tu) is SpecLevel.MONTH:
            return next_month_start(s.month, rf)
        return next_matching(rf, month=s.month, date=s.date, weekday=s.weekday,
                             inclusive=inclusive)
    except CalendarError:
        return None


def _augment(tu: TemporalUnit, day: dt.date) -> Optional[TemporalUnit]:
    frame = day_tu(day)
    if _forward_field(tu) is SpecLevel.MONTH:
        frame = TemporalUnit(Endpoint(month=day.month), year=day.year)
    return merge(tu, frame)


def rule_na1(tu: TemporalUnit, deictic, dialog_date: dt.date) -> Optional[Pailt]:
    """Deictic term resolved against the dialog date."""
    if deictic is None:
        return None
    when = merge(resolve_deictic(deictic, dialog_date), tu)
    if when is None:
        return None
    return Pailt(when, BASE_CERTAINTY["NA1"], "NA1")


def rule_na2(tu: TemporalUnit, dialog_date: dt.date) -> Optional[Pailt]:
    """Forward time from the dialog date: "How about Wednesday at 2?"."""
    if _forward_field(tu) is SpecLevel.NONE:
        return None
    day = _forward(tu, dialog_date)
    when = _augment(tu, day) if day is not None else None
    if when is None:
        return None
    return Pailt(when, BASE_CERTAINTY["NA2"], "NA2")


def _candidates(fl: FocusList):
    for k, de in fl.most_recent_first():
        if not de.tu.is_null():
            yield k, de


def rule_a1(tu: TemporalUnit, fl: FocusList,
            penalty: DistancePenalty = DistancePenalty()) -> Optional[Pailt]:
    """Same time, or the current TU is more specific: union of the two."""
    level = specificity(tu)
    if level is SpecLevel.NONE:
        return None
    for k, de in _candidates(fl):
        if specificity(de.tu) <= level:
            when = merge(de.tu, tu)
            if when is not None:
                return _anaphoric("A1", when, de, k, penalty)
    return None


def rule_a2(tu: TemporalUnit, fl: FocusList,
            penalty: DistancePenalty = DistancePenalty()) -> Optional[Pailt]:
    """Current TU is less specific: keep the antecedent from its level up."""
    level = specificity(tu)
    if level is SpecLevel.NONE:
        return None
    for k, de in _candidates(fl):
        if specificity(de.tu) > level:
            when = merge_upper(de.tu, tu)
            if when is not None:
                return _anaphoric("A2", when, de, k, penalty)
    return None


def rule_a3(tu: TemporalUnit, fl: FocusList, dialog_date: dt.date,
            penalty: DistancePenalty = DistancePenalty()) -> Optional[Pailt]:
    """Forward time from the antecedent's start day: "Wed Aug 2" ... "Friday".

    An antecedent without a known start day cannot serve as the frame and is
    skipped. When the antecedent spans several days the search includes its
    first day and must land inside the span.
    """
    if _forward_field(tu) is SpecLevel.NONE:
        return None
    level = specificity(tu)
    for k, de in _candidates(fl):
        if level < specificity(de.tu):
            continue
        first, last = endpoint_dates(de.tu, dialog_date)
        if first is None:
            continue
        is_span = last is not None and last > first
        day = _forward(tu, first, inclusive=is_span)
        if day is None or (is_span and day > last):
            return None
        when = _augment(tu, day)
        if when is None:
            return None
        return _anaphoric("A3", when, de, k, penalty)
    return None


def _drop_clock_meridiem(upper: TemporalUnit, original: TemporalUnit) -> TemporalUnit:
    """Null an am/pm label that only restated the meridiem of a dropped clock time."""
    def strip(kept: Endpoint, orig: Endpoint) -> Endpoint:
        if orig.hour_minute is not None and kept.time_of_day in ("am", "pm"):
            return replace(kept, time_of_day=None)
        return kept
    return TemporalUnit(strip(upper.start, original.start), strip(upper.end, original.end), upper.year)


def rule_a4(tu: TemporalUnit, fl: FocusList,
            penalty: DistancePenalty = DistancePenalty()) -> Optional[Pailt]:
    """Modification: antecedent above level X, current TU at and below X."""
    level = specificity(tu)
    if level is SpecLevel.NONE:
        return None
    for k, de in _candidates(fl):
        if level >= specificity(de.tu):
            upper = drop_levels(de.tu, lambda lv: lv < level)
            if level is SpecLevel.HOUR_MINUTE:
                upper = _drop_clock_meridiem(upper, de.tu)
            when = merge(upper, tu)
            if when is not None:
                return _anaphoric("A4", when, de, k, penalty)
    return None


def apply_all_rules(tu: TemporalUnit, deictic, fl: FocusList, dialog_date: dt.date,
                    penalty: DistancePenalty = DistancePenalty()) -> list[Pailt]:
    """Every rule that fires for the TU, in ``RULE_ORDER``."""
    if tu.is_null() and deictic is None:
        return []
    results = {
        "NA1": rule_na1(tu, deictic, dialog_date),
        "A1": rule_a1(tu, fl, penalty),
        "A3": rule_a3(tu, fl, dialog_date, penalty),
        "A2": rule_a2(tu, fl, penalty),
        "A4": rule_a4(tu, fl, penalty),
        "NA2": rule_na2(tu, dialog_date),
    }
    return [results[r] for r in RULE_ORDER if results[r] is not None]
