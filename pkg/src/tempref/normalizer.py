"""Surface temporal records to normalized Temporal Unit skeletons.

The input format stands in for a semantic parser's output. Each utterance
alternative lists the temporal expressions found in it, in order, each one
a handful of optional surface fields.
"""
from __future__ import annotations

import datetime as dt
import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

from .core import MONTHS, TIMES_OF_DAY, WEEKDAYS, Endpoint, TemporalUnit
from .dates import DeicticTerm, infer_trivial

log = logging.getLogger(__name__)


class Tense(str, enum.Enum):
    PRESENT = "present"
    FUTURE = "future"
    SIMPLE_PAST = "simple_past"
    PAST_PERFECT = "past_perfect"
    OTHER = "other"

    @classmethod
    def parse(cls, value) -> "Tense":
        try:
            return cls(value)
        except ValueError:
            log.warning("unknown tense %r, treating as 'other'", value)
            return cls.OTHER


SUPPRESSING_TENSES = frozenset({Tense.SIMPLE_PAST, Tense.PAST_PERFECT})
SLOT_HINTS = ("start", "end", "unspecified")


class MalformedExpression(ValueError):
    pass


@dataclass(frozen=True)
class Expression:
    """One surface temporal expression. Every field is optional."""

    slot_hint: str = "unspecified"
    month: Optional[int] = None
    date: Optional[int] = None
    weekday: Optional[int] = None
    clock_hour: Optional[int] = None
    minutes: Optional[int] = None
    meridiem: Optional[str] = None
    time_of_day_word: Optional[str] = None
    deictic: Optional[str] = None


@dataclass(frozen=True)
class SurfaceIlt:
    utterance_id: int
    speaker: str = ""
    expressions: tuple[Expression, ...] = ()
    tense: Tense = Tense.PRESENT
    parse_rank: int = 0


@dataclass(frozen=True)
class NormalizedIlt:
    utterance_id: int
    tus: tuple[TemporalUnit, ...] = ()
    # deictics[i] is the deictic term attached to tus[i], if any
    deictics: tuple[Optional[DeicticTerm], ...] = ()
    tense: Tense = Tense.PRESENT
    suppressed: bool = False
    parse_rank: int = 0
    error: Optional[str] = None

    def mentions(self):
        return zip(self.tus, self.deictics)


@dataclass(frozen=True)
class AmPmPolicy:
    """Meridiem for bare clock hours: ``pm_from``..``pm_until`` read as pm.

    12 is always noon. Hours outside 1-12 are already on the 24-hour clock.
    """

    pm_from: int = 1
    pm_until: int = 7


AFTERNOON_WORDS = {"pm", "afternoon", "evening"}
MORNING_WORDS = {"am", "morning"}


def _lookup(value, names, label, lo, hi) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool):
        raise MalformedExpression(f"bad {label}: {value!r}")
    if isinstance(value, int):
        number = value
    else:
        text = str(value).strip().lower()
        if text.isdigit():
            number = int(text)
        elif text[:3] in names:
            number = names.index(text[:3]) + lo
        else:
            raise MalformedExpression(f"bad {label}: {value!r}")
    if not lo <= number <= hi:
        raise MalformedExpression(f"{label} out of range: {value!r}")
    return number


def clock_time(hour: int, minutes: int, meridiem: Optional[str], word: Optional[str],
               policy: AmPmPolicy) -> tuple[int, str]:
    """Resolve a clock reading to (minutes since midnight, time-of-day label)."""
    if not 0 <= hour <= 23:
        raise MalformedExpression(f"clock hour out of range: {hour}")
    if not 0 <= minutes <= 59:
        raise MalformedExpression(f"minutes out of range: {minutes}")
    if meridiem is not None:
        if meridiem not in ("am", "pm"):
            raise MalformedExpression(f"bad meridiem: {meridiem!r}")
        if hour > 12:
            raise MalformedExpression(f"{hour} {meridiem} is not a clock reading")
        pm = meridiem == "pm"
        label = meridiem
    elif hour == 0 or hour > 12:
        return hour * 60 + minutes, ("pm" if hour >= 12 else "am")
    elif word in AFTERNOON_WORDS:
        pm, label = True, word
    elif word in MORNING_WORDS:
        pm, label = hour == 12, word
    else:
        pm = hour == 12 or policy.pm_from <= hour <= policy.pm_until
        label = "pm" if pm else "am"
    if hour == 12:
        h24 = 12 if pm else 0
    else:
        h24 = hour + 12 if pm else hour
    return h24 * 60 + minutes, label


def expression_fields(expr: Expression, policy: AmPmPolicy) -> dict:
    """The endpoint fields an expression asserts, as an ``Endpoint`` kwargs dict."""
    if expr.slot_hint not in SLOT_HINTS:
        raise MalformedExpression(f"bad slot hint: {expr.slot_hint!r}")
    values = {
        "month": _lookup(expr.month, MONTHS, "month", 1, 12),
        "date": _lookup(expr.date, (), "date", 1, 31),
        "weekday": _lookup(expr.weekday, WEEKDAYS, "weekday", 0, 6),
    }
    word = expr.time_of_day_word
    if word is not None and word not in TIMES_OF_DAY:
        raise MalformedExpression(f"bad time of day: {word!r}")
    if expr.clock_hour is not None:
        values["hour_minute"], values["time_of_day"] = clock_time(
            expr.clock_hour, expr.minutes or 0, expr.meridiem, word, policy)
    elif expr.minutes is not None or expr.meridiem is not None:
        raise MalformedExpression("minutes or meridiem without a clock hour")
    else:
        values["time_of_day"] = word
    if values["month"] and values["date"] and values["date"] > _MONTH_LENGTH[values["month"]]:
        raise MalformedExpression(f"day {values['date']} does not exist in month {values['month']}")
    return {k: v for k, v in values.items() if v is not None}


_MONTH_LENGTH = {1: 31, 2: 29, 3: 31, 4: 30, 5: 31, 6: 30,
                 7: 31, 8: 31, 9: 30, 10: 31, 11: 30, 12: 31}


@dataclass
class _Group:
    start: dict = field(default_factory=dict)
    end: dict = field(default_factory=dict)
    deictic: Optional[DeicticTerm] = None

    def empty(self) -> bool:
        return not self.start and not self.end and self.deictic is None

    def accepts(self, slot: str, values: dict, deictic, hint: str) -> bool:
        if hint == "start" and self.end:
            return False
        target = getattr(self, slot)
        if any(k in target and target[k] != v for k, v in values.items()):
            return False
        return deictic is None or self.deictic in (None, deictic)

    def add(self, slot: str, values: dict, deictic) -> None:
        getattr(self, slot).update(values)
        if deictic is not None:
            self.deictic = deictic

    def tu(self) -> TemporalUnit:
        return TemporalUnit(Endpoint(**self.start), Endpoint(**self.end))


def group_expressions(expressions, policy: AmPmPolicy = AmPmPolicy()) -> list[_Group]:
    """Merge consecutive expressions into TUs.

    An expression joins the current TU unless it contradicts a value already
    in the slot it fills, or starts a new interval after an end was given.
    """
    groups = [_Group()]
    for expr in expressions:
        values = expression_fields(expr, policy)
        deictic = None
        if expr.deictic is not None:
            try:
                deictic = DeicticTerm(expr.deictic)
            except ValueError:
                raise MalformedExpression(f"unknown deictic term: {expr.deictic!r}") from None
        if not values and deictic is None:
            continue
        slot = "end" if expr.slot_hint == "end" else "start"
        if not groups[-1].accepts(slot, values, deictic, expr.slot_hint):
            groups.append(_Group())
        groups[-1].add(slot, values, deictic)
    return [g for g in groups if not g.empty()]


def tense_filter(ilt) -> bool:
    """True if the utterance's times should be ignored (simple past, past perfect)."""
    return Tense(ilt.tense) in SUPPRESSING_TENSES


def normalize(ilt: SurfaceIlt, dialog_date: dt.date,
              policy: AmPmPolicy = AmPmPolicy()) -> NormalizedIlt:
    tense = Tense.parse(ilt.tense)
    suppressed = tense in SUPPRESSING_TENSES
    try:
        groups = group_expressions(ilt.expressions, policy)
    except MalformedExpression as exc:
        log.warning("utterance %s: %s", ilt.utterance_id, exc)
        return NormalizedIlt(ilt.utterance_id, tense=tense, suppressed=suppressed,
                             parse_rank=ilt.parse_rank, error=str(exc))
    tus = tuple(infer_trivial(g.tu(), dialog_date) for g in groups)
    return NormalizedIlt(
        ilt.utterance_id,
        tus=tus,
        deictics=tuple(g.deictic for g in groups),
        tense=tense,
        suppressed=suppressed,
        parse_rank=ilt.parse_rank,
    )
