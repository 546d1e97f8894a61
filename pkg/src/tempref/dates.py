"""Calendar arithmetic: forward search, deictic resolution, trivial inference.

Calendar dates are plain :class:`datetime.date` values.
"""
from __future__ import annotations

import datetime as dt
import enum
from dataclasses import replace
from typing import Optional

from .core import WEEKDAYS, Endpoint, TemporalUnit

ONE_DAY = dt.timedelta(days=1)
# forward searches give up after a year; e.g. "the 31st" never occurs in a
# run of 30-day months only, but anything real turns up well inside this
SEARCH_LIMIT_DAYS = 366


class CalendarError(ValueError):
    pass


class DeicticTerm(str, enum.Enum):
    TODAY = "today"
    TOMORROW = "tomorrow"
    DAY_AFTER_TOMORROW = "day_after_tomorrow"
    YESTERDAY = "yesterday"
    THIS_WEEK = "this_week"
    NEXT_WEEK = "next_week"
    LAST_WEEK = "last_week"
    THIS_MONTH = "this_month"
    NEXT_MONTH = "next_month"
    THIS_MONDAY = "this_mon"
    THIS_TUESDAY = "this_tue"
    THIS_WEDNESDAY = "this_wed"
    THIS_THURSDAY = "this_thu"
    THIS_FRIDAY = "this_fri"
    THIS_SATURDAY = "this_sat"
    THIS_SUNDAY = "this_sun"
    NEXT_MONDAY = "next_mon"
    NEXT_TUESDAY = "next_tue"
    NEXT_WEDNESDAY = "next_wed"
    NEXT_THURSDAY = "next_thu"
    NEXT_FRIDAY = "next_fri"
    NEXT_SATURDAY = "next_sat"
    NEXT_SUNDAY = "next_sun"


def day_of_week(d: dt.date) -> int:
    """Weekday of ``d``, Monday = 0."""
    return d.weekday()


def weekday_number(name) -> int:
    if isinstance(name, int):
        if not 0 <= name <= 6:
            raise ValueError(f"weekday out of range: {name}")
        return name
    return WEEKDAYS.index(str(name).lower()[:3])


def make_date(year: int, month: int, day: int) -> Optional[dt.date]:
    try:
        return dt.date(year, month, day)
    except ValueError:
        return None


def next_matching(rf: dt.date, *, month: Optional[int] = None, date: Optional[int] = None,
                  weekday: Optional[int] = None, inclusive: bool = False) -> dt.date:
    """Earliest day after ``rf`` (or on it, if ``inclusive``) matching every given field.

    At least one of ``date`` or ``weekday`` must be given; month-only searches
    go through :func:`next_month_start`.
    """
    if date is None and weekday is None:
        raise ValueError("next_matching needs a date or a weekday")
    d = rf if inclusive else rf + ONE_DAY
    for _ in range(SEARCH_LIMIT_DAYS):
        if ((month is None or d.month == month)
                and (date is None or d.day == date)
                and (weekday is None or d.weekday() == weekday)):
            return d
        d += ONE_DAY
    raise CalendarError(
        f"no day with month={month} date={date} weekday={weekday} "
        f"within {SEARCH_LIMIT_DAYS} days of {rf}")


def next_month_start(month: int, rf: dt.date) -> dt.date:
    """First day of the next ``month`` strictly after the month containing ``rf``."""
    if not 1 <= month <= 12:
        raise CalendarError(f"month out of range: {month}")
    year = rf.year if month > rf.month else rf.year + 1
    return dt.date(year, month, 1)


def next_occurrence(field: str, value: int, rf: dt.date) -> dt.date:
    """The next ``value`` of a weekday, day-of-month or month following ``rf``."""
    if field == "weekday":
        return next_matching(rf, weekday=value)
    if field == "date":
        if not 1 <= value <= 31:
            raise CalendarError(f"day of month out of range: {value}")
        return next_matching(rf, date=value)
    if field == "month":
        return next_month_start(value, rf)
    raise ValueError(f"cannot search forward for field {field!r}")


def day_endpoint(d: dt.date) -> Endpoint:
    return Endpoint(month=d.month, date=d.day, weekday=d.weekday())


def day_tu(d: dt.date) -> TemporalUnit:
    return TemporalUnit(day_endpoint(d), Endpoint(), d.year)


def span_tu(first: dt.date, last: dt.date) -> TemporalUnit:
    return TemporalUnit(day_endpoint(first), day_endpoint(last), first.year)


def week_start(d: dt.date) -> dt.date:
    return d - dt.timedelta(days=d.weekday())


def resolve_deictic(term, rf: dt.date) -> TemporalUnit:
    """Resolve a deictic term against the dialog date.

    Weeks run Monday to Sunday and resolve to a start/end span; single days
    fill the start endpoint only; months fill the start month only.
    """
    try:
        term = DeicticTerm(term)
    except ValueError:
        raise CalendarError(f"unknown deictic term: {term!r}") from None

    if term is DeicticTerm.TODAY:
        return day_tu(rf)
    if term is DeicticTerm.TOMORROW:
        return day_tu(rf + ONE_DAY)
    if term is DeicticTerm.DAY_AFTER_TOMORROW:
        return day_tu(rf + 2 * ONE_DAY)
    if term is DeicticTerm.YESTERDAY:
        return day_tu(rf - ONE_DAY)
    if term in (DeicticTerm.THIS_WEEK, DeicticTerm.NEXT_WEEK, DeicticTerm.LAST_WEEK):
        offset = {DeicticTerm.THIS_WEEK: 0, DeicticTerm.NEXT_WEEK: 7, DeicticTerm.LAST_WEEK: -7}[term]
        monday = week_start(rf) + dt.timedelta(days=offset)
        return span_tu(monday, monday + dt.timedelta(days=6))
    if term is DeicticTerm.THIS_MONTH:
        return TemporalUnit(Endpoint(month=rf.month), Endpoint(), rf.year)
    if term is DeicticTerm.NEXT_MONTH:
        first = next_month_start(rf.month % 12 + 1, rf)
        return TemporalUnit(Endpoint(month=first.month), Endpoint(), first.year)
    # this_<weekday> stays inside the current week, next_<weekday> is in the following one
    which, name = term.value.split("_")
    monday = week_start(rf) + dt.timedelta(days=7 if which == "next" else 0)
    return day_tu(monday + dt.timedelta(days=WEEKDAYS.index(name)))


def infer_year(month: int, date: int, dialog_date: dt.date) -> Optional[int]:
    """Year of the next occurrence of month/date on or after the dialog date."""
    for year in range(dialog_date.year, dialog_date.year + 9):
        d = make_date(year, month, date)
        if d is not None and d >= dialog_date:
            return year
    return None


def endpoint_dates(tu: TemporalUnit, dialog_date: dt.date) -> tuple[Optional[dt.date], Optional[dt.date]]:
    """Concrete start and end days of a TU, where month and date are known.

    The TU's year applies to the start; an end falling before the start in
    that year rolls over into the next one.
    """
    start = end = None
    year = tu.year
    if tu.start.month is not None and tu.start.date is not None:
        if year is None:
            year = infer_year(tu.start.month, tu.start.date, dialog_date)
        if year is not None:
            start = make_date(year, tu.start.month, tu.start.date)
    if tu.end.month is not None and tu.end.date is not None:
        if year is None:
            year = infer_year(tu.end.month, tu.end.date, dialog_date)
        if year is not None:
            end = make_date(year, tu.end.month, tu.end.date)
            if start is not None and end is not None and end < start:
                end = make_date(year + 1, tu.end.month, tu.end.date)
    return start, end


def weekday_conflicts(tu: TemporalUnit, dialog_date: dt.date) -> bool:
    """True when a stated weekday disagrees with the calendar for its month/date."""
    start, end = endpoint_dates(tu, dialog_date)
    for ep, day in ((tu.start, start), (tu.end, end)):
        if ep.weekday is not None and day is not None and day.weekday() != ep.weekday:
            return True
    return False


def infer_trivial(tu: TemporalUnit, dialog_date: dt.date) -> TemporalUnit:
    """Fill in what follows obviously from what is there.

    * a missing weekday is computed from a known month and date;
    * an end that has a clock time but no day inherits the start's day;
    * a missing year is taken from the next occurrence of the start day.

    An ending time is never invented from a starting time. Filled fields are
    never overwritten, so an inconsistent weekday survives for the critics.
    """
    start, endp = tu.start, tu.end
    if (endp.hour_minute is not None and endp.month is None and endp.date is None
            and endp.weekday is None and not start.is_null()):
        endp = replace(endp, month=start.month, date=start.date, weekday=start.weekday)
    tu = TemporalUnit(start, endp, tu.year)

    start_day, end_day = endpoint_dates(tu, dialog_date)
    year = tu.year
    if year is None:
        year = start_day.year if start_day else (end_day.year if end_day else None)
    if start_day is not None and start.weekday is None:
        start = replace(start, weekday=start_day.weekday())
    if end_day is not None and endp.weekday is None:
        endp = replace(endp, weekday=end_day.weekday())
    return TemporalUnit(start, endp, year)
