"""File formats: dialog input, resolver output, gold keys, agreement tables.

Everything is UTF-8 JSON. Temporal Units travel in the flat ten-field
vector form (``start_month`` ... ``end_time_of_day``) plus an optional
``year``; months and dates are integers, weekdays three-letter names and
clock times ``"HH:MM"``.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import jsonschema

from .core import WEEKDAYS, FieldName, TemporalUnit, format_hour_minute, parse_hour_minute
from .engine import Ailt
from .normalizer import Expression, SurfaceIlt, Tense

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FormatError(ValueError):
    """Input that does not conform to its schema."""


@dataclass(frozen=True)
class Utterance:
    utterance_id: int
    speaker: str = ""
    text: str = ""
    alternatives: tuple[SurfaceIlt, ...] = ()


@dataclass(frozen=True)
class Dialog:
    dialog_id: str
    dialog_date: dt.date
    utterances: tuple[Utterance, ...] = ()
    locale: str = ""


@dataclass(frozen=True)
class DialogOutput:
    dialog_id: str
    dialog_date: dt.date
    ailts: tuple[Ailt, ...] = ()


def _schema(name: str) -> dict:
    return json.loads(resources.files("tempref.schemas").joinpath(name).read_text("utf-8"))


DIALOG_SCHEMA = _schema("dialog.schema.json")
TU_SCHEMA = _schema("tu_vector.schema.json")

_TU_LIST = {"type": "array", "items": TU_SCHEMA}
OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["dialogs"],
    "properties": {"dialogs": {"type": "array", "items": {
        "type": "object",
        "required": ["dialog_id", "records"],
        "properties": {
            "dialog_id": {"type": "string"},
            "dialog_date": {"type": "string"},
            "records": {"type": "array", "items": {
                "type": "object",
                "required": ["utterance_id", "tus"],
                "properties": {
                    "utterance_id": {"type": "integer"},
                    "tus": _TU_LIST,
                    "certainty": {"type": "number"},
                    "rules": {"type": "array", "items": {"type": "string"}},
                    "antecedents": {"type": "array", "items": {"type": "integer"}},
                    "critics": {"type": "array", "items": {"type": "string"}},
                    "suppressed": {"type": "boolean"},
                    "truncated": {"type": "boolean"},
                    "parse_rank": {"type": "integer"},
                },
            }},
        },
    }}},
}
KEY_SCHEMA = {
    "type": "object",
    "required": ["dialogs"],
    "properties": {"dialogs": {"type": "array", "items": {
        "type": "object",
        "required": ["dialog_id", "utterances"],
        "properties": {
            "dialog_id": {"type": "string"},
            "utterances": {"type": "array", "items": {
                "type": "object",
                "required": ["utterance_id", "tus"],
                "properties": {"utterance_id": {"type": "integer"}, "tus": _TU_LIST},
            }},
        },
    }}},
}


def _location(error: jsonschema.ValidationError) -> str:
    where = ""
    for part in error.absolute_path:
        where += f"[{part}]" if isinstance(part, int) else (f".{part}" if where else part)
    return where or "<root>"


def _validate(doc, schema: dict, source) -> None:
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{source}: {_location(e)}: {e.message}" for e in errors]
        raise FormatError("\n".join(lines))


def _read_json(path: PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# -- Temporal Unit vectors ---------------------------------------------------

def tu_to_vector(tu: TemporalUnit, with_year: bool = True) -> dict:
    out = {}
    for name in FieldName:
        value = tu.get(name)
        if value is not None and name.attr == "weekday":
            value = WEEKDAYS[value]
        elif value is not None and name.attr == "hour_minute":
            value = format_hour_minute(value)
        out[name.value] = value
    if with_year:
        out["year"] = tu.year
    return out


def vector_to_tu(vector: dict) -> TemporalUnit:
    values = {}
    for name in FieldName:
        value = vector.get(name.value)
        if value is not None and name.attr == "weekday":
            value = WEEKDAYS.index(value)
        elif value is not None and name.attr == "hour_minute":
            value = parse_hour_minute(value)
        values[name] = value
    return TemporalUnit.from_fields(values, year=vector.get("year"))


# -- dialogs ----------------------------------------------------------------

def _expression(doc: dict) -> Expression:
    return Expression(
        slot_hint=doc.get("slot", "unspecified"),
        month=doc.get("month"),
        date=doc.get("date"),
        weekday=doc.get("weekday"),
        clock_hour=doc.get("clock_hour"),
        minutes=doc.get("minutes"),
        meridiem=doc.get("meridiem"),
        time_of_day_word=doc.get("time_of_day"),
        deictic=doc.get("deictic"),
    )


def parse_dialog(doc: dict, source="<dialog>") -> Dialog:
    _validate(doc, DIALOG_SCHEMA, source)
    try:
        dialog_date = dt.date.fromisoformat(doc["dialog_date"])
    except ValueError as exc:
        raise FormatError(f"{source}: dialog_date: {exc}") from None

    utterances = []
    previous = None
    for i, u in enumerate(doc["utterances"]):
        uid = u["utterance_id"]
        if previous is not None and uid <= previous:
            raise FormatError(f"{source}: utterances[{i}].utterance_id: "
                              f"{uid} does not follow {previous}")
        previous = uid
        alternatives = []
        ranks = set()
        for j, alt in enumerate(u["alternatives"]):
            rank = alt.get("parse_rank", j)
            if rank in ranks:
                raise FormatError(f"{source}: utterances[{i}].alternatives[{j}].parse_rank: "
                                  f"duplicate rank {rank}")
            ranks.add(rank)
            try:
                tense = Tense(alt.get("tense", "present"))
            except ValueError:
                log.warning("%s: utterance %s: unknown tense %r, using 'other'",
                            source, uid, alt["tense"])
                tense = Tense.OTHER
            alternatives.append(SurfaceIlt(
                utterance_id=uid,
                speaker=u.get("speaker", ""),
                expressions=tuple(_expression(e) for e in alt.get("expressions", [])),
                tense=tense,
                parse_rank=rank,
            ))
        utterances.append(Utterance(uid, u.get("speaker", ""), u.get("text", ""),
                                    tuple(alternatives)))
    return Dialog(doc["dialog_id"], dialog_date, tuple(utterances), doc.get("locale", ""))


def load_dialog(path: PathLike) -> Dialog:
    return parse_dialog(_read_json(path), source=str(path))


# -- resolver output --------------------------------------------------------

def ailt_record(ailt: Ailt) -> dict:
    return {
        "utterance_id": ailt.utterance_id,
        "tus": [tu_to_vector(tu) for tu in ailt.when],
        "certainty": ailt.certainty,
        "rules": list(ailt.constituents),
        "antecedents": list(ailt.antecedents),
        "critics": list(ailt.critics),
        "suppressed": ailt.suppressed,
        "truncated": ailt.truncated,
        "parse_rank": ailt.parse_rank,
    }


def record_ailt(rec: dict) -> Ailt:
    return Ailt(
        utterance_id=rec["utterance_id"],
        when=tuple(vector_to_tu(v) for v in rec["tus"]),
        certainty=rec.get("certainty", 0.0),
        constituents=tuple(rec.get("rules", ())),
        antecedents=tuple(rec.get("antecedents", ())),
        critics=tuple(rec.get("critics", ())),
        suppressed=rec.get("suppressed", False),
        truncated=rec.get("truncated", False),
        parse_rank=rec.get("parse_rank", 0),
    )


def output_document(outputs) -> dict:
    return {"dialogs": [
        {
            "dialog_id": out.dialog_id,
            "dialog_date": out.dialog_date.isoformat(),
            "records": [ailt_record(a) for a in out.ailts],
        }
        for out in outputs
    ]}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def emit_ailts(outputs, path: Optional[PathLike] = None) -> str:
    """Serialize resolved dialogs; write to ``path`` if given. Returns the text."""
    text = dumps(output_document(outputs))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_output(doc: dict, source="<output>") -> list[DialogOutput]:
    _validate(doc, OUTPUT_SCHEMA, source)
    return [
        DialogOutput(
            d["dialog_id"],
            dt.date.fromisoformat(d["dialog_date"]) if d.get("dialog_date") else None,
            tuple(record_ailt(r) for r in d["records"]),
        )
        for d in doc["dialogs"]
    ]


def load_output(path: PathLike) -> list[DialogOutput]:
    return parse_output(_read_json(path), source=str(path))


# -- gold keys --------------------------------------------------------------

def parse_key(doc: dict, source="<key>") -> dict[str, dict[int, list[TemporalUnit]]]:
    """``{dialog_id: {utterance_id: [gold TU, ...]}}``."""
    _validate(doc, KEY_SCHEMA, source)
    return {
        d["dialog_id"]: {u["utterance_id"]: [vector_to_tu(v) for v in u["tus"]]
                         for u in d["utterances"]}
        for d in doc["dialogs"]
    }


def load_key(path: PathLike):
    return parse_key(_read_json(path), source=str(path))


def key_document(keys: dict) -> dict:
    return {"dialogs": [
        {"dialog_id": did,
         "utterances": [{"utterance_id": uid, "tus": [tu_to_vector(t, with_year=False) for t in tus]}
                        for uid, tus in utts.items()]}
        for did, utts in keys.items()
    ]}


# -- agreement tables -------------------------------------------------------

AGREEMENT_SCHEMA = {
    "type": "object",
    "required": ["raters", "fields"],
    "properties": {
        "raters": {"type": "array", "minItems": 2, "items": {"type": "string"}},
        "fields": {"type": "object", "additionalProperties": {
            "type": "array",
            "items": {"type": "array", "items": {"type": ["string", "integer", "null"]}},
        }},
    },
}


def load_agreement(path: PathLike):
    """Agreement file: rater names plus, per field, one row of labels per item.

    Returns ``(raters, {field: [[label per rater], ...]})``. ``null`` is a
    category of its own.
    """
    doc = _read_json(path)
    _validate(doc, AGREEMENT_SCHEMA, str(path))
    raters = doc["raters"]
    for name, rows in doc["fields"].items():
        for i, row in enumerate(rows):
            if len(row) != len(raters):
                raise FormatError(f"{path}: fields.{name}[{i}]: expected {len(raters)} "
                                  f"labels, found {len(row)}")
    return raters, doc["fields"]
