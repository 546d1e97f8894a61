import json
import logging

import pytest

from conftest import synthetic_dialogs, worked_dialogs
from tempref import cli
from tempref.core import NULL_TU, Endpoint, TemporalUnit
from tempref.engine import resolve_dialog
from tempref.formats import (
    DialogOutput,
    FormatError,
    emit_ailts,
    load_dialog,
    load_key,
    load_output,
    parse_dialog,
    tu_to_vector,
    vector_to_tu,
)
from tempref.normalizer import Tense


def minimal(**over):
    doc = {"dialog_id": "d", "dialog_date": "1993-08-16", "utterances": [
        {"utterance_id": i, "alternatives": [{"expressions": [{"weekday": "mon"}]}]} for i in range(3)]}
    doc.update(over)
    return doc


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_load_valid(tmp_path):
    d = load_dialog(write(tmp_path, "d.json", minimal()))
    assert len(d.utterances) == 3 and d.dialog_date.isoformat() == "1993-08-16"


def test_missing_dialog_date_is_named(tmp_path):
    doc = minimal()
    del doc["dialog_date"]
    with pytest.raises(FormatError, match="dialog_date"):
        load_dialog(write(tmp_path, "d.json", doc))


def test_schema_errors_give_locations():
    doc = minimal()
    doc["utterances"][1]["alternatives"][0]["expressions"][0]["weekdy"] = "mon"
    with pytest.raises(FormatError, match=r"utterances\[1\]\.alternatives\[0\]\.expressions\[0\]"):
        parse_dialog(doc)
    with pytest.raises(FormatError, match="does not follow"):
        parse_dialog(minimal(utterances=[
            {"utterance_id": 2, "alternatives": [{}]}, {"utterance_id": 1, "alternatives": [{}]}]))
    with pytest.raises(FormatError, match="duplicate rank"):
        parse_dialog(minimal(utterances=[
            {"utterance_id": 0, "alternatives": [{"parse_rank": 1}, {"parse_rank": 1}]}]))
    with pytest.raises(FormatError):
        parse_dialog(minimal(utterances=[{"utterance_id": 0, "alternatives": []}]))


def test_bad_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "dialog_id": "x",\n  oops\n}')
    with pytest.raises(FormatError, match="line 3"):
        load_dialog(p)


def test_unknown_tense_warns(caplog):
    doc = minimal(utterances=[{"utterance_id": 0, "alternatives": [{"tense": "aorist"}]}])
    with caplog.at_level(logging.WARNING):
        d = parse_dialog(doc)
    assert d.utterances[0].alternatives[0].tense is Tense.OTHER
    assert "aorist" in caplog.text


def test_vector_round_trip():
    tu = TemporalUnit(Endpoint(8, 19, 3, 870, "pm"), Endpoint(8, 19, 3, 990, "pm"), 1993)
    v = tu_to_vector(tu)
    assert v["start_weekday"] == "thu" and v["end_hour_minute"] == "16:30" and v["year"] == 1993
    assert vector_to_tu(v) == tu
    assert vector_to_tu({}) == NULL_TU


def test_emit_records_trace(tmp_path):
    dialog = load_dialog(worked_dialogs()[0])
    assert dialog.dialog_id == "corpus-passage"
    out = DialogOutput(dialog.dialog_id, dialog.dialog_date, tuple(resolve_dialog(dialog)))
    doc = json.loads(emit_ailts([out]))
    rec = doc["dialogs"][0]["records"][2]
    assert "A1" in rec["rules"] and rec["antecedents"] == [1]

    path = tmp_path / "out.json"
    emit_ailts([out], path)
    assert load_output(path) == [out]


def test_emit_empty_and_suppressed():
    doc = minimal(utterances=[])
    d = parse_dialog(doc)
    assert json.loads(emit_ailts([DialogOutput(d.dialog_id, d.dialog_date, ())]))["dialogs"][0]["records"] == []

    doc = minimal(utterances=[{"utterance_id": 0, "alternatives": [
        {"tense": "simple_past", "expressions": [{"weekday": "fri"}]}]}])
    d = parse_dialog(doc)
    rec = json.loads(emit_ailts([DialogOutput("d", d.dialog_date, tuple(resolve_dialog(d)))]))
    rec = rec["dialogs"][0]["records"][0]
    assert rec["suppressed"] is True and rec["tus"] == []


def test_key_loading(fixtures_dir):
    keys = load_key(fixtures_dir / "worked_key.json")
    assert keys["wednesday-at-two"][0][0].start == Endpoint(8, 21, 2, 840, "pm")


# -- command line ----------------------------------------------------------

def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_resolve_and_evaluate(tmp_path, capsys, fixtures_dir):
    out = tmp_path / "out.json"
    code, _, err = run(capsys, "resolve", *worked_dialogs(), "--trace", "-o", out)
    assert code == 0 and "corpus-passage" in err
    rows = tmp_path / "rows.json"
    code, text, _ = run(capsys, "evaluate", "--system", out, "--key", fixtures_dir / "worked_key.json",
                        "--per-field", "--rows", rows)
    assert code == 0 and text.splitlines()[0].split()[0] == "Label"
    assert json.loads(rows.read_text())[-1]["acc"] == 1.0


def test_no_rules_and_lower_bound(tmp_path, capsys, fixtures_dir):
    full, lb = tmp_path / "full.json", tmp_path / "lb.json"
    key = fixtures_dir / "synthetic_key.json"
    assert run(capsys, "resolve", *synthetic_dialogs(), "-o", full)[0] == 0
    assert run(capsys, "resolve", *synthetic_dialogs(), "--no-rules", "-o", lb)[0] == 0
    code, text, _ = run(capsys, "evaluate", "--system", full, "--key", key, "--lower-bound-system", lb)
    assert code == 0 and "lower bound" in text
    rows = tmp_path / "rows.json"
    code, text, _ = run(capsys, "lower-bound", *synthetic_dialogs(), "--key", key, "--rows", rows)
    assert code == 0 and "lower-bound" in text
    overall = json.loads(rows.read_text())[-1]
    assert overall["acc_lb"] <= overall["acc"]


def test_kappa_command(tmp_path, capsys):
    doc = {"raters": ["c1", "c2", "expert"], "fields": {
        "start_month": [[8, 8, 8], [9, 9, 9], [None, None, None], [8, 9, 8]],
        "start_weekday": [["mon", "mon", "mon"], ["tue", "tue", "tue"], [None, "mon", None], ["mon", "mon", "mon"]],
    }}
    path = write(tmp_path, "agree.json", doc)
    rows = tmp_path / "rows.json"
    code, text, _ = run(capsys, "kappa", path, "--expert", "expert", "--rows", rows)
    assert code == 0 and "start_month" in text
    data = json.loads(rows.read_text())
    assert data[0]["field"] == "start_month" and data[0]["kappa_avg"] is not None
    assert run(capsys, "kappa", path, "--mode", "pooled")[0] == 0
    assert run(capsys, "kappa", path, "--expert", "nobody")[0] == 1


def test_config_file(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"distance_per_position": 0.1, "beam": 2, "critics": {"C2": False}})
    config = cli.load_config(cfg)
    assert config.penalty.per_position == 0.1 and config.beam == 2
    assert [c.name for c in config.critics] == ["C1", "C3"]
    assert run(capsys, "resolve", worked_dialogs()[0], "--config", cfg)[0] == 0
    bad = write(tmp_path, "bad.json", {"colour": "blue"})
    assert run(capsys, "resolve", worked_dialogs()[0], "--config", bad)[0] == 2


def test_exit_codes(tmp_path, capsys, monkeypatch):
    assert run(capsys)[0] == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["resolve", "--bogus"])
    assert exc.value.code == 1
    assert run(capsys, "resolve", worked_dialogs()[0], "--beam", "0")[0] == 1
    assert run(capsys, "resolve", tmp_path / "missing.json")[0] == 2
    bad = write(tmp_path, "bad.json", {"dialog_id": "x"})
    code, _, err = run(capsys, "resolve", bad)
    assert code == 2 and "dialog_date" in err

    def broken(*args, **kwargs):
        raise AssertionError("focus list out of order")
    monkeypatch.setattr(cli, "resolve_dialog", broken)
    assert run(capsys, "resolve", worked_dialogs()[0])[0] == 3


def test_parallel_matches_sequential(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    files = synthetic_dialogs()[:4]
    assert run(capsys, "resolve", *files, "-o", a)[0] == 0
    assert run(capsys, "resolve", *files, "--jobs", "2", "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
