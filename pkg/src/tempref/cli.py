"""Command-line interface.

    tempref resolve DIALOG.json [...] [--config CFG] [--no-rules] [--beam N] [--trace]
    tempref evaluate --system OUT.json --key KEY.json [--per-field]
    tempref lower-bound DIALOG.json [...] --key KEY.json
    tempref kappa AGREEMENT.json [--expert NAME] [--mode item|pooled]

Exit status: 0 success, 1 usage error, 2 bad input file, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import evalkit
from .engine import DEFAULT_CRITICS, EngineConfig, resolve_dialog
from .formats import (
    DialogOutput,
    FormatError,
    dumps,
    emit_ailts,
    load_agreement,
    load_dialog,
    load_key,
    load_output,
)
from .normalizer import AmPmPolicy
from .rules import DistancePenalty

log = logging.getLogger("tempref")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

CONFIG_KEYS = {"distance_per_position", "distance_cap", "beam", "clique_limit",
               "pm_from", "pm_until", "critics", "use_rules"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def load_config(path) -> EngineConfig:
    """Engine settings from JSON; every key is optional.

    ``critics`` maps a critic name to its penalty, or to ``false`` to turn it off.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: configuration must be a JSON object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise FormatError(f"{path}: unknown configuration keys: {', '.join(sorted(unknown))}")

    base = EngineConfig()
    penalty = DistancePenalty(doc.get("distance_per_position", base.penalty.per_position),
                              doc.get("distance_cap", base.penalty.cap))
    critics = []
    overrides = doc.get("critics", {})
    for critic in DEFAULT_CRITICS:
        setting = overrides.get(critic.name, critic.penalty)
        if setting is False:
            continue
        critics.append(replace(critic, penalty=float(setting)))
    return EngineConfig(
        penalty=penalty,
        critics=tuple(critics),
        ampm=AmPmPolicy(doc.get("pm_from", base.ampm.pm_from), doc.get("pm_until", base.ampm.pm_until)),
        beam=int(doc.get("beam", base.beam)),
        clique_limit=int(doc.get("clique_limit", base.clique_limit)),
        use_rules=bool(doc.get("use_rules", True)),
    )


def _config_from_args(args) -> EngineConfig:
    config = load_config(args.config) if getattr(args, "config", None) else EngineConfig()
    if getattr(args, "no_rules", False):
        config = replace(config, use_rules=False)
    if getattr(args, "beam", None) is not None:
        if args.beam < 1:
            raise UsageError("--beam must be at least 1")
        config = replace(config, beam=args.beam)
    return config


def _resolve_file(path: str, config: EngineConfig) -> DialogOutput:
    dialog = load_dialog(path)
    return DialogOutput(dialog.dialog_id, dialog.dialog_date, tuple(resolve_dialog(dialog, config)))


def _write(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _trace(outputs) -> None:
    for out in outputs:
        print(f"# {out.dialog_id} ({out.dialog_date})", file=sys.stderr)
        for a in out.ailts:
            tag = "suppressed" if a.suppressed else f"cf={a.certainty:.2f} rules={','.join(a.constituents) or '-'}"
            ante = f" antecedents={','.join(map(str, a.antecedents))}" if a.antecedents else ""
            tus = " | ".join(str(tu) for tu in a.when) or "-"
            print(f"{a.utterance_id:>4}  {tag}{ante}  {tus}", file=sys.stderr)


def cmd_resolve(args) -> int:
    config = _config_from_args(args)
    if args.jobs > 1 and len(args.dialogs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outputs = list(pool.map(_resolve_file, args.dialogs, [config] * len(args.dialogs)))
    else:
        outputs = [_resolve_file(p, config) for p in args.dialogs]
    if args.trace:
        _trace(outputs)
    _write(emit_ailts(outputs), args.output)
    return EXIT_OK


def _print_rows(rows, per_field: bool, rows_path) -> None:
    if per_field:
        print(evalkit.format_table(rows))
    else:
        overall = rows[-1]
        parts = [f"accuracy {overall.acc:.3f}" if overall.acc is not None else "accuracy -",
                 f"precision {overall.prec:.3f}" if overall.prec is not None else "precision -"]
        if overall.acc_lb is not None:
            parts.insert(0, f"lower bound {overall.acc_lb:.3f}")
        print(", ".join(parts))
    if rows_path:
        Path(rows_path).write_text(dumps([r.as_dict() for r in rows]), encoding="utf-8")


def _score_outputs(outputs, keys) -> evalkit.FieldCounts:
    total = evalkit.FieldCounts()
    for out in outputs:
        if out.dialog_id not in keys:
            raise FormatError(f"no key for dialog {out.dialog_id!r}")
        key = keys[out.dialog_id]
        missing = {a.utterance_id for a in out.ailts} - set(key)
        if missing:
            raise FormatError(f"dialog {out.dialog_id!r}: no key rows for utterances "
                              f"{sorted(missing)}")
        total = total + evalkit.score_dialog(out.ailts, key)
    return total


def cmd_evaluate(args) -> int:
    outputs = load_output(args.system)
    keys = load_key(args.key)
    counts = _score_outputs(outputs, keys)
    lower = None
    if args.lower_bound_system:
        lower = _score_outputs(load_output(args.lower_bound_system), keys)
    _print_rows(evalkit.score_rows(counts, lower), args.per_field, args.rows)
    return EXIT_OK


def cmd_lower_bound(args) -> int:
    config = _config_from_args(args)
    keys = load_key(args.key)
    corpus = []
    for path in args.dialogs:
        dialog = load_dialog(path)
        if dialog.dialog_id not in keys:
            raise FormatError(f"{args.key}: no key for dialog {dialog.dialog_id!r}")
        corpus.append((dialog, keys[dialog.dialog_id]))
    lower, _ = evalkit.lower_bound(corpus, config)
    full = evalkit.evaluate(corpus, config)
    rows = evalkit.score_rows(full, lower)
    if args.per_field:
        print(evalkit.format_table(rows))
    c = lower.overall()
    acc = evalkit.accuracy(c)
    err = evalkit.input_error(c)
    print(f"{'Set':<12} {'Cor':>4} {'Inc':>4} {'Mis':>4} {'Ext':>4} {'Nul':>4} {'Acc':>6} {'InputError':>10}")
    print(f"{'lower-bound':<12} {c.correct:>4} {c.incorrect:>4} {c.missing:>4} {c.extra:>4} {c.null:>4} "
          f"{acc if acc is None else format(acc, '.3f'):>6} {err if err is None else format(err, '.3f'):>10}")
    if args.rows:
        Path(args.rows).write_text(dumps([r.as_dict() for r in rows]), encoding="utf-8")
    return EXIT_OK


def cmd_kappa(args) -> int:
    raters, fields = load_agreement(args.agreement)
    expert = None
    if args.expert is not None:
        if args.expert in raters:
            expert = raters.index(args.expert)
        elif args.expert.isdigit() and int(args.expert) < len(raters):
            expert = int(args.expert)
        else:
            raise UsageError(f"--expert {args.expert!r} is not a rater in {args.agreement}")
    coders = [j for j in range(len(raters)) if j != expert]
    if len(coders) < 2 and expert is None:
        raise UsageError("kappa needs at least two raters")

    def fmt(x):
        return "    -" if x is None else f"{x:.3f}"

    out_rows = []
    print(f"{'Field':<20} {'Pa':>6} {'Pe':>6} {'kappa':>6}" + (f" {'k_avg':>6}" if expert is not None else ""))
    for name, rows in fields.items():
        table = evalkit.AgreementTable.from_rows(rows)
        coder_table = table.columns(coders) if len(coders) >= 2 else table
        pa = evalkit.observed_agreement(coder_table, args.mode)
        pe = evalkit.expected_agreement(coder_table)
        k = evalkit.kappa_from(pa, pe)
        row = {"field": name, "pa": pa, "pe": pe, "kappa": k}
        line = f"{name:<20} {pa:>6.3f} {pe:>6.3f} {fmt(k):>6}"
        if expert is not None:
            row["kappa_avg"] = evalkit.pairwise_expert_kappa(table, expert)
            line += f" {fmt(row['kappa_avg']):>6}"
        print(line)
        out_rows.append(row)
    if args.rows:
        Path(args.rows).write_text(dumps(out_rows), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tempref", description="Temporal reference resolution for scheduling dialogs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("resolve", help="resolve the temporal references of dialog files")
    p.add_argument("dialogs", nargs="+", metavar="DIALOG")
    p.add_argument("--config")
    p.add_argument("--no-rules", action="store_true", help="normalization and trivial inference only")
    p.add_argument("--beam", type=int)
    p.add_argument("--trace", action="store_true", help="print a readable trace on stderr")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("evaluate", help="score resolver output against a key")
    p.add_argument("--system", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--per-field", action="store_true")
    p.add_argument("--lower-bound-system", metavar="OUT", help="no-rules output, fills the AccLB column")
    p.add_argument("--rows", metavar="JSON", help="also write the rows as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lower-bound", help="score with all rules disabled")
    p.add_argument("dialogs", nargs="+", metavar="DIALOG")
    p.add_argument("--key", required=True)
    p.add_argument("--config")
    p.add_argument("--per-field", action="store_true")
    p.add_argument("--rows", metavar="JSON")
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("kappa", help="intercoder agreement per field")
    p.add_argument("agreement")
    p.add_argument("--expert", help="rater name (or column number) of the expert")
    p.add_argument("--mode", choices=("item", "pooled"), default="item")
    p.add_argument("--rows", metavar="JSON")
    p.set_defaults(func=cmd_kappa)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tempref: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"tempref: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # an invariant broke somewhere inside
        log.exception("internal error")
        print(f"tempref: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
