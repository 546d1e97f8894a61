"""Apply the rules, merge compatible results, criticise, choose.

For each TU of an utterance every rule is run. The partial interpretations
form the vertices of a graph whose edges join compatible pairs; every
maximal clique is a candidate reading, scored by the sum of its certainty
factors less any critic penalties. The best reading is completed by trivial
inference and pushed onto the focus list.

Ambiguous input (several parses per utterance) is resolved over the whole
dialog with a beam search on the summed certainty of each parse sequence.
"""
from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

from .core import NULL_TU, FocusList, TemporalUnit, merge, push_focus
from .dates import endpoint_dates, infer_trivial, weekday_conflicts
from .normalizer import AmPmPolicy, NormalizedIlt, normalize
from .rules import RULE_ORDER, DistancePenalty, Pailt, apply_all_rules

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Critic:
    name: str
    test: Callable[[TemporalUnit, "DialogState"], bool]
    penalty: float

    def __post_init__(self):
        if self.penalty > 0:
            raise ValueError(f"critic {self.name}: penalty must be <= 0")


def ends_before_start(tu: TemporalUnit, state: "DialogState") -> bool:
    """Same-day interval whose end clock time precedes its start."""
    s, e = tu.start, tu.end
    if s.hour_minute is None or e.hour_minute is None:
        return False
    same_day = (e.month, e.date) in ((s.month, s.date), (None, None))
    return same_day and e.hour_minute < s.hour_minute


def before_dialog_date(tu: TemporalUnit, state: "DialogState") -> bool:
    start_day, _ = endpoint_dates(tu, state.dialog_date)
    return start_day is not None and start_day < state.dialog_date


def inconsistent_weekday(tu: TemporalUnit, state: "DialogState") -> bool:
    return weekday_conflicts(tu, state.dialog_date)


DEFAULT_CRITICS = (
    Critic("C1", ends_before_start, -0.5),
    Critic("C2", before_dialog_date, -0.3),
    Critic("C3", inconsistent_weekday, -0.4),
)


@dataclass(frozen=True)
class EngineConfig:
    penalty: DistancePenalty = DistancePenalty()
    critics: tuple[Critic, ...] = DEFAULT_CRITICS
    ampm: AmPmPolicy = AmPmPolicy()
    beam: int = 8
    clique_limit: int = 32
    use_rules: bool = True


@dataclass(frozen=True)
class DialogState:
    dialog_date: dt.date
    focus: FocusList = FocusList()
    config: EngineConfig = EngineConfig()


@dataclass(frozen=True)
class Candidate:
    """One maximal merging of partial interpretations for a single TU."""

    when: TemporalUnit
    certainty: float
    pailts: tuple[Pailt, ...] = ()
    critics: tuple[str, ...] = ()
    truncated: bool = False

    @property
    def rule_ids(self) -> tuple[str, ...]:
        return tuple(p.rule_id for p in self.pailts)

    def nearest_antecedent(self) -> float:
        distances = [p.distance for p in self.pailts if p.distance is not None]
        return min(distances) if distances else float("inf")


@dataclass(frozen=True)
class Ailt:
    """The resolved temporal reading of one utterance."""

    utterance_id: int
    when: tuple[TemporalUnit, ...] = ()
    certainty: float = 0.0
    constituents: tuple[str, ...] = ()
    antecedents: tuple[int, ...] = ()
    critics: tuple[str, ...] = ()
    suppressed: bool = False
    truncated: bool = False
    parse_rank: int = 0


def compatible(p1: Pailt, p2: Pailt) -> bool:
    return merge(p1.when, p2.when) is not None


def maximal_cliques(n: int, adjacent: Callable[[int, int], bool]) -> list[tuple[int, ...]]:
    """All maximal cliques of a graph on vertices ``0..n-1`` (Bron-Kerbosch, pivoting).

    Cliques come back as sorted tuples, in lexicographic order.
    """
    neighbours = [{j for j in range(n) if j != i and adjacent(i, j)} for i in range(n)]
    found = []

    def expand(clique: set, candidates: set, excluded: set) -> None:
        if not candidates and not excluded:
            found.append(tuple(sorted(clique)))
            return
        pivot = max(candidates | excluded, key=lambda v: len(neighbours[v] & candidates))
        for v in sorted(candidates - neighbours[pivot]):
            expand(clique | {v}, candidates & neighbours[v], excluded & neighbours[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    if n:
        expand(set(), set(range(n)), set())
    return sorted(found)


def _rule_rank(rule_id: str) -> int:
    return RULE_ORDER.index(rule_id)


def maximal_mergings(pailts: Sequence[Pailt], base: Optional[TemporalUnit] = None,
                     limit: int = 32) -> list[Candidate]:
    """One candidate per maximal clique of mutually compatible partial results.

    Each clique's members are merged left to right, starting from ``base``
    (the normalized input TU); cliques that cannot be jointly merged are
    dropped. More than ``limit`` inputs or cliques keeps the ``limit`` best by
    certainty and marks the survivors truncated.
    """
    pailts = list(pailts)
    truncated = False
    if len(pailts) > limit:
        log.warning("%d partial interpretations, keeping the best %d", len(pailts), limit)
        pailts = sorted(pailts, key=lambda p: (-p.certainty, _rule_rank(p.rule_id)))[:limit]
        truncated = True

    out = []
    for clique in maximal_cliques(len(pailts), lambda i, j: compatible(pailts[i], pailts[j])):
        members = tuple(pailts[i] for i in clique)
        when = base if base is not None else NULL_TU
        for p in members:
            when = merge(when, p.when)
            if when is None:
                break
        if when is None:
            continue
        out.append(Candidate(when, round(sum(p.certainty for p in members), 10), members))

    if len(out) > limit:
        out = sorted(out, key=lambda c: -c.certainty)[:limit]
        truncated = True
    if truncated:
        out = [replace(c, truncated=True) for c in out]
    return out


def apply_critics(candidate: Candidate, state: DialogState,
                  critics: Optional[Iterable[Critic]] = None) -> Candidate:
    if critics is None:
        critics = state.config.critics
    fired = [c for c in critics if c.test(candidate.when, state)]
    if not fired:
        return candidate
    certainty = round(candidate.certainty + sum(c.penalty for c in fired), 10)
    return replace(candidate, certainty=certainty, critics=tuple(c.name for c in fired))


def _selection_key(c: Candidate):
    return (
        -round(c.certainty, 9),
        len(c.pailts),
        c.nearest_antecedent(),
        tuple(sorted(_rule_rank(r) for r in c.rule_ids)),
    )


def select_best(candidates: Sequence[Candidate], fallback: TemporalUnit = NULL_TU) -> Candidate:
    """Highest certainty wins; ties go to fewer rules, then the nearer
    antecedent, then rule order."""
    if not candidates:
        return Candidate(fallback, 0.0)
    return min(candidates, key=_selection_key)


def resolve_tu(tu: TemporalUnit, deictic, state: DialogState) -> Candidate:
    cfg = state.config
    if not cfg.use_rules:
        return Candidate(infer_trivial(tu, state.dialog_date), 0.0)
    pailts = apply_all_rules(tu, deictic, state.focus, state.dialog_date, cfg.penalty)
    candidates = [apply_critics(c, state)
                  for c in maximal_mergings(pailts, base=tu, limit=cfg.clique_limit)]
    best = select_best(candidates, fallback=tu)
    return replace(best, when=infer_trivial(best.when, state.dialog_date))


def resolve_utterance(nilt: NormalizedIlt, state: DialogState) -> tuple[Ailt, DialogState]:
    """Resolve every TU of an utterance against the focus list, then push them."""
    if nilt.suppressed:
        return Ailt(nilt.utterance_id, suppressed=True, parse_rank=nilt.parse_rank), state
    if not nilt.tus:
        return Ailt(nilt.utterance_id, parse_rank=nilt.parse_rank), state

    chosen = [resolve_tu(tu, deictic, state) for tu, deictic in nilt.mentions()]
    constituents = sorted({r for c in chosen for r in c.rule_ids}, key=_rule_rank)
    antecedents = sorted({p.antecedent.utterance_index
                          for c in chosen for p in c.pailts if p.antecedent is not None})
    ailt = Ailt(
        utterance_id=nilt.utterance_id,
        when=tuple(c.when for c in chosen),
        certainty=round(sum(c.certainty for c in chosen), 10),
        constituents=tuple(constituents),
        antecedents=tuple(antecedents),
        critics=tuple(sorted({n for c in chosen for n in c.critics})),
        truncated=any(c.truncated for c in chosen),
        parse_rank=nilt.parse_rank,
    )
    focus = push_focus(state.focus, ailt.when, nilt.utterance_id)
    return ailt, replace(state, focus=focus)


@dataclass(frozen=True)
class _Path:
    score: float
    state: DialogState
    ailts: tuple[Ailt, ...] = ()
    ranks: tuple[int, ...] = ()

    def key(self):
        return (-round(self.score, 9), self.ranks)


def resolve_dialog(dialog, config: EngineConfig = EngineConfig(),
                   first_alternative_only: bool = False) -> list[Ailt]:
    """Choose one parse per utterance and resolve the dialog.

    ``dialog`` needs ``dialog_date`` and ``utterances``, each utterance
    carrying ``alternatives`` (SurfaceIlt records). Paths are scored by the
    sum of their AILT certainties; the ``config.beam`` best prefixes survive
    each utterance, ties preferring lower parse ranks.
    """
    beams = [_Path(0.0, DialogState(dialog.dialog_date, FocusList(), config))]
    for utt in dialog.utterances:
        alternatives = sorted(utt.alternatives, key=lambda a: a.parse_rank)
        if first_alternative_only:
            alternatives = alternatives[:1]
        extended = []
        for path in beams:
            for alt in alternatives:
                nilt = normalize(alt, dialog.dialog_date, config.ampm)
                ailt, state = resolve_utterance(nilt, path.state)
                extended.append(_Path(path.score + ailt.certainty, state,
                                      path.ailts + (ailt,), path.ranks + (alt.parse_rank,)))
        extended.sort(key=_Path.key)
        beams = extended[:max(1, config.beam)]
    return list(beams[0].ailts)


def final_focus(dialog, config: EngineConfig = EngineConfig()) -> FocusList:
    """Focus list left after resolving the chosen readings in order."""
    focus = FocusList()
    for ailt in resolve_dialog(dialog, config):
        if not ailt.suppressed:
            focus = push_focus(focus, ailt.when, ailt.utterance_id)
    return focus
