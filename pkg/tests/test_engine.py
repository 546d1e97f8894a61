import datetime as dt
import itertools
import random

import pytest

from randomtu import random_tu
from tempref.core import Endpoint, FocusList, TemporalUnit, merge, push_focus
from tempref.engine import (
    Candidate,
    DialogState,
    EngineConfig,
    apply_critics,
    compatible,
    final_focus,
    maximal_cliques,
    maximal_mergings,
    resolve_dialog,
    resolve_utterance,
    select_best,
)
from tempref.formats import Dialog, Utterance
from tempref.normalizer import Expression, SurfaceIlt, Tense, normalize
from tempref.rules import Pailt, apply_all_rules


def brute_force_cliques(n, adjacent):
    cliques = []
    for size in range(n, 0, -1):
        for subset in itertools.combinations(range(n), size):
            if all(adjacent(a, b) for a, b in itertools.combinations(subset, 2)):
                if not any(set(subset) < set(c) for c in cliques):
                    cliques.append(subset)
    return sorted(cliques)


def test_maximal_cliques_matches_brute_force():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(0, 10)
        p = rng.random()
        edges = {(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p}

        def adjacent(a, b):
            return (min(a, b), max(a, b)) in edges

        assert maximal_cliques(n, adjacent) == brute_force_cliques(n, adjacent)


def test_maximal_cliques_small_graphs():
    path = {(0, 1), (1, 2)}
    assert maximal_cliques(3, lambda a, b: (min(a, b), max(a, b)) in path) == [(0, 1), (1, 2)]
    assert maximal_cliques(3, lambda a, b: True) == [(0, 1, 2)]
    assert maximal_cliques(0, lambda a, b: True) == []


def pailt(tu, cf=0.5, rule="A1"):
    return Pailt(tu, cf, rule)


def test_maximal_mergings_examples():
    a = pailt(TemporalUnit.starting(weekday=2))
    assert [c.when for c in maximal_mergings([a])] == [a.when]

    b = pailt(TemporalUnit.starting(month=8, date=21, weekday=2), 0.4, "NA2")
    c = pailt(TemporalUnit.starting(hour_minute=840))
    out = maximal_mergings([a, b, c])
    assert len(out) == 1 and out[0].certainty == pytest.approx(1.4)
    assert out[0].when == TemporalUnit.starting(month=8, date=21, weekday=2, hour_minute=840)

    x = pailt(TemporalUnit.starting(date=19))
    y = pailt(TemporalUnit.starting(weekday=0))
    z = pailt(TemporalUnit.starting(date=21))
    out = maximal_mergings([x, y, z])
    assert sorted(tuple(sorted(p.when.start.date or 0 for p in c.pailts)) for c in out) == [(0, 19), (0, 21)]


def test_compatible():
    p = pailt(TemporalUnit.starting(date=19))
    assert compatible(p, p)
    assert not compatible(p, pailt(TemporalUnit.starting(date=21)))
    assert compatible(pailt(TemporalUnit.starting(month=8, date=21, weekday=2)),
                      pailt(TemporalUnit.starting(month=8, date=21, weekday=2, hour_minute=840)))


def test_maximal_mergings_matches_subset_enumeration():
    rng = random.Random(99)
    for _ in range(1000):
        n = rng.randint(1, 10)
        pailts = [pailt(random_tu(rng, fill=0.25), round(0.1 + i / 100, 2)) for i in range(n)]
        out = maximal_mergings(pailts, limit=1000)
        got = {frozenset(next(i for i, q in enumerate(pailts) if q is p) for p in c.pailts) for c in out}

        expected = set()
        for clique in brute_force_cliques(n, lambda a, b: compatible(pailts[a], pailts[b])):
            when = TemporalUnit()
            for i in clique:
                when = when and merge(when, pailts[i].when)
            if when is not None:
                expected.add(frozenset(clique))
        assert got == expected


def test_maximal_mergings_truncates():
    many = [pailt(TemporalUnit.starting(date=d), d / 100) for d in range(1, 11)]
    out = maximal_mergings(many, limit=4)
    assert len(out) == 4 and all(c.truncated for c in out)
    assert sorted(c.when.start.date for c in out) == [7, 8, 9, 10]


# -- critics and selection ---------------------------------------------------

STATE = DialogState(dt.date(1993, 8, 16))


def test_critic_end_before_start():
    tu = TemporalUnit(Endpoint(8, 19, 3, 960, "pm"), Endpoint(8, 19, 3, 840, "pm"))
    c = apply_critics(Candidate(tu, 1.0), STATE)
    assert c.certainty == pytest.approx(0.5) and c.critics == ("C1",)


def test_critic_before_dialog_date():
    c = apply_critics(Candidate(TemporalUnit.starting(month=8, date=12, weekday=3, year=1993), 1.0), STATE)
    assert c.certainty == pytest.approx(0.7) and c.critics == ("C2",)


def test_critic_weekday():
    c = apply_critics(Candidate(TemporalUnit.starting(month=8, date=19, weekday=2), 1.0), STATE)
    assert c.certainty == pytest.approx(0.6) and c.critics == ("C3",)


def test_consistent_interval_unchanged():
    tu = TemporalUnit(Endpoint(8, 19, 3, 840, "pm"), Endpoint(8, 19, 3, 960, "pm"), 1993)
    c = Candidate(tu, 1.3)
    assert apply_critics(c, STATE) == c


def test_select_best():
    one = Candidate(TemporalUnit.starting(date=1), 0.4)
    assert select_best([one]) is one
    best = Candidate(TemporalUnit.starting(date=2), 1.3)
    assert select_best([one, best]) is best
    fallback = TemporalUnit.starting(hour_minute=840)
    assert select_best([], fallback) == Candidate(fallback, 0.0)


def test_select_best_tie_breaks():
    de = FocusList()
    tu = TemporalUnit.starting(date=5)
    for i in range(3):
        de = push_focus(de, [tu], i)
    ents = list(de)
    near = Candidate(TemporalUnit.starting(date=1), 0.5, (Pailt(tu, 0.5, "A4", ents[2], 0),))
    far = Candidate(TemporalUnit.starting(date=2), 0.5, (Pailt(tu, 0.5, "A2", ents[0], 2),))
    assert select_best([far, near]) is near

    fewer = Candidate(TemporalUnit.starting(date=3), 0.8, (Pailt(tu, 0.8, "A1", ents[2], 0),))
    more = Candidate(TemporalUnit.starting(date=4), 0.8,
                     (Pailt(tu, 0.4, "NA2"), Pailt(tu, 0.4, "NA2")))
    assert select_best([more, fewer]) is fewer

    a2 = Candidate(TemporalUnit.starting(date=5), 0.5, (Pailt(tu, 0.5, "A2", ents[2], 0),))
    a4 = Candidate(TemporalUnit.starting(date=6), 0.5, (Pailt(tu, 0.5, "A4", ents[2], 0),))
    assert select_best([a4, a2]) is a2


# -- utterances and dialogs ------------------------------------------------

def surface(uid, *exprs, tense=Tense.PRESENT, rank=0):
    return SurfaceIlt(uid, "s1", tuple(exprs), tense, rank)


def dialog(date, *alternative_lists):
    utts = tuple(Utterance(i, alternatives=tuple(alts)) for i, alts in enumerate(alternative_lists))
    return Dialog("test", date, utts)


def test_apply_all_rules_examples():
    d = dt.date(1996, 8, 19)
    wed2 = normalize(surface(0, Expression(weekday="wed", clock_hour=2)), d).tus[0]
    assert [p.rule_id for p in apply_all_rules(wed2, None, FocusList(), d)] == ["NA2"]

    d = dt.date(1993, 8, 16)
    prev = TemporalUnit.starting(month=8, date=19, weekday=3, hour_minute=840, time_of_day="pm", year=1993)
    cur = normalize(surface(2, Expression("start", clock_hour=2), Expression("end", clock_hour=4)), d).tus[0]
    assert "A1" in [p.rule_id for p in apply_all_rules(cur, None, push_focus(FocusList(), [prev], 1), d)]


def test_utterance_without_time_leaves_state():
    state = DialogState(dt.date(1993, 8, 16))
    ailt, new = resolve_utterance(normalize(surface(0), state.dialog_date), state)
    assert ailt.when == () and new is state


def test_suppressed_utterance_bypasses_focus():
    d = dt.date(1993, 8, 16)
    dlg = dialog(d,
                 [surface(0, Expression(weekday="mon"))],
                 [surface(1, Expression(weekday="fri"), tense=Tense.SIMPLE_PAST)],
                 [surface(2, Expression(clock_hour=2))])
    ailts = resolve_dialog(dlg)
    assert ailts[1].suppressed and ailts[1].when == ()
    assert ailts[2].when[0].start == Endpoint(8, 23, 0, 840, "pm")
    assert len(final_focus(dlg)) == 2


def test_empty_dialog():
    assert resolve_dialog(dialog(dt.date(1993, 8, 16))) == []


def test_unambiguous_dialog_matches_sequential():
    d = dt.date(1996, 8, 16)
    alts = [[surface(0, Expression(weekday="mon"))],
            [surface(1, Expression(clock_hour=2))],
            [surface(2, Expression(clock_hour=4))]]
    state = DialogState(d)
    sequential = []
    for (alt,) in alts:
        ailt, state = resolve_utterance(normalize(alt, d), state)
        sequential.append(ailt)
    assert resolve_dialog(dialog(d, *alts)) == sequential


def test_equal_scores_prefer_first_ranked_parse():
    d = dt.date(1996, 8, 16)
    dlg = dialog(d, [surface(0, Expression(weekday="tue"), rank=2),
                     surface(0, Expression(weekday="mon"), rank=1)])
    (ailt,) = resolve_dialog(dlg)
    assert ailt.parse_rank == 1 and ailt.when[0].start.weekday == 0


def test_more_certain_parse_wins():
    d = dt.date(1993, 3, 5)
    dlg = dialog(d, [surface(0, Expression(weekday="mon"), rank=0),
                     surface(0, Expression(deictic="today"), rank=1)])
    assert resolve_dialog(dlg, EngineConfig(beam=1))[0].parse_rank == 1


def test_first_alternative_only_and_no_rules():
    d = dt.date(1993, 3, 5)
    dlg = dialog(d, [surface(0, Expression(weekday="mon"), rank=0),
                     surface(0, Expression(deictic="today"), rank=1)])
    (ailt,) = resolve_dialog(dlg, EngineConfig(use_rules=False), first_alternative_only=True)
    assert ailt.parse_rank == 0 and ailt.when == (TemporalUnit.starting(weekday=0),)


def test_recency_monotone():
    d = dt.date(1996, 8, 16)
    mon = TemporalUnit.starting(month=8, date=19, weekday=0, year=1996)
    filler = TemporalUnit.starting(month=9, date=2, weekday=0, hour_minute=600, time_of_day="am")
    cur = TemporalUnit.starting(hour_minute=840, time_of_day="pm")
    previous = None
    for gap in range(8, -1, -1):
        fl = push_focus(FocusList(), [mon], 0)
        for i in range(gap):
            fl = push_focus(fl, [filler], i + 1)
        cf = next(p.certainty for p in apply_all_rules(cur, None, fl, d)
                  if p.rule_id == "A1" and p.antecedent.tu == mon)
        assert previous is None or cf >= previous
        previous = cf


def test_explicit_fields_survive(fixtures_dir):
    from tempref.formats import load_dialog

    for path in sorted((fixtures_dir / "synthetic").glob("*.json"))[:4]:
        dlg = load_dialog(path)
        for utt, ailt in zip(dlg.utterances, resolve_dialog(dlg)):
            nilt = normalize(utt.alternatives[0], dlg.dialog_date)
            for given, got in zip(nilt.tus, ailt.when):
                for name, value in given.filled().items():
                    assert got.get(name) == value
