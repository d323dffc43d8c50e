from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from locfaults.cfg import build_cfg
from locfaults.cli import corpus_names, load_corpus
from locfaults.constraints import Kind
from locfaults.lang import LoopBoundExceeded, execute, eval_bool, parse
from locfaults.localize import (BadCounterExample, Localizer, NotACounterExample,
                                PreconditionViolated, correct, locfaults, prefix_prune,
                                validate_ce)
from locfaults.solver import Store, is_feasible

import oracle
from strategies import programs


def table(report):
    return [(e.deviations, e.mcs_lines) for e in report.entries]


# -- validate_ce -------------------------------------------------------------

def test_validate_ce_accepts_corpus():
    p, ce, _ = load_corpus("AbsMinusKO")
    assert validate_ce(p, ce) == {"i": 0, "j": 1}


@pytest.mark.parametrize("name", corpus_names())
def test_correct_versions_are_rejected(name):
    _, ce, _ = load_corpus(name)
    with pytest.raises(NotACounterExample):
        validate_ce(oracle.correct_version(name), ce)


@pytest.mark.parametrize("ce", [{"i": 0}, {"i": 0, "j": 1, "x": 2}, {"i": 0, "j": "1"},
                                {"i": True, "j": 1}, [0, 1]])
def test_bad_counterexamples(ce):
    p, _, _ = load_corpus("AbsMinusKO")
    with pytest.raises(BadCounterExample):
        validate_ce(p, ce)


def test_precondition_checked():
    p = parse("prog p(int a){ pre a > 0;\n a = a + 1;\n post a == 0; }")
    with pytest.raises(PreconditionViolated):
        validate_ce(p, {"a": -3})
    assert validate_ce(p, {"a": 3}) == {"a": 3}


def test_loop_bound_exceeded_propagates():
    p = parse("prog p(int a){ pre true;\n while (a < 5) {\n a = a + 1;\n }\n post a == 0; }")
    with pytest.raises(LoopBoundExceeded):
        locfaults(p, {"a": 0}, unroll_bound=2)


# -- locfaults examples ------------------------------------------------------

def test_absminus():
    p, ce, _ = load_corpus("AbsMinusKO")
    for k in range(4):
        assert table(locfaults(p, ce, k_max=k)) == [((), ((17,),))]


def test_minmax():
    p, ce, _ = load_corpus("MinmaxKO")
    assert table(locfaults(p, ce, k_max=0)) == [((), ((10,), (19,)))]


def test_mid():
    p, ce, _ = load_corpus("MidKO")
    for k in range(3):
        assert table(locfaults(p, ce, k_max=k)) == [((), ((19,),))]
    assert table(locfaults(p, ce, k_max=3)) == [((), ((19,),)), ((14, 23, 26), ())]


FIVE = """prog Five(int a) {
  pre true;
  int r = 0;
  if (a > 0) {
    r = 1;
  }
  post r == 1;
}"""


def test_single_faulty_condition():
    # the intended test was a >= 0; a = 0 exposes it
    p = parse(FIVE)
    assert table(locfaults(p, {"a": 0}, k_max=0)) == [((), ((3,),))]
    rep = locfaults(p, {"a": 0}, k_max=1)
    assert [e.deviations for e in rep.entries] == [(), (4,)]


def test_k0_has_single_entry():
    for name in corpus_names():
        p, ce, _ = load_corpus(name)
        rep = locfaults(p, ce, k_max=0)
        assert len(rep.entries) == 1 and rep.entries[0].deviations == ()
        assert rep.correct_calls == 0


def test_tritype_single_condition_deviations():
    p, ce, _ = load_corpus("TritypeKO")
    rep = locfaults(p, ce, k_max=1)
    assert table(rep) == [((), ((54,),)), ((26,), ()), ((48,), ((25,), (30,)))]


def test_negative_kmax():
    p, ce, _ = load_corpus("AbsMinusKO")
    with pytest.raises(ValueError):
        locfaults(p, ce, k_max=-1)


def test_deviation_hard_option_validated():
    p, ce, _ = load_corpus("AbsMinusKO")
    with pytest.raises(ValueError):
        locfaults(p, ce, deviation_hard="some")


def test_minimal_deviation_filter():
    p, ce, _ = load_corpus("TritypeKO2")
    full = {e.deviations for e in locfaults(p, ce, k_max=2, minimal_deviations=False).entries}
    kept = {e.deviations for e in locfaults(p, ce, k_max=2).entries}
    assert (29, 35) in full and (29, 35) not in kept  # {35} alone already corrects
    assert kept <= full
    assert all(not (set(a) < set(b)) for a in kept if a for b in kept)


# -- correct / prefix_prune --------------------------------------------------

def test_correct_at_sink():
    p, _, _ = load_corpus("AbsMinusKO")
    g = build_cfg(p)
    assert correct(g, g.sink, {"i": 0, "j": 1, "result": 1, "k": 1})
    assert not correct(g, g.sink, {"i": 0, "j": 1, "result": -1, "k": 1})


def test_correct_after_deviation_matches_interpreter():
    p, ce, _ = load_corpus("AbsMinusKO")
    g = build_cfg(p)
    node = next(n for n in g.conditions if n.line == 16)
    env = {"i": 0, "j": 1, "k": 1, "result": 0}  # state when line 16 is reached
    flipped = execute(p, ce, flips=[16])
    assert correct(g, node.right, env) == eval_bool(p.post, flipped)


def test_prefix_prune_examples():
    assert prefix_prune([(3,)], (3, 7))
    assert not prefix_prune([(3,)], (5,))
    assert not prefix_prune([(3,)], (3,))
    assert not prefix_prune([(3, 7)], (3,))


@pytest.mark.parametrize("name", corpus_names())
def test_exploration_count(name):
    p, ce, _ = load_corpus(name)
    n_conds = len({c.line for c in build_cfg(p).conditions})
    for k in range(1, 4):
        rep = locfaults(p, ce, k_max=k)
        assert rep.correct_calls == oracle.correct_calls(p, ce, k)
        assert rep.correct_calls <= sum(math.comb(n_conds, i) for i in range(1, k + 1))


# -- invariants on the corpus ------------------------------------------------

@pytest.mark.parametrize("name", corpus_names())
def test_reports_match_oracle(name):
    p, ce, _ = load_corpus(name)
    for k in range(4):
        rep = locfaults(p, ce, k_max=k)
        assert {frozenset(e.deviations) for e in rep.entries if e.deviations} \
            == oracle.deviation_sets(p, ce, k)
        for e in rep.entries:
            assert len(e.deviations) <= k
            assert set(e.mcs_lines) == oracle.path_mcs(p, ce, e.deviations, 3)
            if e.deviations:  # deviation soundness
                assert eval_bool(p.post, execute(p, ce, flips=e.deviations))


@pytest.mark.parametrize("name", corpus_names())
def test_all_deviations_hard_matches_oracle(name):
    p, ce, _ = load_corpus(name)
    rep = locfaults(p, ce, k_max=3, deviation_hard="all")
    for e in rep.entries:
        assert set(e.mcs_lines) == oracle.path_mcs(p, ce, e.deviations, 3, hard="all")


class Capture(Localizer):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self.stores = []

    def mcs(self, hard, soft):
        self.stores.append((list(hard), list(soft)))
        return super().mcs(hard, soft)


@pytest.mark.parametrize("name", corpus_names())
def test_path_stores(name):
    p, ce, _ = load_corpus(name)
    loc = Capture(build_cfg(p), validate_ce(p, ce))
    loc.run(2)
    (hard, soft), rest = loc.stores[0], loc.stores[1:]
    assert any(c.label.kind is Kind.POSTCONDITION for c in hard)
    for hard, soft in loc.stores:
        assert all(c.label.kind is Kind.ASSIGNMENT for c in soft)
        assert not is_feasible(Store.build(hard + soft))
    for hard, _ in rest:
        assert not any(c.label.kind is Kind.POSTCONDITION for c in hard)
        assert sum(c.label.kind is Kind.DEVIATED_CONDITION for c in hard) >= 1


# -- random programs ---------------------------------------------------------

W = 30


@settings(max_examples=60, deadline=None)
@given(programs(max_stmts=4), st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4),
       st.integers(0, 2))
def test_random_programs_match_oracle(src, a, b, c, k):
    p = parse(src)
    ce = {"a": a, "b": b, "c": c}
    t = oracle.trace(p, ce)
    assume(not eval_bool(p.post, t.final))
    assume(all(abs(v) <= W for v in t.final.values()))
    for d in oracle.deviation_sets(p, ce, k):  # deviated runs must stay in range too
        assume(all(abs(v) <= W for v in oracle.trace(p, ce, d).final.values()))
    rep = locfaults(p, ce, k_max=k, default_domain=(-W, W))
    assert {frozenset(e.deviations) for e in rep.entries if e.deviations} \
        == oracle.deviation_sets(p, ce, k)
    for e in rep.entries:
        assert set(e.mcs_lines) == oracle.path_mcs(p, ce, e.deviations, 3, window=W, bounded=True)
