from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from locfaults.constraints import (Conj, Constraint, Disj, Kind, LinExpr, Provenance,
                                   UnboundVariable, VersionedVar, canonical, cstr_assign,
                                   cstr_cond, eval, instantiate, negate, variables_of)
from locfaults.lang import eval_bool, linearize, parse

from strategies import boolint_exprs

X, Y, Z = VersionedVar("x"), VersionedVar("y"), VersionedVar("z")
V = [X, Y, Z]


def cond_of(text, names="abc"):
    params = ", ".join(f"int {n}" for n in names)
    return parse(f"prog t({params}){{ pre {text}; post true; }}").pre


def test_cstr_assign_forms():
    x0, x1 = VersionedVar("x", 0), VersionedVar("x", 1)
    c = cstr_assign(x1, LinExpr.var(x0) + 1, 12)
    assert canonical(c) == (((x0, 1), (x1, -1)), "==", -1)
    assert c.label == Provenance(12, Kind.ASSIGNMENT)
    r1, i0, j0 = VersionedVar("r", 1), VersionedVar("i"), VersionedVar("j")
    c = cstr_assign(r1, LinExpr.var(i0) - LinExpr.var(j0), 7)
    assert dict(canonical(c)[0]) == {i0: 1, j0: -1, r1: -1} and canonical(c)[2] == 0


def test_cstr_cond_examples():
    (c,) = cstr_cond(cond_of("a <= b"), {"a": 0, "b": 0}, 5)
    assert c.op == "<=" and c.label == Provenance(5, Kind.CONDITION)
    assert len(cstr_cond(cond_of("a == 1 && a != b"), {}, 1)) == 2
    parts = cstr_cond(cond_of("!(a < b || c < a)"), {}, 1)
    assert [p.op for p in parts] == [">=", ">="]


def test_cstr_cond_keeps_disjunctions():
    (d,) = cstr_cond(cond_of("a < b || b < c"), {}, 3)
    assert isinstance(d, Disj) and len(d.parts) == 2


def test_cstr_cond_constants():
    assert cstr_cond(cond_of("true"), {}, 1) == []
    (f,) = cstr_cond(cond_of("false"), {}, 1)
    assert eval(f, {}) is False


def test_cstr_cond_uses_versions():
    (c,) = cstr_cond(cond_of("a <= b"), {"a": 3, "b": 1}, 1)
    assert variables_of([c]) == [VersionedVar("a", 3), VersionedVar("b", 1)]


def test_negate_examples():
    c = Constraint(LinExpr.var(X), "<=", LinExpr.const(3))
    n = negate(c)
    assert (n.op, n.rhs.constant) == (">=", 4)
    assert negate(Constraint(LinExpr.var(X), "==", LinExpr.var(Y))).op == "!="
    assert negate(n) == c


def test_eval_examples():
    env = {VersionedVar("i"): 0, VersionedVar("j"): 1}
    e = LinExpr.var(VersionedVar("i")) - LinExpr.var(VersionedVar("j"))
    assert eval(e, env) == -1
    assert eval(Constraint(LinExpr.var(VersionedVar("i")), "<=", LinExpr.var(VersionedVar("j"))), env)


def test_eval_unbound():
    with pytest.raises(UnboundVariable):
        eval(LinExpr.var(X), {})


def test_instantiate():
    e = instantiate(linearize(cond_of("a + 2 * b == 0").left), {"a": 2})
    assert e.as_dict() == {VersionedVar("a", 2): 1, VersionedVar("b", 0): 2}


# -- properties --------------------------------------------------------------

coefs = st.integers(-4, 4)
exprs = st.builds(lambda a, b, c, k: LinExpr.of({X: a, Y: b, Z: c}, k), coefs, coefs, coefs,
                  st.integers(-10, 10))
atoms = st.builds(Constraint, exprs, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), exprs)
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(st.lists(sub, min_size=1, max_size=3).map(lambda p: Conj(tuple(p))),
                          st.lists(sub, min_size=1, max_size=3).map(lambda p: Disj(tuple(p)))),
    max_leaves=6)
envs = st.fixed_dictionaries({v: st.integers(-12, 12) for v in V})


@given(formulas, envs)
def test_negate_is_complement(f, env):
    assert bool(eval(negate(f), env)) == (not eval(f, env))


@given(formulas)
def test_negate_involution_is_semantic(f):
    g = negate(negate(f))
    for x in range(-3, 4):
        env = {X: x, Y: 1 - x, Z: 2 * x}
        assert bool(eval(g, env)) == bool(eval(f, env))


@given(atoms)
def test_negate_involution_on_non_strict_atoms(c):
    if c.op in ("==", "!=", "<=", ">="):
        n2 = negate(negate(c))
        assert canonical(n2) == canonical(c)


@given(atoms, envs)
def test_canonical_preserves_truth(c, env):
    terms, op, k = canonical(c)
    lhs = sum(a * env[v] for v, a in terms)
    expected = {"==": lhs == k, "!=": lhs != k, "<=": lhs <= k, ">=": lhs >= k}[op]
    assert expected == eval(c, env)
    assert op in ("==", "!=", "<=", ">=")
    assert not terms or terms[0][1] > 0


@given(boolint_exprs(), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_cstr_cond_preserves_truth(text, a, b, c):
    b_expr = cond_of(text)
    fs = cstr_cond(b_expr, {}, 1)
    env = {VersionedVar("a"): a, VersionedVar("b"): b, VersionedVar("c"): c}
    assert all(bool(eval(f, env)) for f in fs) == eval_bool(b_expr, {"a": a, "b": b, "c": c})
