"""Hypothesis strategies shared by the test modules."""
from __future__ import annotations

from hypothesis import strategies as st

_names = st.sampled_from(["a", "b", "c"])
_atoms = st.one_of(st.integers(-9, 9).map(str), _names)


@st.composite
def int_exprs(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        return draw(_atoms)
    op = draw(st.sampled_from(["+", "-", "*"]))
    left = draw(int_exprs(depth=depth - 1))
    if op == "*":
        return f"{draw(st.integers(-4, 4))} * ({left})"
    return f"({left}) {op} {draw(int_exprs(depth=depth - 1))}"


@st.composite
def boolint_exprs(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        rel = draw(st.sampled_from(["==", "!=", "<", "<=", ">", ">="]))
        return f"{draw(int_exprs())} {rel} {draw(int_exprs())}"
    kind = draw(st.sampled_from(["&&", "||", "!"]))
    if kind == "!":
        return f"!({draw(boolint_exprs(depth=depth - 1))})"
    return f"({draw(boolint_exprs(depth=depth - 1))}) {kind} ({draw(boolint_exprs(depth=depth - 1))})"


@st.composite
def programs(draw, max_stmts=4):
    lines = ["prog r(int a, int b, int c) {", "pre true;"]
    for _ in range(draw(st.integers(1, max_stmts))):
        if draw(st.booleans()):
            lines.append(f"{draw(_names)} = {draw(int_exprs())};")
        else:
            lines += [f"if ({draw(boolint_exprs())}) {{", f"{draw(_names)} = {draw(int_exprs())};",
                      "}", "else {", f"{draw(_names)} = {draw(int_exprs())};", "}"]
    lines += [f"post {draw(boolint_exprs())};", "}"]
    return "\n".join(lines)


# -- random linear systems (seeded, shared with the acceptance suite) --------

import random  # noqa: E402

from locfaults.constraints import Constraint, Disj, LinExpr, VersionedVar  # noqa: E402

SYS_VARS = (VersionedVar("x"), VersionedVar("y"), VersionedVar("z"))
SYS_DOMAIN = (-20, 20)
_OPS = ("==", "!=", "<", "<=", ">", ">=")


def random_atom(rng: random.Random) -> Constraint:
    coefs = {v: rng.randint(-3, 3) for v in rng.sample(SYS_VARS, rng.randint(1, 3))}
    if not any(coefs.values()):
        coefs[SYS_VARS[0]] = 1
    return Constraint(LinExpr.of(coefs), rng.choice(_OPS), LinExpr.const(rng.randint(-20, 20)))


def random_formula(rng: random.Random):
    if rng.random() < 0.15:
        return Disj((random_atom(rng), random_atom(rng)))
    return random_atom(rng)


def random_system(rng: random.Random, n_hard: int, n_soft: int):
    return ([random_formula(rng) for _ in range(n_hard)],
            [random_formula(rng) for _ in range(n_soft)])


def random_infeasible(rng: random.Random, max_soft: int = 10):
    """(hard, soft): hard alone feasible, hard + soft infeasible on SYS_DOMAIN."""
    from locfaults.solver import Store, brute_force_feasible

    while True:
        hard, soft = random_system(rng, rng.randint(0, 2), rng.randint(2, max_soft))
        if not brute_force_feasible(Store.build(hard, default_domain=SYS_DOMAIN)):
            continue
        if not brute_force_feasible(Store.build(hard + soft, default_domain=SYS_DOMAIN)):
            return hard, soft
