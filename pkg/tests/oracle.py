"""Independent reference oracles for corpus results.

Nothing here goes through the CFG, the constraint layer or the solver: the
AST is walked directly and feasibility is decided by exhaustive numpy search
over the values of the dropped assignments (every other variable is then
fixed by forward evaluation).  The search window is a small box, which is
wide enough for the corpus counterexamples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from locfaults.cli import corpus_dir, load_corpus
from locfaults.lang import (And, Assign, BinOp, BoolConst, Cmp, Decl, IfElse, Neg, Not, Num, Or,
                            Var, parse)

WINDOW = 40

_CMP = {"==": np.equal, "!=": np.not_equal, "<": np.less, "<=": np.less_equal,
        ">": np.greater, ">=": np.greater_equal}


def ev(e, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -ev(e.operand, env)
    if isinstance(e, BinOp):
        a, b = ev(e.left, env), ev(e.right, env)
        return a + b if e.op == "+" else a - b if e.op == "-" else a * b
    raise TypeError(e)


def evb(b, env):
    if isinstance(b, BoolConst):
        return b.value
    if isinstance(b, Cmp):
        return _CMP[b.op](ev(b.left, env), ev(b.right, env))
    if isinstance(b, Not):
        return np.logical_not(evb(b.operand, env))
    if isinstance(b, And):
        return np.logical_and(evb(b.left, env), evb(b.right, env))
    if isinstance(b, Or):
        return np.logical_or(evb(b.left, env), evb(b.right, env))
    raise TypeError(b)


@dataclass
class Trace:
    events: list  # ("assign", Assign) | ("cond", IfElse, taken)
    final: dict


def trace(program, inputs, flips=()) -> Trace:
    """Concrete run recording assignments and the conditions met (loop-free)."""
    env = {n: 0 for n in program.locals}
    env.update(inputs)
    events = []

    def block(stmts):
        for s in stmts:
            if isinstance(s, Assign):
                env[s.target] = int(ev(s.expr, env))
                events.append(("assign", s))
            elif isinstance(s, IfElse):
                taken = bool(evb(s.cond, env)) != (s.line in flips)
                events.append(("cond", s, taken))
                block(s.then if taken else s.orelse)
            elif isinstance(s, Decl):
                pass
            else:
                raise TypeError(f"oracle handles loop-free programs only: {s!r}")

    block(program.body)
    return Trace(events, env)


def post_holds(program, inputs, flips=()) -> bool:
    return bool(evb(program.post, trace(program, inputs, flips).final))


def condition_lines(program) -> list:
    out = []

    def walk(stmts):
        for s in stmts:
            if isinstance(s, IfElse):
                out.append(s.line)
                walk(s.then)
                walk(s.orelse)
    walk(program.body)
    return sorted(out)


def deviation_sets(program, ce, k: int) -> set:
    """Inclusion-minimal correcting deviation sets of size <= k.

    A set qualifies when all its conditions are met on the flipped run, the
    flipped run satisfies POST, and no proper prefix (in execution order)
    already does.
    """
    found = set()
    for size in range(1, k + 1):
        for combo in itertools.combinations(condition_lines(program), size):
            t = trace(program, ce, combo)
            met = [e[1].line for e in t.events if e[0] == "cond" and e[1].line in combo]
            if sorted(met) != list(combo) or not evb(program.post, t.final):
                continue
            if any(post_holds(program, ce, met[:j]) for j in range(1, size)):
                continue
            found.add(frozenset(combo))
    return {s for s in found if not any(o < s for o in found)}


def path_mcs(program, ce, deviations, bound: int, window: int = WINDOW, hard: str = "last",
             bounded: bool = False) -> set:
    """MCS line sets of the path store for one report entry.

    With no deviations the store is the counterexample path plus POST;
    otherwise it is the path up to the last deviated condition plus that
    condition (or, with ``hard="all"``, every deviated condition) forced to
    its deviated branch.  ``bounded`` also confines every computed value to
    the window, mirroring a solver run with that default domain.
    """
    flips = set(deviations)
    t = trace(program, ce, flips)
    events, targets = [], []
    for e in t.events:
        if e[0] == "cond" and e[1].line in flips:
            if hard == "all" or e[1].line == max(deviations):
                targets.append((len(events), e))
            if e[1].line == max(deviations):
                break
        events.append(e)
    assign_pos = [i for i, e in enumerate(events) if e[0] == "assign"]
    assigns = [events[i][1] for i in assign_pos]
    n = len(assigns)
    grid = np.arange(-window, window + 1)

    def correction(drop) -> bool:
        drop = sorted(drop)
        env = {v: 0 for v in program.locals}
        env.update(ce)
        slot = {assign_pos[i]: j for j, i in enumerate(drop)}
        ok = np.ones([grid.size] * len(drop), dtype=bool)
        pending = list(targets)
        for pos, e in enumerate(events):
            while pending and pending[0][0] == pos:
                _, (_, s, taken) = pending.pop(0)
                ok = ok & (evb(s.cond, env) == taken)
            if e[0] != "assign":
                continue
            a = e[1]
            if pos in slot:
                shape = [1] * len(drop)
                shape[slot[pos]] = grid.size
                env[a.target] = grid.reshape(shape)
            else:
                env[a.target] = ev(a.expr, env)
            if bounded:
                ok = ok & (np.abs(env[a.target]) <= window)
        for _, (_, s, taken) in pending:
            ok = ok & (evb(s.cond, env) == taken)
        if not deviations:
            ok = ok & evb(program.post, env)
        return bool(np.any(ok))

    out = set()
    for size in range(1, min(bound, n) + 1):
        for drop in itertools.combinations(range(n), size):
            if correction(drop) and not any(correction(set(drop) - {i}) for i in drop):
                out.add(tuple(sorted({assigns[i].line for i in drop})))
    return out


def correct_calls(program, ce, k: int) -> int:
    """Candidate deviations examined by an unpruned depth-first search."""
    count = 0

    def rec(flips, k):
        nonlocal count
        conds = [e[1].line for e in trace(program, ce, flips).events if e[0] == "cond"]
        start = max(conds.index(f) for f in flips) + 1 if flips else 0
        for c in conds[start:]:
            count += 1
            if post_holds(program, ce, flips + (c,)):
                continue
            if k > 1:
                rec(flips + (c,), k - 1)

    if k > 0:
        rec((), k)
    return count


def correct_version(name):
    """The fault-free program: the label file's fix lines patched into the source."""
    _, _, labels = load_corpus(name)
    lines = (corpus_dir() / f"{name}.imp").read_text().split("\n")
    for line, text in labels["fix"].items():
        old = lines[int(line) - 1]
        lines[int(line) - 1] = old[:len(old) - len(old.lstrip())] + text
    return parse("\n".join(lines))
