"""Fault localization driver.

The counterexample is propagated along the CFG.  Up to ``k_max`` conditions
may be deviated (their other branch forced); whenever a deviation makes the
rest of the execution satisfy the postcondition, the deviated conditions are
reported together with the MCSs of the path prefix that leads to the last of
them.  The undeviated counterexample path gets its own MCS entry.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .cfg import AssignBlock, Cfg, ConditionNode, GuardNode, PostNode, PreNode, build_cfg, run_concrete
from .constraints import (Conj, Kind, Provenance, VersionedVar, cstr_assign, cstr_cond, cstr_fact,
                          eval, instantiate, negate)
from .lang import Program, eval_bool, execute, has_loops, unroll
from .mcs import NotInfeasible, mcs_enumerate
from .solver import DEFAULT_BUDGET, DEFAULT_DOMAIN

log = logging.getLogger(__name__)

__all__ = [
    "CounterExampleError", "NotACounterExample", "PreconditionViolated", "BadCounterExample",
    "Deviation", "PathState", "Entry", "McsReport", "validate_ce", "locfaults", "correct",
    "prefix_prune", "Localizer", "minimal_deviation_entries",
]


class CounterExampleError(ValueError):
    """The supplied input is not a usable counterexample."""


class NotACounterExample(CounterExampleError):
    pass


class PreconditionViolated(CounterExampleError):
    pass


class BadCounterExample(CounterExampleError):
    """Missing, extra or non-integer input bindings."""


def validate_ce(program: Program, ce: Mapping) -> dict:
    """Check that ``ce`` binds exactly the inputs, satisfies PRE and violates POST."""
    if not isinstance(ce, Mapping):
        raise BadCounterExample("counterexample must map input names to integers")
    missing = [n for n in program.inputs if n not in ce]
    extra = sorted(set(ce) - set(program.inputs))
    if missing or extra:
        raise BadCounterExample(f"missing inputs {missing}, unexpected {extra}")
    out = {}
    for n in program.inputs:
        v = ce[n]
        if isinstance(v, bool) or not isinstance(v, int):
            raise BadCounterExample(f"input {n!r} must be an integer, got {v!r}")
        out[n] = v
    env = {name: 0 for name in program.locals}
    env.update(out)
    if not eval_bool(program.pre, env):
        raise PreconditionViolated(f"precondition does not hold for {out}")
    final = execute(program, out)  # LoopBoundExceeded propagates
    if eval_bool(program.post, final):
        raise NotACounterExample(f"postcondition holds for {out}")
    return out


@dataclass(frozen=True)
class Deviation:
    node: int
    line: int
    branch: bool  # branch forced by the deviation
    constraints: tuple  # hard constraints encoding the forced direction


@dataclass(frozen=True)
class PathState:
    env: dict  # VersionedVar -> value: the propagated counterexample
    versions: dict  # base name -> current version on this path
    deviated: tuple = ()
    assigns: tuple = ()
    guards: tuple = ()
    k_remaining: int = 0

    def values(self) -> dict:
        return {n: self.env[VersionedVar(n, v)] for n, v in self.versions.items()}


@dataclass(frozen=True)
class Entry:
    deviations: tuple  # sorted condition lines; () for the counterexample path
    mcs: tuple  # Mcs objects

    @property
    def mcs_lines(self) -> tuple:
        return tuple(m.lines for m in self.mcs)

    def key(self):
        return (len(self.deviations), self.deviations, self.mcs_lines)


@dataclass
class McsReport:
    program: str
    counterexample: dict
    entries: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    correct_calls: int = 0
    pruned: int = 0
    k_max: int = 0
    mcs_bound: int = 0

    @property
    def deviation_sets(self):
        return [e.deviations for e in self.entries if e.deviations]


def correct(cfg: Cfg, node: int, values: Mapping) -> bool:
    """Execute from ``node`` on concrete ``values``; True iff POST holds at the sink."""
    final = run_concrete(cfg, values, start=node)
    return final is not None and bool(eval_bool(cfg.program.post, final))


def prefix_prune(recorded, candidate) -> bool:
    """True iff some recorded correcting deviation list is a proper prefix of ``candidate``."""
    cand = tuple(candidate)
    return any(len(r) < len(cand) and cand[:len(r)] == tuple(r) for r in recorded)


def minimal_deviation_entries(entries) -> list:
    """Drop deviation entries whose condition set strictly contains another
    correcting set: the smaller set already explains the failure."""
    sets = {frozenset(e.deviations) for e in entries if e.deviations}
    return [e for e in entries
            if not e.deviations or not any(s < frozenset(e.deviations) for s in sets)]


def _direction(formulas, branch: bool, line: int) -> tuple:
    label = Provenance(line, Kind.DEVIATED_CONDITION)
    fs = [replace(f, label=label) for f in formulas]
    if branch:
        return tuple(fs)
    if not fs:  # condition was constant true
        return (negate(Conj((), label)),)
    return (negate(fs[0] if len(fs) == 1 else Conj(tuple(fs), label)),)


class Localizer:
    """One run of the deviation search over a CFG."""

    def __init__(self, cfg: Cfg, ce: Mapping, mcs_bound: int = 3, prune: bool = True,
                 domains: Optional[dict] = None, default_domain=DEFAULT_DOMAIN,
                 budget: int = DEFAULT_BUDGET, deviation_hard: str = "last",
                 minimal_deviations: bool = True):
        if deviation_hard not in ("last", "all"):
            raise ValueError("deviation_hard must be 'last' or 'all'")
        self.cfg = cfg
        self.ce = dict(ce)
        self.mcs_bound = mcs_bound
        self.prune = prune
        self.domains = domains
        self.default_domain = default_domain
        self.budget = budget
        self.deviation_hard = deviation_hard
        self.minimal_deviations = minimal_deviations
        self.entries = {}
        self.recorded = []  # correcting deviation lists, as line tuples
        self.correct_calls = 0
        self.pruned = 0
        p = cfg.program
        versions = {n: 0 for n in p.variables}
        env = {VersionedVar(n, 0): 0 for n in p.locals}
        env.update({VersionedVar(n, 0): v for n, v in self.ce.items()})
        self.base_hard = (
            [cstr_fact(VersionedVar(n, 0), v, p.line, Kind.COUNTEREXAMPLE) for n, v in self.ce.items()]
            + [cstr_fact(VersionedVar(n, 0), 0, p.line, Kind.DECLARATION) for n in p.locals]
            + cstr_cond(p.pre, versions, p.pre_line, Kind.PRECONDITION))
        self.initial = PathState(env, versions)

    def mcs(self, hard, soft):
        try:
            found = mcs_enumerate(hard, soft, self.mcs_bound, self.domains,
                                  self.default_domain, self.budget)
        except NotInfeasible:
            raise AssertionError("path store unexpectedly feasible") from None
        seen, out = set(), []
        for m in found:  # unrolled copies may share line sets
            if m.lines not in seen:
                seen.add(m.lines)
                out.append(m)
        return tuple(out)

    def add(self, entry: Entry):
        self.entries.setdefault(entry.key(), entry)

    def run(self, k_max: int):
        self.dfs(self.cfg.root, self.initial, 0, first_pass=True)
        if k_max > 0:
            self.dfs(self.cfg.root, replace(self.initial, k_remaining=k_max), k_max, first_pass=False)
        entries = list(self.entries.values())
        if self.minimal_deviations:
            entries = minimal_deviation_entries(entries)
        return sorted(entries, key=Entry.key)

    def deviation_store(self, st: PathState, cand: tuple) -> list:
        """Hard part of the MCS store for a correcting deviation list."""
        devs = cand[-1:] if self.deviation_hard == "last" else cand
        return self.base_hard + list(st.guards) + [c for x in devs for c in x.constraints]

    def dfs(self, nid: int, st: PathState, k: int, first_pass: bool):
        n = self.cfg.nodes[nid]
        if isinstance(n, PostNode):
            if first_pass:
                post = cstr_cond(n.cond, st.versions, n.line, Kind.POSTCONDITION)
                hard = self.base_hard + list(st.guards) + post
                self.add(Entry((), self.mcs(hard, st.assigns)))
            return
        if isinstance(n, PreNode):
            return self.dfs(n.next, st, k, first_pass)
        if isinstance(n, GuardNode):
            fs = cstr_cond(n.cond, st.versions, n.line, Kind.GUARD)
            if not all(eval(f, st.env) for f in fs):
                return  # bound exceeded on this path
            return self.dfs(n.next, replace(st, guards=st.guards + tuple(fs)), k, first_pass)
        if isinstance(n, AssignBlock):
            env, versions, assigns = dict(st.env), dict(st.versions), list(st.assigns)
            for target, lin, line in n.assigns:
                rhs = instantiate(lin, versions)
                value = eval(rhs, env)
                versions[target] += 1
                var = VersionedVar(target, versions[target])
                env[var] = value
                assigns.append(cstr_assign(var, rhs, line))
            st = replace(st, env=env, versions=versions, assigns=tuple(assigns))
            return self.dfs(n.next, st, k, first_pass)
        if isinstance(n, ConditionNode):
            fs = cstr_cond(n.cond, st.versions, n.line, Kind.CONDITION)
            taken = all(eval(f, st.env) for f in fs)
            nxt, dev = (n.left, n.right) if taken else (n.right, n.left)
            if k > 0:
                d = Deviation(n.id, n.line, not taken, _direction(fs, not taken, n.line))
                cand = st.deviated + (d,)
                lines = tuple(x.line for x in cand)
                if self.prune and prefix_prune(self.recorded, lines):
                    self.pruned += 1
                else:
                    self.correct_calls += 1
                    if correct(self.cfg, dev, st.values()):
                        self.recorded.append(lines)
                        hard = self.deviation_store(st, cand)
                        self.add(Entry(tuple(sorted(set(lines))), self.mcs(hard, st.assigns)))
                    elif k > 1:
                        self.dfs(dev, replace(st, deviated=cand, k_remaining=k - 1), k - 1, first_pass)
            return self.dfs(nxt, st, k, first_pass)
        raise TypeError(n)


def locfaults(program: Program, ce: Mapping, k_max: int = 3, mcs_bound: int = 3,
              unroll_bound: int = 10, prune: bool = True, domains: Optional[dict] = None,
              default_domain=DEFAULT_DOMAIN, budget: int = DEFAULT_BUDGET,
              deviation_hard: str = "last", minimal_deviations: bool = True) -> McsReport:
    """Localize the fault revealed by ``ce``.

    ``deviation_hard`` selects which deviated conditions constrain the MCS
    store of a correcting deviation: only the last one (default) or all of
    them.  ``minimal_deviations`` keeps only inclusion-minimal deviation sets.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    t0 = time.perf_counter()
    prog_b = unroll(program, unroll_bound) if has_loops(program.body) else program
    ce = validate_ce(prog_b, ce)
    cfg = build_cfg(prog_b)
    t1 = time.perf_counter()
    loc = Localizer(cfg, ce, mcs_bound, prune, domains, default_domain, budget,
                    deviation_hard, minimal_deviations)
    entries = loc.run(k_max)
    t2 = time.perf_counter()
    log.info("%s: %d entries, %d correct() calls", program.name, len(entries), loc.correct_calls)
    return McsReport(program.name, ce, entries,
                     {"preprocess_ms": (t1 - t0) * 1e3, "localize_ms": (t2 - t1) * 1e3},
                     loc.correct_calls, loc.pruned, k_max, mcs_bound)
