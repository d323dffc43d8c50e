"""Linear integer constraints over versioned variables.

Conditions translate to small boolean trees (:class:`Conj` / :class:`Disj`)
over linear atoms (:class:`Constraint`).  :func:`eval` works on plain ints
and on numpy arrays, which the brute-force oracles rely on.
"""
from __future__ import annotations

import enum
import functools
import operator
from dataclasses import dataclass
from typing import Mapping, Union

from .lang import And, BoolConst, Cmp, Linear, Not, Or, linearize

__all__ = [
    "VersionedVar", "LinExpr", "Kind", "Provenance", "Constraint", "Conj", "Disj",
    "Formula", "UnboundVariable", "cstr_assign", "cstr_cond", "cstr_fact", "negate",
    "instantiate", "eval", "variables_of", "atoms_of", "canonical", "RELOPS",
]

RELOPS = ("==", "!=", "<", "<=", ">", ">=")


class UnboundVariable(KeyError):
    def __init__(self, var):
        super().__init__(str(var))
        self.var = var


@dataclass(frozen=True, order=True)
class VersionedVar:
    name: str
    version: int = 0

    def __str__(self):
        return f"{self.name}{self.version}"


@dataclass(frozen=True)
class LinExpr:
    terms: tuple = ()  # ((VersionedVar, coef), ...) sorted, no zero coefs
    constant: int = 0

    @staticmethod
    def of(coefs: Mapping, constant: int = 0) -> "LinExpr":
        return LinExpr(tuple(sorted((v, int(c)) for v, c in coefs.items() if c != 0)),
                       int(constant))

    @staticmethod
    def const(value: int) -> "LinExpr":
        return LinExpr((), int(value))

    @staticmethod
    def var(v: VersionedVar) -> "LinExpr":
        return LinExpr(((v, 1),), 0)

    def as_dict(self):
        return dict(self.terms)

    def __add__(self, other):
        if isinstance(other, int):
            return LinExpr(self.terms, self.constant + other)
        d = self.as_dict()
        for v, c in other.terms:
            d[v] = d.get(v, 0) + c
        return LinExpr.of(d, self.constant + other.constant)

    def scale(self, k):
        return LinExpr.of({v: c * k for v, c in self.terms}, self.constant * k)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if isinstance(other, int):
            return self + (-other)
        return self + (-other)

    def __str__(self):
        parts = []
        for v, c in self.terms:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            parts.append(f"{sign} {mag}{v}")
        if self.constant or not parts:
            parts.append(f"{'-' if self.constant < 0 else '+'} {abs(self.constant)}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


class Kind(enum.Enum):
    ASSIGNMENT = "assignment"
    CONDITION = "condition"
    DEVIATED_CONDITION = "deviated-condition"
    PRECONDITION = "precondition"
    POSTCONDITION = "postcondition"
    COUNTEREXAMPLE = "counterexample"
    DECLARATION = "declaration"  # locals start at 0
    GUARD = "guard"  # loop-bound guard from unrolling


@dataclass(frozen=True)
class Provenance:
    line: int
    kind: Kind


@dataclass(frozen=True)
class Constraint:
    lhs: LinExpr
    op: str
    rhs: LinExpr
    label: Provenance = Provenance(0, Kind.CONDITION)

    def __post_init__(self):
        if self.op not in RELOPS:
            raise ValueError(f"bad relop {self.op!r}")

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Conj:
    parts: tuple
    label: Provenance = Provenance(0, Kind.CONDITION)

    def __str__(self):
        return "(" + " && ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Disj:
    parts: tuple
    label: Provenance = Provenance(0, Kind.CONDITION)

    def __str__(self):
        return "(" + " || ".join(map(str, self.parts)) + ")"


Formula = Union[Constraint, Conj, Disj]

_NEG = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def instantiate(lin: Linear, versions: Mapping[str, int]) -> LinExpr:
    """Rename a source-level linear form into versioned variables."""
    return LinExpr.of({VersionedVar(n, versions.get(n, 0)): c for n, c in lin.terms}, lin.const)


def cstr_assign(target: VersionedVar, rhs: LinExpr, line: int) -> Constraint:
    return Constraint(LinExpr.var(target), "==", rhs, Provenance(line, Kind.ASSIGNMENT))


def cstr_fact(var: VersionedVar, value: int, line: int = 0,
              kind: Kind = Kind.COUNTEREXAMPLE) -> Constraint:
    return Constraint(LinExpr.var(var), "==", LinExpr.const(value), Provenance(line, kind))


_TRUE = Constraint(LinExpr.const(0), "==", LinExpr.const(0))
_FALSE = Constraint(LinExpr.const(0), "==", LinExpr.const(1))


def cstr_cond(cond, versions: Mapping[str, int], line: int = 0,
              kind: Kind = Kind.CONDITION) -> list:
    """Translate a boolean expression into a conjunction (list) of formulas.

    Negations are pushed to the atoms; conjunctions are flattened.
    """
    label = Provenance(line, kind)
    return _flatten_and(_nnf(cond, versions, label, False), label)


def _flatten_and(f, label):
    if isinstance(f, Conj):
        out = []
        for p in f.parts:
            out.extend(_flatten_and(p, label))
        return out
    if f == _relabel(_TRUE, label):
        return []
    return [f]


def _relabel(c, label):
    return Constraint(c.lhs, c.op, c.rhs, label)


def _nnf(b, versions, label, neg):
    if isinstance(b, BoolConst):
        return _relabel(_TRUE if b.value != neg else _FALSE, label)
    if isinstance(b, Cmp):
        op = _NEG[b.op] if neg else b.op
        return Constraint(instantiate(linearize(b.left, label.line), versions), op,
                          instantiate(linearize(b.right, label.line), versions), label)
    if isinstance(b, Not):
        return _nnf(b.operand, versions, label, not neg)
    if isinstance(b, (And, Or)):
        conj = isinstance(b, And) != neg
        parts = []
        for side in (b.left, b.right):
            f = _nnf(side, versions, label, neg)
            same = Conj if conj else Disj
            parts.extend(f.parts if isinstance(f, same) else (f,))
        return (Conj if conj else Disj)(tuple(parts), label)
    raise TypeError(f"not a boolean expression: {b!r}")


def negate(f):
    """Integer-exact complement; strict relations are tightened to <= / >=."""
    if isinstance(f, Constraint):
        if f.op == "<=":
            return Constraint(f.lhs, ">=", f.rhs + 1, f.label)
        if f.op == ">=":
            return Constraint(f.lhs, "<=", f.rhs - 1, f.label)
        if f.op == "<":
            return Constraint(f.lhs, ">=", f.rhs, f.label)
        if f.op == ">":
            return Constraint(f.lhs, "<=", f.rhs, f.label)
        return Constraint(f.lhs, _NEG[f.op], f.rhs, f.label)
    if isinstance(f, Conj):
        return Disj(tuple(negate(p) for p in f.parts), f.label)
    if isinstance(f, Disj):
        return Conj(tuple(negate(p) for p in f.parts), f.label)
    raise TypeError(f)


def canonical(c: Constraint):
    """Return ``(terms, op, c)`` meaning ``sum(a*x) op c`` with op in
    {'==', '!=', '<=', '>='}, strict relations tightened and the leading
    coefficient positive."""
    d = c.lhs - c.rhs
    op, k = c.op, -d.constant
    if op == "<":
        op, k = "<=", k - 1
    elif op == ">":
        op, k = ">=", k + 1
    terms = d.terms
    if terms and terms[0][1] < 0:
        terms = tuple((v, -a) for v, a in terms)
        k = -k
        op = {"<=": ">=", ">=": "<="}.get(op, op)
    return terms, op, k


def _cmp(op, a, b):
    return {"==": operator.eq, "!=": operator.ne, "<": operator.lt,
            "<=": operator.le, ">": operator.gt, ">=": operator.ge}[op](a, b)


def eval(e, env: Mapping):  # noqa: A001 - mirrors the operation name
    """Evaluate a LinExpr, Constraint, Conj or Disj under ``env``.

    Values may be ints or numpy arrays (elementwise result).
    """
    if isinstance(e, LinExpr):
        total = e.constant
        for v, c in e.terms:
            try:
                x = env[v]
            except KeyError:
                raise UnboundVariable(v) from None
            total = total + c * x
        return total
    if isinstance(e, Constraint):
        return _cmp(e.op, eval(e.lhs, env), eval(e.rhs, env))
    if isinstance(e, Conj):
        return functools.reduce(operator.and_, (eval(p, env) for p in e.parts), True)
    if isinstance(e, Disj):
        return functools.reduce(operator.or_, (eval(p, env) for p in e.parts), False)
    raise TypeError(f"cannot evaluate {e!r}")


def atoms_of(f):
    if isinstance(f, Constraint):
        yield f
    else:
        for p in f.parts:
            yield from atoms_of(p)


def variables_of(formulas) -> list:
    """Variables in first-mention order."""
    seen = {}
    for f in formulas:
        for a in atoms_of(f):
            for side in (a.lhs, a.rhs):
                for v, _ in side.terms:
                    seen.setdefault(v, None)
    return list(seen)
