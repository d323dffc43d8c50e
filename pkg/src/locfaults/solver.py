"""Branch-and-prune feasibility over bounded integer domains.

Hard constraints must hold; each soft constraint carries a selector that,
when on, enforces it and, when off, drops it.  An optional AtMost bound
limits how many selectors may be off and blocking clauses require at least
one selector of each clause to be on.  The search is complete over the
finite domains.

``brute_force_feasible`` is an independent numpy oracle used by the tests.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Optional

import numpy as np

from .constraints import Conj, Constraint, Disj, canonical, eval, variables_of

log = logging.getLogger(__name__)

DEFAULT_DOMAIN = (-10**6, 10**6)
DEFAULT_BUDGET = 10**6
ORACLE_LIMIT = 10**7
MAX_PASSES = 50

__all__ = [
    "Store", "Verdict", "DomainTooLarge", "OracleTooLarge", "is_feasible",
    "brute_force_feasible", "set_atmost", "add_blocking_clause", "check_witness",
    "DEFAULT_DOMAIN", "DEFAULT_BUDGET",
]


class DomainTooLarge(RuntimeError):
    """The search budget ran out before a verdict was reached."""


class OracleTooLarge(RuntimeError):
    """The brute-force grid would exceed the oracle limit."""


@dataclass
class Store:
    hard: list = field(default_factory=list)
    soft: list = field(default_factory=list)  # [(formula, selector id)], ids 1..n
    atmost: Optional[tuple] = None  # (frozenset of selector ids, k)
    blocking: list = field(default_factory=list)  # [frozenset of selector ids]
    domains: dict = field(default_factory=dict)
    default_domain: tuple = DEFAULT_DOMAIN

    @classmethod
    def build(cls, hard=(), soft=(), domains=None, default_domain=DEFAULT_DOMAIN):
        st = cls(list(hard), [], None, [], dict(domains or {}), tuple(default_domain))
        for c in soft:
            st.add_soft(c)
        return st

    def add_soft(self, c) -> int:
        sid = len(self.soft) + 1
        self.soft.append((c, sid))
        return sid

    @property
    def selectors(self):
        return [sid for _, sid in self.soft]

    def variables(self):
        return variables_of(list(self.hard) + [c for c, _ in self.soft])

    def domain(self, v):
        return self.domains.get(v, self.domains.get(v.name, self.default_domain))

    def copy(self):
        return Store(list(self.hard), list(self.soft), self.atmost, list(self.blocking),
                     dict(self.domains), self.default_domain)


def set_atmost(store: Store, selectors, k: int):
    """At most ``k`` of ``selectors`` may be off."""
    store.atmost = (frozenset(selectors), int(k))


def add_blocking_clause(store: Store, selectors):
    """At least one of ``selectors`` must be on."""
    store.blocking.append(frozenset(selectors))


@dataclass
class Verdict:
    feasible: bool
    env: Optional[dict] = None
    selectors: Optional[frozenset] = None  # selectors that are on
    nodes: int = 0

    def __bool__(self):
        return self.feasible


def check_witness(store: Store, verdict: Verdict) -> bool:
    """Independent re-check of a witness with :func:`eval`."""
    if not verdict.feasible:
        return False
    env, on = verdict.env, verdict.selectors
    if not all(bool(eval(c, env)) for c in store.hard):
        return False
    if not all(bool(eval(c, env)) for c, sid in store.soft if sid in on):
        return False
    if any(not (store.domain(v)[0] <= x <= store.domain(v)[1]) for v, x in env.items()):
        return False
    if store.atmost is not None:
        sels, k = store.atmost
        if len(sels - on) > k:
            return False
    return all(b & on for b in store.blocking)


# -- compiled representation -------------------------------------------------
#
# atom:  ("atom", idx tuple, coef tuple, op, c)   with op in ==, !=, <=, >=
# and:   ("and", parts)
# or:    ("or", parts)

TRUE, FALSE, UNKNOWN = 1, 0, -1


def _compile(f, index):
    if isinstance(f, Constraint):
        terms, op, c = canonical(f)
        return ("atom", tuple(index[v] for v, _ in terms), tuple(a for _, a in terms), op, c)
    if isinstance(f, Conj):
        return ("and", tuple(_compile(p, index) for p in f.parts))
    if isinstance(f, Disj):
        return ("or", tuple(_compile(p, index) for p in f.parts))
    raise TypeError(f)


def _span(idx, coef, lo, hi):
    mn = mx = 0
    for i, a in zip(idx, coef):
        if a > 0:
            mn += a * lo[i]
            mx += a * hi[i]
        else:
            mn += a * hi[i]
            mx += a * lo[i]
    return mn, mx


def _gcd_ok(coef, c):
    g = 0
    for a in coef:
        g = gcd(g, a)
    return c == 0 if g == 0 else c % g == 0


def _status(node, lo, hi):
    kind = node[0]
    if kind == "atom":
        _, idx, coef, op, c = node
        mn, mx = _span(idx, coef, lo, hi)
        if op == "<=":
            return TRUE if mx <= c else FALSE if mn > c else UNKNOWN
        if op == ">=":
            return TRUE if mn >= c else FALSE if mx < c else UNKNOWN
        if op == "==":
            if c < mn or c > mx or not _gcd_ok(coef, c):
                return FALSE
            return TRUE if mn == mx else UNKNOWN
        # !=
        if c < mn or c > mx or not _gcd_ok(coef, c):
            return TRUE
        return FALSE if mn == mx else UNKNOWN
    parts = [_status(p, lo, hi) for p in node[1]]
    if kind == "and":
        if FALSE in parts:
            return FALSE
        return TRUE if all(p == TRUE for p in parts) else UNKNOWN
    if TRUE in parts:
        return TRUE
    return FALSE if all(p == FALSE for p in parts) else UNKNOWN


def _ceildiv(a, b):
    return -((-a) // b)


def _shave_le(idx, coef, c, lo, hi, changed):
    """Tighten bounds for sum(a*x) <= c.  Returns False on wipe-out."""
    mn, _ = _span(idx, coef, lo, hi)
    if mn > c:
        return False
    for i, a in zip(idx, coef):
        own = a * lo[i] if a > 0 else a * hi[i]
        rem = c - (mn - own)  # a*x_i <= rem
        if a > 0:
            nb = rem // a
            if nb < hi[i]:
                if nb < lo[i]:
                    return False
                hi[i] = nb
                changed.add(i)
        else:
            nb = _ceildiv(rem, a)  # dividing by negative flips
            if nb > lo[i]:
                if nb > hi[i]:
                    return False
                lo[i] = nb
                changed.add(i)
        mn, _ = _span(idx, coef, lo, hi)
    return True


def _propagate_node(node, lo, hi, changed):
    """One propagation step for a formula.  Returns False on conflict."""
    kind = node[0]
    if kind == "atom":
        _, idx, coef, op, c = node
        if op == "<=":
            return _shave_le(idx, coef, c, lo, hi, changed)
        if op == ">=":
            return _shave_le(idx, tuple(-a for a in coef), -c, lo, hi, changed)
        if op == "==":
            if not _gcd_ok(coef, c):
                return False
            return (_shave_le(idx, coef, c, lo, hi, changed)
                    and _shave_le(idx, tuple(-a for a in coef), -c, lo, hi, changed))
        st = _status(node, lo, hi)
        if st == FALSE:
            return False
        if st == UNKNOWN:
            # single free variable sitting on the forbidden value at a bound
            free = [(i, a) for i, a in zip(idx, coef) if lo[i] != hi[i]]
            if len(free) == 1:
                i, a = free[0]
                rest = sum(b * lo[j] for j, b in zip(idx, coef) if j != i)
                if (c - rest) % a == 0:
                    v = (c - rest) // a
                    if v == lo[i]:
                        lo[i] += 1
                        changed.add(i)
                    elif v == hi[i]:
                        hi[i] -= 1
                        changed.add(i)
        return True
    if kind == "and":
        return all(_propagate_node(p, lo, hi, changed) for p in node[1])
    viable = [p for p in node[1] if _status(p, lo, hi) != FALSE]
    if not viable:
        return False
    if len(viable) == 1:
        return _propagate_node(viable[0], lo, hi, changed)
    return True


def _propagate(active, lo, hi, trace=None):
    for _ in range(MAX_PASSES):
        changed = set()
        for node in active:
            if not _propagate_node(node, lo, hi, changed):
                return False
        if not changed:
            return True
        if trace is not None:
            trace(f"propagate: narrowed {sorted(changed)}")
    return True


def _flat(nodes):
    """Inline nested conjunctions so every active node is an atom or a disjunction."""
    out = []
    for n in nodes:
        if n[0] == "and":
            out.extend(_flat(n[1]))
        else:
            out.append(n)
    return out


def _branches(node, lo, hi):
    """Case-split alternatives for an undecided disjunction or != atom."""
    if node[0] == "atom":
        if node[3] == "!=":
            _, idx, coef, _, c = node
            return [("atom", idx, coef, "<=", c - 1), ("atom", idx, coef, ">=", c + 1)]
        return None
    if node[0] == "or":
        return [p for p in node[1] if _status(p, lo, hi) != FALSE]
    return None


class _Search:
    def __init__(self, store: Store, budget: int, trace):
        self.store = store
        self.budget = budget
        self.trace = trace
        self.nodes = 0
        self.vars = store.variables()
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.hard = _flat([_compile(c, self.index) for c in store.hard])
        self.soft = [(_compile(c, self.index), sid) for c, sid in store.soft]
        if store.atmost is not None:
            self.am_sels, self.am_k = store.atmost
        else:
            self.am_sels, self.am_k = frozenset(), None
        self.blocking = list(store.blocking)

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise DomainTooLarge(f"search budget of {self.budget} nodes exhausted")

    def run(self):
        lo = [self.store.domain(v)[0] for v in self.vars]
        hi = [self.store.domain(v)[1] for v in self.vars]
        if any(a > b for a, b in zip(lo, hi)):
            return None
        if not _propagate(self.hard, lo, hi, self.trace):
            return None
        return self.selectors(0, list(self.hard), lo, hi, frozenset(), frozenset())

    def blocked(self, off):
        # a clause fails once all its selectors are off
        return any(b <= off for b in self.blocking)

    def selectors(self, pos, active, lo, hi, on, off):
        self.tick()
        if pos == len(self.soft):
            res = self.values(active, lo, hi)
            return None if res is None else (res, on)
        node, sid = self.soft[pos]
        # on
        lo2, hi2 = lo[:], hi[:]
        act2 = active + _flat([node])
        if _status(node, lo2, hi2) != FALSE and _propagate(act2, lo2, hi2, self.trace):
            r = self.selectors(pos + 1, act2, lo2, hi2, on | {sid}, off)
            if r is not None:
                return r
        # off
        off2 = off | {sid}
        if self.am_k is not None and len(off2 & self.am_sels) > self.am_k:
            return None
        if self.blocked(off2):
            return None
        return self.selectors(pos + 1, active, lo, hi, on, off2)

    def values(self, active, lo, hi):
        self.tick()
        if not _propagate(active, lo, hi, self.trace):
            return None
        statuses = [_status(n, lo, hi) for n in active]
        if FALSE in statuses:
            return None
        if all(s == TRUE for s in statuses):
            return lo[:]
        # cheap probe: the lower corner of the box
        if all(_status(n, lo, lo) == TRUE for n in active):
            return lo[:]
        # decided nodes can be dropped from this subtree
        active = [n for n, st in zip(active, statuses) if st != TRUE]
        for pos, n in enumerate(active):
            branches = _branches(n, lo, hi)
            if branches:
                rest = active[:pos] + active[pos + 1:]
                for b in branches:
                    if self.trace is not None:
                        self.trace(f"case split on {b}")
                    r = self.values(rest + _flat([b]), lo[:], hi[:])
                    if r is not None:
                        return r
                return None
        # bisect the widest domain, lower half first
        i = max(range(len(lo)), key=lambda j: (hi[j] - lo[j], -j))
        mid = (lo[i] + hi[i]) // 2
        if self.trace is not None:
            self.trace(f"split {self.vars[i]} at {mid}")
        lo2, hi2 = lo[:], hi[:]
        hi2[i] = mid
        r = self.values(active, lo2, hi2)
        if r is not None:
            return r
        lo2, hi2 = lo[:], hi[:]
        lo2[i] = mid + 1
        return self.values(active, lo2, hi2)


def is_feasible(store: Store, budget: int = DEFAULT_BUDGET,
                trace: Optional[Callable[[str], None]] = None) -> Verdict:
    """Complete feasibility check; raises :class:`DomainTooLarge` past ``budget`` nodes."""
    s = _Search(store, budget, trace)
    res = s.run()
    if res is None:
        return Verdict(False, nodes=s.nodes)
    values, on = res
    env = {v: int(x) for v, x in zip(s.vars, values)}
    return Verdict(True, env, frozenset(on), s.nodes)


# -- oracle ------------------------------------------------------------------

def _grid(store: Store, formulas):
    vs = variables_of(formulas)
    sizes = []
    for v in vs:
        lo, hi = store.domain(v)
        sizes.append(max(0, hi - lo + 1))
    total = int(np.prod(sizes, dtype=object)) if sizes else 1
    if total > ORACLE_LIMIT:
        raise OracleTooLarge(f"grid of {total} points exceeds {ORACLE_LIMIT}")
    axes = [np.arange(store.domain(v)[0], store.domain(v)[1] + 1, dtype=np.int64) for v in vs]
    if axes:
        mesh = np.meshgrid(*axes, indexing="ij")
        env = {v: m.ravel() for v, m in zip(vs, mesh)}
    else:
        env = {}
    return vs, env, total


def _as_mask(x, n):
    return np.broadcast_to(np.asarray(x, dtype=bool), (n,))


def sat_patterns(store: Store):
    """Grid points satisfying the hard constraints, as soft-satisfaction bit patterns.

    Returns ``(bits, env, keep)`` where ``bits[p]`` has bit ``sid-1`` set when
    soft constraint ``sid`` holds at hard-feasible point ``p``.
    """
    formulas = list(store.hard) + [c for c, _ in store.soft]
    vs, env, n = _grid(store, formulas)
    keep = np.ones(n, dtype=bool)
    for c in store.hard:
        keep &= _as_mask(eval(c, env), n)
    env = {v: a[keep] for v, a in env.items()}
    m = int(keep.sum())
    bits = np.zeros(m, dtype=np.int64)
    for c, sid in store.soft:
        bits |= _as_mask(eval(c, env), m).astype(np.int64) << (sid - 1)
    return bits, env


def brute_force_feasible(store: Store) -> Verdict:
    """Exhaustive verdict over the product of domains (at most 10^7 points)."""
    bits, env = sat_patterns(store)
    ok = np.ones(bits.shape[0], dtype=bool)
    if store.atmost is not None:
        sels, k = store.atmost
        off = np.zeros(bits.shape[0], dtype=np.int64)
        for s in sels:
            off += ((bits >> (s - 1)) & 1) ^ 1
        ok &= off <= k
    for b in store.blocking:
        m = 0
        for s in b:
            m |= 1 << (s - 1)
        ok &= (bits & m) != 0
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return Verdict(False)
    p = int(hits[0])
    w = {v: int(a[p]) for v, a in env.items()}
    on = frozenset(sid for _, sid in store.soft if (int(bits[p]) >> (sid - 1)) & 1)
    return Verdict(True, w, on)
