"""Bounded Minimal Correction Set enumeration.

Soft constraints get selectors; layer ``k`` bounds the number of disabled
selectors by ``k`` and every found MCS is blocked so that none of its
supersets can be returned again.  Because all smaller layers are complete
before layer ``k`` starts, each witness of layer ``k`` disables exactly an
MCS of size ``k``; a post-check re-verifies this anyway.

The brute-force helpers at the bottom are exhaustive test oracles.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .solver import (DEFAULT_BUDGET, DEFAULT_DOMAIN, Store, add_blocking_clause,
                     is_feasible, sat_patterns, set_atmost)

log = logging.getLogger(__name__)

__all__ = [
    "Mcs", "NotInfeasible", "MinimalityViolation", "mcs_enumerate", "mcs_brute_force",
    "mus_brute_force", "minimal_hitting_sets", "mus_hitting_check", "sort_key",
]


class NotInfeasible(ValueError):
    """hard + soft is feasible, so there is nothing to correct."""


class MinimalityViolation(AssertionError):
    """A candidate failed the correction/minimality re-check (internal error)."""


@dataclass(frozen=True)
class Mcs:
    indices: frozenset  # positions in the soft list
    constraints: tuple

    @property
    def lines(self) -> tuple:
        return tuple(sorted({c.label.line for c in self.constraints}))

    @property
    def cardinality(self) -> int:
        return len(self.indices)

    def __str__(self):
        return "{" + ",".join(map(str, self.lines)) + "}"


def sort_key(m: Mcs):
    return (m.cardinality, m.lines, tuple(sorted(m.indices)))


def _make(soft, idx) -> Mcs:
    idx = frozenset(idx)
    return Mcs(idx, tuple(soft[i] for i in sorted(idx)))


def _feasible(hard, soft_on, domains, default_domain, budget) -> bool:
    st = Store.build(list(hard) + list(soft_on), (), domains, default_domain)
    return is_feasible(st, budget).feasible


def mcs_enumerate(hard: Sequence, soft: Sequence, mcs_bound: int, domains: Optional[dict] = None,
                  default_domain=DEFAULT_DOMAIN, budget: int = DEFAULT_BUDGET,
                  check_minimality: bool = True) -> list:
    """All MCSs of ``soft`` (relative to ``hard``) with at most ``mcs_bound`` members."""
    if mcs_bound < 1:
        raise ValueError("mcs_bound must be >= 1")
    soft = list(soft)
    if _feasible(hard, soft, domains, default_domain, budget):
        raise NotInfeasible("hard and soft constraints are jointly feasible")
    store = Store.build(hard, soft, domains, default_domain)
    sels = frozenset(store.selectors)
    found = []
    for k in range(1, min(mcs_bound, len(soft)) + 1):
        store.atmost = None
        if not is_feasible(store, budget).feasible:
            break  # every correction set is already blocked
        layer = store.copy()
        set_atmost(layer, sels, k)
        while True:
            v = is_feasible(layer, budget)
            if not v.feasible:
                break
            off = sels - v.selectors
            m = _make(soft, (s - 1 for s in off))
            if check_minimality:
                _verify(hard, soft, m, domains, default_domain, budget)
            log.debug("layer %d: MCS %s", k, m)
            found.append(m)
            add_blocking_clause(layer, off)
            add_blocking_clause(store, off)
    return sorted(found, key=sort_key)


def _verify(hard, soft, m: Mcs, domains, default_domain, budget):
    rest = [c for i, c in enumerate(soft) if i not in m.indices]
    if not _feasible(hard, rest, domains, default_domain, budget):
        raise MinimalityViolation(f"{m} does not correct the system")
    for i in m.indices:
        if _feasible(hard, rest + [soft[i]], domains, default_domain, budget):
            raise MinimalityViolation(f"{m} is not minimal: member {i} can be kept")


# -- oracles -----------------------------------------------------------------

def _patterns(hard, soft, domains, default_domain):
    if len(soft) > 16:
        raise ValueError("brute-force oracles accept at most 16 soft constraints")
    st = Store.build(hard, soft, domains, default_domain)
    bits, _ = sat_patterns(st)
    return np.unique(bits)


def _sat(U, on_mask: int) -> bool:
    return bool(np.any((U & on_mask) == on_mask))


def _mask(idx) -> int:
    m = 0
    for i in idx:
        m |= 1 << i
    return m


def mcs_brute_force(hard, soft, bound: int, domains=None, default_domain=DEFAULT_DOMAIN) -> list:
    """Every subset by ascending size, checked against both MCS conditions."""
    soft = list(soft)
    n = len(soft)
    U = _patterns(hard, soft, domains, default_domain)
    full = (1 << n) - 1
    out = []
    for size in range(0, min(bound, n) + 1):
        for idx in itertools.combinations(range(n), size):
            rest = full & ~_mask(idx)
            if not _sat(U, rest):
                continue
            if all(not _sat(U, rest | (1 << i)) for i in idx):
                out.append(_make(soft, idx))
    return sorted(out, key=sort_key)


def mus_brute_force(hard, soft, domains=None, default_domain=DEFAULT_DOMAIN) -> list:
    soft = list(soft)
    n = len(soft)
    U = _patterns(hard, soft, domains, default_domain)
    out = []
    for size in range(0, n + 1):
        for idx in itertools.combinations(range(n), size):
            m = _mask(idx)
            if _sat(U, m):
                continue
            if all(_sat(U, m & ~(1 << i)) for i in idx):
                out.append(frozenset(idx))
    return out


def minimal_hitting_sets(family, universe) -> list:
    """Irreducible hitting sets of ``family`` over ``universe`` (exhaustive)."""
    family = [frozenset(s) for s in family]
    universe = sorted(universe)
    out = []
    for size in range(0, len(universe) + 1):
        for cand in itertools.combinations(universe, size):
            if mus_hitting_check(family, cand):
                out.append(frozenset(cand))
    return out


def mus_hitting_check(mcs_family, candidate) -> bool:
    """True iff ``candidate`` hits every set and no member can be dropped."""
    cand = frozenset(candidate)
    family = [frozenset(s) for s in mcs_family]
    if not all(s & cand for s in family):
        return False
    return all(any(not (s & (cand - {c})) for s in family) for c in cand)
