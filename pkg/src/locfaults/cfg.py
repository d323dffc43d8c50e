"""Control-flow DAG of a loop-free program.

Nodes keep source-level (unversioned) expressions; dynamic single assignment
versions are assigned lazily by whoever walks a path (see ``localize``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .lang import Assign, Assume, Decl, IfElse, Linear, Program, While, eval_bool, format_bexpr, linearize

__all__ = [
    "PreNode", "ConditionNode", "AssignBlock", "GuardNode", "PostNode", "Cfg",
    "build_cfg", "paths_count", "iter_paths", "to_dot", "run_concrete",
]


@dataclass(frozen=True)
class PreNode:
    id: int
    cond: object
    line: int
    next: int


@dataclass(frozen=True)
class ConditionNode:
    id: int
    cond: object
    line: int
    left: int  # taken when cond holds
    right: int


@dataclass(frozen=True)
class AssignBlock:
    id: int
    assigns: tuple  # ((target name, Linear, line), ...)
    next: int

    @property
    def lines(self):
        return tuple(a[2] for a in self.assigns)


@dataclass(frozen=True)
class GuardNode:
    """``assume`` left by loop unrolling; a failing guard cuts the path."""

    id: int
    cond: object
    line: int
    next: int


@dataclass(frozen=True)
class PostNode:
    id: int
    cond: object
    line: int


@dataclass(frozen=True)
class Cfg:
    root: int
    sink: int
    nodes: tuple  # indexed by id
    program: Program

    def __getitem__(self, i):
        return self.nodes[i]

    def successors(self, i) -> tuple:
        n = self.nodes[i]
        if isinstance(n, ConditionNode):
            return (n.left, n.right)
        if isinstance(n, PostNode):
            return ()
        return (n.next,)

    @property
    def conditions(self):
        return [n for n in self.nodes if isinstance(n, ConditionNode)]


class _Builder:
    """Builds backwards.  A continuation is ``(pending assigns, next id)``: the
    assignments are kept unflushed so that the trailing assignments of each
    branch fuse with the statements after the join into one maximal block."""

    def __init__(self):
        self.nodes = []
        self.blocks = {}  # (assigns, next) -> id, shared between branches

    def add(self, cls, *args):
        nid = len(self.nodes)
        self.nodes.append(cls(nid, *args))
        return nid

    def block(self, stmts, cont: tuple) -> tuple:
        pending, nxt = cont
        for s in reversed(stmts):
            if isinstance(s, Assign):
                pending = ((s.target, linearize(s.expr, s.line), s.line),) + pending
            elif isinstance(s, Decl):
                continue
            elif isinstance(s, IfElse):
                left = self.flush(*self.block(s.then, (pending, nxt)))
                right = self.flush(*self.block(s.orelse, (pending, nxt)))
                nxt, pending = self.add(ConditionNode, s.cond, s.line, left, right), ()
            elif isinstance(s, Assume):
                nxt = self.add(GuardNode, s.cond, s.line, self.flush(pending, nxt))
                pending = ()
            elif isinstance(s, While):
                raise ValueError(f"line {s.line}: unroll loops before building the CFG")
            else:
                raise TypeError(s)
        return pending, nxt

    def flush(self, pending, nxt) -> int:
        if not pending:
            return nxt
        key = (pending, nxt)
        if key not in self.blocks:
            self.blocks[key] = self.add(AssignBlock, pending, nxt)
        return self.blocks[key]


def build_cfg(program: Program) -> Cfg:
    b = _Builder()
    sink = b.add(PostNode, program.post, program.post_line)
    entry = b.flush(*b.block(program.body, ((), sink)))
    root = b.add(PreNode, program.pre, program.pre_line, entry)
    return Cfg(root, sink, tuple(b.nodes), program)


def paths_count(cfg: Cfg) -> int:
    @lru_cache(maxsize=None)
    def count(i):
        succ = cfg.successors(i)
        return 1 if not succ else sum(count(j) for j in succ)
    return count(cfg.root)


def iter_paths(cfg: Cfg) -> Iterator[tuple]:
    """Reference DFS: every root-to-sink path as a tuple of node ids."""
    stack = [(cfg.root, (cfg.root,))]
    while stack:
        i, path = stack.pop()
        succ = cfg.successors(i)
        if not succ:
            yield path
            continue
        for j in reversed(succ):
            stack.append((j, path + (j,)))


def run_concrete(cfg: Cfg, env: dict, start: Optional[int] = None, flips=()) -> Optional[dict]:
    """Follow the concretely selected path from ``start`` (default: root).

    Returns the final environment, or None if a guard fails.
    """
    env = dict(env)
    i = cfg.root if start is None else start
    while True:
        n = cfg.nodes[i]
        if isinstance(n, PostNode):
            return env
        if isinstance(n, ConditionNode):
            taken = eval_bool(n.cond, env) != (n.line in flips)
            i = n.left if taken else n.right
        elif isinstance(n, AssignBlock):
            for target, lin, _ in n.assigns:
                env[target] = _eval_linear(lin, env)
            i = n.next
        elif isinstance(n, GuardNode):
            if not eval_bool(n.cond, env):
                return None
            i = n.next
        else:
            i = n.next


def _eval_linear(lin: Linear, env) -> int:
    return lin.const + sum(c * env[name] for name, c in lin.terms)


def _format_linear(lin: Linear) -> str:
    parts = [f"{c}*{n}" if c != 1 else n for n, c in lin.terms]
    if lin.const or not parts:
        parts.append(str(lin.const))
    return " + ".join(parts)


def to_dot(cfg: Cfg) -> str:
    """Graphviz rendering; labels carry line numbers and node kinds."""
    out = [f"digraph {cfg.program.name} {{", "  node [shape=box, fontname=monospace];"]
    for n in cfg.nodes:
        if isinstance(n, ConditionNode):
            label = f"{n.line}: if {format_bexpr(n.cond)}"
            shape = "diamond"
        elif isinstance(n, AssignBlock):
            label = "\\l".join(f"{ln}: {t} = {_format_linear(e)}" for t, e, ln in n.assigns) + "\\l"
            shape = "box"
        elif isinstance(n, GuardNode):
            label = f"{n.line}: assume {format_bexpr(n.cond)}"
            shape = "hexagon"
        elif isinstance(n, PreNode):
            label = f"{n.line}: pre {format_bexpr(n.cond)}"
            shape = "ellipse"
        else:
            label = f"{n.line}: post {format_bexpr(n.cond)}"
            shape = "ellipse"
        label = label.replace('"', '\\"')
        out.append(f'  n{n.id} [label="{label}", shape={shape}];')
    for n in cfg.nodes:
        if isinstance(n, ConditionNode):
            out.append(f'  n{n.id} -> n{n.left} [label="T"];')
            out.append(f'  n{n.id} -> n{n.right} [label="F"];')
        elif not isinstance(n, PostNode):
            out.append(f"  n{n.id} -> n{n.next};")
    out.append("}")
    return "\n".join(out) + "\n"
