"""Mini imperative language: lexer, recursive-descent parser, loop unrolling,
pretty-printer and a reference interpreter.

Grammar (EBNF)::

    program   = "prog" IDENT "(" [ param { "," param } ] ")" "{"
                "pre" bexpr ";" { stmt } "post" bexpr ";" "}" ;
    param     = "int" IDENT ;
    stmt      = "int" IDENT [ "=" expr ] ";"
              | IDENT "=" expr ";"
              | "if" "(" bexpr ")" block [ "else" ( block | ifstmt ) ]
              | "while" "(" bexpr ")" block
              | "assume" bexpr ";" ;
    block     = "{" { stmt } "}" ;
    bexpr     = conj { "||" conj } ;
    conj      = unary { "&&" unary } ;
    unary     = "!" unary | "true" | "false" | "(" bexpr ")" | expr relop expr ;
    relop     = "==" | "!=" | "<" | "<=" | ">" | ">=" ;
    expr      = term { ( "+" | "-" ) term } ;
    term      = factor { "*" factor } ;
    factor    = NUMBER | IDENT | "-" factor | "(" expr ")" ;

Only integers exist.  Products must have a constant side; ``/`` and ``%``
are lexed only to be rejected.  Comments are ``// ...`` and ``/* ... */``.
``assume`` is produced by :func:`unroll` (loop-bound guard) and is accepted
by the parser so unrolled programs round-trip.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "LangError", "ImpSyntaxError", "UndeclaredVariable", "NonLinearExpression",
    "LoopBoundExceeded", "Num", "Var", "Neg", "BinOp", "BoolConst", "Cmp", "Not",
    "And", "Or", "Assign", "IfElse", "While", "Assume", "Decl", "Program", "Linear",
    "parse", "unroll", "linearize", "pretty", "execute", "eval_expr",
    "eval_bool", "has_loops", "iter_stmts",
]


class LangError(Exception):
    """Base class for frontend errors."""


class ImpSyntaxError(LangError):
    def __init__(self, msg, line, col):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class UndeclaredVariable(LangError):
    def __init__(self, name, line):
        super().__init__(f"{line}: undeclared variable {name!r}")
        self.name = name
        self.line = line


class NonLinearExpression(LangError):
    def __init__(self, line, detail="nonlinear term"):
        super().__init__(f"{line}: {detail}")
        self.line = line


class LoopBoundExceeded(LangError):
    """Raised when execution reaches a failing loop-bound guard."""

    def __init__(self, line):
        super().__init__(f"{line}: loop unrolling bound exceeded")
        self.line = line


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, BinOp]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # '==', '!=', '<', '<=', '>', '>='
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: "BExpr"


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class Or:
    left: "BExpr"
    right: "BExpr"


BExpr = Union[BoolConst, Cmp, Not, And, Or]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    line: int
    declares: bool = False  # written as ``int x = e;``


@dataclass(frozen=True)
class IfElse:
    cond: BExpr
    then: tuple
    orelse: tuple
    line: int
    else_line: Optional[int] = None  # line of the ``else`` keyword, for pretty-printing


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: tuple
    line: int


@dataclass(frozen=True)
class Assume:
    cond: BExpr
    line: int


@dataclass(frozen=True)
class Decl:
    """Bare ``int x;``: declares a local initialised to 0; no runtime effect."""

    name: str
    line: int


Stmt = Union[Assign, IfElse, While, Assume, Decl]


@dataclass(frozen=True)
class Program:
    name: str
    inputs: tuple  # input names, in declaration order
    pre: BExpr
    body: tuple
    post: BExpr
    locals: tuple = ()  # names declared with ``int x;`` or ``int x = e;``
    line: int = 1
    pre_line: int = 1
    post_line: int = 1
    end_line: int = 1

    @property
    def variables(self):
        return self.inputs + self.locals


@dataclass(frozen=True)
class Linear:
    """Linear form: sum of coef*name plus const, with canonical term order."""

    terms: tuple = ()  # ((name, coef), ...) sorted by name, no zero coefs
    const: int = 0

    @staticmethod
    def of(coefs: Mapping[str, int], const: int = 0) -> "Linear":
        return Linear(tuple(sorted((n, c) for n, c in coefs.items() if c != 0)), const)

    def as_dict(self):
        return dict(self.terms)

    def __add__(self, other):
        d = self.as_dict()
        for n, c in other.terms:
            d[n] = d.get(n, 0) + c
        return Linear.of(d, self.const + other.const)

    def scale(self, k):
        return Linear.of({n: c * k for n, c in self.terms}, self.const * k)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)


# -- lexer -------------------------------------------------------------------

KEYWORDS = {"prog", "int", "pre", "post", "if", "else", "while", "assume", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){};,])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'kw', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(source: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ImpSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "bcomment":
            nls = text.count("\n")
            if nls:
                line += nls
                line_start = pos + text.rfind("\n") + 1
        elif kind in ("ws", "lcomment"):
            pass
        elif kind == "ident" and text in KEYWORDS:
            tokens.append(Token("kw", text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, source):
        self.tokens = tokenize(source)
        self.pos = 0
        self.declared = set()
        self.locals = []
        self.stmt_lines = set()

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ImpSyntaxError(msg, tok.line, tok.col)

    def at(self, text):
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {shown!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, got {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def claim_line(self, tok):
        if tok.line in self.stmt_lines:
            raise self.error("one statement per line is required", tok)
        self.stmt_lines.add(tok.line)

    def program(self) -> Program:
        start = self.expect("prog")
        name = self.ident().text
        self.expect("(")
        inputs = []
        if not self.at(")"):
            while True:
                self.expect("int")
                tok = self.ident()
                if tok.text in self.declared:
                    raise self.error(f"duplicate declaration of {tok.text!r}", tok)
                self.declared.add(tok.text)
                inputs.append(tok.text)
                if not self.at(","):
                    break
                self.expect(",")
        self.expect(")")
        self.expect("{")
        pre_tok = self.expect("pre")
        pre = self.bexpr()
        self.expect(";")
        body = []
        while not self.at("post"):
            if self.tok.kind == "eof":
                raise self.error("missing 'post' clause")
            body.append(self.stmt())
        post_tok = self.expect("post")
        post = self.bexpr()
        self.expect(";")
        end = self.expect("}")
        if self.tok.kind != "eof":
            raise self.error("trailing input after program")
        return Program(name, tuple(inputs), pre, tuple(body), post, tuple(self.locals),
                       start.line, pre_tok.line, post_tok.line, end.line)

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self):
        tok = self.tok
        if self.at("int"):
            self.pos += 1
            name_tok = self.ident()
            if name_tok.text in self.declared:
                raise self.error(f"duplicate declaration of {name_tok.text!r}", name_tok)
            if self.at("="):
                self.expect("=")
                expr = self.expr()
                self.expect(";")
                self.declared.add(name_tok.text)
                self.locals.append(name_tok.text)
                self.claim_line(tok)
                return Assign(name_tok.text, expr, tok.line, declares=True)
            self.expect(";")
            self.declared.add(name_tok.text)
            self.locals.append(name_tok.text)
            return Decl(name_tok.text, tok.line)
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.pos += 1
            self.claim_line(tok)
            self.expect("(")
            cond = self.bexpr()
            self.expect(")")
            return While(cond, self.block(), tok.line)
        if self.at("assume"):
            self.pos += 1
            self.claim_line(tok)
            cond = self.bexpr()
            self.expect(";")
            return Assume(cond, tok.line)
        if tok.kind == "ident":
            self.pos += 1
            if tok.text not in self.declared:
                raise UndeclaredVariable(tok.text, tok.line)
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            self.claim_line(tok)
            return Assign(tok.text, expr, tok.line)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def if_stmt(self):
        tok = self.expect("if")
        self.claim_line(tok)
        self.expect("(")
        cond = self.bexpr()
        self.expect(")")
        then = self.block()
        orelse, else_line = (), None
        if self.at("else"):
            else_line = self.expect("else").line
            orelse = (self.if_stmt(),) if self.at("if") else self.block()
        return IfElse(cond, then, orelse, tok.line, else_line)

    # boolean expressions
    def bexpr(self):
        node = self.conj()
        while self.at("||"):
            self.pos += 1
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.bunary()
        while self.at("&&"):
            self.pos += 1
            node = And(node, self.bunary())
        return node

    def bunary(self):
        if self.at("!"):
            self.pos += 1
            return Not(self.bunary())
        if self.at("true") or self.at("false"):
            value = self.tok.text == "true"
            self.pos += 1
            return BoolConst(value)
        if self.at("("):
            # either a parenthesised boolean or the start of an arithmetic comparison
            save = self.pos
            self.pos += 1
            try:
                inner = self.bexpr()
                self.expect(")")
                if not self._at_relop() and not self._at_arith():
                    return inner
            except ImpSyntaxError:
                pass
            self.pos = save
        line = self.tok.line
        left = self.expr()
        if not self._at_relop():
            raise self.error("expected comparison operator")
        op = self.tok.text
        self.pos += 1
        right = self.expr()
        self.check_linear(left, line)
        self.check_linear(right, line)
        return Cmp(op, left, right)

    def _at_relop(self):
        return self.tok.kind == "op" and self.tok.text in ("==", "!=", "<", "<=", ">", ">=")

    def _at_arith(self):
        return self.tok.kind == "op" and self.tok.text in ("+", "-", "*", "/", "%")

    # arithmetic
    def expr(self):
        line = self.tok.line
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        self.check_linear(node, line)
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "%"):
            if self.tok.text != "*":
                raise NonLinearExpression(self.tok.line, f"operator {self.tok.text!r} is not supported")
            self.pos += 1
            node = BinOp("*", node, self.factor())
        return node

    def factor(self):
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(int(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if tok.text not in self.declared:
                raise UndeclaredVariable(tok.text, tok.line)
            return Var(tok.text)
        if self.at("-"):
            self.pos += 1
            return Neg(self.factor())
        if self.at("("):
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in expression")

    @staticmethod
    def check_linear(expr, line):
        linearize(expr, line)


def parse(source: str) -> Program:
    """Parse and scope-check a program."""
    return _Parser(source).program()


def linearize(expr: Expr, line: int = 0) -> Linear:
    """Fold an arithmetic expression into a :class:`Linear` form."""
    if isinstance(expr, Num):
        return Linear((), expr.value)
    if isinstance(expr, Var):
        return Linear(((expr.name, 1),), 0)
    if isinstance(expr, Neg):
        return -linearize(expr.operand, line)
    if isinstance(expr, BinOp):
        left = linearize(expr.left, line)
        right = linearize(expr.right, line)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            if not left.terms:
                return right.scale(left.const)
            if not right.terms:
                return left.scale(right.const)
            raise NonLinearExpression(line, "product of two variables")
    raise TypeError(f"not an arithmetic expression: {expr!r}")


# -- unrolling ---------------------------------------------------------------

def has_loops(stmts) -> bool:
    return any(isinstance(s, While) for s in iter_stmts(stmts))


def iter_stmts(stmts) -> Iterator:
    for s in stmts:
        yield s
        if isinstance(s, IfElse):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def unroll(program: Program, bound: int) -> Program:
    """Replace every loop by ``bound`` nested conditionals.

    The innermost copy ends with ``assume !cond`` so that executions needing
    more than ``bound`` iterations are reported instead of truncated.
    """
    if bound < 1:
        raise ValueError("unroll bound must be >= 1")
    return replace(program, body=_unroll_block(program.body, bound))


def _unroll_block(stmts, bound):
    out = []
    for s in stmts:
        if isinstance(s, While):
            out.extend(_unroll_loop(s.cond, _unroll_block(s.body, bound), s.line, bound))
        elif isinstance(s, IfElse):
            out.append(replace(s, then=_unroll_block(s.then, bound),
                               orelse=_unroll_block(s.orelse, bound)))
        else:
            out.append(s)
    return tuple(out)


def _unroll_loop(cond, body, line, depth):
    if depth == 0:
        return (Assume(Not(cond), line),)
    return (IfElse(cond, body + _unroll_loop(cond, body, line, depth - 1), (), line),)


# -- pretty-printing ---------------------------------------------------------

_PREC = {"||": 1, "&&": 2}


def format_expr(e, prec=0) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-{format_expr(e.operand, 3)}"
    if isinstance(e, BinOp):
        p = 2 if e.op == "*" else 1
        # left-assoc: right operand needs strictly higher precedence
        s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(e)


def format_bexpr(b, prec=0) -> str:
    if isinstance(b, BoolConst):
        return "true" if b.value else "false"
    if isinstance(b, Cmp):
        return f"{format_expr(b.left)} {b.op} {format_expr(b.right)}"
    if isinstance(b, Not):
        return f"!({format_bexpr(b.operand)})"
    if isinstance(b, (And, Or)):
        op = "&&" if isinstance(b, And) else "||"
        p = _PREC[op]
        s = f"{format_bexpr(b.left, p)} {op} {format_bexpr(b.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(b)


class _Printer:
    """Emits source text, padding with blank lines so statements land on their
    recorded line numbers whenever those are increasing."""

    def __init__(self):
        self.lines = []

    def emit(self, text, line=None, indent=0):
        if line is not None:
            while len(self.lines) + 1 < line:
                self.lines.append("")
        self.lines.append("  " * indent + text)

    def block(self, stmts, indent):
        for s in stmts:
            self.stmt(s, indent)

    def stmt(self, s, indent):
        if isinstance(s, Assign):
            prefix = "int " if s.declares else ""
            self.emit(f"{prefix}{s.target} = {format_expr(s.expr)};", s.line, indent)
        elif isinstance(s, Assume):
            self.emit(f"assume {format_bexpr(s.cond)};", s.line, indent)
        elif isinstance(s, While):
            self.emit(f"while ({format_bexpr(s.cond)}) {{", s.line, indent)
            self.block(s.body, indent + 1)
            self.emit("}", None, indent)
        elif isinstance(s, Decl):
            self.emit(f"int {s.name};", s.line, indent)
        elif isinstance(s, IfElse):
            self.if_stmt(s, indent, "")
        else:
            raise TypeError(s)


    def if_stmt(self, s, indent, lead):
        self.emit(f"{lead}if ({format_bexpr(s.cond)}) {{", s.line, indent)
        self.block(s.then, indent + 1)
        rest = s.orelse
        if len(rest) == 1 and isinstance(rest[0], IfElse) and rest[0].line == s.else_line:
            self.if_stmt(rest[0], indent, "} else ")
            return
        if rest:
            self.emit("} else {", s.else_line, indent)
            self.block(rest, indent + 1)
        self.emit("}", None, indent)


def pretty(program: Program) -> str:
    pr = _Printer()
    params = ", ".join(f"int {n}" for n in program.inputs)
    pr.emit(f"prog {program.name}({params}) {{", program.line)
    pr.emit(f"pre {format_bexpr(program.pre)};", program.pre_line, 1)
    pr.block(program.body, 1)
    pr.emit(f"post {format_bexpr(program.post)};", program.post_line, 1)
    pr.emit("}", program.end_line)
    return "\n".join(pr.lines) + "\n"


# -- reference interpreter ---------------------------------------------------

def eval_expr(e, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -eval_expr(e.operand, env)
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, env), eval_expr(e.right, env)
        return a + b if e.op == "+" else a - b if e.op == "-" else a * b
    raise TypeError(e)


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def eval_bool(b, env) -> bool:
    if isinstance(b, BoolConst):
        return b.value
    if isinstance(b, Cmp):
        return _CMP[b.op](eval_expr(b.left, env), eval_expr(b.right, env))
    if isinstance(b, Not):
        return not eval_bool(b.operand, env)
    if isinstance(b, And):
        return eval_bool(b.left, env) and eval_bool(b.right, env)
    if isinstance(b, Or):
        return eval_bool(b.left, env) or eval_bool(b.right, env)
    raise TypeError(b)


def execute(program: Program, inputs: Mapping[str, int], flips: Sequence[int] = (),
            max_iterations: int = 100_000) -> dict:
    """Run ``program`` on ``inputs`` and return the final variable values.

    Conditions whose line is in ``flips`` take the opposite branch.  Loops run
    natively; ``assume`` failures raise :class:`LoopBoundExceeded`.
    """
    env = {name: 0 for name in program.locals}
    env.update({name: int(inputs[name]) for name in program.inputs})
    flips = frozenset(flips)
    _exec_block(program.body, env, flips, max_iterations)
    return env


def _exec_block(stmts, env, flips, max_iterations):
    for s in stmts:
        if isinstance(s, Assign):
            env[s.target] = eval_expr(s.expr, env)
        elif isinstance(s, IfElse):
            taken = eval_bool(s.cond, env) != (s.line in flips)
            _exec_block(s.then if taken else s.orelse, env, flips, max_iterations)
        elif isinstance(s, While):
            n = 0
            while eval_bool(s.cond, env) != (s.line in flips):
                n += 1
                if n > max_iterations:
                    raise LoopBoundExceeded(s.line)
                _exec_block(s.body, env, flips, max_iterations)
        elif isinstance(s, Assume):
            if not eval_bool(s.cond, env):
                raise LoopBoundExceeded(s.line)
        elif isinstance(s, Decl):
            pass
        else:
            raise TypeError(s)
