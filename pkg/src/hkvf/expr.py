"""Small expression language for metric factors and vector field components.

Grammar (precedence loosest to tightest; ^ is right associative and binds
tighter than unary minus, so -x^2 is -(x^2)):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | CONST | VAR | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

    VAR    = x, y, r, theta        CONST = pi, e
    FUNC   = exp, log, sin, cos, sqrt, abs, sign, atan2

``r`` and ``theta`` are rewritten to x,y form while parsing (r -> sqrt(x^2+y^2),
theta -> atan2(y, x), with r^2 folding to x^2 + y^2), so downstream code only
ever sees x and y.  ``sign`` and ``atan2`` exist mostly to support those
rewrites and the derivative of ``abs``.

Evaluation is numpy-vectorized over x, y arrays and raises EvalDomainError
instead of letting NaN or inf propagate.  Differentiation is symbolic with
light constant folding; evaluating a derivative matches central differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"at offset {offset}: {message}")
        self.offset = offset
        self.message = message


class UnknownIdentifier(ParseError):
    pass


class EvalDomainError(ArithmeticError):
    """An operation left its domain (log of a nonpositive number, division
    by zero, ...); raised instead of returning NaN."""

    def __init__(self, op: str, value):
        super().__init__(f"{op} applied outside its domain (operand {value})")
        self.op = op
        self.value = value


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Unary:
    op: str  # neg exp log sin cos sqrt abs sign
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^ atan2
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]

_UNARY_FUNCS = ("exp", "log", "sin", "cos", "sqrt", "abs", "sign")
_CONSTS = {"pi": math.pi, "e": math.e}

ZERO = Const(0.0)
ONE = Const(1.0)
X = Var("x")
Y = Var("y")


# -- smart constructors (light folding) --------------------------------------

def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def add(u: Expr, v: Expr) -> Expr:
    if _is_const(u) and _is_const(v):
        return Const(u.value + v.value)
    if _is_const(u, 0):
        return v
    if _is_const(v, 0):
        return u
    return Binary("+", u, v)


def sub(u: Expr, v: Expr) -> Expr:
    if _is_const(u) and _is_const(v):
        return Const(u.value - v.value)
    if _is_const(v, 0):
        return u
    if _is_const(u, 0):
        return neg(v)
    return Binary("-", u, v)


def mul(u: Expr, v: Expr) -> Expr:
    if _is_const(u) and _is_const(v):
        return Const(u.value * v.value)
    if _is_const(u, 0) or _is_const(v, 0):
        return ZERO
    if _is_const(u, 1):
        return v
    if _is_const(v, 1):
        return u
    return Binary("*", u, v)


def div(u: Expr, v: Expr) -> Expr:
    if _is_const(v) and v.value != 0:
        if _is_const(u):
            return Const(u.value / v.value)
        if v.value == 1:
            return u
    if _is_const(u, 0) and _is_const(v) and v.value != 0:
        return ZERO
    return Binary("/", u, v)


def pow_(u: Expr, v: Expr) -> Expr:
    if _is_const(v, 0):
        return ONE
    if _is_const(v, 1):
        return u
    if _is_const(u) and _is_const(v):
        try:
            out = float(u.value ** v.value)
        except (OverflowError, ValueError, ZeroDivisionError):
            return Binary("^", u, v)
        if math.isfinite(out) and not isinstance(out, complex):
            return Const(out)
        return Binary("^", u, v)
    # sqrt(w)^even -> w^(even/2); the radial rewrite relies on this so that
    # r^2 becomes x^2 + y^2 with no radical left behind
    if (_is_const(v) and isinstance(u, Unary) and u.op == "sqrt"
            and v.value == int(v.value) and int(v.value) % 2 == 0):
        return pow_(u.arg, Const(v.value / 2.0))
    return Binary("^", u, v)


def neg(u: Expr) -> Expr:
    if _is_const(u):
        return Const(-u.value)
    if isinstance(u, Unary) and u.op == "neg":
        return u.arg
    return Unary("neg", u)


def un(op: str, u: Expr) -> Expr:
    if op == "neg":
        return neg(u)
    if _is_const(u):
        fn = {"exp": math.exp, "log": math.log, "sin": math.sin,
              "cos": math.cos, "sqrt": math.sqrt, "abs": abs,
              "sign": lambda t: float(np.sign(t))}[op]
        try:
            return Const(float(fn(u.value)))
        except (ValueError, OverflowError):
            pass  # keep the node; evaluation will raise a domain error
    return Unary(op, u)


def atan2(u: Expr, v: Expr) -> Expr:
    if _is_const(u) and _is_const(v) and (u.value != 0 or v.value != 0):
        return Const(math.atan2(u.value, v.value))
    return Binary("atan2", u, v)


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            off = n - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", off)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)
        self.next()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                e = add(e, rhs) if val == "+" else sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                e = mul(e, rhs) if val == "*" else div(e, rhs)
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return pow_(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.next()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "ident":
            if val in _CONSTS:
                return Const(_CONSTS[val])
            if val == "x":
                return X
            if val == "y":
                return Y
            if val == "r":
                # kept symbolic until pow() can fold r^2; see _Radial
                return _RADIAL
            if val == "theta":
                return atan2(Y, X)
            if val in _UNARY_FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return un(val, arg)
            if val == "atan2":
                self.expect_op("(")
                a = self.expr()
                self.expect_op(",")
                b = self.expr()
                self.expect_op(")")
                return atan2(a, b)
            raise UnknownIdentifier(f"unknown identifier {val!r}", off)
        raise ParseError(f"unexpected {val!r}" if val else "unexpected end of input", off)


# r as sqrt(x^2 + y^2); pow_ folds sqrt(.)^2 so "r^2" has no radical in it
_RADIAL = un("sqrt", add(pow_(X, Const(2.0)), pow_(Y, Const(2.0))))


def parse(src: str) -> Expr:
    """Parse source into an AST over the variables x and y."""
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    return _Parser(src).parse()


# -- evaluation ---------------------------------------------------------------

def _first_bad(arr, mask):
    flat = np.broadcast_to(arr, np.asarray(mask).shape)[mask]
    return float(flat.flat[0]) if flat.size else float("nan")


def _ev(e: Expr, x, y):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Unary):
        u = _ev(e.arg, x, y)
        op = e.op
        if op == "neg":
            return -u
        if op == "exp":
            out = np.exp(u)
            bad = ~np.isfinite(np.asarray(out))
            if np.any(bad):
                raise EvalDomainError("exp", _first_bad(u, bad))
            return out
        if op == "log":
            bad = np.asarray(u) <= 0
            if np.any(bad):
                raise EvalDomainError("log", _first_bad(u, bad))
            return np.log(u)
        if op == "sin":
            return np.sin(u)
        if op == "cos":
            return np.cos(u)
        if op == "sqrt":
            bad = np.asarray(u) < 0
            if np.any(bad):
                raise EvalDomainError("sqrt", _first_bad(u, bad))
            return np.sqrt(u)
        if op == "abs":
            return np.abs(u)
        if op == "sign":
            return np.sign(u)
        raise ValueError(f"unknown unary op {op!r}")
    if isinstance(e, Binary):
        u = _ev(e.left, x, y)
        v = _ev(e.right, x, y)
        op = e.op
        if op == "+":
            return u + v
        if op == "-":
            return u - v
        if op == "*":
            return u * v
        if op == "/":
            bad = np.asarray(v) == 0
            if np.any(bad):
                raise EvalDomainError("divide", 0.0)
            return u / v
        if op == "^":
            with np.errstate(all="ignore"):
                out = np.power(u, v)
            bad = ~np.isfinite(np.asarray(out))
            if np.any(bad):
                raise EvalDomainError("pow", _first_bad(u, bad))
            return out
        if op == "atan2":
            both = (np.asarray(u) == 0) & (np.asarray(v) == 0)
            if np.any(both):
                raise EvalDomainError("atan2", 0.0)
            return np.arctan2(u, v)
        raise ValueError(f"unknown binary op {op!r}")
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, x, y):
    """Evaluate at x, y (scalars or same-shape arrays)."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    with np.errstate(all="ignore"):
        out = _ev(e, xa, ya)
    if np.isscalar(out) or np.asarray(out).ndim == 0:
        return float(out)
    return np.asarray(out, dtype=float)


# -- differentiation ---------------------------------------------------------

def diff(e: Expr, var: str) -> Expr:
    """Partial derivative with respect to "x" or "y", folded lightly."""
    if var not in ("x", "y"):
        raise ValueError("var must be 'x' or 'y'")
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Unary):
        du = diff(e.arg, var)
        u = e.arg
        op = e.op
        if op == "neg":
            return neg(du)
        if op == "exp":
            return mul(un("exp", u), du)
        if op == "log":
            return div(du, u)
        if op == "sin":
            return mul(un("cos", u), du)
        if op == "cos":
            return neg(mul(un("sin", u), du))
        if op == "sqrt":
            return div(du, mul(Const(2.0), un("sqrt", u)))
        if op == "abs":
            return mul(un("sign", u), du)
        if op == "sign":
            return ZERO  # derivative almost everywhere
        raise ValueError(f"unknown unary op {op!r}")
    if isinstance(e, Binary):
        u, v = e.left, e.right
        du, dv = diff(u, var), diff(v, var)
        op = e.op
        if op == "+":
            return add(du, dv)
        if op == "-":
            return sub(du, dv)
        if op == "*":
            return add(mul(du, v), mul(u, dv))
        if op == "/":
            return div(sub(mul(du, v), mul(u, dv)), mul(v, v))
        if op == "^":
            if isinstance(v, Const):
                return mul(mul(v, pow_(u, Const(v.value - 1.0))), du)
            if isinstance(u, Const):
                return mul(mul(un("log", u), pow_(u, v)), dv)
            # u^v = exp(v log u)
            return mul(pow_(u, v), add(mul(dv, un("log", u)), div(mul(v, du), u)))
        if op == "atan2":
            denom = add(mul(u, u), mul(v, v))
            return div(sub(mul(v, du), mul(u, dv)), denom)
        raise ValueError(f"unknown binary op {op!r}")
    raise TypeError(f"not an expression node: {e!r}")


# -- printing -----------------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _fmt(e: Expr):
    """Return (text, precedence level)."""
    if isinstance(e, Const):
        if e.value < 0 or (e.value == 0 and math.copysign(1, e.value) < 0):
            return f"-{abs(e.value)!r}", _LEVEL_UNARY
        return repr(e.value), _LEVEL_ATOM
    if isinstance(e, Var):
        return e.name, _LEVEL_ATOM
    if isinstance(e, Unary):
        if e.op == "neg":
            body, lvl = _fmt(e.arg)
            if lvl < _LEVEL_UNARY:
                body = f"({body})"
            return f"-{body}", _LEVEL_UNARY
        body, _ = _fmt(e.arg)
        return f"{e.op}({body})", _LEVEL_ATOM
    if isinstance(e, Binary):
        if e.op == "atan2":
            a, _ = _fmt(e.left)
            b, _ = _fmt(e.right)
            return f"atan2({a}, {b})", _LEVEL_ATOM
        if e.op in "+-":
            lt, ll = _fmt(e.left)
            rt, rl = _fmt(e.right)
            if ll < _LEVEL_ADD:
                lt = f"({lt})"
            # parenthesize an add-level right operand so the (left
            # associative) reparse rebuilds the identical tree
            if rl <= _LEVEL_ADD:
                rt = f"({rt})"
            return f"{lt} {e.op} {rt}", _LEVEL_ADD
        if e.op in "*/":
            lt, ll = _fmt(e.left)
            rt, rl = _fmt(e.right)
            if ll < _LEVEL_MUL:
                lt = f"({lt})"
            if rl <= _LEVEL_MUL:
                rt = f"({rt})"
            return f"{lt}{e.op}{rt}", _LEVEL_MUL
        if e.op == "^":
            lt, ll = _fmt(e.left)
            rt, rl = _fmt(e.right)
            if ll < _LEVEL_ATOM:
                lt = f"({lt})"
            if rl < _LEVEL_UNARY:
                rt = f"({rt})"
            return f"{lt}^{rt}", _LEVEL_POW
    raise TypeError(f"not an expression node: {e!r}")


def to_source(e: Expr) -> str:
    """Source text that parses back to an equivalent AST."""
    return _fmt(e)[0]


def free_vars(e: Expr) -> set:
    if isinstance(e, Const):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)
