"""Expression engine over complex chart variables with z_k and conj(z_k)
treated as independent (Wirtinger calculus).

Grammar (parameters are bound to real values at parse time):

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ['-'] base ('^' signed-integer)?
    base   := number | 'i' | 'z'K | 'zb'K | name | 'normsq(z)' | '(' expr ')'

'z1'..'zn' are the chart variables, 'zb1'..'zbn' their conjugates, 'i' the
imaginary unit, 'normsq(z)' sugar for z1*zb1 + ... + zn*zbn. Rational
expressions are supported; transcendental functions are not.

Jets carry the value, first derivatives d/dz_i and d/dzbar_j, and the mixed
second derivatives d^2/dz_i dzbar_j. Pure second derivatives in z alone are
provided separately for holomorphic expressions (holo_jet), which is what
map differentials need.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    """Syntax or name error in an expression string (carries the position)."""


class EvaluationError(ArithmeticError):
    """Runtime evaluation failure, e.g. division by zero at the point."""


class NotHolomorphicError(ValueError):
    """Expression contains conjugated variables where holomorphy is required."""


class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: complex


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based; prints as z{index+1}


@dataclass(frozen=True)
class BarVar(Expr):
    index: int


@dataclass(frozen=True)
class Param(Expr):
    name: str
    value: float


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"\s*(?:(?P<num>{_NUMBER})|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")
_VAR_RE = re.compile(r"\Az(\d+)\Z")
_BARVAR_RE = re.compile(r"\Azb(\d+)\Z")


class _Parser:
    def __init__(self, text: str, n: int, params: dict[str, float]):
        self.text = text
        self.n = n
        self.params = params
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(f"{message} at position {self.pos}: {self.text!r}")

    def peek(self):
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:].strip()
            if rest:
                raise self.error(f"unexpected character {rest[0]!r}")
            return None, None, self.pos
        kind = m.lastgroup
        return kind, m.group(kind), m.end()

    def next(self):
        kind, value, end = self.peek()
        if kind is not None:
            self.pos = end
        return kind, value

    def expect_op(self, op: str) -> None:
        kind, value = self.next()
        if kind != "op" or value != op:
            raise self.error(f"expected {op!r}, got {value!r}")

    def parse(self) -> Expr:
        e = self.expr()
        kind, value, _ = self.peek()
        if kind is not None:
            raise self.error(f"unexpected trailing token {value!r}")
        return e

    def expr(self) -> Expr:
        kind, value, end = self.peek()
        if kind == "op" and value == "-":
            self.pos = end
            e: Expr = Neg(self.term())
        else:
            e = self.term()
        while True:
            kind, value, end = self.peek()
            if kind == "op" and value in "+-":
                self.pos = end
                rhs = self.term()
                e = Add(e, rhs) if value == "+" else Sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, value, end = self.peek()
            if kind == "op" and value in "*/":
                self.pos = end
                rhs = self.factor()
                e = Mul(e, rhs) if value == "*" else Div(e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        kind, value, end = self.peek()
        if kind == "op" and value == "-":
            self.pos = end
            return Neg(self.factor())
        e = self.base()
        kind, value, end = self.peek()
        if kind == "op" and value == "^":
            self.pos = end
            e = Pow(e, self.integer())
        return e

    def integer(self) -> int:
        sign = 1
        kind, value, end = self.peek()
        if kind == "op" and value == "-":
            self.pos = end
            sign = -1
        kind, value = self.next()
        if kind != "num" or any(c in value for c in ".eE"):
            raise self.error(f"expected integer exponent, got {value!r}")
        return sign * int(value)

    def base(self) -> Expr:
        kind, value = self.next()
        if kind == "num":
            return Const(complex(float(value)))
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "name":
            return self.name(value)
        raise self.error(f"unexpected token {value!r}")

    def name(self, word: str) -> Expr:
        if word == "i":
            return Const(1j)
        if word == "normsq":
            self.expect_op("(")
            kind, value = self.next()
            if kind != "name" or value != "z":
                raise self.error("normsq expects the argument 'z'")
            self.expect_op(")")
            e: Expr = Mul(Var(0), BarVar(0))
            for k in range(1, self.n):
                e = Add(e, Mul(Var(k), BarVar(k)))
            return e
        m = _VAR_RE.match(word)
        if m:
            return Var(self.var_index(int(m.group(1))))
        m = _BARVAR_RE.match(word)
        if m:
            return BarVar(self.var_index(int(m.group(1))))
        if word in self.params:
            return Param(word, float(self.params[word]))
        raise self.error(f"unknown identifier {word!r}")

    def var_index(self, k: int) -> int:
        if not 1 <= k <= self.n:
            raise self.error(f"variable index {k} out of range 1..{self.n}")
        return k - 1


def parse(text: str, n: int, params: dict[str, float] | None = None) -> Expr:
    """Parse an expression string over n chart variables.

    Parameter names are bound to their (real) values at parse time, so the
    returned tree evaluates with no parameter bookkeeping.
    """
    return _Parser(text, n, dict(params or {})).parse()


def _const_text(c: complex) -> str:
    if c.imag == 0.0:
        return repr(c.real)
    if c.real == 0.0 and c.imag == 1.0:
        return "i"
    if c.real == 0.0:
        return f"{c.imag!r}*i"
    return f"({c.real!r} + {c.imag!r}*i)"


def to_text(e: Expr) -> str:
    """Render an expression; parse(to_text(e)) reproduces the tree."""
    def go(node: Expr, prec: int) -> str:
        if isinstance(node, Const):
            s = _const_text(node.value)
            return f"({s})" if prec > 3 and ("+" in s[1:] or s.startswith("-")) else s
        if isinstance(node, Var):
            return f"z{node.index + 1}"
        if isinstance(node, BarVar):
            return f"zb{node.index + 1}"
        if isinstance(node, Param):
            return node.name
        if isinstance(node, Neg):
            s = "-" + go(node.arg, 3)
            return f"({s})" if prec > 1 else s
        if isinstance(node, (Add, Sub)):
            op = " + " if isinstance(node, Add) else " - "
            s = go(node.left, 1) + op + go(node.right, 2)
            return f"({s})" if prec > 1 else s
        if isinstance(node, (Mul, Div)):
            op = "*" if isinstance(node, Mul) else "/"
            s = go(node.left, 2) + op + go(node.right, 3)
            return f"({s})" if prec > 2 else s
        if isinstance(node, Pow):
            s = go(node.base, 4) + "^" + str(node.exponent)
            return f"({s})" if prec > 3 else s
        raise TypeError(f"unknown node {node!r}")
    return go(e, 0)


def conjugate(e: Expr) -> Expr:
    """Structural conjugate: swaps z_k with zb_k and conjugates constants."""
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, Var):
        return BarVar(e.index)
    if isinstance(e, BarVar):
        return Var(e.index)
    if isinstance(e, Param):
        return e
    if isinstance(e, Neg):
        return Neg(conjugate(e.arg))
    if isinstance(e, Add):
        return Add(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Sub):
        return Sub(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Mul):
        return Mul(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Div):
        return Div(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Pow):
        return Pow(conjugate(e.base), e.exponent)
    raise TypeError(f"unknown node {e!r}")


def is_holomorphic(e: Expr) -> bool:
    """True when the tree contains no conjugated-variable node."""
    if isinstance(e, BarVar):
        return False
    if isinstance(e, (Const, Var, Param)):
        return True
    if isinstance(e, Neg):
        return is_holomorphic(e.arg)
    if isinstance(e, Pow):
        return is_holomorphic(e.base)
    return is_holomorphic(e.left) and is_holomorphic(e.right)


def evaluate(e: Expr, p: np.ndarray) -> complex:
    """Value of the expression at a point in C^n."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return complex(p[e.index])
    if isinstance(e, BarVar):
        return complex(p[e.index]).conjugate()
    if isinstance(e, Param):
        return complex(e.value)
    if isinstance(e, Neg):
        return -evaluate(e.arg, p)
    if isinstance(e, Add):
        return evaluate(e.left, p) + evaluate(e.right, p)
    if isinstance(e, Sub):
        return evaluate(e.left, p) - evaluate(e.right, p)
    if isinstance(e, Mul):
        return evaluate(e.left, p) * evaluate(e.right, p)
    if isinstance(e, Div):
        d = evaluate(e.right, p)
        if d == 0:
            raise EvaluationError(f"division by zero in '{to_text(e.right)}'")
        return evaluate(e.left, p) / d
    if isinstance(e, Pow):
        b = evaluate(e.base, p)
        if e.exponent < 0 and b == 0:
            raise EvaluationError(f"zero base with negative power in '{to_text(e)}'")
        return b ** e.exponent
    raise TypeError(f"unknown node {e!r}")


@dataclass
class Jet2:
    """Value, first Wirtinger derivatives, and mixed second derivatives.

    d1_hol[i] = d/dz_i, d1_anti[j] = d/dzbar_j,
    d2_mixed[i, j] = d^2/dz_i dzbar_j.
    """

    value: complex
    d1_hol: np.ndarray
    d1_anti: np.ndarray
    d2_mixed: np.ndarray


def _jet_const(value: complex, n: int) -> Jet2:
    return Jet2(value, np.zeros(n, complex), np.zeros(n, complex),
                np.zeros((n, n), complex))


def _jet_mul(a: Jet2, b: Jet2) -> Jet2:
    d2 = (a.d2_mixed * b.value + b.d2_mixed * a.value
          + np.outer(a.d1_hol, b.d1_anti) + np.outer(b.d1_hol, a.d1_anti))
    return Jet2(a.value * b.value,
                a.d1_hol * b.value + b.d1_hol * a.value,
                a.d1_anti * b.value + b.d1_anti * a.value,
                d2)


def _jet_recip(a: Jet2, node: Expr) -> Jet2:
    if a.value == 0:
        raise EvaluationError(f"division by zero in '{to_text(node)}'")
    v = a.value
    d1_hol = -a.d1_hol / v ** 2
    d1_anti = -a.d1_anti / v ** 2
    d2 = -a.d2_mixed / v ** 2 + 2.0 * np.outer(a.d1_hol, a.d1_anti) / v ** 3
    return Jet2(1.0 / v, d1_hol, d1_anti, d2)


def _jet_pow(a: Jet2, m: int, node: Expr) -> Jet2:
    n = a.d1_hol.shape[0]
    if m == 0:
        return _jet_const(1.0 + 0.0j, n)
    if m < 0:
        return _jet_recip(_jet_pow(a, -m, node), node)
    v = a.value
    vm1 = v ** (m - 1)
    d1_hol = m * vm1 * a.d1_hol
    d1_anti = m * vm1 * a.d1_anti
    d2 = m * vm1 * a.d2_mixed
    if m >= 2:
        d2 = d2 + m * (m - 1) * v ** (m - 2) * np.outer(a.d1_hol, a.d1_anti)
    return Jet2(v ** m, d1_hol, d1_anti, d2)


def jet2(e: Expr, p) -> Jet2:
    """Exact 2-jet (no truncation error) of the expression at p in C^n."""
    p = np.asarray(p, dtype=complex)
    n = p.shape[0]

    def go(node: Expr) -> Jet2:
        if isinstance(node, (Const, Param)):
            return _jet_const(complex(node.value), n)
        if isinstance(node, Var):
            j = _jet_const(complex(p[node.index]), n)
            j.d1_hol[node.index] = 1.0
            return j
        if isinstance(node, BarVar):
            j = _jet_const(complex(p[node.index]).conjugate(), n)
            j.d1_anti[node.index] = 1.0
            return j
        if isinstance(node, Neg):
            a = go(node.arg)
            return Jet2(-a.value, -a.d1_hol, -a.d1_anti, -a.d2_mixed)
        if isinstance(node, Add):
            a, b = go(node.left), go(node.right)
            return Jet2(a.value + b.value, a.d1_hol + b.d1_hol,
                        a.d1_anti + b.d1_anti, a.d2_mixed + b.d2_mixed)
        if isinstance(node, Sub):
            a, b = go(node.left), go(node.right)
            return Jet2(a.value - b.value, a.d1_hol - b.d1_hol,
                        a.d1_anti - b.d1_anti, a.d2_mixed - b.d2_mixed)
        if isinstance(node, Mul):
            return _jet_mul(go(node.left), go(node.right))
        if isinstance(node, Div):
            return _jet_mul(go(node.left), _jet_recip(go(node.right), node))
        if isinstance(node, Pow):
            return _jet_pow(go(node.base), node.exponent, node)
        raise TypeError(f"unknown node {node!r}")

    return go(e)


def fd_jet2(e: Expr, p, step: float = 1e-4) -> Jet2:
    """Central-finite-difference 2-jet, the independent oracle for jet2.

    Treats real and imaginary parts of each coordinate as 2n real
    variables; agreement with jet2 is O(step^2).
    """
    if not 0.0 < step <= 0.1:
        raise ValueError(f"step must be in (0, 0.1], got {step}")
    p = np.asarray(p, dtype=complex)
    n = p.shape[0]
    h = step

    def shifted(*moves) -> complex:
        q = p.copy()
        for r, s in moves:
            if r < n:
                q[r] += s * h
            else:
                q[r - n] += 1j * s * h
        return evaluate(e, q)

    f0 = evaluate(e, p)
    plus = np.array([shifted((r, +1)) for r in range(2 * n)])
    minus = np.array([shifted((r, -1)) for r in range(2 * n)])
    d_real = (plus - minus) / (2 * h)
    d1_hol = 0.5 * (d_real[:n] - 1j * d_real[n:])
    d1_anti = 0.5 * (d_real[:n] + 1j * d_real[n:])

    hess = np.zeros((2 * n, 2 * n), complex)
    for r in range(2 * n):
        hess[r, r] = (plus[r] - 2 * f0 + minus[r]) / h ** 2
        for s in range(r + 1, 2 * n):
            cross = (shifted((r, +1), (s, +1)) - shifted((r, +1), (s, -1))
                     - shifted((r, -1), (s, +1)) + shifted((r, -1), (s, -1))) / (4 * h ** 2)
            hess[r, s] = cross
            hess[s, r] = cross

    d2 = 0.25 * (hess[:n, :n] + hess[n:, n:] + 1j * (hess[:n, n:] - hess[n:, :n]))
    return Jet2(f0, d1_hol, d1_anti, d2)


@dataclass
class HoloJet:
    """Value, gradient and (symmetric) Hessian in z of a holomorphic expression."""

    value: complex
    d1: np.ndarray
    d2: np.ndarray


def holo_jet(e: Expr, p) -> HoloJet:
    """Exact holomorphic 2-jet; rejects expressions containing zb_k."""
    p = np.asarray(p, dtype=complex)
    n = p.shape[0]

    def const(v: complex) -> HoloJet:
        return HoloJet(v, np.zeros(n, complex), np.zeros((n, n), complex))

    def mul(a: HoloJet, b: HoloJet) -> HoloJet:
        d2 = (a.d2 * b.value + b.d2 * a.value
              + np.outer(a.d1, b.d1) + np.outer(b.d1, a.d1))
        return HoloJet(a.value * b.value, a.d1 * b.value + b.d1 * a.value, d2)

    def recip(a: HoloJet, node: Expr) -> HoloJet:
        if a.value == 0:
            raise EvaluationError(f"division by zero in '{to_text(node)}'")
        v = a.value
        return HoloJet(1.0 / v, -a.d1 / v ** 2,
                       -a.d2 / v ** 2 + 2.0 * np.outer(a.d1, a.d1) / v ** 3)

    def power(a: HoloJet, m: int, node: Expr) -> HoloJet:
        if m == 0:
            return const(1.0 + 0j)
        if m < 0:
            return recip(power(a, -m, node), node)
        v = a.value
        d2 = m * v ** (m - 1) * a.d2
        if m >= 2:
            d2 = d2 + m * (m - 1) * v ** (m - 2) * np.outer(a.d1, a.d1)
        return HoloJet(v ** m, m * v ** (m - 1) * a.d1, d2)

    def go(node: Expr) -> HoloJet:
        if isinstance(node, BarVar):
            raise NotHolomorphicError(
                f"conjugated variable zb{node.index + 1} in a holomorphic expression")
        if isinstance(node, (Const, Param)):
            return const(complex(node.value))
        if isinstance(node, Var):
            j = const(complex(p[node.index]))
            j.d1[node.index] = 1.0
            return j
        if isinstance(node, Neg):
            a = go(node.arg)
            return HoloJet(-a.value, -a.d1, -a.d2)
        if isinstance(node, Add):
            a, b = go(node.left), go(node.right)
            return HoloJet(a.value + b.value, a.d1 + b.d1, a.d2 + b.d2)
        if isinstance(node, Sub):
            a, b = go(node.left), go(node.right)
            return HoloJet(a.value - b.value, a.d1 - b.d1, a.d2 - b.d2)
        if isinstance(node, Mul):
            return mul(go(node.left), go(node.right))
        if isinstance(node, Div):
            return mul(go(node.left), recip(go(node.right), node))
        if isinstance(node, Pow):
            return power(go(node.base), node.exponent, node)
        raise TypeError(f"unknown node {node!r}")

    return go(e)
