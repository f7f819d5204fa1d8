"""
Coefficient expressions for the command line: polynomials in x with complex
constants.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INTEGER)?
    atom   := NUMBER | 'x' | 'q' | 'i' | '(' expr ')'
"""

from __future__ import annotations

import re
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from qcalc.errors import ExpressionError
from qcalc.ivp import SecondOrderSpec
from qcalc.lattice import QLattice

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class Coefficient:
    """A parsed polynomial coefficient, callable on scalars and arrays."""

    def __init__(self, text: str, polynomial: Polynomial):
        self.text = text
        self.polynomial = polynomial

    @property
    def is_constant(self) -> bool:
        return self.polynomial.degree() == 0

    def __call__(self, x):
        return self.polynomial(np.asarray(x, dtype=float))

    def __repr__(self) -> str:
        return f"Coefficient({self.text!r})"


class _Parser:
    def __init__(self, text: str, q: float):
        self.text = text
        self.q = q
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        token = self.peek()
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        kind, tok = self.take()
        if tok != value:
            raise ExpressionError(f"expected {value!r} in {self.text!r}, got {tok!r}")

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ExpressionError("empty expression")
        result = self.expr()
        if self.pos != len(self.tokens):
            raise ExpressionError(f"unexpected {self.peek()[1]!r} in {self.text!r}")
        return result

    def expr(self) -> Polynomial:
        result = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op = self.take()
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> Polynomial:
        result = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op = self.take()
            rhs = self.unary()
            if op == "*":
                result = result * rhs
            else:
                result = _divide(result, rhs, self.text)
        return result

    def unary(self) -> Polynomial:
        if self.peek()[1] in ("+", "-"):
            _, op = self.take()
            operand = self.unary()
            return operand if op == "+" else -operand
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, tok = self.take()
            if kind != "number" or not tok.isdigit():
                raise ExpressionError(f"exponent must be a nonnegative integer literal in {self.text!r}")
            return base ** int(tok)
        return base

    def atom(self) -> Polynomial:
        kind, tok = self.take()
        if kind == "number":
            return _const(float(tok))
        if kind == "name":
            if tok == "x":
                return Polynomial(np.array([0, 1], dtype=complex))
            if tok == "q":
                return _const(self.q)
            if tok == "i":
                return _const(1j)
            raise ExpressionError(f"unknown identifier {tok!r} in {self.text!r}")
        if tok == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExpressionError(f"unexpected {tok!r} in {self.text!r}")


def _const(value: complex) -> Polynomial:
    return Polynomial(np.array([value], dtype=complex))


def _divide(num: Polynomial, den: Polynomial, text: str) -> Polynomial:
    den = den.trim()
    if den.degree() > 0:
        raise ExpressionError(f"division by a non-constant polynomial in {text!r}")
    c = complex(den.coef[0])
    if c == 0:
        raise ExpressionError(f"division by zero in {text!r}")
    return num / c


def parse_coefficient(text: str, q: float) -> Coefficient:
    """Parse text into a polynomial coefficient; q is substituted for 'q'.

    Raises:
        ExpressionError: syntax errors, unknown names, non-integer exponents,
            division by a non-constant polynomial.
    """
    polynomial = _Parser(str(text), q).parse()
    return Coefficient(str(text), polynomial.trim())


def spec_from_text(
    lattice: QLattice,
    a0: str = "1",
    a1: str = "0",
    a2: str = "0",
    b: str = "0",
    b1: complex = 1.0,
    b2: complex = 0.0,
) -> SecondOrderSpec:
    """SecondOrderSpec from coefficient expressions.

    Raises:
        ExpressionError: a coefficient does not parse.
    """
    q = lattice.q
    return SecondOrderSpec(
        a0=parse_coefficient(a0, q),
        a1=parse_coefficient(a1, q),
        a2=parse_coefficient(a2, q),
        b=parse_coefficient(b, q),
        b1=b1,
        b2=b2,
        lattice=lattice,
    )
