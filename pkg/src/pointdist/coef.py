"""Exact coefficients: finite Laurent polynomials in pi with rational weights.

Every coefficient produced by the field calculus has the form
``sum_j q_j * pi**j`` with rational ``q_j``: moduli enter as rationals,
Fourier orthogonality on circles contributes integer powers of pi and the
closed-form solutions carry ``1/pi`` prefactors.  Keeping them exact lets
symbolic residuals vanish identically instead of to rounding.
"""

from __future__ import annotations

import math
import numbers
import re
from fractions import Fraction

__all__ = ["Coef", "as_coef", "as_fraction", "parse_coef", "PI"]


def as_fraction(x) -> Fraction:
    """Convert an int, float, decimal string or Fraction to an exact Fraction.

    Floats go through their shortest repr so that ``0.49`` becomes 49/100
    rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Real):
        xf = float(x)
        if not math.isfinite(xf):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(repr(xf))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class Coef:
    """Immutable element of Q[pi, 1/pi]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for power, q in dict(terms).items():
                q = as_fraction(q)
                if q:
                    clean[int(power)] = clean.get(int(power), Fraction(0)) + q
        self._terms = tuple(sorted((p, q) for p, q in clean.items() if q))
        self._hash = None

    # construction helpers
    @classmethod
    def rational(cls, q) -> "Coef":
        return cls({0: q})

    @classmethod
    def pi_power(cls, power: int, q=1) -> "Coef":
        return cls({power: q})

    @property
    def terms(self) -> tuple:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_rational(self) -> bool:
        return all(p == 0 for p, _ in self._terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms[0][1] if self._terms else Fraction(0)

    def __float__(self):
        return float(sum(float(q) * math.pi**p for p, q in self._terms))

    # arithmetic
    def __add__(self, other):
        other = as_coef(other)
        d = dict(self._terms)
        for p, q in other._terms:
            d[p] = d.get(p, Fraction(0)) + q
        return Coef(d)

    __radd__ = __add__

    def __neg__(self):
        return Coef({p: -q for p, q in self._terms})

    def __sub__(self, other):
        return self + (-as_coef(other))

    def __rsub__(self, other):
        return as_coef(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Coef({p: q * other for p, q in self._terms})
        other = as_coef(other)
        d = {}
        for p1, q1 in self._terms:
            for p2, q2 in other._terms:
                d[p1 + p2] = d.get(p1 + p2, Fraction(0)) + q1 * q2
        return Coef(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_coef(other)
        if len(other._terms) != 1:
            raise ZeroDivisionError(f"can only divide by a monomial, got {other}")
        p0, q0 = other._terms[0]
        return Coef({p - p0: q / q0 for p, q in self._terms})

    def __eq__(self, other):
        try:
            other = as_coef(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # text form, parseable by ``parse_coef``
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for p, q in self._terms:
            if p == 0:
                parts.append(str(q))
            elif p == 1:
                parts.append(f"{q}*pi")
            else:
                parts.append(f"{q}*pi**{p}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Coef({str(self)!r})"

    def to_json(self):
        """Plain number when rational with a small denominator, else a string."""
        if self.is_rational():
            q = self.rational_value()
            if q.denominator == 1:
                return int(q.numerator)
            return str(q)
        return str(self)


PI = Coef.pi_power(1)

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(pi)|(\*\*|[-+*/()^]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character {text[pos]!r} at offset {pos} in {text!r}")
        num, pi, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif pi is not None:
            out.append(("pi", pi))
        else:
            out.append(("op", "**" if op == "^" else op))
        pos = m.end()
    return out


class _Parser:
    # expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := ('-'|'+') unary | power ; power := atom ('**' int)?
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        val = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input in coefficient {self.text!r}")
        return val

    def expr(self):
        val = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            _, op = self.take()
            rhs = self.unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "**"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, tok = self.take()
            if kind != "num" or not tok.isdigit():
                raise ValueError(f"exponent must be an integer in {self.text!r}")
            n = sign * int(tok)
            if len(base.terms) != 1:
                raise ValueError(f"only monomials can be raised to powers in {self.text!r}")
            p, q = base.terms[0]
            if n < 0 and q == 0:
                raise ZeroDivisionError(self.text)
            return Coef({p * n: q**n})
        return base

    def atom(self):
        kind, tok = self.take()
        if kind == "num":
            return Coef.rational(Fraction(tok))
        if kind == "pi":
            return PI
        if (kind, tok) == ("op", "("):
            val = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError(f"unbalanced parentheses in {self.text!r}")
            return val
        raise ValueError(f"unexpected token {tok!r} in {self.text!r}")


def parse_coef(text: str) -> Coef:
    """Parse expressions such as ``-1/(2*pi)``, ``3/4``, ``0.25*pi**-1``."""
    return _Parser(text).parse()


def as_coef(x) -> Coef:
    if isinstance(x, Coef):
        return x
    if isinstance(x, str):
        return parse_coef(x)
    return Coef.rational(as_fraction(x))
