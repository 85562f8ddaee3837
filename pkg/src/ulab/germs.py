"""Rational-function germs: a computable ordered-field fragment of the hyperreals.

A germ is a quotient of integer-coefficient polynomials in one variable n,
read as the eventual behaviour of the sequence f(0), f(1), f(2), ...
Order and equality are decided by the eventual sign of a difference, which
the leading coefficients determine exactly; every comparison set
{n : f(n) < g(n)} is finite or cofinite, so all free ultrafilters agree
with these verdicts.  Infinitesimals (1/(n+1)) and infinite elements (n)
live here with fully decidable arithmetic.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Tuple


class DivisionByZeroGerm(ZeroDivisionError):
    """Inverse or division by the zero germ."""


class InfiniteGerm(ValueError):
    """Standard part requested of an infinite germ."""


class GermSyntaxError(ValueError):
    pass


Poly = Tuple[int, ...]  # coefficients, ascending degree, no trailing zeros


def _trim(coeffs: Iterable[int]) -> Poly:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def _neg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def _mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _trim(out)


def _content(a: Poly) -> int:
    c = 0
    for coeff in a:
        c = gcd(c, abs(coeff))
    return c or 1


def _primitive(a: Poly) -> Poly:
    c = _content(a)
    p = tuple(coeff // c for coeff in a)
    if p and p[-1] < 0:
        p = _neg(p)
    return p


def _mod(a: Tuple[Fraction, ...], b: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    a = list(a)
    while len(a) >= len(b) and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) < len(b):
            break
        factor = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, cb in enumerate(b):
            a[shift + i] -= factor * cb
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def _gcd_poly(a: Poly, b: Poly) -> Poly:
    """Primitive integer gcd of two integer polynomials (positive leading coefficient)."""
    fa = tuple(Fraction(c) for c in a)
    fb = tuple(Fraction(c) for c in b)
    while fb:
        fa, fb = fb, _mod(fa, fb)
    if not fa:
        return ()
    lcm_den = 1
    for c in fa:
        lcm_den = lcm_den * c.denominator // gcd(lcm_den, c.denominator)
    ints = tuple(int(c * lcm_den) for c in fa)
    return _primitive(ints)


def _exact_div(a: Poly, b: Poly) -> Poly:
    """a / b, which must be exact (b divides a in Z[n])."""
    fa = [Fraction(c) for c in a]
    fb = [Fraction(c) for c in b]
    q = [Fraction(0)] * (len(fa) - len(fb) + 1) if len(fa) >= len(fb) else []
    work = list(fa)
    while len(work) >= len(fb) and any(work):
        while work and work[-1] == 0:
            work.pop()
        if len(work) < len(fb):
            break
        factor = work[-1] / fb[-1]
        shift = len(work) - len(fb)
        q[shift] = factor
        for i, cb in enumerate(fb):
            work[shift + i] -= factor * cb
        work.pop()
    assert all(c == 0 for c in work), "inexact polynomial division"
    assert all(c.denominator == 1 for c in q), "inexact polynomial division"
    return _trim(int(c) for c in q)


def _poly_eval(a: Poly, n: int) -> int:
    out = 0
    for c in reversed(a):
        out = out * n + c
    return out


def _poly_render(a: Poly) -> str:
    if not a:
        return "0"
    parts = []
    for k in range(len(a) - 1, -1, -1):
        c = a[k]
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        elif k == 1:
            body = "n" if mag == 1 else f"{mag}*n"
        else:
            body = f"n^{k}" if mag == 1 else f"{mag}*n^{k}"
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts)


class Comparison(enum.Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GermClass:
    """Infinitesimal, Appreciable(standard part), or Infinite."""

    kind: str
    value: Optional[Fraction] = None

    def __str__(self) -> str:
        if self.kind == "appreciable":
            return f"Appreciable({self.value})"
        return self.kind.capitalize()


class Germ:
    """Quotient of integer polynomials in n, stored in lowest terms.

    Canonical form: numerator and denominator share no polynomial factor
    and no integer factor, and the denominator's leading coefficient is
    positive.  The value is defined for every n beyond the denominator's
    largest root, a cofinite set.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Iterable[int], den: Iterable[int] = (1,)) -> None:
        num_t = _trim(int(c) for c in num)
        den_t = _trim(int(c) for c in den)
        if not den_t:
            raise DivisionByZeroGerm("denominator is the zero polynomial")
        if not num_t:
            object.__setattr__(self, "num", ())
            object.__setattr__(self, "den", (1,))
            return
        g = _gcd_poly(num_t, den_t)
        if len(g) > 1 or g != (1,):
            num_t = _exact_div(num_t, g)
            den_t = _exact_div(den_t, g)
        c = gcd(_content(num_t), _content(den_t))
        num_t = tuple(x // c for x in num_t)
        den_t = tuple(x // c for x in den_t)
        if den_t[-1] < 0:
            num_t = _neg(num_t)
            den_t = _neg(den_t)
        object.__setattr__(self, "num", num_t)
        object.__setattr__(self, "den", den_t)

    def __setattr__(self, name, value):
        raise AttributeError("Germ is immutable")

    # -- constructors ------------------------------------------

    @staticmethod
    def zero() -> "Germ":
        return Germ(())

    @staticmethod
    def one() -> "Germ":
        return Germ((1,))

    @staticmethod
    def variable() -> "Germ":
        return Germ((0, 1))

    @staticmethod
    def from_fraction(q: Fraction | int) -> "Germ":
        q = Fraction(q)
        return Germ((q.numerator,), (q.denominator,))

    # -- arithmetic --------------------------------------------

    def __add__(self, other: "Germ") -> "Germ":
        return Germ(
            _add(_mul(self.num, other.den), _mul(other.num, self.den)),
            _mul(self.den, other.den),
        )

    def __neg__(self) -> "Germ":
        return Germ(_neg(self.num), self.den)

    def __sub__(self, other: "Germ") -> "Germ":
        return self + (-other)

    def __mul__(self, other: "Germ") -> "Germ":
        return Germ(_mul(self.num, other.num), _mul(self.den, other.den))

    def inverse(self) -> "Germ":
        if self.is_zero():
            raise DivisionByZeroGerm("the zero germ has no inverse")
        return Germ(self.den, self.num)

    def __truediv__(self, other: "Germ") -> "Germ":
        return self * other.inverse()

    def is_zero(self) -> bool:
        return not self.num

    # -- order and classification --------------------------------

    def eventual_sign(self) -> int:
        """Sign of f(n) for all sufficiently large n."""
        if self.is_zero():
            return 0
        return 1 if self.num[-1] > 0 else -1

    def compare(self, other: "Germ") -> Comparison:
        sign = (self - other).eventual_sign()
        if sign == 0:
            return Comparison.EQ
        return Comparison.GT if sign > 0 else Comparison.LT

    def abs(self) -> "Germ":
        return -self if self.eventual_sign() < 0 else self

    def classify(self) -> GermClass:
        if self.is_zero():
            return GermClass("appreciable", Fraction(0))
        dn = len(self.num) - 1
        dd = len(self.den) - 1
        if dn < dd:
            return GermClass("infinitesimal")
        if dn > dd:
            return GermClass("infinite")
        return GermClass("appreciable", Fraction(self.num[-1], self.den[-1]))

    def standard_part(self) -> Fraction:
        c = self.classify()
        if c.kind == "infinite":
            raise InfiniteGerm("infinite germ has no standard part")
        if c.kind == "infinitesimal":
            return Fraction(0)
        assert c.value is not None
        return c.value

    # -- evaluation oracle helpers --------------------------------

    def cauchy_bound(self) -> int:
        """Integer beyond every root of numerator and denominator."""
        bound = 1
        for poly in (self.num, self.den):
            if poly:
                b = 1 + max(abs(c) for c in poly) // abs(poly[-1]) + 1
                bound = max(bound, b)
        return bound

    def eval(self, n: int) -> Fraction:
        d = _poly_eval(self.den, n)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at n={n}")
        return Fraction(_poly_eval(self.num, n), d)

    # -- identity and rendering ----------------------------------

    def __eq__(self, other):
        if not isinstance(other, Germ):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def render(self) -> str:
        if self.den == (1,):
            return _poly_render(self.num)
        return f"({_poly_render(self.num)})/({_poly_render(self.den)})"

    def __repr__(self):
        return f"Germ({self.render()})"


# -- module-level operation names ------------------------------------------


def arith(op: str, f: Germ, g: Germ | None = None) -> Germ:
    if op == "add":
        assert g is not None
        return f + g
    if op == "mul":
        assert g is not None
        return f * g
    if op == "neg":
        return -f
    if op == "inv":
        return f.inverse()
    raise ValueError(f"unknown operation {op!r}")


def compare(f: Germ, g: Germ) -> Comparison:
    return f.compare(g)


def classify(f: Germ) -> GermClass:
    return f.classify()


def standard_part(f: Germ) -> Fraction:
    return f.standard_part()


# -- expression parser ---------------------------------------------------------

_GERM_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<pow>\*\*|\^)|(?P<op>[-+*/()n]))")


class _GermParser:
    def __init__(self, text: str) -> None:
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _GERM_TOKEN.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                raise GermSyntaxError(f"unexpected character {rest[0]!r}")
            if m.lastgroup == "num":
                self.tokens.append(("num", int(m.group("num"))))
            elif m.lastgroup == "pow":
                self.tokens.append(("^", "^"))
            else:
                self.tokens.append((m.group("op"), m.group("op")))
            pos = m.end()
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else ""

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Germ:
        g = self.expr()
        if self.peek():
            raise GermSyntaxError(f"trailing input near token {self.tokens[self.i]!r}")
        return g

    def expr(self) -> Germ:
        g = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            g = g + rhs if op == "+" else g - rhs
        return g

    def term(self) -> Germ:
        g = self.factor()
        while self.peek() in ("*", "/"):
            op = self.next()[0]
            rhs = self.factor()
            g = g * rhs if op == "*" else g / rhs
        return g

    def factor(self) -> Germ:
        if self.peek() == "-":
            self.next()
            return -self.factor()
        if self.peek() == "+":
            self.next()
            return self.factor()
        return self.power()

    def power(self) -> Germ:
        base = self.atom()
        if self.peek() == "^":
            self.next()
            neg = False
            if self.peek() == "-":
                self.next()
                neg = True
            kind, value = self.next() if self.peek() == "num" else ("", None)
            if kind != "num":
                raise GermSyntaxError("exponent must be an integer literal")
            out = Germ.one()
            for _ in range(value):
                out = out * base
            return out.inverse() if neg else out
        return base

    def atom(self) -> Germ:
        kind, value = self.next() if self.peek() else ("", None)
        if kind == "num":
            return Germ((value,))
        if kind == "n":
            return Germ.variable()
        if kind == "(":
            g = self.expr()
            if self.peek() != ")":
                raise GermSyntaxError("expected ')'")
            self.next()
            return g
        raise GermSyntaxError(f"unexpected token {kind!r}")


def parse_germ(text: str) -> Germ:
    """Parse an integer-coefficient rational expression in n."""
    if not text.strip():
        raise GermSyntaxError("empty germ expression")
    return _GermParser(text).parse()
