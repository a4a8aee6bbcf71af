"""Sequence descriptions and their textual mini-language.

Grammar (whitespace ignored)::

    a^n                 Geometric       a rational, e.g. 2^n, (3/2)^n
    a^(P)               PolyExp         P a polynomial in n with rational coefficients
    a^prime(n)          PrimeExp
    mersenne            PrimeExp(2, mersenne=True), i.e. 2^p_n - 1
    n!   n^n            Factorial, NPowerN
    p(n)   p_asym(n)    Partition, exact or asymptotic
    fib-exp(a)          a^F_n
    superfact(h)        IteratedProduct(Factorial, h)
    iterprod(spec, h)   IteratedProduct
    dexp(a, theta)      a^(theta^n); theta is rational, phi, sqrt(m) or root(c0,...,ck)
    powexp(l, g, c, b)  l * n^g * exp(c * n^b), real constant expressions

``render`` produces the canonical text and ``parse(render(s)) == s``.
"""

from __future__ import annotations

import ast
import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ..errors import InvalidInput, SpecParseError
from ..expr import Expr


def _frac_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _base_text(a: Fraction) -> str:
    return _frac_text(a) if a.denominator == 1 else f"({_frac_text(a)})"


def _need(cond: bool, message: str):
    if not cond:
        raise InvalidInput(message)


@dataclass(frozen=True)
class Geometric:
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        _need(self.a > 0, "Geometric needs a > 0")


@dataclass(frozen=True)
class PolyExp:
    """``a^P(n)``; ``coeffs[j]`` is the coefficient of ``n^j``."""

    a: Fraction
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        cs = [Fraction(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs) or (Fraction(0),))
        _need(self.a > 1, "PolyExp needs a > 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if any(self.coeffs) else 0

    def value(self, n) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def binomial_coeffs(self) -> tuple:
        """``b_j`` with ``P(n) = sum_j b_j C(n-1, j)``, i.e. ``b_j = Delta^j P(1)``."""
        d = self.degree
        vals = [self.value(1 + i) for i in range(d + 1)]
        out = []
        for _ in range(d + 1):
            out.append(vals[0])
            vals = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
        return tuple(out)

    @classmethod
    def from_binomial(cls, a, bcoeffs) -> PolyExp:
        # expand sum_j b_j C(n-1, j) into monomials
        d = len(bcoeffs) - 1
        coeffs = [Fraction(0)] * (d + 1)
        for j, b in enumerate(bcoeffs):
            poly = [Fraction(1)]  # C(n-1, j) = prod_{i<j} (n-1-i)/(i+1)
            for i in range(j):
                nxt = [Fraction(0)] * (len(poly) + 1)
                for t, c in enumerate(poly):
                    nxt[t + 1] += c / (i + 1)
                    nxt[t] -= c * (1 + i) / (i + 1)
                poly = nxt
            for t, c in enumerate(poly):
                coeffs[t] += b * c
        return cls(a, tuple(coeffs))


@dataclass(frozen=True)
class PowerExp:
    """``lam * n^gamma * exp(c * n^beta)`` with constant real parameters."""

    lam: Expr
    gamma: Expr
    c: Expr
    beta: Expr

    def __post_init__(self):
        for name in ("lam", "gamma", "c", "beta"):
            v = getattr(self, name)
            if not isinstance(v, Expr):
                v = Expr(str(v))
                object.__setattr__(self, name, v)
            _need(not v.uses_n, f"PowerExp parameter {name} must be constant")
        _need(float(self.lam.fixed(None, 64)) > 0, "PowerExp needs lam > 0")
        _need(float(self.c.fixed(None, 64)) > 0, "PowerExp needs c > 0")
        _need(float(self.beta.fixed(None, 64)) > 0, "PowerExp needs beta > 0")
        beta_q = self.beta.rational()
        _need(beta_q is None or beta_q.denominator != 1, "PowerExp needs a non-integer beta")


@dataclass(frozen=True)
class Factorial:
    pass


@dataclass(frozen=True)
class NPowerN:
    pass


@dataclass(frozen=True)
class Partition:
    mode: str = "exact"

    def __post_init__(self):
        _need(self.mode in ("exact", "asymptotic"), "Partition mode must be exact or asymptotic")


@dataclass(frozen=True)
class FibonacciExp:
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        _need(self.a > 1, "FibonacciExp needs a > 1")


@dataclass(frozen=True)
class IteratedProduct:
    inner: SequenceSpec
    h: int

    def __post_init__(self):
        _need(isinstance(self.h, int) and self.h >= 1, "IteratedProduct needs integer h >= 1")
        _need(isinstance(self.inner, _SPEC_TYPES), "IteratedProduct inner must be a sequence spec")


@dataclass(frozen=True)
class Theta:
    """An algebraic number > 1: ``kind`` is rational, phi, sqrt or root."""

    kind: str
    value: object

    def __post_init__(self):
        if self.kind == "rational":
            object.__setattr__(self, "value", Fraction(self.value))
            _need(self.value > 1, "theta must exceed 1")
        elif self.kind == "sqrt":
            _need(isinstance(self.value, int) and self.value > 1, "sqrt(m) needs integer m > 1")
        elif self.kind == "root":
            coeffs = tuple(int(c) for c in self.value)
            _need(len(coeffs) >= 2 and coeffs[-1] != 0, "root() needs a non-constant polynomial")
            object.__setattr__(self, "value", coeffs)
        else:
            _need(self.kind == "phi", f"unknown theta kind {self.kind!r}")

    @property
    def minimal_poly(self) -> tuple:
        """Integer polynomial (c0..ck) vanishing at theta."""
        if self.kind == "rational":
            return (-self.value.numerator, self.value.denominator)
        if self.kind == "phi":
            return (-1, -1, 1)
        if self.kind == "sqrt":
            r = math.isqrt(self.value)
            return (-r, 1) if r * r == self.value else (-self.value, 0, 1)
        return self.value

    def render(self) -> str:
        if self.kind == "rational":
            return _frac_text(self.value)
        if self.kind == "phi":
            return "phi"
        if self.kind == "sqrt":
            return f"sqrt({self.value})"
        return "root(" + ",".join(str(c) for c in self.value) + ")"


@dataclass(frozen=True)
class DoublyExp:
    a: Fraction
    theta: Theta
    minimal_poly: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        _need(self.a > 1, "DoublyExp needs a > 1")
        if self.minimal_poly is None:
            object.__setattr__(self, "minimal_poly", self.theta.minimal_poly)
        else:
            object.__setattr__(self, "minimal_poly", tuple(int(c) for c in self.minimal_poly))


@dataclass(frozen=True)
class PrimeExp:
    a: Fraction
    mersenne: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        _need(self.a > 1, "PrimeExp needs a > 1")
        _need(not self.mersenne or self.a == 2, "mersenne numbers are 2^p - 1")


SequenceSpec = Union[Geometric, PolyExp, PowerExp, Factorial, NPowerN, Partition, FibonacciExp,
                     IteratedProduct, DoublyExp, PrimeExp]
_SPEC_TYPES = (Geometric, PolyExp, PowerExp, Factorial, NPowerN, Partition, FibonacciExp,
               IteratedProduct, DoublyExp, PrimeExp)

PARTITION_ASYMPTOTIC = PowerExp(Expr("1/(4*sqrt(3))"), Expr("-1"), Expr("pi*sqrt(2/3)"), Expr("1/2"))


def _poly_text(coeffs) -> str:
    parts = []
    for j in range(len(coeffs) - 1, -1, -1):
        c = coeffs[j]
        if c == 0:
            continue
        mono = "" if j == 0 else ("n" if j == 1 else f"n^{j}")
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{_frac_text(mag)}*{mono}"
        else:
            body = _frac_text(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f"{sign}{body}"
    return text


def render(spec: SequenceSpec) -> str:
    if isinstance(spec, Geometric):
        return f"{_base_text(spec.a)}^n"
    if isinstance(spec, PolyExp):
        return f"{_base_text(spec.a)}^({_poly_text(spec.coeffs)})"
    if isinstance(spec, PowerExp):
        return f"powexp({spec.lam.text},{spec.gamma.text},{spec.c.text},{spec.beta.text})"
    if isinstance(spec, Factorial):
        return "n!"
    if isinstance(spec, NPowerN):
        return "n^n"
    if isinstance(spec, Partition):
        return "p(n)" if spec.mode == "exact" else "p_asym(n)"
    if isinstance(spec, FibonacciExp):
        return f"fib-exp({_frac_text(spec.a)})"
    if isinstance(spec, IteratedProduct):
        if isinstance(spec.inner, Factorial) and spec.h >= 2:
            return f"superfact({spec.h})"
        return f"iterprod({render(spec.inner)},{spec.h})"
    if isinstance(spec, DoublyExp):
        text = f"dexp({_frac_text(spec.a)},{spec.theta.render()}"
        if spec.minimal_poly != spec.theta.minimal_poly:
            text += ";" + ",".join(str(c) for c in spec.minimal_poly)
        return text + ")"
    if isinstance(spec, PrimeExp):
        return "mersenne" if spec.mersenne else f"{_base_text(spec.a)}^prime(n)"
    raise InvalidInput(f"not a sequence spec: {spec!r}")


def spec_hash(spec: SequenceSpec) -> bytes:
    return hashlib.sha256(render(spec).encode()).digest()[:16]


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text

    def fail(self, message, pos):
        raise SpecParseError(message, self.text, pos)

    def split_args(self, start: int, end: int, seps=",") -> list[tuple[int, int]]:
        """Split text[start:end] at top-level separators; returns spans."""
        spans, depth, left = [], 0, start
        for i in range(start, end):
            ch = self.text[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch in seps and depth == 0:
                spans.append((left, i))
                left = i + 1
        spans.append((left, end))
        return spans

    def strip(self, start, end):
        while start < end and self.text[start].isspace():
            start += 1
        while end > start and self.text[end - 1].isspace():
            end -= 1
        return start, end

    def call(self, start, end, name):
        """Argument spans of ``name(...)`` spanning exactly text[start:end]."""
        open_at = start + len(name)
        while open_at < end and self.text[open_at].isspace():
            open_at += 1
        if open_at >= end or self.text[open_at] != "(" or self.text[end - 1] != ")":
            self.fail(f"expected {name}(...)", start)
        depth = 0
        for i in range(open_at, end):
            depth += self.text[i] == "("
            depth -= self.text[i] == ")"
            if depth == 0 and i != end - 1:
                self.fail("unexpected text after closing parenthesis", i + 1)
        return open_at + 1, end - 1

    def rational(self, start, end, what="number") -> Fraction:
        start, end = self.strip(start, end)
        tok = self.text[start:end]
        if tok.startswith("(") and tok.endswith(")"):
            return self.rational(start + 1, end - 1, what)
        try:
            return Fraction(tok.replace(" ", ""))
        except (ValueError, ZeroDivisionError):
            self.fail(f"expected a rational {what}", start)

    def integer(self, start, end, what="integer") -> int:
        q = self.rational(start, end, what)
        if q.denominator != 1:
            self.fail(f"expected an integer {what}", self.strip(start, end)[0])
        return int(q)

    def spec(self, start, end) -> SequenceSpec:
        start, end = self.strip(start, end)
        if start >= end:
            self.fail("empty sequence", start)
        t = self.text[start:end].replace(" ", "")
        simple = {"n!": Factorial(), "n^n": NPowerN(), "p(n)": Partition("exact"),
                  "p_asym(n)": Partition("asymptotic"), "mersenne": PrimeExp(2, mersenne=True)}
        if t in simple:
            return simple[t]
        for name, handler in (("fib-exp", self._fib), ("superfact", self._superfact),
                              ("iterprod", self._iterprod), ("dexp", self._dexp),
                              ("powexp", self._powexp)):
            if t.startswith(name + "("):
                a, b = self.call(start, end, name)
                return self._wrap(handler, a, b, start)
        return self._power(start, end)

    def _wrap(self, handler, a, b, pos):
        try:
            return handler(a, b)
        except SpecParseError:
            raise
        except InvalidInput as exc:
            self.fail(str(exc), pos)

    def _fib(self, a, b):
        return FibonacciExp(self.rational(a, b, "base"))

    def _superfact(self, a, b):
        h = self.integer(a, b, "order h")
        if h < 1:
            self.fail("superfact needs h >= 1", a)
        return Factorial() if h == 1 else IteratedProduct(Factorial(), h)

    def _iterprod(self, a, b):
        spans = self.split_args(a, b)
        if len(spans) != 2:
            self.fail("iterprod takes (spec, h)", a)
        inner = self.spec(*spans[0])
        return IteratedProduct(inner, self.integer(*spans[1], "order h"))

    def _dexp(self, a, b):
        main, *poly = self.split_args(a, b, ";")
        spans = self.split_args(*main)
        if len(spans) != 2 or len(poly) > 1:
            self.fail("dexp takes (a, theta) or (a, theta; c0,...,ck)", a)
        base = self.rational(*spans[0], "base")
        theta = self._theta(*spans[1])
        minimal = None
        if poly:
            minimal = tuple(self.integer(*s, "coefficient") for s in self.split_args(*poly[0]))
        return DoublyExp(base, theta, minimal)

    def _theta(self, start, end) -> Theta:
        start, end = self.strip(start, end)
        t = self.text[start:end].replace(" ", "")
        if t == "phi":
            return Theta("phi", None)
        if t.startswith("sqrt("):
            a, b = self.call(start, end, "sqrt")
            return Theta("sqrt", self.integer(a, b, "radicand"))
        if t.startswith("root("):
            a, b = self.call(start, end, "root")
            return Theta("root", tuple(self.integer(*s, "coefficient") for s in self.split_args(a, b)))
        return Theta("rational", self.rational(start, end, "theta"))

    def _powexp(self, a, b):
        spans = self.split_args(a, b)
        if len(spans) != 4:
            self.fail("powexp takes (lam, gamma, c, beta)", a)
        exprs = []
        for s, e in spans:
            s, e = self.strip(s, e)
            try:
                exprs.append(Expr(self.text[s:e]))
            except SpecParseError as exc:
                self.fail(exc.args[0].split("\n")[0], s + exc.position)
        return PowerExp(*exprs)

    def _power(self, start, end) -> SequenceSpec:
        spans = self.split_args(start, end, "^")
        if len(spans) < 2:
            self.fail("unrecognised sequence; expected a^n, a^(P), n!, p(n), ...", start)
        base_span = spans[0]
        exp_start = spans[1][0]
        base = self.rational(*base_span, "base")
        es, ee = self.strip(exp_start, end)
        exp_text = self.text[es:ee].replace(" ", "")
        try:
            if exp_text == "n":
                return Geometric(base)
            if exp_text == "prime(n)":
                return PrimeExp(base)
            if exp_text.startswith("(") and exp_text.endswith(")"):
                es, ee = es + 1, ee - 1
            coeffs = _PolyReader(self, es, ee).read()
            return PolyExp(base, coeffs)
        except SpecParseError:
            raise
        except InvalidInput as exc:
            self.fail(str(exc), start)


class _PolyReader:
    """Expand a polynomial expression in ``n`` into rational coefficients."""

    def __init__(self, parser: _Parser, start: int, end: int):
        self.parser = parser
        self.start = start
        self.source = parser.text[start:end].replace("^", "**")

    def read(self) -> tuple:
        try:
            tree = ast.parse(self.source.strip(), mode="eval")
        except SyntaxError as exc:
            self.parser.fail(f"cannot parse exponent: {exc.msg}", self.start + max((exc.offset or 1) - 1, 0))
        return tuple(self._poly(tree.body))

    def _fail(self, node, message):
        self.parser.fail(message, self.start + getattr(node, "col_offset", 0))

    def _poly(self, node) -> list:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            seg = ast.get_source_segment(self.source.strip(), node)
            return [Fraction(seg)]
        if isinstance(node, ast.Name):
            if node.id != "n":
                self._fail(node, f"unknown symbol {node.id!r} in exponent")
            return [Fraction(0), Fraction(1)]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            p = self._poly(node.operand)
            return [-c for c in p] if isinstance(node.op, ast.USub) else p
        if isinstance(node, ast.BinOp):
            left = self._poly(node.left)
            right = self._poly(node.right)
            if isinstance(node.op, ast.Add):
                return _padd(left, right)
            if isinstance(node.op, ast.Sub):
                return _padd(left, [-c for c in right])
            if isinstance(node.op, ast.Mult):
                return _pmul(left, right)
            if isinstance(node.op, ast.Div):
                if len(_trim(right)) != 1 or right[0] == 0:
                    self._fail(node, "can only divide by a nonzero constant")
                return [c / right[0] for c in left]
            if isinstance(node.op, ast.Pow):
                r = _trim(right)
                if len(r) != 1 or r[0].denominator != 1 or not 0 <= r[0] <= 64:
                    self._fail(node, "exponent powers must be small non-negative integers")
                out = [Fraction(1)]
                for _ in range(int(r[0])):
                    out = _pmul(out, left)
                return out
        self._fail(node, "exponent must be a polynomial in n with rational coefficients")


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _padd(a, b):
    out = [Fraction(0)] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return out


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def parse(text: str) -> SequenceSpec:
    if not isinstance(text, str):
        raise InvalidInput("sequence spec must be a string")
    parser = _Parser(text)
    return parser.spec(0, len(text))


def iterated_polynomial(spec: PolyExp, h: int) -> PolyExp:
    """The PolyExp equal to ``IteratedProduct(spec, h)``."""
    b = list(spec.binomial_coeffs())
    for _ in range(h - 1):
        # sum_{m<=n} C(m-1, j) = C(n, j+1) = C(n-1, j+1) + C(n-1, j)
        b = [b[0]] + [b[i] + b[i - 1] for i in range(1, len(b))] + [b[-1]]
    return PolyExp.from_binomial(spec.a, b)


def as_polyexp(spec: SequenceSpec) -> PolyExp | None:
    """Polynomial-exponent normal form, when the spec has one."""
    if isinstance(spec, PolyExp):
        return spec
    if isinstance(spec, Geometric):
        if spec.a > 1:
            return PolyExp(spec.a, (0, 1))
        return None
    if isinstance(spec, IteratedProduct):
        inner = as_polyexp(spec.inner)
        return iterated_polynomial(inner, spec.h) if inner is not None else None
    return None
