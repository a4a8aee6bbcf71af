"""Small real-expression language evaluated with certified intervals.

Expressions use ``+ - * / ^``, decimal or rational literals (read exactly),
the variable ``n``, constants ``pi``, ``e``, ``phi``, ``sqrt2`` and the
functions ``sqrt``, ``log`` (natural, or ``log(x, b)``) and ``exp``.
Evaluation goes through ``mpmath.iv`` so every result is an enclosure.
"""

from __future__ import annotations

import ast
import threading
from fractions import Fraction

from mpmath import iv

from .errors import InvalidInput, PrecisionBudgetExceeded, SpecParseError
from .fixed_frac import FixedReal, _ceil_div

_iv_lock = threading.RLock()

_CONSTANTS = ("pi", "e", "phi", "sqrt2")
_FUNCTIONS = {"sqrt": 1, "log": (1, 2), "exp": 1}


def _validate(node, text):
    if isinstance(node, ast.Expression):
        return _validate(node.body, text)
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
        _validate(node.left, text)
        _validate(node.right, text)
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _validate(node.operand, text)
        return
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return
    if isinstance(node, ast.Name) and (node.id == "n" or node.id in _CONSTANTS):
        return
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS:
        arity = _FUNCTIONS[node.func.id]
        allowed = arity if isinstance(arity, tuple) else (arity,)
        if len(node.args) not in allowed or node.keywords:
            raise SpecParseError(f"wrong number of arguments to {node.func.id}", text, node.col_offset)
        for arg in node.args:
            _validate(arg, text)
        return
    raise SpecParseError("unsupported expression element", text, getattr(node, "col_offset", 0))


def _literal(node, source: str) -> Fraction:
    # read the literal from the source text so 1.5 becomes exactly 3/2
    seg = ast.get_source_segment(source, node)
    return Fraction(seg if seg is not None else repr(node.value))


class Expr:
    """A parsed expression in ``n``; immutable and hashable by canonical text."""

    __slots__ = ("text", "_tree", "_source")

    def __init__(self, text: str):
        if not isinstance(text, str) or not text.strip():
            raise SpecParseError("empty expression", str(text), 0)
        source = text.strip().replace("^", "**")
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise SpecParseError(f"cannot parse expression: {exc.msg}", text, max((exc.offset or 1) - 1, 0)) from None
        _validate(tree, text)
        self._tree = tree
        self._source = source
        self.text = ast.unparse(tree).replace("**", "^").replace(" ", "")

    def __repr__(self):
        return f"Expr({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and other.text == self.text

    def __hash__(self):
        return hash(("Expr", self.text))

    @property
    def uses_n(self) -> bool:
        return any(isinstance(nd, ast.Name) and nd.id == "n" for nd in ast.walk(self._tree))

    def rational(self, n: int | None = None) -> Fraction | None:
        """Exact value when the expression is rational-valued, else None."""
        try:
            return self._exact(self._tree.body, n)
        except _NotRational:
            return None

    def _exact(self, node, n):
        if isinstance(node, ast.Constant):
            return _literal(node, self._source)
        if isinstance(node, ast.Name):
            if node.id == "n" and n is not None:
                return Fraction(n)
            raise _NotRational
        if isinstance(node, ast.UnaryOp):
            v = self._exact(node.operand, n)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = self._exact(node.left, n)
            b = self._exact(node.right, n)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if b == 0:
                    raise InvalidInput("division by zero in expression")
                return a / b
            if b.denominator == 1 and abs(b.numerator) <= 4096 and (a != 0 or b > 0):
                return a ** int(b)
        raise _NotRational

    def interval(self, n: int | None = None, prec: int = 256):
        """Enclosure of the value as an ``mpmath.iv.mpf``."""
        with _iv_lock:
            saved = iv.prec
            iv.prec = prec
            try:
                return self._iv(self._tree.body, n)
            finally:
                iv.prec = saved

    def _iv(self, node, n):
        if isinstance(node, ast.Constant):
            q = _literal(node, self._source)
            return iv.mpf(q.numerator) / q.denominator if q.denominator != 1 else iv.mpf(q.numerator)
        if isinstance(node, ast.Name):
            if node.id == "n":
                if n is None:
                    raise InvalidInput("expression needs a value for n")
                return iv.mpf(n)
            if node.id == "pi":
                return +iv.pi
            if node.id == "e":
                return +iv.e
            if node.id == "phi":
                return (1 + iv.sqrt(5)) / 2
            return iv.sqrt(2)
        if isinstance(node, ast.UnaryOp):
            v = self._iv(node.operand, n)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = self._iv(node.left, n)
            if isinstance(node.op, ast.Pow):
                exp = self._exact(node.right, n) if self._is_rational_node(node.right) else None
                if exp is not None and exp.denominator == 1:
                    return a ** int(exp)
                b = self._iv(node.right, n)
                return iv.exp(b * iv.log(a))
            b = self._iv(node.right, n)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            return a / b
        name = node.func.id
        args = [self._iv(arg, n) for arg in node.args]
        if name == "sqrt":
            return iv.sqrt(args[0])
        if name == "exp":
            return iv.exp(args[0])
        if len(args) == 2:
            return iv.log(args[0]) / iv.log(args[1])
        return iv.log(args[0])

    def _is_rational_node(self, node) -> bool:
        return not any(isinstance(nd, (ast.Name, ast.Call)) for nd in ast.walk(node))

    def fixed(self, n: int | None = None, bits: int = 192) -> FixedReal:
        """Certified ``FixedReal`` value at ``bits`` fractional bits."""
        exact = self.rational(n)
        if exact is not None:
            return FixedReal.from_rational(exact, bits)
        return enclose(lambda prec: self.interval(n, prec), bits, self.text)


def enclose(evaluate, bits: int, what: str = "expression") -> FixedReal:
    """Turn an interval evaluator ``prec -> iv.mpf`` into a ``FixedReal``.

    Precision is raised until the enclosure is within a few ulps.
    """
    prec = bits + 64
    for _ in range(8):
        with _iv_lock:
            saved = iv.prec
            iv.prec = prec
            try:
                value = evaluate(prec)
            finally:
                iv.prec = saved
        lo_f, hi_f = _endpoints(value)
        lo = (lo_f.numerator << bits) // lo_f.denominator
        hi = _ceil_div(hi_f.numerator << bits, hi_f.denominator)
        raw = (lo + hi) // 2
        err = max(raw - lo, hi - raw, 1)
        if err <= 1 << 8:
            return FixedReal(raw, bits, err)
        # magnitude ate the guard bits; widen and retry
        prec += max(64, err.bit_length())
    raise PrecisionBudgetExceeded(f"could not enclose {what} to {bits} bits")


class _NotRational(Exception):
    pass


def _endpoints(value) -> tuple[Fraction, Fraction]:
    """Exact endpoints of an interval, read from the raw mpf tuples."""
    out = []
    for sign, man, exp, bc in value._mpi_:
        if bc < 0 or (man == 0 and exp != 0):
            raise PrecisionBudgetExceeded("interval evaluation overflowed")
        v = Fraction(int(man)) * (Fraction(2) ** int(exp))
        out.append(-v if sign else v)
    return out[0], out[1]


def parse_expr(text: str) -> Expr:
    return Expr(text)
