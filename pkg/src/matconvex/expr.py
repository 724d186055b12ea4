"""Closed-form scalar functions on real intervals.

A :class:`FunctionSpec` couples an expression tree in the variable ``x`` with
an :class:`Interval`.  Trees are immutable dataclasses, so structural equality
is plain ``==``.  The text grammar accepted by :func:`parse`::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?
    atom    := number | "x" | "(" expr ")"
             | ("exp" | "log" | "inv") "(" expr ")"
             | "pow" "(" expr "," expr ")"
             | "poly" "[" number ("," number)* "]" ("(" expr ")")?
    spec    := expr ("on" interval)?
    interval:= ("(" | "[") bound "," bound (")" | "]")
    bound   := ["-"] (number | "inf")

Exponents must be constant sub-expressions.  Without an ``on`` suffix the
domain is the whole real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Interval", "FunctionSpec", "Node", "Const", "Var", "Sum", "Product",
    "Neg", "Recip", "Pow", "Exp", "Log", "Poly", "evaluate", "evaluate_node",
    "evaluate_mp", "domain_check", "DomainReport", "parse", "parse_interval",
    "to_text", "substitute", "interior_grid", "REAL_LINE",
]


# --------------------------------------------------------------------------
# Intervals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"interval needs lo < hi, got ({lo}, {hi})")
        if math.isinf(lo) and not self.lo_open or math.isinf(hi) and not self.hi_open:
            raise ValueError("an infinite endpoint must be open")

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def is_whole_line(self) -> bool:
        return math.isinf(self.lo) and math.isinf(self.hi)

    @property
    def midpoint(self) -> float:
        if self.is_bounded:
            return 0.5 * (self.lo + self.hi)
        if self.is_whole_line:
            return 0.0
        return self.lo + 1.0 if math.isfinite(self.lo) else self.hi - 1.0

    def contains_interior(self, t: float) -> bool:
        return self.lo < t < self.hi

    def __str__(self) -> str:
        return "{}{}, {}{}".format(
            "(" if self.lo_open else "[", _fmt_bound(self.lo),
            _fmt_bound(self.hi), ")" if self.hi_open else "]")


REAL_LINE = Interval(-math.inf, math.inf)


def _fmt_bound(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _unit_nodes(n: int, spacing: str) -> np.ndarray:
    """n ascending nodes strictly inside (-1, 1)."""
    if spacing == "chebyshev":
        k = np.arange(n, 0, -1)
        return np.cos((2 * k - 1) * np.pi / (2 * n))
    if spacing == "uniform":
        return np.linspace(-1.0, 1.0, n + 2)[1:-1]
    raise ValueError(f"unknown spacing {spacing!r}")


def interior_grid(interval: Interval, n: int, spacing: str = "chebyshev") -> np.ndarray:
    """Ascending interior scan points of ``interval``.

    Finite intervals are shrunk by 1e-6 of their width at each end.  A
    half-line (a, inf) is reached through t = a + u/(1-u), u in (0, 1), and
    the whole line through t = u/(1-u^2), u in (-1, 1).
    """
    if n < 1:
        raise ValueError("grid needs at least one point")
    x = _unit_nodes(n, spacing)
    lo, hi = interval.lo, interval.hi
    if interval.is_bounded:
        delta = 1e-6 * (hi - lo)
        a, b = lo + delta, hi - delta
        return 0.5 * (a + b) + 0.5 * (b - a) * x
    if interval.is_whole_line:
        return x / (1.0 - x * x)
    u = 0.5 * (x + 1.0)
    if math.isfinite(lo):
        return lo + u / (1.0 - u)
    return np.sort(hi - u / (1.0 - u))


# --------------------------------------------------------------------------
# Expression trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError("constants must be finite")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Sum:
    children: tuple


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class Neg:
    child: "Node"


@dataclass(frozen=True)
class Recip:
    child: "Node"


@dataclass(frozen=True)
class Pow:
    child: "Node"
    exponent: float

    def __post_init__(self):
        object.__setattr__(self, "exponent", float(self.exponent))
        if not math.isfinite(self.exponent):
            raise ValueError("exponents must be finite")


@dataclass(frozen=True)
class Exp:
    child: "Node"


@dataclass(frozen=True)
class Log:
    child: "Node"


@dataclass(frozen=True)
class Poly:
    """c0 + c1*u + ... + cd*u^d with u the child expression (default x)."""

    coeffs: tuple
    child: "Node" = field(default_factory=Var)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError("polynomial needs finite coefficients")
        object.__setattr__(self, "coeffs", coeffs)


Node = Union[Const, Var, Sum, Product, Neg, Recip, Pow, Exp, Log, Poly]


@dataclass(frozen=True)
class FunctionSpec:
    expr: Node
    domain: Interval = REAL_LINE
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", to_text(self.expr, self.domain))

    def __call__(self, t):
        return evaluate(self, t)

    def with_domain(self, domain: Interval) -> "FunctionSpec":
        return FunctionSpec(self.expr, domain, to_text(self.expr, domain))


def is_integer_exponent(p: float) -> bool:
    return float(p).is_integer() and abs(p) <= 1024


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


def _check(ok, what: str, arg):
    if not np.all(ok):
        bad = np.asarray(arg)[~np.asarray(ok)] if np.ndim(arg) else arg
        raise DomainError(f"{what} of invalid argument {float(np.ravel(bad)[0])!r}")


def evaluate_node(node: Node, t):
    """Evaluate a tree at a float or a float array (elementwise)."""
    if isinstance(node, Const):
        return node.value + 0.0 * t
    if isinstance(node, Var):
        return t
    if isinstance(node, Sum):
        out = evaluate_node(node.children[0], t)
        for c in node.children[1:]:
            out = out + evaluate_node(c, t)
        return out
    if isinstance(node, Product):
        out = evaluate_node(node.children[0], t)
        for c in node.children[1:]:
            out = out * evaluate_node(c, t)
        return out
    if isinstance(node, Neg):
        return -evaluate_node(node.child, t)
    if isinstance(node, Recip):
        u = evaluate_node(node.child, t)
        _check(u != 0, "reciprocal", u)
        return 1.0 / u
    if isinstance(node, Pow):
        u = evaluate_node(node.child, t)
        p = node.exponent
        if is_integer_exponent(p):
            if p < 0:
                _check(u != 0, "negative power", u)
            return np.power(u, int(p)) if np.ndim(u) else float(u) ** int(p)
        _check(u > 0 if p < 0 else u >= 0, "fractional power", u)
        return np.power(u, p)
    if isinstance(node, Exp):
        u = evaluate_node(node.child, t)
        with np.errstate(over="ignore"):
            out = np.exp(u)
        _check(np.isfinite(out), "exp overflow", u)
        return out
    if isinstance(node, Log):
        u = evaluate_node(node.child, t)
        _check(u > 0, "log", u)
        return np.log(u)
    if isinstance(node, Poly):
        u = evaluate_node(node.child, t)
        out = node.coeffs[-1] + 0.0 * u
        for c in reversed(node.coeffs[:-1]):
            out = out * u + c
        return out
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(f: FunctionSpec, t):
    """Value of ``f`` at interior point(s) ``t``; raises DomainError otherwise."""
    arr = np.asarray(t, dtype=float)
    inside = (arr > f.domain.lo) & (arr < f.domain.hi)
    if not np.all(inside):
        bad = float(np.ravel(arr[~inside])[0]) if arr.ndim else float(arr)
        raise DomainError(f"{bad!r} is not interior to {f.domain}", bad)
    try:
        with np.errstate(all="ignore"):
            out = evaluate_node(f.expr, arr if arr.ndim else float(arr))
    except DomainError as exc:
        raise DomainError(str(exc), None if arr.ndim else float(arr)) from None
    except (OverflowError, ZeroDivisionError) as exc:
        raise DomainError(str(exc), None if arr.ndim else float(arr)) from None
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite value", None if arr.ndim else float(arr))
    return float(out) if not arr.ndim else np.asarray(out, dtype=float)


def evaluate_mp(node: Node, t):
    """Evaluate with mpmath numbers at the current ``mpmath.mp`` precision."""
    import mpmath

    if isinstance(node, Const):
        return mpmath.mpf(node.value)
    if isinstance(node, Var):
        return mpmath.mpf(t)
    if isinstance(node, Sum):
        return mpmath.fsum(evaluate_mp(c, t) for c in node.children)
    if isinstance(node, Product):
        out = mpmath.mpf(1)
        for c in node.children:
            out *= evaluate_mp(c, t)
        return out
    if isinstance(node, Neg):
        return -evaluate_mp(node.child, t)
    if isinstance(node, Recip):
        u = evaluate_mp(node.child, t)
        if u == 0:
            raise DomainError("reciprocal of zero", float(t))
        return 1 / u
    if isinstance(node, Pow):
        u = evaluate_mp(node.child, t)
        p = node.exponent
        if is_integer_exponent(p):
            if p < 0 and u == 0:
                raise DomainError("negative power of zero", float(t))
            return u ** int(p)
        if u < 0 or (u == 0 and p < 0):
            raise DomainError("fractional power of invalid argument", float(t))
        return mpmath.power(u, mpmath.mpf(p))
    if isinstance(node, Exp):
        return mpmath.exp(evaluate_mp(node.child, t))
    if isinstance(node, Log):
        u = evaluate_mp(node.child, t)
        if u <= 0:
            raise DomainError("log of nonpositive argument", float(t))
        return mpmath.log(u)
    if isinstance(node, Poly):
        u = evaluate_mp(node.child, t)
        out = mpmath.mpf(node.coeffs[-1])
        for c in reversed(node.coeffs[:-1]):
            out = out * u + c
        return out
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class DomainReport:
    ok: bool
    probes: int
    t: float | None = None
    message: str = ""


def domain_check(f: FunctionSpec, probes: int = 64) -> DomainReport:
    """Probe ``f`` on an interior grid; report the first failing point, if any."""
    grid = interior_grid(f.domain, max(probes, 64), spacing="uniform")
    for t in grid:
        try:
            evaluate(f, float(t))
        except DomainError as exc:
            return DomainReport(False, len(grid), float(t), str(exc))
    return DomainReport(True, len(grid))


def substitute(node: Node, replacement: Node) -> Node:
    """Replace every occurrence of the variable by ``replacement``."""
    if isinstance(node, Var):
        return replacement
    if isinstance(node, Const):
        return node
    if isinstance(node, (Sum, Product)):
        return type(node)(tuple(substitute(c, replacement) for c in node.children))
    if isinstance(node, Pow):
        return Pow(substitute(node.child, replacement), node.exponent)
    if isinstance(node, Poly):
        return Poly(node.coeffs, substitute(node.child, replacement))
    return type(node)(substitute(node.child, replacement))


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------


def _num(v: float) -> str:
    return repr(float(v))


def to_text(node: Node, domain: Interval | None = None) -> str:
    """Print a tree so that :func:`parse` rebuilds an identical tree."""
    s = _print(node)
    if domain is not None:
        s += f" on {domain}"
    return s


def _print(node: Node) -> str:
    if isinstance(node, Const):
        return _num(node.value) if node.value >= 0 else f"(-{_num(-node.value)})"
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Sum):
        return "(" + " + ".join(_print(c) for c in node.children) + ")"
    if isinstance(node, Product):
        return "(" + " * ".join(_print(c) for c in node.children) + ")"
    if isinstance(node, Neg):
        inner = _print(node.child)
        return f"(-({inner}))" if isinstance(node.child, Const) else f"(-{inner})"
    if isinstance(node, Recip):
        return f"inv({_print(node.child)})"
    if isinstance(node, Pow):
        return f"pow({_print(node.child)}, {_num(node.exponent)})"
    if isinstance(node, Exp):
        return f"exp({_print(node.child)})"
    if isinstance(node, Log):
        return f"log({_print(node.child)})"
    if isinstance(node, Poly):
        body = "poly[" + ", ".join(_num(c) for c in node.coeffs) + "]"
        return body if isinstance(node.child, Var) else f"{body}({_print(node.child)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_PUNCT = set("+-*/^(),[]")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _PUNCT:
            tokens.append(("op", ch, i))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            try:
                float(text[i:j])
            except ValueError:
                raise ParseError(f"bad number {text[i:j]!r}", i) from None
            tokens.append(("num", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j].lower(), i))
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, (Sum, Product)):
        return any(_has_var(c) for c in node.children)
    return _has_var(node.child)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, at = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", at)

    def at(self, value: str) -> bool:
        return self.peek()[1] == value and self.peek()[0] in ("op", "name")

    # grammar ----------------------------------------------------------------

    def expr(self) -> Node:
        terms = [self.term()]
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else _negate(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Node:
        factors = [self.unary()]
        while self.at("*") or self.at("/"):
            op = self.take()[1]
            u = self.unary()
            factors.append(u if op == "*" else Recip(u))
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def unary(self) -> Node:
        if self.at("-"):
            self.take()
            literal = self.peek()[0] == "num"
            operand = self.unary()
            # "-3" is a constant; "-(3)" stays a negation node
            if literal and isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^"):
            at = self.take()[2]
            return Pow(base, self.constant(self.unary(), at))
        return base

    def constant(self, node: Node, at: int) -> float:
        if _has_var(node):
            raise ParseError("exponent must be a constant", at)
        try:
            value = float(evaluate_node(node, 0.0))
        except DomainError as exc:
            raise ParseError(str(exc), at) from None
        if not math.isfinite(value):
            raise ParseError("exponent is not finite", at)
        return value

    def signed_number(self) -> float:
        sign = 1.0
        if self.at("-"):
            self.take()
            sign = -1.0
        kind, val, at = self.take()
        if kind == "num":
            return sign * float(val)
        if kind == "name" and val == "inf":
            return sign * math.inf
        raise ParseError(f"expected a number, found {val or 'end of input'!r}", at)

    def atom(self) -> Node:
        kind, val, at = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val == "x":
                return Var()
            if val in ("exp", "log", "inv"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return {"exp": Exp, "log": Log, "inv": Recip}[val](arg)
            if val == "pow":
                self.expect("(")
                base = self.expr()
                self.expect(",")
                p_at = self.peek()[2]
                p = self.constant(self.expr(), p_at)
                self.expect(")")
                return Pow(base, p)
            if val == "poly":
                self.expect("[")
                coeffs = [self.signed_number()]
                while self.at(","):
                    self.take()
                    coeffs.append(self.signed_number())
                self.expect("]")
                if not all(math.isfinite(c) for c in coeffs):
                    raise ParseError("polynomial coefficients must be finite", at)
                child: Node = Var()
                if self.at("("):
                    self.take()
                    child = self.expr()
                    self.expect(")")
                return Poly(tuple(coeffs), child)
            raise ParseError(f"unknown name {val!r}", at)
        raise ParseError(f"unexpected {val or 'end of input'!r}", at)

    def interval(self) -> Interval:
        kind, val, at = self.take()
        if val not in ("(", "["):
            raise ParseError("interval must start with '(' or '['", at)
        lo = self.signed_number()
        self.expect(",")
        hi = self.signed_number()
        kind2, val2, at2 = self.take()
        if val2 not in (")", "]"):
            raise ParseError("interval must end with ')' or ']'", at2)
        try:
            return Interval(lo, hi, val == "(", val2 == ")")
        except ValueError as exc:
            raise ParseError(str(exc), at) from None


def _negate(node: Node) -> Node:
    if isinstance(node, Const):
        return Const(-node.value)
    return Neg(node)


def parse(text: str) -> FunctionSpec:
    """Parse ``"<expr> [on (a,b)]"`` into a FunctionSpec."""
    p = _Parser(text)
    expr = p.expr()
    domain = REAL_LINE
    if p.peek()[0] == "name" and p.peek()[1] == "on":
        p.take()
        domain = p.interval()
    kind, val, at = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {val!r}", at)
    return FunctionSpec(expr, domain, text.strip())


def parse_interval(text: str) -> Interval:
    """Parse ``"(a,b)"`` or the CLI shorthand ``"a,b"`` (open)."""
    text = text.strip()
    if text and text[0] not in "([":
        text = f"({text})"
    p = _Parser(text)
    iv = p.interval()
    kind, val, at = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing input {val!r}", at)
    return iv


def iter_nodes(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, (Sum, Product)):
        for c in node.children:
            yield from iter_nodes(c)
    elif not isinstance(node, (Const, Var)):
        yield from iter_nodes(node.child)


def poly_spec(coeffs: Sequence[float], domain: Interval = REAL_LINE) -> FunctionSpec:
    return FunctionSpec(Poly(tuple(coeffs)), domain)
