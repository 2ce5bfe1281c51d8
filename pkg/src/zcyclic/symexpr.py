"""Symbolic scalar expressions over chart coordinates and free parameters.

Expressions are sympy objects restricted to exact rationals, symbols, sums,
products, rational powers and the kernels ``exp``, ``sqrt``, ``sin``, ``cos``.
This module owns the text grammar (parser and printer), the canonical form,
zero testing and floating-point evaluation.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from typing import Mapping

import mpmath
import sympy as sp

Expr = sp.Expr

FUNCTIONS = ("exp", "sqrt", "sin", "cos")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")

# probe settings for the numeric zero-test fallback
PROBE_POINTS = 8
PROBE_MAX_ATTEMPTS = 64
PROBE_ZERO_TOL = 1e-9
PROBE_NONZERO_TOL = 1e-6
PROBE_RANGE = (0.5, 3.0)


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text!r}")


class UnknownSymbolError(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown identifier {name!r}")


class SingularEvaluation(ExprError):
    pass


class UndecidableZero(ExprError):
    """The numeric probe could not separate an expression from zero."""

    def __init__(self, expr: Expr, detail: str = ""):
        self.expr = expr
        msg = f"cannot decide whether {to_string(expr)} vanishes"
        super().__init__(msg + (f" ({detail})" if detail else ""))


_SIGN_ASSUMPTIONS = {">": "positive", "<": "negative", "!=": "nonzero"}


@dataclass(frozen=True)
class SymbolTable:
    """Registered coordinates and parameters with their sign assumptions.

    ``assumptions`` maps a symbol name to one of ``">"``, ``"<"``, ``"!="``
    (always against zero).
    """

    coords: tuple[str, ...]
    params: tuple[str, ...] = ()
    assumptions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        names = self.coords + self.params
        if len(set(names)) != len(names):
            raise ExprError(f"duplicate symbol names in {names}")
        for name in names:
            if not _IDENT.fullmatch(name) or name in FUNCTIONS:
                raise ExprError(f"invalid symbol name {name!r}")
        for name, rel in self.assumptions.items():
            if name not in names:
                raise UnknownSymbolError(name)
            if rel not in _SIGN_ASSUMPTIONS:
                raise ExprError(f"unsupported assumption {name} {rel} 0")
        object.__setattr__(self, "assumptions", dict(sorted(self.assumptions.items())))

    def __hash__(self):
        return hash((self.coords, self.params, tuple(self.assumptions.items())))

    @property
    def names(self) -> tuple[str, ...]:
        return self.coords + self.params

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def symbol(self, name: str) -> sp.Symbol:
        if name not in self.names:
            raise UnknownSymbolError(name)
        kw = {"real": True}
        rel = self.assumptions.get(name)
        if rel is not None:
            kw[_SIGN_ASSUMPTIONS[rel]] = True
        return sp.Symbol(name, **kw)

    def coord_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(self.symbol(c) for c in self.coords)

    def all_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(self.symbol(c) for c in self.names)

    def sample_point(self, rng: random.Random) -> dict[sp.Symbol, float]:
        """Draw one admissible point, magnitudes uniform in ``PROBE_RANGE``."""
        point = {}
        for name in self.names:
            mag = rng.uniform(*PROBE_RANGE)
            rel = self.assumptions.get(name)
            if rel == ">":
                sign = 1
            elif rel == "<":
                sign = -1
            else:
                sign = rng.choice((-1, 1))
            point[self.symbol(name)] = sign * mag
        return point


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, text: str, symbols: SymbolTable):
        self.text = text
        self.pos = 0
        self.symbols = symbols

    def error(self, message: str, pos: int | None = None):
        raise ExprSyntaxError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.take(ch):
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")

    def parse(self) -> Expr:
        if not self.text.strip():
            self.error("empty expression")
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.take("+"):
                e = e + self.term()
            elif self.take("-"):
                e = e - self.term()
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.take("*"):
                e = e * self.factor()
            elif self.peek() == "/":
                pos = self.pos
                self.pos += 1
                d = self.factor()
                if d == 0:
                    self.error("division by zero", pos)
                e = e / d
            else:
                return e

    def factor(self) -> Expr:
        if self.take("-"):
            return -self.factor()
        if self.take("+"):
            return self.factor()
        base = self.base()
        if self.take("^"):
            pos = self.pos
            exp = self.exponent()
            if base == 0 and exp < 0:
                self.error("zero raised to a negative power", pos)
            return base**exp
        return base

    def exponent(self) -> sp.Rational:
        if self.take("("):
            neg = self.take("-")
            num = self.integer()
            den = 1
            if self.take("/"):
                den = self.integer()
                if den == 0:
                    self.error("zero denominator in exponent")
            self.expect(")")
            value = sp.Rational(num, den)
            return -value if neg else value
        neg = self.take("-")
        num = self.integer()
        return sp.Integer(-num if neg else num)

    def integer(self) -> int:
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.error("expected integer")
        self.pos = m.end()
        return int(m.group())

    def base(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit():
            value = self.integer()
            if self.peek() == ".":
                self.error("floating-point literals are not allowed")
            return sp.Integer(value)
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error(f"unexpected {ch!r}" if ch else "unexpected end of input")
        start = self.pos
        self.pos = m.end()
        name = m.group()
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return _apply(name, arg)
        if name not in self.symbols:
            raise UnknownSymbolError(name) from ExprSyntaxError(
                "unknown identifier", self.text, start
            )
        return self.symbols.symbol(name)


def _apply(name: str, arg: Expr) -> Expr:
    if name == "sqrt":
        return sp.sqrt(arg)
    return getattr(sp, name)(arg)


def parse_expr(text: str, symbols: SymbolTable) -> Expr:
    """Parse ``text`` and return the normalized expression."""
    return normalize(_Parser(text, symbols).parse())


def parse_raw(text: str, symbols: SymbolTable) -> Expr:
    """Parse without normalizing (keeps the typed shape for printing)."""
    return _Parser(text, symbols).parse()


# ---------------------------------------------------------------- printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def to_string(e: Expr) -> str:
    """Render ``e`` in the expression grammar accepted by :func:`parse_expr`."""
    return _print(sp.sympify(e))[0]


def _wrap(pair: tuple[str, int], prec: int) -> str:
    text, p = pair
    return f"({text})" if p < prec else text


def _print(e: Expr) -> tuple[str, int]:
    if e.is_Rational:
        if e.q == 1:
            return (str(e.p), _PREC_ATOM if e.p >= 0 else _PREC_NEG)
        text = f"{e.p}/{e.q}"
        return (text, _PREC_MUL if e.p > 0 else _PREC_NEG)
    if e is sp.E:
        return ("exp(1)", _PREC_ATOM)
    if e.is_Symbol:
        return (e.name, _PREC_ATOM)
    if isinstance(e, sp.exp):
        return (f"exp({_print(e.args[0])[0]})", _PREC_ATOM)
    if isinstance(e, (sp.sin, sp.cos)):
        return (f"{type(e).__name__}({_print(e.args[0])[0]})", _PREC_ATOM)
    if e.is_Add:
        terms = e.as_ordered_terms()
        parts = []
        for i, t in enumerate(terms):
            neg = t.could_extract_minus_sign()
            body = _print(-t if neg else t)
            text = _wrap(body, _PREC_MUL) if neg or i else body[0]
            if i == 0:
                parts.append(("-" + _wrap(body, _PREC_MUL)) if neg else text)
            else:
                parts.append((" - " if neg else " + ") + text)
        return ("".join(parts), _PREC_ADD)
    if e.is_Mul or e.is_Pow:
        return _print_product(e)
    raise ExprError(f"expression outside the grammar: {e!r}")


def _print_power(base: Expr, exp: sp.Rational) -> tuple[str, int]:
    if exp == 1:
        return _print(base)
    if exp == sp.Rational(1, 2):
        return (f"sqrt({_print(base)[0]})", _PREC_ATOM)
    b = _wrap(_print(base), _PREC_ATOM)
    if exp.q == 1 and exp > 0:
        return (f"{b}^{exp.p}", _PREC_POW)
    return (f"{b}^({exp.p}/{exp.q})" if exp.q != 1 else f"{b}^({exp.p})", _PREC_POW)


def _print_product(e: Expr) -> tuple[str, int]:
    coeff, factors = e.as_coeff_mul()
    num: list[tuple[Expr, sp.Rational]] = []
    den: list[tuple[Expr, sp.Rational]] = []
    for f in factors:
        base, exp = f.as_base_exp()
        if isinstance(f, sp.exp):
            base, exp = f, sp.Integer(1)
        if not exp.is_Rational:
            raise ExprError(f"non-rational exponent in {e!r}")
        (den if exp < 0 else num).append((base, abs(exp) if exp < 0 else exp))
    neg = coeff < 0
    coeff = abs(coeff)
    num_parts = [str(coeff.p)] if coeff.p != 1 or not num else []
    num_parts += [_wrap(_print_power(b, x), _PREC_MUL) for b, x in num]
    den_parts = [str(coeff.q)] if coeff.q != 1 else []
    den_parts += [_wrap(_print_power(b, x), _PREC_POW) for b, x in den]
    if len(num_parts) == 1 and not den_parts and num and coeff.p == 1:
        text, prec = _print_power(*num[0])
    else:
        text, prec = "*".join(num_parts), _PREC_MUL
        if len(num_parts) == 1 and not den_parts:
            prec = _PREC_ATOM
    if den_parts:
        d = den_parts[0] if len(den_parts) == 1 else "(" + "*".join(den_parts) + ")"
        text, prec = f"{text}/{d}", _PREC_MUL
    if neg:
        text, prec = "-" + _wrap((text, prec), _PREC_MUL), _PREC_NEG
    return (text, prec)


# ---------------------------------------------------------- canonical form


def normalize(e: Expr) -> Expr:
    """Canonical rational form: expanded numerator over expanded denominator.

    Kernels (``exp(u)``, ``sqrt(u)``, fractional powers, ``sin``/``cos``) are
    treated as atoms; exponentials are split into products of exponentials
    of single monomials so that ``exp(u)*exp(v)`` and ``exp(u + v)`` agree.
    """
    e = sp.sympify(e)
    if e.is_Rational or e.is_Symbol:
        return e
    if any(a.is_Float for a in e.atoms(sp.Number)):
        raise ExprError(f"floating-point constant in {e}")
    e = sp.expand_power_exp(e)
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    if den == 0 or num.has(sp.zoo, sp.nan) or den.has(sp.zoo, sp.nan):
        raise ExprError("division by an identically zero expression")
    return sp.cancel(sp.expand(num) / sp.expand(den))


def differentiate(e: Expr, v: sp.Symbol | str, symbols: SymbolTable | None = None) -> Expr:
    """Exact partial derivative; parameters are constants."""
    if isinstance(v, str):
        if symbols is None:
            raise ExprError("a symbol table is needed to resolve a name")
        v = symbols.symbol(v)
    elif symbols is not None and v.name not in symbols:
        raise UnknownSymbolError(v.name)
    return normalize(sp.diff(e, v))


def kernels(e: Expr) -> set[Expr]:
    """Atomic non-rational sub-expressions of ``e``."""
    out: set[Expr] = set()
    for node in sp.preorder_traversal(sp.expand_power_exp(sp.sympify(e))):
        if isinstance(node, (sp.exp, sp.sin, sp.cos)):
            if isinstance(node, sp.exp):
                coeff, rest = node.args[0].as_coeff_Mul()
                node = sp.exp(rest) if coeff.is_Rational else node
            out.add(node)
        elif node.is_Pow and node.exp.is_Rational and node.exp.q != 1:
            out.add(node.base ** sp.Rational(1, node.exp.q))
    return out


def _exactly_decidable(e: Expr) -> bool:
    """True when the canonical form alone decides zero-ness: the only kernels
    are exponentials of polynomials, which are algebraically independent."""
    if any(a is sp.E for a in e.atoms()):
        return False
    for k in kernels(e):
        if not isinstance(k, sp.exp) or not k.args[0].is_polynomial():
            return False
    return True


# --------------------------------------------------------------- evaluation


def evaluate(e: Expr, point: Mapping, *, backend: str = "float"):
    """Numeric value of ``e`` at ``point`` (keys: Symbols or names).

    ``backend="mp"`` evaluates with mpmath at the ambient precision.
    """
    mp = backend == "mp"
    values = {}
    for k, v in point.items():
        values[k.name if isinstance(k, sp.Symbol) else k] = mpmath.mpf(v) if mp else v
    return _eval(sp.sympify(e), values, mp)


def _eval(e: Expr, values: dict, mp: bool):
    if e.is_Integer:
        return mpmath.mpf(int(e)) if mp else float(e)
    if e.is_Rational:
        return mpmath.mpf(e.p) / e.q if mp else e.p / e.q
    if e is sp.E:
        return mpmath.e if mp else math.e
    if e.is_Symbol:
        try:
            return values[e.name]
        except KeyError:
            raise ExprError(f"no value given for {e.name}") from None
    if e.is_Add:
        total = 0
        for a in e.args:
            total = total + _eval(a, values, mp)
        return total
    if e.is_Mul:
        prod = 1
        for a in e.args:
            prod = prod * _eval(a, values, mp)
        return prod
    if e.is_Pow:
        base = _eval(e.base, values, mp)
        exp = e.exp
        if not exp.is_Rational:
            raise ExprError(f"non-rational exponent in {e}")
        if base == 0 and exp < 0:
            raise SingularEvaluation(f"zero denominator in {e}")
        if exp.q == 1:
            return base ** int(exp)
        if base < 0:
            raise SingularEvaluation(f"fractional power of a negative base in {e}")
        if mp:
            return mpmath.power(base, mpmath.mpf(exp.p) / exp.q)
        return base ** (exp.p / exp.q)
    if isinstance(e, sp.exp):
        x = _eval(e.args[0], values, mp)
        try:
            return mpmath.exp(x) if mp else math.exp(x)
        except OverflowError:
            raise SingularEvaluation(f"overflow in {e}") from None
    if isinstance(e, (sp.sin, sp.cos)):
        x = _eval(e.args[0], values, mp)
        fn = getattr(mpmath if mp else math, type(e).__name__)
        return fn(x)
    raise ExprError(f"cannot evaluate {e!r}")


# -------------------------------------------------------------- zero tests


@dataclass(frozen=True)
class ZeroVerdict:
    is_zero: bool
    method: str  # "exact" or "numeric"

    def __bool__(self):
        return self.is_zero


def _terms(e: Expr) -> tuple[Expr, ...]:
    num, _ = sp.fraction(sp.together(e))
    num = sp.expand(num)
    return num.args if num.is_Add else (num,)


def zero_test(e: Expr, symbols: SymbolTable, seed: int = 0) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically.

    Exact normalization first; if kernels survive and block cancellation the
    numerator is probed at ``PROBE_POINTS`` seeded admissible points.
    """
    e = sp.sympify(e)
    n = normalize(e)
    if n == 0:
        return ZeroVerdict(True, "exact")
    if _exactly_decidable(n):
        return ZeroVerdict(False, "exact")
    terms = _terms(n)
    rng = random.Random(seed)
    hits = attempts = 0
    worst = 0.0
    while hits < PROBE_POINTS:
        attempts += 1
        if attempts > PROBE_MAX_ATTEMPTS:
            raise UndecidableZero(n, "too many singular sample points")
        point = symbols.sample_point(rng)
        try:
            vals = [complex(_eval(t, {k.name: v for k, v in point.items()}, False))
                    for t in terms]
        except (SingularEvaluation, ZeroDivisionError, OverflowError, ValueError):
            continue
        scale = sum(abs(v) for v in vals)
        if not math.isfinite(scale):
            continue
        hits += 1
        if scale == 0:
            continue
        rel = abs(sum(vals)) / scale
        worst = max(worst, rel)
    if worst <= PROBE_ZERO_TOL:
        return ZeroVerdict(True, "numeric")
    if worst >= PROBE_NONZERO_TOL:
        return ZeroVerdict(False, "numeric")
    raise UndecidableZero(n, f"relative residual {worst:.3g} in the grey zone")


def is_zero(e: Expr, symbols: SymbolTable, seed: int = 0) -> bool:
    return zero_test(e, symbols, seed).is_zero
