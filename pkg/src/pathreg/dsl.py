"""Textual DSL for kernel expressions: parser and canonical printer.

Grammar (whitespace-insensitive)::

    expr   := term ('+' term)*
    term   := [number '*'] factor ('*' factor)*
    factor := call | '(' expr ')'
    call   := name '(' kwargs? ')'
            | 'tensor(' expr (',' expr)+ ')'
            | 'warp(' expr ',' warpname ['(' kwargs ')'] ')'
    kwargs := name '=' (number | name) (',' name '=' (number | name))*

Leaf names: matern, wendland, se, rq, periodic, wiener, linear, poly,
feature.  A leading ``number '*'`` on a term is a conic weight and must be
positive; numeric literals are not kernels on their own.  ``parse_kernel``
and ``print_kernel`` round-trip: parsing the printed form reproduces a
structurally equal tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kernels import (
    Conic,
    Feature,
    Kernel,
    Linear,
    Matern,
    ParameterError,
    Periodic,
    Polynomial,
    Product,
    RationalQuadratic,
    SquaredExponential,
    TensorProduct,
    Warp,
    Wendland,
    Wiener,
)

__all__ = ["ParseError", "parse_kernel", "print_kernel"]


class ParseError(Exception):
    """Syntax or validation error, carrying the byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[+*(),=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'name' | 'sym' | 'end'
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


_LEAF_PARAMS = {
    # name -> (required, optional-with-defaults, name-valued params)
    "matern": (("nu",), ("lengthscale", "dim"), ()),
    "wendland": (("d", "n"), ("lengthscale",), ()),
    "se": ((), ("lengthscale", "dim"), ()),
    "rq": (("a",), ("lengthscale", "dim"), ()),
    "periodic": ((), ("lengthscale",), ()),
    "wiener": ((), (), ()),
    "linear": ((), ("dim",), ()),
    "poly": (("m",), ("dim",), ()),
    "feature": (("family", "degree"), (), ("family",)),
}

_WARP_PARAMS = {
    "affine": ("a", "b"),
    "abs_power": ("beta",),
}


def _build_leaf(name: str, kwargs: dict[str, tuple], name_pos: int) -> Kernel:
    required, optional, nameval = _LEAF_PARAMS[name]
    allowed = set(required) | set(optional)
    for key, (_value, pos, kind) in kwargs.items():
        if key not in allowed:
            raise ParseError(f"unknown parameter {key!r} for {name}", pos)
        want_name = key in nameval
        if want_name != (kind == "name"):
            expected = "an identifier" if want_name else "a number"
            raise ParseError(f"parameter {key!r} of {name} expects {expected}", pos)
    for key in required:
        if key not in kwargs:
            raise ParseError(f"{name} requires parameter {key!r}", name_pos)

    def val(key, default=None):
        return kwargs[key][0] if key in kwargs else default

    def ival(key, default=None):
        if key not in kwargs:
            return default
        value, pos, _kind = kwargs[key]
        return _coerce_int(value, key, pos)

    try:
        if name == "matern":
            return Matern(val("nu"), lengthscale=val("lengthscale", 1.0), input_dim=ival("dim", 1))
        if name == "wendland":
            return Wendland(ival("d"), ival("n"), lengthscale=val("lengthscale", 1.0))
        if name == "se":
            return SquaredExponential(lengthscale=val("lengthscale", 1.0), input_dim=ival("dim", 1))
        if name == "rq":
            return RationalQuadratic(val("a"), lengthscale=val("lengthscale", 1.0), input_dim=ival("dim", 1))
        if name == "periodic":
            return Periodic(lengthscale=val("lengthscale", 1.0))
        if name == "wiener":
            return Wiener()
        if name == "linear":
            return Linear(input_dim=ival("dim", 1))
        if name == "poly":
            return Polynomial(ival("m"), input_dim=ival("dim", 1))
        if name == "feature":
            return Feature(val("family"), ival("degree"))
    except (ParameterError, ValueError) as exc:
        offset = name_pos
        m = re.match(r".*parameter (\w+)", str(exc))
        if m:
            dsl_key = {"input_dim": "dim"}.get(m.group(1), m.group(1))
            if dsl_key in kwargs:
                offset = kwargs[dsl_key][1]
        raise ParseError(str(exc), offset) from exc
    raise AssertionError(name)


def _coerce_int(value: float, key: str, pos: int) -> int:
    if float(value) != int(value):
        raise ParseError(f"parameter {key!r} must be an integer", pos)
    return int(value)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind == "sym" and tok.text == text:
            return self.advance()
        raise ParseError(f"expected {text!r}", tok.pos)

    def parse(self) -> Kernel:
        expr = self.parse_expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return expr

    def parse_expr(self) -> Kernel:
        terms = [self.parse_term()]
        while self.peek().kind == "sym" and self.peek().text == "+":
            self.advance()
            terms.append(self.parse_term())
        if len(terms) == 1 and terms[0][0] is None:
            return terms[0][1]
        weights = tuple(1.0 if w is None else w for w, _ in terms)
        return Conic(tuple(k for _, k in terms), weights)

    def parse_term(self) -> tuple:
        weight = None
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            weight = float(tok.text)
            if weight <= 0.0:
                raise ParseError("conic weight must be positive", tok.pos)
            self.expect("*")
        factors = [self.parse_factor()]
        while self.peek().kind == "sym" and self.peek().text == "*":
            self.advance()
            factors.append(self.parse_factor())
        kernel = factors[0] if len(factors) == 1 else Product(tuple(factors))
        return (weight, kernel)

    def parse_factor(self) -> Kernel:
        tok = self.peek()
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "number":
            raise ParseError(
                "a numeric literal is only allowed as a leading conic weight", tok.pos
            )
        if tok.kind == "name":
            return self.parse_call()
        raise ParseError(f"expected a kernel expression, got {tok.text!r}", tok.pos)

    def parse_call(self) -> Kernel:
        name_tok = self.advance()
        name = name_tok.text
        if name == "tensor":
            self.expect("(")
            factors = [self.parse_expr()]
            while self.peek().text == ",":
                self.advance()
                factors.append(self.parse_expr())
            self.expect(")")
            if len(factors) < 2:
                raise ParseError("tensor(...) needs at least two factors", name_tok.pos)
            return TensorProduct(tuple(factors))
        if name == "warp":
            self.expect("(")
            child = self.parse_expr()
            self.expect(",")
            fam_tok = self.peek()
            if fam_tok.kind != "name":
                raise ParseError("expected a warp family name", fam_tok.pos)
            self.advance()
            if fam_tok.text not in _WARP_PARAMS:
                raise ParseError(f"unknown warp family {fam_tok.text!r}", fam_tok.pos)
            kwargs = {}
            if self.peek().text == "(":
                self.advance()
                kwargs = self.parse_kwargs()
                self.expect(")")
            self.expect(")")
            return self._build_warp(child, fam_tok.text, kwargs, fam_tok.pos)
        if name not in _LEAF_PARAMS:
            raise ParseError(f"unknown kernel name {name!r}", name_tok.pos)
        self.expect("(")
        kwargs = {}
        if self.peek().text != ")":
            kwargs = self.parse_kwargs()
        self.expect(")")
        return _build_leaf(name, kwargs, name_tok.pos)

    def parse_kwargs(self) -> dict[str, tuple]:
        kwargs = {}
        while True:
            key_tok = self.peek()
            if key_tok.kind != "name":
                raise ParseError("expected a parameter name", key_tok.pos)
            self.advance()
            self.expect("=")
            val_tok = self.peek()
            if val_tok.kind == "number":
                value = float(val_tok.text)
            elif val_tok.kind == "name":
                value = val_tok.text
            else:
                raise ParseError("expected a parameter value", val_tok.pos)
            self.advance()
            if key_tok.text in kwargs:
                raise ParseError(f"duplicate parameter {key_tok.text!r}", key_tok.pos)
            kwargs[key_tok.text] = (value, val_tok.pos, val_tok.kind)
            if self.peek().text != ",":
                return kwargs
            self.advance()

    def _build_warp(self, child: Kernel, family: str, kwargs: dict, pos: int) -> Kernel:
        order = _WARP_PARAMS[family]
        for key, (_v, kpos, kind) in kwargs.items():
            if key not in order:
                raise ParseError(f"unknown parameter {key!r} for warp {family}", kpos)
            if kind != "number":
                raise ParseError(f"parameter {key!r} expects a number", kpos)
        params = []
        for key in order:
            if key not in kwargs:
                raise ParseError(f"warp {family} requires parameter {key!r}", pos)
            params.append(kwargs[key][0])
        try:
            return Warp(child, family, tuple(params))
        except ParameterError as exc:
            offset = pos
            m = re.match(r".*parameter (\w+)", str(exc))
            if m and m.group(1) in kwargs:
                offset = kwargs[m.group(1)][1]
            raise ParseError(str(exc), offset) from exc


def parse_kernel(text: str) -> Kernel:
    """Parse a kernel DSL string into an expression tree."""
    return _Parser(text).parse()


def _fmt(value: float) -> str:
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _print_factor(expr: Kernel) -> str:
    # parenthesise sums and products when they appear as factors so the
    # printed form re-parses to the same tree shape
    if isinstance(expr, (Conic, Product)):
        return f"({print_kernel(expr)})"
    return print_kernel(expr)


def print_kernel(expr: Kernel) -> str:
    """Canonical textual form; parse_kernel(print_kernel(e)) equals e."""
    if isinstance(expr, Matern):
        parts = [f"nu={_fmt(expr.nu)}"]
        if expr.lengthscale != 1.0:
            parts.append(f"lengthscale={_fmt(expr.lengthscale)}")
        if expr.input_dim != 1:
            parts.append(f"dim={expr.input_dim}")
        return f"matern({', '.join(parts)})"
    if isinstance(expr, Wendland):
        parts = [f"d={expr.d}", f"n={expr.n}"]
        if expr.lengthscale != 1.0:
            parts.append(f"lengthscale={_fmt(expr.lengthscale)}")
        return f"wendland({', '.join(parts)})"
    if isinstance(expr, SquaredExponential):
        parts = []
        if expr.lengthscale != 1.0:
            parts.append(f"lengthscale={_fmt(expr.lengthscale)}")
        if expr.input_dim != 1:
            parts.append(f"dim={expr.input_dim}")
        return f"se({', '.join(parts)})"
    if isinstance(expr, RationalQuadratic):
        parts = [f"a={_fmt(expr.a)}"]
        if expr.lengthscale != 1.0:
            parts.append(f"lengthscale={_fmt(expr.lengthscale)}")
        if expr.input_dim != 1:
            parts.append(f"dim={expr.input_dim}")
        return f"rq({', '.join(parts)})"
    if isinstance(expr, Periodic):
        if expr.lengthscale != 1.0:
            return f"periodic(lengthscale={_fmt(expr.lengthscale)})"
        return "periodic()"
    if isinstance(expr, Wiener):
        return "wiener()"
    if isinstance(expr, Linear):
        return f"linear(dim={expr.input_dim})" if expr.input_dim != 1 else "linear()"
    if isinstance(expr, Polynomial):
        parts = [f"m={expr.m}"]
        if expr.input_dim != 1:
            parts.append(f"dim={expr.input_dim}")
        return f"poly({', '.join(parts)})"
    if isinstance(expr, Feature):
        return f"feature(family={expr.family}, degree={expr.degree})"
    if isinstance(expr, Conic):
        terms = []
        single = len(expr.terms) == 1
        for child, w in zip(expr.terms, expr.weights):
            body = _print_factor(child)
            if w != 1.0 or single:
                terms.append(f"{_fmt(w)}*{body}")
            else:
                terms.append(body)
        return " + ".join(terms)
    if isinstance(expr, Product):
        return " * ".join(_print_factor(c) for c in expr.factors)
    if isinstance(expr, TensorProduct):
        return f"tensor({', '.join(print_kernel(c) for c in expr.factors)})"
    if isinstance(expr, Warp):
        order = _WARP_PARAMS[expr.family]
        kw = ", ".join(f"{k}={_fmt(v)}" for k, v in zip(order, expr.params))
        return f"warp({print_kernel(expr.child)}, {expr.family}({kw}))"
    raise TypeError(f"not a kernel expression: {expr!r}")
