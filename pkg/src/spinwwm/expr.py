"""Operator expressions and state specifications for the command line.

Grammar (``^`` binds tightest, then unary minus, then ``*``, then ``+ -``;
binary operators are left associative)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := "-" unary | power
    power  := atom ("^" INTEGER)*
    atom   := NUMBER | NUMBER "i" | "i" | IDENT | "(" expr ")"

Identifiers: ``I Jx Jy Jz Jp Jm``.  Numbers are decimal literals such as
``2``, ``0.5`` or ``1e-3``; a trailing ``i`` makes them imaginary, so
``1+2i`` is a complex constant.  There is no implicit multiplication and no
division.  Exponents are integer literals between 0 and 16.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .spin import Direction, Spin, coherent_ket, spin_matrices

__all__ = [
    "ParseError",
    "StateSpecError",
    "Num",
    "Ident",
    "Neg",
    "BinOp",
    "Pow",
    "parse_operator",
    "pretty",
    "degree",
    "eval_operator",
    "parse_state",
    "IDENTIFIERS",
    "MAX_EXPONENT",
]

IDENTIFIERS = ("I", "Jx", "Jy", "Jz", "Jp", "Jm")
MAX_EXPONENT = 16


class ParseError(ValueError):
    """Syntax error; ``position`` is a byte offset into the UTF-8 source."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at byte {position})")
        self.message = message
        self.position = position


class StateSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: complex
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Ident:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    pos: int = field(default=0, compare=False)


Expr = Union[Num, Ident, Neg, BinOp, Pow]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # num, imag, ident, op, end
    text: str
    pos: int  # character offset


def _tokenize(src: str):
    pos = 0
    toks = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group()
        if kind == "num":
            end = m.end()
            if end < len(src) and src[end] == "i" and not (
                end + 1 < len(src) and (src[end + 1].isalnum() or src[end + 1] == "_")
            ):
                toks.append(_Tok("imag", text, pos))
                pos = end + 1
                continue
            toks.append(_Tok("num", text, pos))
        elif kind == "ident":
            toks.append(_Tok("imag", "1", pos) if text == "i" else _Tok("ident", text, pos))
        elif kind == "op":
            toks.append(_Tok("op", text, pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def error(self, message, tok=None):
        tok = tok or self.toks[self.i]
        return ParseError(message, len(self.src[: tok.pos].encode("utf-8")))

    @property
    def tok(self):
        return self.toks[self.i]

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self):
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}; expected an operator")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            tok = self.tok
            self.i += 1
            node = BinOp(tok.text, node, self.term(), tok.pos)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text == "*":
            tok = self.tok
            self.i += 1
            node = BinOp("*", node, self.unary(), tok.pos)
        return node

    def unary(self):
        tok = self.tok
        if self.accept("-"):
            return Neg(self.unary(), tok.pos)
        return self.power()

    def power(self):
        node = self.atom()
        while self.tok.kind == "op" and self.tok.text == "^":
            caret = self.tok
            self.i += 1
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be a nonnegative integer literal", tok)
            k = int(tok.text)
            if k > MAX_EXPONENT:
                raise self.error(f"exponent {k} exceeds the cap of {MAX_EXPONENT}", tok)
            self.i += 1
            node = Pow(node, k, caret.pos)
        return node

    def atom(self):
        tok = self.tok
        if tok.kind in ("num", "imag"):
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error("numeric literal out of range", tok)
            self.i += 1
            return Num(complex(0, value) if tok.kind == "imag" else complex(value), tok.pos)
        if tok.kind == "ident":
            if tok.text not in IDENTIFIERS:
                raise self.error(
                    f"unknown identifier {tok.text!r}; expected one of {', '.join(IDENTIFIERS)}", tok
                )
            self.i += 1
            return Ident(tok.text, tok.pos)
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                raise self.error("expected ')'")
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {tok.text!r}")


def parse_operator(src: str) -> Expr:
    """Parse an operator expression; raises :class:`ParseError`."""
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    return _Parser(src).parse()


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


_PREC = {"+": 1, "-": 1, "*": 2}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Num) and node.value.real != 0 and node.value.imag != 0:
        return 1
    return 5


def pretty(node: Expr) -> str:
    """Canonical text with the fewest parentheses that preserve the tree."""
    if isinstance(node, Num):
        re_, im = node.value.real, node.value.imag
        if im == 0:
            return _fmt_real(re_)
        if re_ == 0:
            return _fmt_real(im) + "i"
        return f"{_fmt_real(re_)}+{_fmt_real(im)}i"
    if isinstance(node, Ident):
        return node.name
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        return "-" + (f"({inner})" if _prec(node.operand) < 3 else inner)
    if isinstance(node, Pow):
        inner = pretty(node.base)
        return (f"({inner})" if _prec(node.base) < 5 else inner) + f"^{node.exponent}"
    p = _PREC[node.op]
    left = pretty(node.left)
    right = pretty(node.right)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    sep = "*" if node.op == "*" else f" {node.op} "
    return f"{left}{sep}{right}"


def degree(node: Expr) -> int:
    """Polynomial degree in the spin components."""
    if isinstance(node, Num):
        return 0
    if isinstance(node, Ident):
        return 0 if node.name == "I" else 1
    if isinstance(node, Neg):
        return degree(node.operand)
    if isinstance(node, Pow):
        return degree(node.base) * node.exponent
    if node.op == "*":
        return degree(node.left) + degree(node.right)
    return max(degree(node.left), degree(node.right))


def eval_operator(node: Expr, spin: Spin, scale: float = 1.0) -> np.ndarray:
    """Matrix of the expression; each spin component is multiplied by ``scale``."""
    mats = spin_matrices(spin)
    eye = np.eye(spin.dim, dtype=complex)

    def ev(n):
        if isinstance(n, Num):
            return n.value * eye
        if isinstance(n, Ident):
            return eye.copy() if n.name == "I" else scale * mats[n.name]
        if isinstance(n, Neg):
            return -ev(n.operand)
        if isinstance(n, Pow):
            return np.linalg.matrix_power(ev(n.base), n.exponent)
        a, b = ev(n.left), ev(n.right)
        if n.op == "+":
            return a + b
        if n.op == "-":
            return a - b
        return a @ b

    return ev(node)


def _parse_seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise StateSpecError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise StateSpecError("seed must lie in [0, 2**64)")
    return seed


def _complex_normal(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def parse_state(src: str, spin: Spin) -> np.ndarray:
    """Density matrix for a state spec.

    ``mixed``, ``ket:<m>`` (e.g. ``ket:-1/2``), ``coherent:<theta>,<phi>``,
    ``random_pure:<seed>`` or ``random_density:<seed>``.
    """
    kind, _, arg = str(src).strip().partition(":")
    kind = kind.strip()
    arg = arg.strip()
    d = spin.dim
    if kind == "mixed" and not arg:
        return np.eye(d, dtype=complex) / d
    if kind == "ket":
        try:
            m = Fraction(arg)
        except (ValueError, ZeroDivisionError):
            raise StateSpecError(f"cannot parse m from {arg!r}") from None
        two_m = 2 * m
        if two_m.denominator != 1 or abs(m) > Fraction(spin.two_j, 2) or (spin.two_j - int(two_m)) % 2:
            raise StateSpecError(f"m={arg} is not a valid projection for j={spin}")
        psi = np.zeros(d, dtype=complex)
        psi[(spin.two_j - int(two_m)) // 2] = 1.0
        return np.outer(psi, psi.conj())
    if kind == "coherent":
        parts = arg.split(",")
        if len(parts) != 2:
            raise StateSpecError("coherent state needs 'coherent:<theta>,<phi>'")
        try:
            n = Direction(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise StateSpecError(f"bad coherent direction {arg!r}: {exc}") from None
        psi = coherent_ket(spin, n)
        return np.outer(psi, psi.conj())
    if kind == "random_pure":
        rng = np.random.default_rng(_parse_seed(arg))
        psi = _complex_normal(rng, d)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    if kind == "random_density":
        rng = np.random.default_rng(_parse_seed(arg))
        g = _complex_normal(rng, (d, d))
        rho = g @ g.conj().T
        return rho / np.trace(rho).real
    raise StateSpecError(
        f"malformed state spec {src!r}; expected mixed, ket:<m>, coherent:<theta>,<phi>, "
        "random_pure:<seed> or random_density:<seed>"
    )
