"""
Holomorphic expressions of one complex variable ``w``.

Only holomorphic primitives are representable: there is no conjugation,
modulus, real or imaginary part node. Trees are immutable; evaluation is pure
and works on Python complex scalars as well as numpy arrays.

Grammar (EBNF)::

    expr      = term , { ( "+" | "-" ) , term } ;
    term      = unary , { ( "*" | "/" ) , unary } ;
    unary     = ( "-" | "+" ) , unary | power ;
    power     = primary , [ "^" , exponent ] ;
    exponent  = [ "-" | "+" ] , integer
              | "(" , [ "-" | "+" ] , integer , ")" ;
    primary   = number , [ "i" ] | "i" | "w"
              | function , "(" , expr , ")"
              | "(" , expr , ")" ;
    function  = "sin" | "cos" | "exp" | "sinh" | "cosh" ;
    number    = ( digits , [ "." , [ digits ] ] | "." , digits ) ,
                [ ( "e" | "E" ) , [ "+" | "-" ] , digits ] ;

A number directly followed by ``i`` is an imaginary literal, so ``3+4i`` and
``3+4*i`` denote the same constant. Constant subtrees are folded while parsing.
"""
from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field
from typing import ClassVar, NamedTuple

import numpy as np

from app.errors import DisallowedFunction, EvalSingularity, ExpressionSyntaxError

# Names rejected with DisallowedFunction rather than a plain syntax error
NON_HOLOMORPHIC_NAMES = {
    "conj", "conjugate", "abs", "re", "im", "real", "imag", "arg", "angle",
    "Re", "Im", "norm",
}


# ---------------------------------------------------------------------------
# Tree
# ---------------------------------------------------------------------------

class ExprNode:
    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True, slots=True)
class Var(ExprNode):
    pass


@dataclass(frozen=True, slots=True)
class Const(ExprNode):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, slots=True)
class Add(ExprNode):
    left: ExprNode
    right: ExprNode


@dataclass(frozen=True, slots=True)
class Sub(ExprNode):
    left: ExprNode
    right: ExprNode


@dataclass(frozen=True, slots=True)
class Mul(ExprNode):
    left: ExprNode
    right: ExprNode


@dataclass(frozen=True, slots=True)
class Div(ExprNode):
    left: ExprNode
    right: ExprNode


@dataclass(frozen=True, slots=True)
class Neg(ExprNode):
    operand: ExprNode


@dataclass(frozen=True, slots=True)
class PowInt(ExprNode):
    base: ExprNode
    exponent: int


@dataclass(frozen=True, slots=True)
class Function(ExprNode):
    arg: ExprNode

    name: ClassVar[str] = ""
    ufunc: ClassVar[np.ufunc]
    scalar: ClassVar = None


@dataclass(frozen=True, slots=True)
class Sin(Function):
    name: ClassVar[str] = "sin"
    ufunc: ClassVar[np.ufunc] = np.sin
    scalar: ClassVar = staticmethod(cmath.sin)


@dataclass(frozen=True, slots=True)
class Cos(Function):
    name: ClassVar[str] = "cos"
    ufunc: ClassVar[np.ufunc] = np.cos
    scalar: ClassVar = staticmethod(cmath.cos)


@dataclass(frozen=True, slots=True)
class Exp(Function):
    name: ClassVar[str] = "exp"
    ufunc: ClassVar[np.ufunc] = np.exp
    scalar: ClassVar = staticmethod(cmath.exp)


@dataclass(frozen=True, slots=True)
class Sinh(Function):
    name: ClassVar[str] = "sinh"
    ufunc: ClassVar[np.ufunc] = np.sinh
    scalar: ClassVar = staticmethod(cmath.sinh)


@dataclass(frozen=True, slots=True)
class Cosh(Function):
    name: ClassVar[str] = "cosh"
    ufunc: ClassVar[np.ufunc] = np.cosh
    scalar: ClassVar = staticmethod(cmath.cosh)


FUNCTIONS: dict[str, type[Function]] = {cls.name: cls for cls in (Sin, Cos, Exp, Sinh, Cosh)}

ZERO = Const(0)
ONE = Const(1)


def _is_const(node: ExprNode, value: complex | None = None) -> bool:
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


# ---------------------------------------------------------------------------
# Folding constructors (used by the parser and by differentiate)
# ---------------------------------------------------------------------------

def add(left: ExprNode, right: ExprNode) -> ExprNode:
    if _is_const(left) and _is_const(right):
        return Const(left.value + right.value)
    if _is_const(left, 0):
        return right
    if _is_const(right, 0):
        return left
    return Add(left, right)


def sub(left: ExprNode, right: ExprNode) -> ExprNode:
    if _is_const(left) and _is_const(right):
        return Const(left.value - right.value)
    if _is_const(right, 0):
        return left
    if _is_const(left, 0):
        return neg(right)
    return Sub(left, right)


def mul(left: ExprNode, right: ExprNode) -> ExprNode:
    if _is_const(left) and _is_const(right):
        return Const(left.value * right.value)
    if _is_const(left, 0) or _is_const(right, 0):
        return ZERO
    if _is_const(left, 1):
        return right
    if _is_const(right, 1):
        return left
    return Mul(left, right)


def div(left: ExprNode, right: ExprNode) -> ExprNode:
    if _is_const(left) and _is_const(right) and right.value != 0:
        return Const(left.value / right.value)
    if _is_const(left, 0) and not _is_const(right, 0):
        return ZERO
    if _is_const(right, 1):
        return left
    return Div(left, right)


def neg(operand: ExprNode) -> ExprNode:
    if _is_const(operand):
        return Const(-operand.value)
    if isinstance(operand, Neg):
        return operand.operand
    return Neg(operand)


def power(base: ExprNode, exponent: int) -> ExprNode:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if _is_const(base) and not (base.value == 0 and exponent < 0):
        try:
            return Const(base.value ** exponent)
        except OverflowError:
            pass  # left unfolded; evaluate() reports it
    return PowInt(base, exponent)


def apply_function(cls: type[Function], arg: ExprNode) -> ExprNode:
    if _is_const(arg):
        try:
            return Const(cls.scalar(arg.value))
        except OverflowError:
            pass
    return cls(arg)


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------

class Token(NamedTuple):
    kind: str      # NUMBER, IMAG, IDENT, OP, END
    text: str
    offset: int    # byte offset


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    index = 0
    while index < len(source):
        match = _TOKEN_RE.match(source, index)
        if match is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[index]!r}", _byte_offset(source, index)
            )
        kind = match.lastgroup
        text = match.group()
        offset = _byte_offset(source, index)
        index = match.end()
        if kind == "ws":
            continue
        if kind == "ident" and text == "i" and tokens and tokens[-1].kind == "NUMBER":
            # "4i" / "4 i": imaginary literal, normalised here
            previous = tokens.pop()
            tokens.append(Token("IMAG", previous.text, previous.offset))
            continue
        tokens.append(Token(kind.upper(), text, offset))
    tokens.append(Token("END", "", _byte_offset(source, len(source))))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, text: str) -> Token:
        token = self.current
        if token.kind != "OP" or token.text != text:
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"expected '{text}', found {found!r}", token.offset)
        return self.advance()

    def parse(self) -> ExprNode:
        node = self.expr()
        if self.current.kind != "END":
            raise ExpressionSyntaxError(f"unexpected {self.current.text!r}", self.current.offset)
        return node

    def expr(self) -> ExprNode:
        node = self.term()
        while self.current.kind == "OP" and self.current.text in "+-":
            op = self.advance().text
            right = self.term()
            node = add(node, right) if op == "+" else sub(node, right)
        return node

    def term(self) -> ExprNode:
        node = self.unary()
        while self.current.kind == "OP" and self.current.text in "*/":
            op = self.advance().text
            right = self.unary()
            node = mul(node, right) if op == "*" else div(node, right)
        return node

    def unary(self) -> ExprNode:
        if self.current.kind == "OP" and self.current.text in "+-":
            op = self.advance().text
            operand = self.unary()
            return neg(operand) if op == "-" else operand
        return self.power()

    def power(self) -> ExprNode:
        base = self.primary()
        if self.current.kind == "OP" and self.current.text == "^":
            self.advance()
            return power(base, self.exponent())
        return base

    def exponent(self) -> int:
        parenthesized = self.current.kind == "OP" and self.current.text == "("
        if parenthesized:
            self.advance()
        sign = 1
        if self.current.kind == "OP" and self.current.text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        token = self.current
        if token.kind != "NUMBER" or not token.text.isdigit():
            raise ExpressionSyntaxError("exponent must be an integer literal", token.offset)
        self.advance()
        if parenthesized:
            self.expect_op(")")
        return sign * int(token.text)

    def primary(self) -> ExprNode:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Const(float(token.text))
        if token.kind == "IMAG":
            self.advance()
            return Const(complex(0.0, float(token.text)))
        if token.kind == "IDENT":
            return self.identifier()
        if token.kind == "OP" and token.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", token.offset)

    def identifier(self) -> ExprNode:
        token = self.advance()
        name = token.text
        if name == "w":
            return Var()
        if name == "i":
            return Const(1j)
        if name in NON_HOLOMORPHIC_NAMES:
            raise DisallowedFunction(name, token.offset)
        if name not in FUNCTIONS:
            raise ExpressionSyntaxError(f"unknown name {name!r}", token.offset)
        self.expect_op("(")
        arg = self.expr()
        self.expect_op(")")
        return apply_function(FUNCTIONS[name], arg)


def parse(source: str) -> ExprNode:
    """Parse ``source`` into an expression tree (constants folded)."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _const_source(value: complex) -> str:
    if value.imag == 0:
        return f"({value.real!r})"
    if value.real == 0:
        return f"({value.imag!r}*i)"
    return f"({value.real!r}+{value.imag!r}*i)"


def to_source(node: ExprNode) -> str:
    """Print ``node`` in the parser grammar; re-parsing gives the same values."""
    match node:
        case Var():
            return "w"
        case Const(value=value):
            return _const_source(value)
        case Add(left=left, right=right):
            return f"({to_source(left)}+{to_source(right)})"
        case Sub(left=left, right=right):
            return f"({to_source(left)}-{to_source(right)})"
        case Mul(left=left, right=right):
            return f"({to_source(left)}*{to_source(right)})"
        case Div(left=left, right=right):
            return f"({to_source(left)}/{to_source(right)})"
        case Neg(operand=operand):
            return f"(-{to_source(operand)})"
        case PowInt(base=base, exponent=exponent):
            return f"({to_source(base)}^({exponent}))"
        case Function(arg=arg):
            return f"{node.name}({to_source(arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _evaluate(node: ExprNode, w):
    match node:
        case Var():
            return w
        case Const(value=value):
            return value
        case Add(left=left, right=right):
            return _evaluate(left, w) + _evaluate(right, w)
        case Sub(left=left, right=right):
            return _evaluate(left, w) - _evaluate(right, w)
        case Mul(left=left, right=right):
            return _evaluate(left, w) * _evaluate(right, w)
        case Div(left=left, right=right):
            denominator = _evaluate(right, w)
            if np.any(denominator == 0):
                raise EvalSingularity(f"division by zero in {to_source(node)}")
            return _evaluate(left, w) / denominator
        case Neg(operand=operand):
            return -_evaluate(operand, w)
        case PowInt(base=base, exponent=exponent):
            value = _evaluate(base, w)
            if exponent < 0 and np.any(value == 0):
                raise EvalSingularity(f"zero raised to a negative power in {to_source(node)}")
            return value ** exponent
        case Function(arg=arg):
            return node.ufunc(_evaluate(arg, w))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: ExprNode, w):
    """
    Value of ``node`` at ``w`` (complex scalar, or array of any shape).

    Raises EvalSingularity on division by zero and whenever the value
    overflows or is not finite at some point.
    """
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            if np.ndim(w) == 0:
                value = complex(_evaluate(node, complex(w)))
            else:
                points = np.asarray(w, dtype=complex)
                value = _evaluate(node, points)
                value = np.broadcast_to(np.asarray(value, dtype=complex), points.shape).copy()
    except OverflowError as exc:
        raise EvalSingularity(f"overflow evaluating {to_source(node)}") from exc
    if not np.all(np.isfinite(value)):
        raise EvalSingularity(f"{to_source(node)} is not finite at every requested point")
    return value


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def differentiate(node: ExprNode) -> ExprNode:
    """Exact symbolic d/dw of ``node``."""
    match node:
        case Var():
            return ONE
        case Const():
            return ZERO
        case Add(left=left, right=right):
            return add(differentiate(left), differentiate(right))
        case Sub(left=left, right=right):
            return sub(differentiate(left), differentiate(right))
        case Mul(left=left, right=right):
            return add(mul(differentiate(left), right), mul(left, differentiate(right)))
        case Div(left=left, right=right):
            numerator = sub(mul(differentiate(left), right), mul(left, differentiate(right)))
            return div(numerator, power(right, 2))
        case Neg(operand=operand):
            return neg(differentiate(operand))
        case PowInt(base=base, exponent=exponent):
            outer = mul(Const(exponent), power(base, exponent - 1))
            return mul(outer, differentiate(base))
        case Sin(arg=arg):
            return mul(apply_function(Cos, arg), differentiate(arg))
        case Cos(arg=arg):
            return mul(neg(apply_function(Sin, arg)), differentiate(arg))
        case Exp(arg=arg):
            return mul(apply_function(Exp, arg), differentiate(arg))
        case Sinh(arg=arg):
            return mul(apply_function(Cosh, arg), differentiate(arg))
        case Cosh(arg=arg):
            return mul(apply_function(Sinh, arg), differentiate(arg))
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class HolomorphicFn:
    """An expression together with its symbolic derivative (computed once)."""

    expr: ExprNode
    deriv: ExprNode = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "deriv", differentiate(self.expr))

    @classmethod
    def parse(cls, source: str) -> HolomorphicFn:
        return cls(parse(source))

    @property
    def source(self) -> str:
        return to_source(self.expr)

    def __call__(self, w):
        return evaluate(self.expr, w)

    def derivative(self, w):
        return evaluate(self.deriv, w)

    def prime(self) -> HolomorphicFn:
        return HolomorphicFn(self.deriv)


# ---------------------------------------------------------------------------
# Numerical cross-checks
# ---------------------------------------------------------------------------

def central_difference(node: ExprNode, w, h: float = 1e-6):
    """(f(w+h) - f(w-h)) / 2h along the real axis."""
    return (evaluate(node, w + h) - evaluate(node, w - h)) / (2 * h)


def cauchy_riemann_residual(node: ExprNode, w, h: float = 1e-6):
    """|df/dw-bar| estimated from four samples; ~0 for holomorphic ``node``."""
    along_u = evaluate(node, w + h) - evaluate(node, w - h)
    along_v = evaluate(node, w + 1j * h) - evaluate(node, w - 1j * h)
    return np.abs(along_u + 1j * along_v) / (4 * h)
