"""Parser and evaluator for closed-form scalar component functions.

Grammar (whitespace insignificant)::

    expression := term (('+'|'-') term)*          left associative
    term       := factor (('*'|'/') factor)*      left associative
    factor     := '-' factor | power
    power      := atom ('^' exponent)?            exponent is an integer
    exponent   := ['-'] INT ('^' exponent)?       right associative, folded
    atom       := NUMBER | IDENT | IDENT '(' expression ')' | '(' expression ')'

Precedence: ``^`` > unary ``-`` > ``*``/``/`` > ``+``/``-``.  Function
application requires parentheses.  The function table is fixed (sinh, cosh,
tanh, exp, ln, sqrt); any other identifier must be a chart coordinate, and
unknown identifiers are rejected rather than treated as implicit variables.

ASTs are immutable (frozen dataclasses) and compare structurally; evaluation
is structural recursion over any scalar type the jets module accepts, so
``eval_expr`` over plain floats is bitwise identical to order-0 jet
evaluation.  There is no simplification pass: expressions evaluate exactly
as written.
"""

import re
from dataclasses import dataclass
from typing import Union

from . import jets
from .errors import ParseError, UnknownVariable

__all__ = [
    "Const",
    "Var",
    "Neg",
    "Call",
    "Bin",
    "Pow",
    "Expr",
    "FUNCTIONS",
    "parse",
    "render",
    "eval_expr",
    "variables",
]

FUNCTIONS = {
    "sinh": jets.sinh,
    "cosh": jets.cosh,
    "tanh": jets.tanh,
    "exp": jets.exp,
    "ln": jets.ln,
    "sqrt": jets.sqrt,
}

_MAX_EXPONENT = 1000


@dataclass(frozen=True)
class Const:
    value: float

    def eval(self, xs):
        return self.value


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def eval(self, xs):
        return xs[self.index]


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def eval(self, xs):
        return -self.arg.eval(xs)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"

    def eval(self, xs):
        return FUNCTIONS[self.fn](self.arg.eval(xs))


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"

    def eval(self, xs):
        a = self.left.eval(xs)
        b = self.right.eval(xs)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return jets.div(a, b)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int

    def eval(self, xs):
        return jets.powi(self.base.eval(xs), self.exponent)


Expr = Union[Const, Var, Neg, Call, Bin, Pow]


def eval_expr(e, xs):
    """Evaluate an AST at a tuple of scalars (floats or jets)."""
    return e.eval(xs)


def variables(e):
    """The set of coordinate names appearing in an AST."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Neg, Call)):
        return variables(e.arg)
    if isinstance(e, Bin):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Pow):
        return variables(e.base)
    return set()


# -- tokenizer ------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[+\-*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(pos, f"unexpected character {text[pos]!r}")
        if match.lastgroup != "ws":
            tokens.append((match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, coordinates):
        self.tokens = _tokenize(text)
        self.coordinates = list(coordinates)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError(off, f"got {text or 'end of input'!r}", expected=repr(op))
        return self.advance()

    def at_op(self, *ops):
        kind, text, _ = self.peek()
        return kind == "op" and text in ops

    # expression := term (('+'|'-') term)*
    def expression(self):
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance()[1]
            node = Bin(op, node, self.term())
        return node

    # term := factor (('*'|'/') factor)*
    def term(self):
        node = self.factor()
        while self.at_op("*", "/"):
            op = self.advance()[1]
            node = Bin(op, node, self.factor())
        return node

    # factor := '-' factor | power
    def factor(self):
        if self.at_op("-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    # power := atom ('^' exponent)?
    def power(self):
        node = self.atom()
        if self.at_op("^"):
            self.advance()
            return Pow(node, self.exponent())
        return node

    # exponent := ['-'] INT ('^' exponent)?   (folded right-associatively)
    def exponent(self):
        sign = 1
        if self.at_op("-"):
            self.advance()
            sign = -1
        kind, text, off = self.peek()
        if kind != "number":
            raise ParseError(off, f"got {text or 'end of input'!r}",
                             expected="integer exponent")
        if not text.isdigit():
            raise ParseError(off, f"exponent {text!r} is not an integer",
                             expected="integer exponent")
        self.advance()
        base = int(text)
        if self.at_op("^"):
            self.advance()
            rest = self.exponent()
            if rest < 0:
                raise ParseError(off, "negative exponent inside an exponent chain")
            base = base ** rest
        value = sign * base
        if abs(value) > _MAX_EXPONENT:
            raise ParseError(off, f"exponent magnitude {abs(value)} exceeds "
                                  f"{_MAX_EXPONENT}")
        return value

    # atom := NUMBER | IDENT | IDENT '(' expression ')' | '(' expression ')'
    def atom(self):
        kind, text, off = self.peek()
        if kind == "number":
            self.advance()
            return Const(float(text))
        if kind == "ident":
            self.advance()
            if self.at_op("("):
                if text not in FUNCTIONS:
                    raise ParseError(
                        off, f"unknown function {text!r}",
                        expected="one of " + ", ".join(sorted(FUNCTIONS)))
                self.advance()
                arg = self.expression()
                self.expect_op(")")
                return Call(text, arg)
            if text not in self.coordinates:
                raise UnknownVariable(off, text, self.coordinates)
            return Var(text, self.coordinates.index(text))
        if kind == "op" and text == "(":
            self.advance()
            node = self.expression()
            self.expect_op(")")
            return node
        raise ParseError(off, f"got {text or 'end of input'!r}",
                         expected="number, name, or '('")


def parse(text, coordinates):
    """Parse expression text over the given coordinate names into an AST."""
    parser = _Parser(text, coordinates)
    node = parser.expression()
    kind, tail, off = parser.peek()
    if kind != "end":
        raise ParseError(off, f"trailing input {tail!r}")
    return node


# -- rendering ------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40, 100


def _prec(e):
    if isinstance(e, Bin):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e, minimum):
    s = render(e)
    return f"({s})" if _prec(e) < minimum else s


def render(e):
    """Render an AST so that parsing the result yields an equal AST."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({render(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_NEG)
    if isinstance(e, Pow):
        exp_text = str(e.exponent)
        return f"{_wrap(e.base, _PREC_ATOM)}^{exp_text}"
    if isinstance(e, Bin):
        left = _wrap(e.left, _prec(e))
        right = _wrap(e.right, _prec(e) + 1)
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")
