"""Scalar coefficient functions: expression parsing, evaluation, catalogs.

Coefficient and data functions of one variable enter the solver as
expression strings ("1/t", "3*t - sin(t)").  They are parsed once into an
immutable AST, after which evaluation is pure: a finite real number or an
:class:`~exgal.errors.EvalDomainError`, never a silent NaN.  For the hot
assembly loops an AST is lowered to a flat postfix program interpreted by
the kernel backends.
"""

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomainError, ExpressionSyntaxError
from .kernels import opcodes as oc

FUNCTIONS = ("exp", "log", "sin", "cos", "tanh", "arctan", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Call]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].isspace():
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            at = len(text) - len(stripped)
            raise ExpressionSyntaxError(f"unexpected character {stripped[0]!r}", at)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        elif m.lastgroup is not None:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent parser.

    Precedence: power > unary minus > mul/div > add/sub, all binary
    operators left-associative except power, which is right-associative.
    """

    def __init__(self, text, variable):
        if not text or not text.strip():
            raise ExpressionSyntaxError("empty expression", 0)
        self.text = text
        self.variable = variable
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, symbol):
        kind, text, pos = self.peek()
        if kind != "op" or text != symbol:
            raise ExpressionSyntaxError(f"expected {symbol!r}", pos)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                nk, nt, npos = self.peek()
                if nk != "op" or nt != "(":
                    raise ExpressionSyntaxError(
                        f"function '{text}' takes exactly one argument", npos
                    )
                self.advance()
                ck, ct, cpos = self.peek()
                if ck == "op" and ct == ")":
                    raise ExpressionSyntaxError(
                        f"function '{text}' takes exactly one argument", cpos
                    )
                arg = self.expr()
                ck, ct, cpos = self.peek()
                if ck == "op" and ct == ",":
                    raise ExpressionSyntaxError(
                        f"function '{text}' takes exactly one argument", cpos
                    )
                self.expect_op(")")
                return Call(text, arg)
            if text == self.variable:
                return Var(text)
            raise ExpressionSyntaxError(f"unknown identifier '{text}'", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        shown = text if text else "end of input"
        raise ExpressionSyntaxError(f"unexpected token {shown!r}", pos)


def parse(text: str, variable: str = "t") -> Expression:
    """Parse an expression string whose only free variable is `variable`."""
    return _Parser(text, variable).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def pretty(expr: Expression) -> str:
    """Render an AST back to a string that re-parses to the same AST."""

    def render(node, context):
        if isinstance(node, Num):
            return repr(node.value)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Call):
            return f"{node.fn}({render(node.arg, 0)})"
        if isinstance(node, Neg):
            inner = render(node.arg, 3)
            text, level = f"-{inner}", 3
        else:
            op = node.op
            level = _PREC[op]
            if op == "^":
                # right-associative; base must be an atom
                left = render(node.left, 5)
                right = render(node.right, 3)
            else:
                left = render(node.left, level)
                right = render(node.right, level + 1)
            text = f"{left} {op} {right}" if op != "^" else f"{left}{op}{right}"
        if level < context:
            return f"({text})"
        return text

    return render(expr, 0)


def _check_real_domain(op_name, value, args, x):
    bad = ~np.isfinite(value)
    if op_name == "log":
        bad |= args[0] <= 0.0
    elif op_name == "sqrt":
        bad |= args[0] < 0.0
    elif op_name == "/":
        bad |= args[1] == 0.0
    if np.any(bad):
        i = int(np.argmax(bad))
        point = float(np.asarray(x).ravel()[i]) if np.ndim(x) else float(x)
        raise EvalDomainError(f"domain error in '{op_name}'", point)


def _eval_node(node, x, real):
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval_node(node.arg, x, real)
    with np.errstate(all="ignore"):
        if isinstance(node, BinOp):
            a = _eval_node(node.left, x, real)
            b = _eval_node(node.right, x, real)
            if node.op == "+":
                out = a + b
            elif node.op == "-":
                out = a - b
            elif node.op == "*":
                out = a * b
            elif node.op == "/":
                out = a / b
            else:
                out = a ** b
            if real:
                _check_real_domain(node.op, out, (a, b), x)
            return out
        a = _eval_node(node.arg, x, real)
        fn = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
              "tanh": np.tanh, "arctan": np.arctan, "sqrt": np.sqrt,
              "abs": np.abs}[node.fn]
        out = fn(a)
        if real:
            _check_real_domain(node.fn, out, (a,), x)
        return out


def eval_array(expr: Expression, points) -> np.ndarray:
    """Evaluate at an array of points; raises EvalDomainError on any bad point."""
    x = np.asarray(points, dtype=np.float64)
    out = _eval_node(expr, x, real=True)
    if not np.all(np.isfinite(out)):
        i = int(np.argmax(~np.isfinite(out)))
        raise EvalDomainError("non-finite result", float(x.ravel()[i]))
    return out


def evaluate(expr: Expression, point: float) -> float:
    """Evaluate at a single point, returning a finite float."""
    return float(eval_array(expr, np.asarray([point]))[0])


def contains_abs(expr: Expression) -> bool:
    if isinstance(expr, Call):
        return expr.fn == "abs" or contains_abs(expr.arg)
    if isinstance(expr, Neg):
        return contains_abs(expr.arg)
    if isinstance(expr, BinOp):
        return contains_abs(expr.left) or contains_abs(expr.right)
    return False


def derivative_values(expr: Expression, points) -> np.ndarray:
    """Numerical derivative of the expression at an array of points.

    Uses a complex-step difference (machine accurate) when the expression
    is analytic; falls back to a central difference for expressions
    containing abs.  Symbolic differentiation is deliberately not offered.
    """
    x = np.asarray(points, dtype=np.float64)
    if contains_abs(expr):
        h = 1e-6 * (1.0 + np.abs(x))
        return (eval_array(expr, x + h) - eval_array(expr, x - h)) / (2.0 * h)
    h = 1e-150
    z = x.astype(np.complex128) + 1j * h
    out = _eval_node(expr, z, real=False)
    if not np.all(np.isfinite(out)):
        i = int(np.argmax(~np.isfinite(out)))
        raise EvalDomainError("non-finite result in derivative", float(x.ravel()[i]))
    return np.imag(out) / h


@dataclass(frozen=True)
class Program:
    """Flat postfix encoding of an Expression for the kernel backends."""

    code: np.ndarray    # int32, shape (k, 2): (opcode, const index)
    consts: np.ndarray  # float64 constant pool
    max_stack: int


def compile_program(expr: Expression) -> Program:
    code = []
    consts = []

    def emit(node):
        if isinstance(node, Num):
            consts.append(node.value)
            code.append((oc.OP_CONST, len(consts) - 1))
            return 1
        if isinstance(node, Var):
            code.append((oc.OP_X, 0))
            return 1
        if isinstance(node, Neg):
            depth = emit(node.arg)
            code.append((oc.OP_NEG, 0))
            return depth
        if isinstance(node, BinOp):
            dl = emit(node.left)
            dr = emit(node.right)
            op = {"+": oc.OP_ADD, "-": oc.OP_SUB, "*": oc.OP_MUL,
                  "/": oc.OP_DIV, "^": oc.OP_POW}[node.op]
            code.append((op, 0))
            return max(dl, 1 + dr)
        depth = emit(node.arg)
        code.append((oc.FUNCTION_OPS[node.fn], 0))
        return depth

    depth = emit(expr)
    return Program(
        code=np.asarray(code, dtype=np.int32).reshape(-1, 2),
        consts=np.asarray(consts, dtype=np.float64),
        max_stack=depth,
    )


# ---------------------------------------------------------------------------
# Monotone scalar functions (the u-dependence of semilinear right-hand sides)
# ---------------------------------------------------------------------------

_PSI_KINDS = {
    "identity": oc.PSI_IDENTITY,
    "tanh": oc.PSI_TANH,
    "arctan": oc.PSI_ARCTAN,
}


@dataclass(frozen=True)
class MonotoneScalarFn:
    """A nondecreasing scalar function psi with psi' >= 0 everywhere.

    All catalog members are odd (psi(0) = 0) with slope at most 1, scaled
    by a factor `scale` >= 0, so the growth bound |psi(u)| <= scale * |u|
    holds with growth constant c2 = scale.
    """

    kind: str
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _PSI_KINDS:
            raise ValueError(f"unknown monotone function kind '{self.kind}'")
        if not self.scale >= 0.0:
            raise ValueError("scale must be nonnegative")

    @property
    def c2(self) -> float:
        return self.scale

    @property
    def kind_code(self) -> int:
        return _PSI_KINDS[self.kind]

    def value(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "identity":
            return self.scale * u
        if self.kind == "tanh":
            return self.scale * np.tanh(u)
        return self.scale * np.arctan(u)

    def deriv(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "identity":
            return np.full_like(u, self.scale)
        if self.kind == "tanh":
            c = np.cosh(np.minimum(np.abs(u), 350.0))
            return self.scale / (c * c)
        return self.scale / (1.0 + u * u)


def monotone_catalog() -> tuple:
    """Unscaled catalog members, one per kind."""
    return tuple(MonotoneScalarFn(kind) for kind in _PSI_KINDS)


def singular_coefficients(variable: str = "t") -> dict:
    """Decreasing, nonnegative, C1 coefficients blowing up at the left end.

    These are the coefficient shapes the solver's Cauchy family is built
    for; all satisfy the hypotheses behind the graph-norm lower bound.
    ("two_minus_t" is included as the smooth, non-singular control.)
    """
    v = variable
    texts = {
        "inv_t": f"1/{v}",
        "inv_t_squared": f"1/{v}^2",
        "inv_sqrt_t": f"1/sqrt({v})",
        "two_minus_t": f"2 - {v}",
    }
    return {name: parse(text, v) for name, text in texts.items()}
