"""A small expression language for the functions under test.

Grammar (ASCII): numbers, the variable ``x``, unary minus, binary
``+ - * / ^`` with ``^`` right-associative and binding tighter than
unary minus, parentheses, and the calls ``exp(e)``, ``ln(e)``,
``sqrt(e)``, ``abs(e)``, ``pow(base, exponent)``.

Three named families bypass the grammar because they are the stock test
functions: ``power(c)`` for x**c, ``recip`` for 1/x and ``affine(a,b)``
for a*x+b. Parsing produces an immutable tree; evaluation is either a
scalar tree walk with precise error locations, or a compiled flat tape
run over numpy arrays through the active backend (see
:mod:`fracineq.backend`).
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import EvaluationError, ParseError

# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pos: int = field(default=-1, compare=False, kw_only=True)


@dataclass(frozen=True)
class Lit(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class BinOp(Expr):
    op: str = ""
    lhs: Expr = None  # type: ignore[assignment]
    rhs: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Func(Expr):
    name: str = ""
    arg: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class DualValue:
    value: float
    deriv: float


_FUNCTIONS = ("exp", "ln", "sqrt", "abs")

# ---------------------------------------------------------------------------
# tokenizer / Pratt parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_BIN_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_PREC = 25  # between * and ^, so -x^2 parses as -(x^2)


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), i))
        i = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str, expected: str):
        kind, text, pos = self.peek()
        if text != value:
            raise ParseError(f"unexpected token {text or 'end of input'!r}",
                             pos, expected)
        return self.advance()

    def parse_expr(self, min_prec: int = 0) -> Expr:
        left = self.parse_prefix()
        while True:
            kind, text, pos = self.peek()
            prec = _BIN_PREC.get(text) if kind == "op" else None
            if prec is None or prec <= min_prec:
                break
            self.advance()
            # '^' is right-associative: its rhs re-admits '^' at prec-1
            sub_prec = prec - 1 if text == "^" else prec
            right = self.parse_expr(sub_prec)
            left = BinOp(op=text, lhs=left, rhs=right, pos=pos)
        return left

    def parse_prefix(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Lit(value=float(text), pos=pos)
        if kind == "ident":
            if text == "x":
                return Var(pos=pos)
            if text in _FUNCTIONS:
                self.expect("(", "'(' after function name")
                arg = self.parse_expr(0)
                self.expect(")", "')'")
                return Func(name=text, arg=arg, pos=pos)
            if text == "pow":
                self.expect("(", "'(' after function name")
                base = self.parse_expr(0)
                self.expect(",", "',' between pow arguments")
                exponent = self.parse_expr(0)
                self.expect(")", "')'")
                return BinOp(op="^", lhs=base, rhs=exponent, pos=pos)
            raise ParseError(f"unknown identifier {text!r}", pos,
                             "x, exp, ln, sqrt, abs or pow")
        if text == "(":
            inner = self.parse_expr(0)
            self.expect(")", "')'")
            return inner
        if text == "-":
            return Neg(operand=self.parse_expr(_UNARY_PREC), pos=pos)
        raise ParseError(f"unexpected token {text or 'end of input'!r}", pos,
                         "expression")


def parse(text: str) -> Expr:
    """Parse expression text to a tree, or raise ParseError with offset."""
    parser = _Parser(text)
    node = parser.parse_expr(0)
    kind, tok, pos = parser.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing token {tok!r}", pos,
                         "operator or end of input")
    return node


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_POWER_RE = re.compile(rf"^power\(\s*({_NUM})\s*\)$")
_AFFINE_RE = re.compile(rf"^affine\(\s*({_NUM})\s*,\s*({_NUM})\s*\)$")


def parse_function(text: str) -> Expr:
    """Accept either a named family or general expression text.

    ``power(c)``, ``recip`` and ``affine(a,b)`` construct their trees
    directly, giving the stock test functions exact derivative rules.
    """
    stripped = text.strip()
    m = _POWER_RE.match(stripped)
    if m:
        return BinOp(op="^", lhs=Var(), rhs=Lit(value=float(m.group(1))))
    if stripped == "recip":
        return BinOp(op="/", lhs=Lit(value=1.0), rhs=Var())
    m = _AFFINE_RE.match(stripped)
    if m:
        return BinOp(op="+",
                     lhs=BinOp(op="*", lhs=Lit(value=float(m.group(1))),
                               rhs=Var()),
                     rhs=Lit(value=float(m.group(2))))
    return parse(text)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _prec_of(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _BIN_PREC[e.op]
    if isinstance(e, Neg):
        return _UNARY_PREC
    return 100


def to_text(e: Expr) -> str:
    """Render a tree back to parseable text.

    Re-parsing the output of a parser-produced tree yields a
    structurally identical tree. (A programmatically built negative
    literal prints as prefix minus, which re-parses as Neg of the
    positive literal; the evaluation is unchanged.)
    """
    if isinstance(e, Lit):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if _prec_of(e.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, BinOp):
        prec = _BIN_PREC[e.op]
        left = to_text(e.lhs)
        right = to_text(e.rhs)
        # '^' is right-associative: parenthesise an equal-precedence lhs;
        # the others are left-associative: parenthesise equal-prec rhs.
        if _prec_of(e.lhs) < prec or (e.op == "^" and _prec_of(e.lhs) == prec):
            left = f"({left})"
        if _prec_of(e.rhs) < prec or (e.op != "^" and _prec_of(e.rhs) == prec):
            right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# scalar evaluation (tree walk, precise errors)
# ---------------------------------------------------------------------------

def _is_integral(v: float) -> bool:
    return math.isfinite(v) and v == math.floor(v)


def evaluate(e: Expr, x: float) -> float:
    """Evaluate at a scalar point; domain faults raise EvaluationError."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Neg):
        return -evaluate(e.operand, x)
    if isinstance(e, Func):
        v = evaluate(e.arg, x)
        if e.name == "exp":
            return math.exp(v)
        if e.name == "ln":
            if v <= 0.0:
                raise EvaluationError(f"ln of non-positive value {v!r}",
                                      "ln", e.pos)
            return math.log(v)
        if e.name == "sqrt":
            if v < 0.0:
                raise EvaluationError(f"sqrt of negative value {v!r}",
                                      "sqrt", e.pos)
            return math.sqrt(v)
        if e.name == "abs":
            return abs(v)
        raise EvaluationError(f"unknown function {e.name!r}", e.name, e.pos)
    if isinstance(e, BinOp):
        a = evaluate(e.lhs, x)
        b = evaluate(e.rhs, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise EvaluationError("division by zero", "/", e.pos)
            return a / b
        if e.op == "^":
            if a < 0.0 and not _is_integral(b):
                raise EvaluationError(
                    f"power with negative base {a!r} and non-integer "
                    f"exponent {b!r}", "^", e.pos)
            if a == 0.0 and b < 0.0:
                raise EvaluationError("zero base with negative exponent",
                                      "^", e.pos)
            return math.pow(a, b)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_dual(e: Expr, x: float) -> DualValue:
    """Forward-mode value and first derivative at a scalar point."""
    v, d = _dual_walk(e, x)
    if not (math.isfinite(v) and math.isfinite(d)):
        raise EvaluationError(
            f"non-finite value/derivative ({v!r}, {d!r}) at x={x!r}")
    return DualValue(v, d)


def _dual_walk(e: Expr, x: float):
    if isinstance(e, Lit):
        return e.value, 0.0
    if isinstance(e, Var):
        return float(x), 1.0
    if isinstance(e, Neg):
        v, d = _dual_walk(e.operand, x)
        return -v, -d
    if isinstance(e, Func):
        v, d = _dual_walk(e.arg, x)
        if e.name == "exp":
            ev = math.exp(v)
            return ev, d * ev
        if e.name == "ln":
            if v <= 0.0:
                raise EvaluationError(f"ln of non-positive value {v!r}",
                                      "ln", e.pos)
            return math.log(v), d / v
        if e.name == "sqrt":
            if v <= 0.0:
                raise EvaluationError(
                    f"sqrt not differentiable at {v!r}", "sqrt", e.pos)
            r = math.sqrt(v)
            return r, d / (2.0 * r)
        if e.name == "abs":
            if v == 0.0:
                raise EvaluationError("abs not differentiable at 0",
                                      "abs", e.pos)
            return abs(v), d * math.copysign(1.0, v)
        raise EvaluationError(f"unknown function {e.name!r}", e.name, e.pos)
    if isinstance(e, BinOp):
        av, ad = _dual_walk(e.lhs, x)
        bv, bd = _dual_walk(e.rhs, x)
        if e.op == "+":
            return av + bv, ad + bd
        if e.op == "-":
            return av - bv, ad - bd
        if e.op == "*":
            return av * bv, ad * bv + av * bd
        if e.op == "/":
            if bv == 0.0:
                raise EvaluationError("division by zero", "/", e.pos)
            return av / bv, (ad * bv - av * bd) / (bv * bv)
        if e.op == "^":
            if bd == 0.0:
                # monomial rule; covers negative base with integer exponent
                if av < 0.0 and not _is_integral(bv):
                    raise EvaluationError(
                        f"power with negative base {av!r} and non-integer "
                        f"exponent {bv!r}", "^", e.pos)
                if av == 0.0 and bv < 1.0 and bv != 0.0:
                    raise EvaluationError(
                        "power not differentiable at zero base", "^", e.pos)
                val = math.pow(av, bv)
                der = 0.0 if bv == 0.0 else bv * math.pow(av, bv - 1.0) * ad
                return val, der
            if av <= 0.0:
                raise EvaluationError(
                    f"power with varying exponent requires positive base, "
                    f"got {av!r}", "^", e.pos)
            val = math.pow(av, bv)
            return val, val * (bd * math.log(av) + bv * ad / av)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# batch evaluation via compiled tapes
# ---------------------------------------------------------------------------

_OP_OF_BINOP = {"+": backend.OP_ADD, "-": backend.OP_SUB,
                "*": backend.OP_MUL, "/": backend.OP_DIV,
                "^": backend.OP_POW}
_OP_OF_FUNC = {"exp": backend.OP_EXP, "ln": backend.OP_LN,
               "sqrt": backend.OP_SQRT, "abs": backend.OP_ABS}


class CompiledFunction:
    """Flat postfix tape for a tree, runnable on arrays of points."""

    def __init__(self, e: Expr):
        ops: list[int] = []
        args: list[int] = []
        consts: list[float] = []

        def emit(node: Expr) -> int:
            if isinstance(node, Lit):
                consts.append(node.value)
                ops.append(backend.OP_CONST)
                args.append(len(consts) - 1)
                return 1
            if isinstance(node, Var):
                ops.append(backend.OP_X)
                args.append(-1)
                return 1
            if isinstance(node, Neg):
                depth = emit(node.operand)
                ops.append(backend.OP_NEG)
                args.append(-1)
                return depth
            if isinstance(node, Func):
                depth = emit(node.arg)
                ops.append(_OP_OF_FUNC[node.name])
                args.append(-1)
                return depth
            if isinstance(node, BinOp):
                dl = emit(node.lhs)
                dr = emit(node.rhs)
                ops.append(_OP_OF_BINOP[node.op])
                args.append(-1)
                return max(dl, dr + 1)
            raise TypeError(f"not an expression node: {node!r}")

        self.stack_depth = emit(e)
        self.ops = np.asarray(ops, dtype=np.int64)
        self.args = np.asarray(args, dtype=np.int64)
        self.consts = np.asarray(consts, dtype=np.float64)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        return backend.tape_eval(self.ops, self.args, self.consts, x,
                                 self.stack_depth)

    def dual(self, x: np.ndarray):
        x = np.ascontiguousarray(x, dtype=np.float64)
        return backend.tape_eval_dual(self.ops, self.args, self.consts, x,
                                      self.stack_depth)


@functools.lru_cache(maxsize=512)
def compile_fn(e: Expr) -> CompiledFunction:
    """Compile (and memoise) the batch evaluator for a tree."""
    return CompiledFunction(e)


def eval_many(e: Expr, x: np.ndarray) -> np.ndarray:
    return compile_fn(e)(x)


def eval_dual_many(e: Expr, x: np.ndarray):
    return compile_fn(e).dual(x)
