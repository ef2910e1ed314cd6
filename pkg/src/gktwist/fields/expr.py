"""Scalar field expressions over chart coordinates.

Expressions form a DAG of small immutable nodes.  Arithmetic between nodes
and plain numbers folds trivial cases (``0*x``, ``1*x``, ``x+0`` ...) and
returns a Python ``float`` whenever the result is a constant, which keeps
matrices of expressions sparse.  Evaluation is generic over the number type:
floats, numpy arrays or :class:`~gktwist.fields.jet.Jet` batches.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .jet import Jet

__all__ = [
    "FieldExpr", "Const", "Var", "ExprSyntaxError", "UnboundVariableError",
    "as_expr", "is_zero", "sqrt", "sin", "cos", "exp",
    "diff", "substitute", "free_variables", "evaluate", "evaluate_many",
    "derivatives", "parse", "to_string",
]

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
CONSTANTS = {"pi": math.pi}


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}" + (f" in {text!r}" if text else ""))


class UnboundVariableError(KeyError):
    pass


class FieldExpr:
    __slots__ = ()
    # so that ndarray <op> FieldExpr is dispatched elementwise to us
    __array_priority__ = 1000

    def __add__(self, other):
        return add(self, other) if _is_operand(other) else NotImplemented

    def __radd__(self, other):
        return add(other, self) if _is_operand(other) else NotImplemented

    def __sub__(self, other):
        return sub(self, other) if _is_operand(other) else NotImplemented

    def __rsub__(self, other):
        return sub(other, self) if _is_operand(other) else NotImplemented

    def __mul__(self, other):
        return mul(self, other) if _is_operand(other) else NotImplemented

    def __rmul__(self, other):
        return mul(other, self) if _is_operand(other) else NotImplemented

    def __truediv__(self, other):
        return div(self, other) if _is_operand(other) else NotImplemented

    def __rtruediv__(self, other):
        return div(other, self) if _is_operand(other) else NotImplemented

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, n):
        return power(self, n)

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"{type(self).__name__}({to_string(self)!r})"


class Const(FieldExpr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)


class Var(FieldExpr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


class _Binary(FieldExpr):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def children(self):
        return (self.a, self.b)


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Neg(FieldExpr):
    __slots__ = ("a",)

    def __init__(self, a):
        self.a = a

    def children(self):
        return (self.a,)


class Pow(FieldExpr):
    __slots__ = ("a", "n")

    def __init__(self, a, n: int):
        self.a = a
        self.n = int(n)

    def children(self):
        return (self.a,)


class Func(FieldExpr):
    __slots__ = ("name", "a")

    def __init__(self, name: str, a):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.a = a

    def children(self):
        return (self.a,)


# ---------------------------------------------------------------- folding

def _is_operand(x) -> bool:
    return isinstance(x, (FieldExpr, int, float, np.floating, np.integer))


def _num(x):
    """Numeric value of ``x`` if it is a constant, else None."""
    if isinstance(x, Const):
        return x.value
    if isinstance(x, (int, float, np.floating, np.integer)):
        return float(x)
    return None


def as_expr(x) -> FieldExpr:
    if isinstance(x, FieldExpr):
        return x
    return Const(float(x))


def is_zero(x) -> bool:
    v = _num(x)
    return v is not None and v == 0.0


def add(a, b):
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return na + nb
    if na == 0.0:
        return b
    if nb == 0.0:
        return a
    if isinstance(b, Neg):
        return Sub(as_expr(a), b.a)
    return Add(as_expr(a), as_expr(b))


def sub(a, b):
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return na - nb
    if nb == 0.0:
        return a
    if na == 0.0:
        return neg(b)
    if isinstance(b, Neg):
        return Add(as_expr(a), b.a)
    return Sub(as_expr(a), as_expr(b))


def mul(a, b):
    na, nb = _num(a), _num(b)
    if na is not None and nb is not None:
        return na * nb
    if na == 0.0 or nb == 0.0:
        return 0.0
    if na == 1.0:
        return b
    if nb == 1.0:
        return a
    if na == -1.0:
        return neg(b)
    if nb == -1.0:
        return neg(a)
    return Mul(as_expr(a), as_expr(b))


def div(a, b):
    na, nb = _num(a), _num(b)
    if nb == 0.0:
        raise ZeroDivisionError("division by constant zero")
    if na is not None and nb is not None:
        return na / nb
    if na == 0.0:
        return 0.0
    if nb == 1.0:
        return a
    if nb == -1.0:
        return neg(a)
    return Div(as_expr(a), as_expr(b))


def neg(a):
    na = _num(a)
    if na is not None:
        return -na
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def power(a, n):
    if not isinstance(n, (int, np.integer)):
        raise TypeError("only integer powers are supported")
    n = int(n)
    na = _num(a)
    if na is not None:
        return na ** n
    if n == 0:
        return 1.0
    if n == 1:
        return a
    return Pow(a, n)


def _func(name, a):
    na = _num(a)
    if na is not None:
        return float(getattr(math, name)(na))
    if isinstance(a, FieldExpr):
        return Func(name, a)
    if isinstance(a, Jet):
        return getattr(a, name)()
    return getattr(np, name)(a)


def sqrt(a):
    return _func("sqrt", a)


def sin(a):
    return _func("sin", a)


def cos(a):
    return _func("cos", a)


def exp(a):
    return _func("exp", a)


# ------------------------------------------------------------ traversal

def _postorder(roots):
    """Unique nodes reachable from ``roots`` in dependency order."""
    seen = set()
    order = []
    stack = [(r, False) for r in reversed(roots) if isinstance(r, FieldExpr)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if expanded:
            if key not in seen:
                seen.add(key)
                order.append(node)
            continue
        if key in seen:
            continue
        stack.append((node, True))
        for c in node.children():
            if id(c) not in seen:
                stack.append((c, False))
    return order


def free_variables(*exprs) -> set:
    return {n.name for n in _postorder(list(exprs)) if isinstance(n, Var)}


def _apply(node, memo, env):
    t = type(node)
    if t is Const:
        return node.value
    if t is Var:
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
    if t is Add:
        return memo[id(node.a)] + memo[id(node.b)]
    if t is Sub:
        return memo[id(node.a)] - memo[id(node.b)]
    if t is Mul:
        return memo[id(node.a)] * memo[id(node.b)]
    if t is Div:
        return memo[id(node.a)] / memo[id(node.b)]
    if t is Neg:
        return -memo[id(node.a)]
    if t is Pow:
        return memo[id(node.a)] ** node.n
    if t is Func:
        return _func(node.name, memo[id(node.a)])
    raise TypeError(f"cannot evaluate {t.__name__}")


def evaluate_many(exprs, env: dict) -> list:
    """Evaluate a sequence of expressions (or plain numbers) sharing one cache.

    ``env`` maps variable names to floats, arrays or Jets.
    """
    exprs = list(exprs)
    memo: dict = {}
    for node in _postorder(exprs):
        memo[id(node)] = _apply(node, memo, env)
    return [memo[id(e)] if isinstance(e, FieldExpr) else float(e) for e in exprs]


def evaluate(expr, env: dict):
    return evaluate_many([expr], env)[0]


def diff(expr, name: str, _memo: dict | None = None):
    """Symbolic partial derivative with respect to the variable ``name``."""
    if not isinstance(expr, FieldExpr):
        return 0.0
    memo = {} if _memo is None else _memo
    for node in _postorder([expr]):
        memo[id(node)] = _diff_node(node, name, memo)
    return memo[id(expr)]


def _diff_node(node, name, memo):
    t = type(node)
    if t is Const:
        return 0.0
    if t is Var:
        return 1.0 if node.name == name else 0.0
    if t is Add:
        return add(memo[id(node.a)], memo[id(node.b)])
    if t is Sub:
        return sub(memo[id(node.a)], memo[id(node.b)])
    if t is Mul:
        return add(mul(memo[id(node.a)], node.b), mul(node.a, memo[id(node.b)]))
    if t is Div:
        da, db = memo[id(node.a)], memo[id(node.b)]
        return div(sub(mul(da, node.b), mul(node.a, db)), power(node.b, 2))
    if t is Neg:
        return neg(memo[id(node.a)])
    if t is Pow:
        return mul(mul(float(node.n), power(node.a, node.n - 1)), memo[id(node.a)])
    if t is Func:
        da = memo[id(node.a)]
        if node.name == "sin":
            return mul(cos(node.a), da)
        if node.name == "cos":
            return neg(mul(sin(node.a), da))
        if node.name == "exp":
            return mul(node, da)
        return div(da, mul(2.0, node))
    raise TypeError(f"cannot differentiate {t.__name__}")


def substitute(expr, mapping: dict):
    """Replace variables by expressions (or numbers)."""
    if not isinstance(expr, FieldExpr):
        return expr
    memo: dict = {}
    for node in _postorder([expr]):
        t = type(node)
        if t is Var:
            out = mapping.get(node.name, node)
        elif t is Const:
            out = node
        elif t in (Add, Sub, Mul, Div):
            a, b = memo[id(node.a)], memo[id(node.b)]
            out = {Add: add, Sub: sub, Mul: mul, Div: div}[t](a, b)
        elif t is Neg:
            out = neg(memo[id(node.a)])
        elif t is Pow:
            out = power(memo[id(node.a)], node.n)
        else:
            out = _func(node.name, memo[id(node.a)])
        memo[id(node)] = out
    return memo[id(expr)]


def derivatives(expr, names, point):
    """Value, gradient and Hessian of ``expr`` at one point.

    First derivatives come from forward-mode jets; the Hessian is the jet
    evaluation of the symbolic gradient.
    """
    names = list(names)
    point = np.asarray(point, dtype=float)
    env = dict(zip(names, Jet.seed(point[None, :])))
    grads = [diff(expr, n) for n in names]
    out = evaluate_many([expr] + grads, env)

    def unpack(x):
        if isinstance(x, Jet):
            return float(x.val[0]), x.grad[0]
        return float(x), np.zeros(len(names))

    value, grad = unpack(out[0])
    hess = np.array([unpack(g)[1] for g in out[1:]])
    return value, grad, hess


# -------------------------------------------------------------- printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def to_string(expr) -> str:
    if not isinstance(expr, FieldExpr):
        return repr(float(expr))
    out: dict = {}
    for node in _postorder([expr]):
        out[id(node)] = _fmt(node, out)
    return out[id(expr)][0]


def _fmt(node, out):
    t = type(node)
    if t is Const:
        s = repr(node.value)
        return (f"(0-{s[1:]})" if node.value < 0 else s), 5
    if t is Var:
        return node.name, 5
    if t is Func:
        return f"{node.name}({out[id(node.a)][0]})", 5
    p = _PREC[t]

    def wrap(child, min_prec):
        s, cp = out[id(child)]
        return s if cp >= min_prec else f"({s})"

    if t is Neg:
        return f"-{wrap(node.a, 4)}", p
    if t is Pow:
        return f"{wrap(node.a, 5)}^{node.n}", p
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[t]
    right_min = p if t in (Add, Mul) else p + 1
    return f"{wrap(node.a, p)}{op}{wrap(node.b, right_min)}", p


# --------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.names = None if names is None else set(names)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        found = tok[1] or "end of input"
        raise ExprSyntaxError(f"{msg}, found {found!r}", tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "end":
            self.fail(f"expected {value!r}")
        return self.take()

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return neg(self.factor())
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.fail("expected integer exponent")
            self.take()
            b = power(b, sign * int(tok[1]))
        return b

    def base(self):
        tok = self.peek()
        kind, val, _ = tok
        if kind == "num":
            self.take()
            return Const(float(val))
        if kind == "ident":
            self.take()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _func(val, arg)
            if self.names is not None and val not in self.names:
                if val in CONSTANTS:
                    return Const(CONSTANTS[val])
                raise ExprSyntaxError(f"unknown identifier {val!r}", tok[2], self.text)
            if self.names is None and val in CONSTANTS:
                return Const(CONSTANTS[val])
            return Var(val)
        if val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected number, identifier, function or '('")


def parse(text: str, names=None):
    """Parse expression text.

    Grammar::

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := '-' factor | base ('^' ['-'] INT)?
        base   := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

    with FUNC one of sin, cos, exp, sqrt.  When ``names`` is given, every
    identifier must be one of them (``pi`` is always accepted).  Returns a
    :class:`FieldExpr` (constants come back as :class:`Const`).
    """
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    return as_expr(_Parser(text, names).parse())
