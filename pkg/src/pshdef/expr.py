"""Expression language for real-valued fields on C^2.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' INT)?
    base   := REAL | 'z' | 'w' | 'Re(' expr ')' | 'Im(' expr ')'
            | 'abs2(' expr ')' | 'conj(' expr ')' | '(' expr ')' | '-' base

Note that ``-`` in ``base`` binds tighter than ``^``: ``-z^2`` is ``(-z)^2``.

Nodes are frozen dataclasses.  :func:`evaluate` is generic over the numeric
type bound to ``z`` and ``w``: complex scalars, numpy arrays and
:class:`pshdef.jets.Jet` objects all work, which is how the jet engine gets
its Taylor arithmetic for free.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Node", "Const", "Var", "Conj", "Re", "Im", "Abs2", "Add", "Sub", "Mul",
    "Pow", "Neg", "Point", "ParseError", "NonRealError", "NonFiniteError",
    "parse", "to_text", "evaluate", "eval_field", "is_real_valued", "degree",
    "symbolic_wirtinger", "derivative",
]


class ParseError(ValueError):
    """Syntax error; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class NonRealError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Point:
    z: complex
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", complex(self.w))
        if not all(math.isfinite(v) for v in self.as_real()):
            raise ValueError(f"non-finite point {self!r}")

    @classmethod
    def from_real(cls, x1, y1, x2, y2) -> "Point":
        return cls(complex(x1, y1), complex(x2, y2))

    def as_real(self) -> tuple[float, float, float, float]:
        return (self.z.real, self.z.imag, self.w.real, self.w.imag)


class Node:
    __slots__ = ()

    def __add__(self, other):
        return Add(self, _lift(other))

    def __radd__(self, other):
        return Add(_lift(other), self)

    def __sub__(self, other):
        return Sub(self, _lift(other))

    def __rsub__(self, other):
        return Sub(_lift(other), self)

    def __mul__(self, other):
        return Mul(self, _lift(other))

    def __rmul__(self, other):
        return Mul(_lift(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, n)

    def __str__(self):
        return to_text(self)


def _lift(x) -> Node:
    return x if isinstance(x, Node) else Const(x)


@dataclass(frozen=True, eq=True)
class Const(Node):
    value: Union[float, complex]


@dataclass(frozen=True)
class Var(Node):
    name: str  # "z" or "w"


@dataclass(frozen=True)
class Conj(Node):
    arg: Node


@dataclass(frozen=True)
class Re(Node):
    arg: Node


@dataclass(frozen=True)
class Im(Node):
    arg: Node


@dataclass(frozen=True)
class Abs2(Node):
    arg: Node


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int

    def __post_init__(self):
        if not isinstance(self.exp, int) or self.exp < 1:
            raise ValueError("exponent must be an integer >= 1")


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


Z = Var("z")
W = Var("w")

# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<func>Re|Im|abs2|conj)\s*\("
    r"|(?P<var>[zw])(?![A-Za-z0-9_])"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = Add(node, rhs) if val == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit() or int(val) < 1:
                raise ParseError("exponent must be an integer >= 1", pos)
            node = Pow(node, int(val))
        return node

    def base(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "var":
            return Var(val)
        if kind == "func":
            arg = self.expr()
            self.expect_op(")")
            return {"Re": Re, "Im": Im, "abs2": Abs2, "conj": Conj}[val](arg)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and val == "-":
            return Neg(self.base())
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str, *, require_real: bool = True) -> Node:
    """Parse ``text`` into an AST.

    Raises :class:`ParseError` on bad syntax and :class:`NonRealError` when
    the root is not structurally real-valued (see :func:`is_real_valued`).
    """
    p = _Parser(text)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing {val!r}", pos)
    if require_real and not is_real_valued(node):
        raise NonRealError(f"expression is not structurally real-valued: {text!r}")
    return node


def is_real_valued(node: Node) -> bool:
    """Structural check: z, w and conj may only occur below Re/Im/abs2."""
    if isinstance(node, Const):
        return isinstance(node.value, (int, float)) or complex(node.value).imag == 0
    if isinstance(node, (Re, Im, Abs2)):
        return True
    if isinstance(node, (Add, Sub, Mul)):
        return is_real_valued(node.left) and is_real_valued(node.right)
    if isinstance(node, (Pow,)):
        return is_real_valued(node.base)
    if isinstance(node, Neg):
        return is_real_valued(node.arg)
    return False


def degree(node: Node) -> int:
    """Upper bound on the polynomial degree in the four real coordinates."""
    if isinstance(node, Const):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, (Conj, Re, Im, Neg)):
        return degree(node.arg)
    if isinstance(node, Abs2):
        return 2 * degree(node.arg)
    if isinstance(node, (Add, Sub)):
        return max(degree(node.left), degree(node.right))
    if isinstance(node, Mul):
        return degree(node.left) + degree(node.right)
    if isinstance(node, Pow):
        return node.exp * degree(node.base)
    raise TypeError(node)


# ---------------------------------------------------------------------------
# printing

def _fmt_const(v) -> str:
    v = complex(v)
    if v.imag == 0:
        s = repr(float(v.real))
        return s if v.real >= 0 else f"(-{s[1:]})"
    # complex constants only arise from symbolic differentiation and are not
    # part of the input language
    return f"({v.real!r}{v.imag:+r}i)"


def to_text(node: Node) -> str:
    """Render ``node`` so that :func:`parse` rebuilds an equivalent tree."""
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Conj):
        return f"conj({to_text(node.arg)})"
    if isinstance(node, Re):
        return f"Re({to_text(node.arg)})"
    if isinstance(node, Im):
        return f"Im({to_text(node.arg)})"
    if isinstance(node, Abs2):
        return f"abs2({to_text(node.arg)})"
    if isinstance(node, Add):
        return f"({to_text(node.left)}+{to_text(node.right)})"
    if isinstance(node, Sub):
        return f"({to_text(node.left)}-{to_text(node.right)})"
    if isinstance(node, Mul):
        return f"({to_text(node.left)}*{to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)})^{node.exp}"
    if isinstance(node, Neg):
        return f"(-({to_text(node.arg)}))"
    raise TypeError(node)


# ---------------------------------------------------------------------------
# evaluation

def _conj(x):
    return x.conjugate()


def _real(x):
    return x.real


def _imag(x):
    return x.imag


def _pow(x, n: int):
    result = x
    for _ in range(n - 1):
        result = result * x
    return result


def evaluate(node: Node, z, w):
    """Evaluate ``node`` with ``z`` and ``w`` bound to any numeric-like values."""
    memo: dict[int, object] = {}

    def ev(n: Node):
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Const):
            out = n.value
        elif isinstance(n, Var):
            out = z if n.name == "z" else w
        elif isinstance(n, Conj):
            out = _conj(ev(n.arg))
        elif isinstance(n, Re):
            out = _real(ev(n.arg))
        elif isinstance(n, Im):
            out = _imag(ev(n.arg))
        elif isinstance(n, Abs2):
            a = ev(n.arg)
            out = _real(a * _conj(a))
        elif isinstance(n, Add):
            out = ev(n.left) + ev(n.right)
        elif isinstance(n, Sub):
            out = ev(n.left) - ev(n.right)
        elif isinstance(n, Mul):
            out = ev(n.left) * ev(n.right)
        elif isinstance(n, Pow):
            out = _pow(ev(n.base), n.exp)
        elif isinstance(n, Neg):
            out = -ev(n.arg)
        else:
            raise TypeError(n)
        memo[key] = out
        return out

    return ev(node)


def eval_field(f: Node, p: Point) -> float:
    """Real value of a real-valued field at ``p``."""
    v = evaluate(f, p.z, p.w)
    v = complex(v).real
    if not math.isfinite(v):
        raise NonFiniteError(f"non-finite value at {p}")
    return v


# ---------------------------------------------------------------------------
# symbolic Wirtinger differentiation (test oracle)

_ZERO = Const(0.0)
_ONE = Const(1.0)
_BAR = {"z": "zb", "zb": "z", "w": "wb", "wb": "w"}


def _is_const(n: Node, value=None) -> bool:
    return isinstance(n, Const) and (value is None or n.value == value)


def _add(a: Node, b: Node) -> Node:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return Add(a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Sub(a, b)


def _neg(a: Node) -> Node:
    if _is_const(a):
        return Const(-a.value)
    return Neg(a)


def _mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    return Mul(a, b)


def _conj_node(a: Node) -> Node:
    if _is_const(a):
        return Const(complex(a.value).conjugate() if isinstance(a.value, complex) else a.value)
    if isinstance(a, Conj):
        return a.arg
    return Conj(a)


def derivative(node: Node, var: str) -> Node:
    """Wirtinger derivative of ``node`` in ``var`` (one of z, zb, w, wb)."""
    d = derivative
    bar = _BAR[var]
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Conj):
        return _conj_node(d(node.arg, bar))
    if isinstance(node, Re):
        return _mul(Const(0.5), _add(d(node.arg, var), _conj_node(d(node.arg, bar))))
    if isinstance(node, Im):
        return _mul(Const(-0.5j), _sub(d(node.arg, var), _conj_node(d(node.arg, bar))))
    if isinstance(node, Abs2):
        a = node.arg
        return _add(_mul(d(a, var), _conj_node(a)), _mul(a, _conj_node(d(a, bar))))
    if isinstance(node, Add):
        return _add(d(node.left, var), d(node.right, var))
    if isinstance(node, Sub):
        return _sub(d(node.left, var), d(node.right, var))
    if isinstance(node, Neg):
        return _neg(d(node.arg, var))
    if isinstance(node, Mul):
        return _add(_mul(d(node.left, var), node.right), _mul(node.left, d(node.right, var)))
    if isinstance(node, Pow):
        db = d(node.base, var)
        if node.exp == 1:
            return db
        inner = node.base if node.exp == 2 else Pow(node.base, node.exp - 1)
        return _mul(_mul(Const(float(node.exp)), inner), db)
    raise TypeError(node)


def symbolic_wirtinger(f: Node, index: tuple[int, int, int, int]) -> Node:
    """Mixed derivative d^(a+b+c+d) f / dz^a dzb^b dw^c dwb^d as an expression.

    The result is generally complex-valued; evaluate it with :func:`evaluate`.
    """
    a, b, c, dd = index
    if min(index) < 0:
        raise ValueError("derivative orders must be non-negative")
    out = f
    for var, count in (("z", a), ("zb", b), ("w", c), ("wb", dd)):
        for _ in range(count):
            out = derivative(out, var)
    return out
