"""Rational-function expression trees in the base coordinates λ^1..λ^l.

Nodes are immutable.  Each node lazily caches its exact normal form (a
:class:`RatFunc`); arithmetic on trees builds new nodes, so callers that
accumulate long sums should :meth:`ScalarExpr.compact` the result.
Coordinates are 0-based in the API and print as ``l1, l2, ...``.

``==`` on expressions is object identity; decide mathematical equality
with :func:`dybe.exact.is_zero` on the difference.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DivisionByZero
from .poly import Poly, as_fraction
from .ratfunc import RatFunc


class ScalarExpr:
    __slots__ = ("_nf", "_vars", "_canonical", "__weakref__")

    def __init__(self, vars_: frozenset):
        self._nf = None
        self._vars = vars_
        self._canonical = False

    # arithmetic builders --------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return mul(Const(-1), self)

    def __pow__(self, k: int):
        if k < 0:
            return div(Const(1), self ** (-k))
        out: ScalarExpr = Const(1)
        for _ in range(k):
            out = mul(out, self)
        return out

    # queries ---------------------------------------------------------------
    @property
    def variables(self) -> frozenset:
        return self._vars

    @property
    def nvars(self) -> int:
        return max(self._vars) + 1 if self._vars else 0

    def is_const(self) -> bool:
        return False

    def children(self) -> tuple:
        return ()

    def normal_form(self, budget: int | None = None) -> RatFunc:
        """Exact normal form, clearing denominators by cross-multiplication.

        Raises :class:`ExpansionTooLarge` when a numerator exceeds ``budget``
        terms and :class:`DivisionByZero` when a divisor is identically zero.
        """
        if self._nf is not None:
            return self._nf
        # iterative post-order so deep trees do not hit the recursion limit
        stack = [(self, False)]
        while stack:
            node, ready = stack.pop()
            if node._nf is not None:
                continue
            kids = node.children()
            if ready or not kids:
                node._nf = node._combine([k._nf for k in kids]).check_budget(budget)
                continue
            stack.append((node, True))
            for k in kids:
                if k._nf is None:
                    stack.append((k, False))
        return self._nf

    def _combine(self, parts: list[RatFunc]) -> RatFunc:
        raise NotImplementedError

    def compact(self) -> ScalarExpr:
        """An equivalent tree built from the normal form (cheap to reuse)."""
        if self._canonical or isinstance(self, (Const, Var)):
            return self
        return from_ratfunc(self.normal_form())

    def eval(self, point: Sequence) -> Fraction:
        return evaluate(self, point)

    def diff(self, i: int) -> ScalarExpr:
        return diff(self, i)

    def is_zero(self, **kwargs):
        from .zero import is_zero
        return is_zero(self, **kwargs)

    def degree_bound(self) -> tuple[int, int]:
        """Upper bounds on (numerator, denominator) total degrees after clearing."""
        memo: dict[int, tuple[int, int]] = {}
        for node in _postorder(self):
            kids = [memo[id(k)] for k in node.children()]
            memo[id(node)] = node._degree(kids)
        return memo[id(self)]

    def _degree(self, kids):
        raise NotImplementedError

    def __str__(self) -> str:
        return to_str(self)

    def __repr__(self) -> str:
        return f"ScalarExpr({to_str(self)})"


class Const(ScalarExpr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__(frozenset())
        self.value = as_fraction(value)
        self._nf = RatFunc.const(self.value)

    def is_const(self) -> bool:
        return True

    def _degree(self, kids):
        return (0, 0)


class Var(ScalarExpr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("coordinate index must be non-negative")
        super().__init__(frozenset((index,)))
        self.index = index
        self._nf = RatFunc(Poly.var(index))

    def _degree(self, kids):
        return (1, 0)


class _Binary(ScalarExpr):
    __slots__ = ("left", "right")

    def __init__(self, left: ScalarExpr, right: ScalarExpr):
        super().__init__(left._vars | right._vars)
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    __slots__ = ()

    def _combine(self, parts):
        return parts[0] + parts[1]

    def _degree(self, kids):
        (na, da), (nb, db) = kids
        return (max(na + db, nb + da), da + db)


class Sub(_Binary):
    __slots__ = ()

    def _combine(self, parts):
        return parts[0] - parts[1]

    def _degree(self, kids):
        (na, da), (nb, db) = kids
        return (max(na + db, nb + da), da + db)


class Mul(_Binary):
    __slots__ = ()

    def _combine(self, parts):
        return parts[0] * parts[1]

    def _degree(self, kids):
        (na, da), (nb, db) = kids
        return (na + nb, da + db)


class Div(_Binary):
    __slots__ = ()

    def _combine(self, parts):
        if parts[1].is_zero():
            raise DivisionByZero(f"divisor {to_str(self.right)} is identically zero", self.right)
        return parts[0] / parts[1]

    def _degree(self, kids):
        (na, da), (nb, db) = kids
        return (na + db, da + nb)


# smart constructors ---------------------------------------------------------

ZERO = Const(0)
ONE = Const(1)


def as_expr(x) -> ScalarExpr:
    if isinstance(x, ScalarExpr):
        return x
    if isinstance(x, RatFunc):
        return from_ratfunc(x)
    if isinstance(x, Poly):
        return from_ratfunc(RatFunc(x))
    return Const(x)


def var(i: int) -> ScalarExpr:
    return Var(i)


def _is(x: ScalarExpr, v) -> bool:
    return isinstance(x, Const) and x.value == v


def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if isinstance(b, Const):
        if not b.value:
            raise DivisionByZero("division by the constant 0", b)
        if b.value == 1:
            return a
        if isinstance(a, Const):
            return Const(a.value / b.value)
    return Div(a, b)


def expr_sum(items: Iterable[ScalarExpr]) -> ScalarExpr:
    """Sum through normal forms, returning a compact tree."""
    total = RatFunc.const(0)
    for x in items:
        total = total + x.normal_form()
    return from_ratfunc(total)


# normal form -> tree --------------------------------------------------------

def _poly_tree(p: Poly) -> ScalarExpr:
    out: ScalarExpr | None = None
    for e, c in p.sorted_terms():
        mono: ScalarExpr | None = None
        for i, k in enumerate(e):
            for _ in range(k):
                mono = Var(i) if mono is None else Mul(mono, Var(i))
        neg = c < 0
        mag = -c if neg else c
        if mono is None:
            term = Const(mag)
        elif mag != 1:
            term = Mul(Const(mag), mono)
        else:
            term = mono
        if out is None:
            out = Mul(Const(-1), term) if neg and mono is not None else (Const(c) if mono is None else term)
        else:
            out = Sub(out, term) if neg else Add(out, term)
    return out if out is not None else Const(0)


def from_ratfunc(rf: RatFunc) -> ScalarExpr:
    if rf.is_constant():
        return Const(rf.constant_value())
    if not rf.den and len(rf.num.terms) == 1:
        (e, c), = rf.num.terms.items()
        if c == 1 and sum(e) == 1:
            return Var(len(e) - 1)
    tree = _poly_tree(rf.num)
    if rf.den:
        d: ScalarExpr | None = None
        for a, k in rf.den:
            at = _poly_tree(a)
            for _ in range(k):
                d = at if d is None else Mul(d, at)
        tree = Div(tree, d)
    tree._nf = rf
    tree._canonical = True
    return tree


# traversal helpers ----------------------------------------------------------

def _postorder(root: ScalarExpr) -> list[ScalarExpr]:
    out: list[ScalarExpr] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, ready = stack.pop()
        if ready:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for k in reversed(node.children()):
            if id(k) not in seen:
                stack.append((k, False))
    return out


def evaluate(expr: ScalarExpr, point: Sequence) -> Fraction:
    """Exact value at ``point`` (a sequence of rationals).

    Raises :class:`DivisionByZero` carrying the first vanishing divisor.
    """
    point = [as_fraction(x) for x in point]
    if expr.nvars > len(point):
        raise ValueError(f"point has {len(point)} coordinates, expression uses {expr.nvars}")
    memo: dict[int, Fraction] = {}
    for node in _postorder(expr):
        if isinstance(node, Const):
            v = node.value
        elif isinstance(node, Var):
            v = point[node.index]
        else:
            a, b = memo[id(node.left)], memo[id(node.right)]
            if isinstance(node, Add):
                v = a + b
            elif isinstance(node, Sub):
                v = a - b
            elif isinstance(node, Mul):
                v = a * b
            else:
                if not b:
                    raise DivisionByZero(f"divisor {to_str(node.right)} vanishes at {_fmt_point(point)}",
                                         node.right)
                v = a / b
        memo[id(node)] = v
    return memo[id(expr)]


def _fmt_point(point) -> str:
    return "(" + ", ".join(str(x) for x in point) + ")"


def diff(expr: ScalarExpr, i: int) -> ScalarExpr:
    """Exact partial derivative in the 0-based coordinate ``i``."""
    if i < 0:
        raise ValueError("coordinate index must be non-negative")
    memo: dict[int, ScalarExpr] = {}
    for node in _postorder(expr):
        if i not in node._vars:
            d: ScalarExpr = ZERO
        elif node._canonical:
            d = from_ratfunc(node.normal_form().diff(i))
        elif isinstance(node, Var):
            d = ONE
        else:
            a, b = node.left, node.right
            da, db = memo[id(a)], memo[id(b)]
            if isinstance(node, Add):
                d = add(da, db)
            elif isinstance(node, Sub):
                d = sub(da, db)
            elif isinstance(node, Mul):
                d = add(mul(da, b), mul(a, db))
            else:
                d = div(sub(mul(da, b), mul(a, db)), mul(b, b))
        memo[id(node)] = d
    return memo[id(expr)]


def substitute_shift(expr: ScalarExpr, mu: Sequence) -> ScalarExpr:
    """The reparameterized expression ``λ -> λ - μ``."""
    images = [Poly.var(i) - as_fraction(m) for i, m in enumerate(mu)]
    return from_ratfunc(expr.normal_form().substitute_linear(images))


# printing -------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2}


def _const_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_str(expr: ScalarExpr, names: Sequence[str] | None = None) -> str:
    memo: dict[int, tuple[str, int]] = {}
    for node in _postorder(expr):
        if isinstance(node, Const):
            s = _const_str(node.value)
            # negative or fractional literals bind like a product
            prec = 3 if node.value >= 0 and node.value.denominator == 1 else (2 if node.value >= 0 else 0)
        elif isinstance(node, Var):
            s = names[node.index] if names else f"l{node.index + 1}"
            prec = 3
        else:
            p = _PREC[type(node)]
            ls, lp = memo[id(node.left)]
            rs, rp = memo[id(node.right)]
            if lp < p or (lp == 0):
                ls = f"({ls})"
            if rp <= p and not (isinstance(node, (Add, Mul)) and rp == p):
                rs = f"({rs})"
            elif rp == 0:
                rs = f"({rs})"
            op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(node)]
            s = f"{ls}{op}{rs}"
            prec = p
        memo[id(node)] = (s, prec)
    return memo[id(expr)][0]
