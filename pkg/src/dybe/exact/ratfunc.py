"""Rational functions as a numerator over a factored denominator.

The denominator is kept as a product of powers of normalized "atoms"
(monic non-constant polynomials, with monomial factors split into single
coordinates).  Common denominators are formed by taking maximal exponents,
and atoms are cancelled against the numerator by exact division.  No GCDs
are ever computed: zero-testing only needs the numerator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DivisionByZero, ExpansionTooLarge
from .poly import Poly, as_fraction

Denominator = tuple[tuple[Poly, int], ...]


def _normalize_atom(p: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """Write ``p = scale * Π atom^k`` with monic atoms."""
    m = p.monomial_content()
    if m:
        p = p.divide_monomial(m)
    _, lc = p.leading()
    scale = lc
    atoms: list[tuple[Poly, int]] = [(Poly.var(i), k) for i, k in enumerate(m) if k]
    if not p.is_constant():
        atoms.append((p.scale(1 / lc), 1))
    return scale, atoms


def _merge(den: dict[Poly, int], atoms, sign=1) -> None:
    for a, k in atoms:
        den[a] = den.get(a, 0) + sign * k


def _pack(den: dict[Poly, int]) -> Denominator:
    return tuple(sorted(((a, k) for a, k in den.items() if k > 0), key=lambda t: t[0].key()))


class RatFunc:
    """Immutable ``num / Π atom^k``."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Denominator = ()):
        self.num = num
        self.den = den if num.terms else ()

    @classmethod
    def const(cls, c) -> RatFunc:
        return cls(Poly.const(c))

    @classmethod
    def from_poly(cls, p: Poly) -> RatFunc:
        return cls(p)

    @classmethod
    def quotient(cls, num: Poly, den: Poly) -> RatFunc:
        if den.is_zero():
            raise DivisionByZero("denominator is identically zero")
        if num.is_zero():
            return cls(num)
        scale, atoms = _normalize_atom(den)
        d: dict[Poly, int] = {}
        _merge(d, atoms)
        return _cancel(num.scale(1 / scale), d)

    # queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.den

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value()

    def den_poly(self) -> Poly:
        out = Poly.const(1)
        for a, k in self.den:
            out = out * a ** k
        return out

    def nterms(self) -> int:
        return self.num.nterms()

    def variables(self) -> set[int]:
        out = self.num.variables()
        for a, _ in self.den:
            out |= a.variables()
        return out

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: RatFunc) -> RatFunc:
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return _cancel(self.num + other.num, dict(self.den))
        da, db = dict(self.den), dict(other.den)
        lcm = dict(da)
        for a, k in db.items():
            if lcm.get(a, 0) < k:
                lcm[a] = k
        na = self.num * _power_product(lcm, da)
        nb = other.num * _power_product(lcm, db)
        return _cancel(na + nb, lcm)

    __radd__ = __add__

    def __neg__(self) -> RatFunc:
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: RatFunc) -> RatFunc:
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        return self + (-other)

    def __mul__(self, other: RatFunc) -> RatFunc:
        if not isinstance(other, RatFunc):
            c = as_fraction(other)
            return RatFunc(self.num.scale(c), self.den)
        if self.num.is_zero() or other.num.is_zero():
            return RatFunc(Poly())
        if not other.den and other.num.is_constant():
            return RatFunc(self.num.scale(other.num.constant_value()), self.den)
        if not self.den and self.num.is_constant():
            return RatFunc(other.num.scale(self.num.constant_value()), other.den)
        d = dict(self.den)
        _merge(d, other.den)
        return _cancel(self.num * other.num, d)

    __rmul__ = __mul__

    def __truediv__(self, other: RatFunc) -> RatFunc:
        if not isinstance(other, RatFunc):
            c = as_fraction(other)
            if not c:
                raise DivisionByZero("division by zero constant")
            return RatFunc(self.num.scale(1 / c), self.den)
        if other.num.is_zero():
            raise DivisionByZero("divisor is identically zero")
        if self.num.is_zero():
            return self
        scale, atoms = _normalize_atom(other.num)
        d = dict(self.den)
        _merge(d, atoms)
        num = self.num.scale(1 / scale)
        for a, k in other.den:
            num = num * a ** k
        return _cancel(num, d)

    def inverse(self) -> RatFunc:
        return RatFunc.const(1) / self

    def __pow__(self, k: int) -> RatFunc:
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc.const(1)
        for _ in range(k):
            out = out * self
        return out

    def diff(self, i: int) -> RatFunc:
        dnum = self.num.diff(i)
        if not self.den:
            return RatFunc(dnum)
        # d(n/Πa^k) = (n' Πa - n Σ k a' Π_{b≠a} b) / (Πa^k · Πa)
        atoms = [a for a, _ in self.den]
        prod_all = Poly.const(1)
        for a in atoms:
            prod_all = prod_all * a
        num = dnum * prod_all
        for j, (a, k) in enumerate(self.den):
            da = a.diff(i)
            if da.is_zero():
                continue
            others = Poly.const(1)
            for m, b in enumerate(atoms):
                if m != j:
                    others = others * b
            num = num - self.num * da * others * k
        d = dict(self.den)
        for a in atoms:
            d[a] += 1
        return _cancel(num, d)

    def eval(self, point: Sequence) -> Fraction:
        v = self.num.eval(point)
        dv = Fraction(1)
        for a, k in self.den:
            av = a.eval(point)
            if not av:
                raise DivisionByZero(f"denominator factor {a.to_str()} vanishes at the point")
            dv *= av ** k
        return v / dv

    def substitute_linear(self, images: Sequence[Poly]) -> RatFunc:
        num = self.num.substitute_linear(images)
        out = RatFunc(num)
        for a, k in self.den:
            out = out / RatFunc(a.substitute_linear(images)) ** k
        return out

    def check_budget(self, budget: int | None) -> RatFunc:
        if budget is not None and self.num.nterms() > budget:
            raise ExpansionTooLarge(self.num.nterms(), budget)
        return self

    def __repr__(self) -> str:
        return f"RatFunc({self.to_str()})"

    def to_str(self, names=None) -> str:
        n = self.num.to_str(names)
        if not self.den:
            return n
        parts = []
        for a, k in self.den:
            s = a.to_str(names)
            if len(a.terms) > 1:
                s = f"({s})"
            parts.append(s if k == 1 else f"{s}^{k}")
        return f"({n})/({'*'.join(parts)})"


def _power_product(target: dict[Poly, int], have: dict[Poly, int]) -> Poly:
    out = Poly.const(1)
    for a, k in target.items():
        extra = k - have.get(a, 0)
        if extra > 0:
            out = out * a ** extra
    return out


def _cancel(num: Poly, den: dict[Poly, int]) -> RatFunc:
    if num.is_zero():
        return RatFunc(num)
    for a in sorted(den, key=Poly.key):
        k = den[a]
        while k > 0:
            q = num.exact_div(a)
            if q is None:
                break
            num = q
            k -= 1
        den[a] = k
    return RatFunc(num, _pack(den))
