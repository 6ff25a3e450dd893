"""Sparse multivariate polynomials over the rationals.

Exponent vectors are tuples with trailing zeros trimmed, so ``λ1`` has the
same key ``(1,)`` whether or not other coordinates exist.  This lets
polynomials with different numbers of variables mix freely.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


def _trim(e: Sequence[int]) -> Exponent:
    n = len(e)
    while n and e[n - 1] == 0:
        n -= 1
    return tuple(e[:n])


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return a
    return tuple(x + y for x, y in zip_longest(a, b, fillvalue=0))


def _divides(a: Exponent, b: Exponent) -> bool:
    """True if monomial ``a`` divides monomial ``b``."""
    if len(a) > len(b):
        return False
    return all(x <= y for x, y in zip(a, b))


def _sub_exp(b: Exponent, a: Exponent) -> Exponent:
    return _trim([y - x for x, y in zip_longest(a, b, fillvalue=0)])


def as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


class Poly:
    """Immutable sparse polynomial ``{exponent: Fraction}`` with no zero entries."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Fraction] | None = None, *, _trusted=False):
        if _trusted:
            self.terms = terms
        else:
            clean: dict[Exponent, Fraction] = {}
            for e, c in (terms or {}).items():
                c = as_fraction(c)
                if c:
                    e = _trim(e)
                    c = clean.get(e, 0) + c
                    if c:
                        clean[e] = c
                    else:
                        clean.pop(e, None)
            self.terms = clean
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> Poly:
        c = as_fraction(c)
        return cls({(): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, i: int) -> Poly:
        """The coordinate function with 0-based index ``i``."""
        return cls({(0,) * i + (1,): Fraction(1)}, _trusted=True)

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> Poly:
        c = as_fraction(c)
        return cls({_trim(exp): c} if c else {}, _trusted=True)

    @classmethod
    def linear(cls, coeffs: Sequence) -> Poly:
        """``Σ coeffs[i] λ_i``."""
        return cls({(0,) * i + (1,): as_fraction(c) for i, c in enumerate(coeffs)})

    # basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    @property
    def nvars(self) -> int:
        return max((len(e) for e in self.terms), default=0)

    def nterms(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] if i < len(e) else 0 for e in self.terms), default=-1)

    def leading(self) -> tuple[Exponent, Fraction]:
        """Lexicographically largest term."""
        e = max(self.terms)
        return e, self.terms[e]

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, k in enumerate(e) if k}

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-k for k in t[0])))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> Poly:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly({e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other) -> Poly:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> Poly:
        return Poly.const(other) - self

    def scale(self, c) -> Poly:
        c = as_fraction(c)
        if not c:
            return Poly()
        if c == 1:
            return self
        return Poly({e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        if not self.terms or not other.terms:
            return Poly()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (eb, cb), = b.items()
            if not eb:
                return Poly({e: c * cb for e, c in a.items()}, _trusted=True)
            return Poly({_add_exp(e, eb): c * cb for e, c in a.items()}, _trusted=True)
        out: dict[Exponent, Fraction] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = _add_exp(ea, eb)
                out[e] = out.get(e, 0) + ca * cb
        return Poly({e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Poly:
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def key(self) -> tuple:
        """A total-order sort key, deterministic across runs."""
        return tuple(sorted(self.terms.items()))

    # calculus and evaluation -------------------------------------------
    def diff(self, i: int) -> Poly:
        out = {}
        for e, c in self.terms.items():
            if i < len(e) and e[i]:
                k = e[i]
                ne = list(e)
                ne[i] = k - 1
                out[_trim(ne)] = c * k
        return Poly(out, _trusted=True)

    def eval(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            if len(e) > len(point):
                raise ValueError(f"point has {len(point)} coordinates, polynomial needs {len(e)}")
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def substitute_linear(self, images: Sequence[Poly]) -> Poly:
        """Compose with ``λ_i -> images[i]`` (variables beyond the list are kept)."""
        out = Poly()
        cache: dict[tuple[int, int], Poly] = {}
        for e, c in self.terms.items():
            term = Poly.const(c)
            for i, k in enumerate(e):
                if not k:
                    continue
                img = images[i] if i < len(images) else Poly.var(i)
                key = (i, k)
                if key not in cache:
                    cache[key] = img ** k
                term = term * cache[key]
            out = out + term
        return out

    def exact_div(self, d: Poly) -> Poly | None:
        """Return ``self / d`` when ``d`` divides exactly, else ``None``."""
        if d.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return Poly()
        if len(d.terms) == 1:
            (ed, cd), = d.terms.items()
            out = {}
            for e, c in self.terms.items():
                if not _divides(ed, e):
                    return None
                out[_sub_exp(e, ed)] = c / cd
            return Poly(out, _trusted=True)
        ld, cd = d.leading()
        rem = dict(self.terms)
        quot: dict[Exponent, Fraction] = {}
        while rem:
            lr = max(rem)
            if not _divides(ld, lr):
                return None
            qe = _sub_exp(lr, ld)
            qc = rem[lr] / cd
            quot[qe] = qc
            for e, c in d.terms.items():
                te = _add_exp(e, qe)
                v = rem.get(te, 0) - c * qc
                if v:
                    rem[te] = v
                else:
                    rem.pop(te, None)
        return Poly(quot, _trusted=True)

    def monomial_content(self) -> Exponent:
        """The largest monomial dividing every term."""
        if not self.terms:
            return ()
        n = self.nvars
        mins = [min((e[i] if i < len(e) else 0) for e in self.terms) for i in range(n)]
        return _trim(mins)

    def divide_monomial(self, m: Exponent) -> Poly:
        if not m:
            return self
        return Poly({_sub_exp(e, m): c for e, c in self.terms.items()}, _trusted=True)

    # printing -----------------------------------------------------------
    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = _monomial_str(e, names)
            if not mono:
                body = _frac_str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{_frac_str(abs(c))}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial_str(e: Exponent, names: Sequence[str] | None) -> str:
    out = []
    for i, k in enumerate(e):
        if not k:
            continue
        name = names[i] if names is not None else f"l{i + 1}"
        out.append(name if k == 1 else f"{name}^{k}")
    return "*".join(out)


def poly_sum(polys: Iterable[Poly]) -> Poly:
    out: dict[Exponent, Fraction] = {}
    for p in polys:
        for e, c in p.terms.items():
            out[e] = out.get(e, 0) + c
    return Poly({e: c for e, c in out.items() if c}, _trusted=True)
