"""Enveloping algebras, the PBW symmetrization and the PBW-star product.

Words are non-decreasing tuples of basis indices.  Products are normal
ordered by the rewrite ``y x -> x y + [y, x]`` for ``y > x``.  In the
ℏ-graded algebra ``U(h_ℏ)`` every rewrite also carries one factor of ℏ; on
homogeneous input this power is just the drop in word length, so one
ungraded multiplication table serves both algebras.

The star product on polynomials of ``h*`` is ``f★g = σ^{-1}(σ(f) σ(g))``
with ``σ`` the symmetrization map.  For rational functions it is extended
through the bidifferential operators ``B_k`` read off the polynomial case.
"""

from __future__ import annotations

import random
import threading
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .exact import HSeries, Poly, RatFunc, ScalarExpr, as_expr, from_ratfunc
from .liealg import Decomposition, LieAlgebra

Word = tuple[int, ...]
MultiIndex = tuple[int, ...]


class NotInBaseSubalgebra(ValueError):
    pass


class InterpolationInconsistent(ArithmeticError):
    pass


def _acc(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class UEnvelope:
    """Normal ordering in ``U(alg)`` with memoized word products."""

    def __init__(self, alg: LieAlgebra):
        self.alg = alg
        self._wl: dict[tuple[Word, int], dict[Word, Fraction]] = {}
        self._sym: dict[MultiIndex, dict[Word, Fraction]] = {}
        self._lock = threading.Lock()

    def word_times_letter(self, w: Word, x: int) -> dict[Word, Fraction]:
        if not w or w[-1] <= x:
            return {w + (x,): Fraction(1)}
        key = (w, x)
        hit = self._wl.get(key)
        if hit is not None:
            return hit
        u, y = w[:-1], w[-1]
        out: dict[Word, Fraction] = {}
        # u y x = (u x) y + u [y, x]
        for w2, c in self.word_times_letter(u, x).items():
            for w3, c3 in self.word_times_letter(w2, y).items():
                _acc(out, w3, c * c3)
        for k, ck in self.alg.c(y, x).items():
            for w3, c3 in self.word_times_letter(u, k).items():
                _acc(out, w3, ck * c3)
        with self._lock:
            self._wl[key] = out
        return out

    def mul_words(self, u: Word, v: Word, max_deficit: int | None = None) -> dict[Word, Fraction]:
        """``u·v`` normal ordered; with ``max_deficit`` drop words shorter than
        ``len(u)+len(v)-max_deficit`` (the ℏ-truncation of the graded algebra)."""
        if not v:
            return {u: Fraction(1)}
        if not u or u[-1] <= v[0]:
            return {u + v: Fraction(1)}
        acc: dict[Word, Fraction] = {u: Fraction(1)}
        n = len(u)
        for x in v:
            n += 1
            nxt: dict[Word, Fraction] = {}
            for w, c in acc.items():
                for w2, c2 in self.word_times_letter(w, x).items():
                    if max_deficit is not None and n - len(w2) > max_deficit:
                        continue
                    _acc(nxt, w2, c * c2)
            acc = nxt
        return acc

    def mul(self, a: Mapping[Word, object], b: Mapping[Word, object]) -> dict[Word, object]:
        out: dict[Word, object] = {}
        for u, ca in a.items():
            for v, cb in b.items():
                for w, c in self.mul_words(u, v).items():
                    _acc(out, w, ca * cb * c)
        return out

    def normal_order(self, word: Sequence[int]) -> dict[Word, Fraction]:
        acc: dict[Word, Fraction] = {(): Fraction(1)}
        for x in word:
            nxt: dict[Word, Fraction] = {}
            for w, c in acc.items():
                for w2, c2 in self.word_times_letter(w, x).items():
                    _acc(nxt, w2, c * c2)
            acc = nxt
        return acc

    def sym(self, alpha: MultiIndex) -> dict[Word, Fraction]:
        """Average over all orderings of ``Π x_i^{α_i}``, normal ordered.

        The first letter is ``x_i`` with probability ``α_i/|α|`` and the rest
        is a uniformly random ordering of what remains.
        """
        alpha = tuple(alpha)
        hit = self._sym.get(alpha)
        if hit is not None:
            return hit
        n = sum(alpha)
        if n == 0:
            return {(): Fraction(1)}
        out: dict[Word, Fraction] = {}
        for i, a in enumerate(alpha):
            if not a:
                continue
            rest = alpha[:i] + (a - 1,) + alpha[i + 1:]
            weight = Fraction(a, n)
            for w, c in self.sym(rest).items():
                for w2, c2 in self.mul_words((i,), w).items():
                    _acc(out, w2, weight * c * c2)
        with self._lock:
            self._sym[alpha] = out
        return out


_ENVELOPES: dict[int, UEnvelope] = {}
_ENV_LOCK = threading.Lock()


def envelope(alg: LieAlgebra) -> UEnvelope:
    with _ENV_LOCK:
        env = _ENVELOPES.get(id(alg))
        if env is None or env.alg is not alg:
            env = _ENVELOPES[id(alg)] = UEnvelope(alg)
        return env


# elements -------------------------------------------------------------------------

class UEElement:
    """Sparse ``Σ c ℏ^k w`` over normal-ordered words.

    ``graded=True`` is ``U(h_ℏ)``: a product of words of total length ``d``
    landing on a word of length ``L`` picks up ``ℏ^{d-L}``.  ``graded=False``
    is the plain enveloping algebra.
    """

    __slots__ = ("alg", "terms", "graded", "order")

    def __init__(self, alg: LieAlgebra, terms: Mapping[tuple[int, Word], object] | None = None,
                 graded: bool = False, order: int | None = None):
        self.alg = alg
        self.graded = graded
        self.order = order
        self.terms = {}
        for (k, w), c in (terms or {}).items():
            if order is not None and k > order:
                continue
            if tuple(w) != tuple(sorted(w)):
                for w2, c2 in envelope(alg).normal_order(w).items():
                    kk = k + (len(w) - len(w2) if graded else 0)
                    if order is None or kk <= order:
                        _acc(self.terms, (kk, w2), c * c2)
            elif c:
                _acc(self.terms, (k, tuple(w)), c)

    @classmethod
    def word(cls, alg, w: Sequence[int], c=1, **kw) -> UEElement:
        return cls(alg, {(0, tuple(w)): c}, **kw)

    @classmethod
    def one(cls, alg, **kw) -> UEElement:
        return cls(alg, {(0, ()): 1}, **kw)

    def _like(self, terms) -> UEElement:
        out = UEElement.__new__(UEElement)
        out.alg, out.graded, out.order = self.alg, self.graded, self.order
        out.terms = terms
        return out

    def __add__(self, other: UEElement) -> UEElement:
        terms = dict(self.terms)
        for key, c in other.terms.items():
            _acc(terms, key, c)
        return self._like(terms)

    def __neg__(self) -> UEElement:
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: UEElement) -> UEElement:
        return self + (-other)

    def scale(self, s) -> UEElement:
        return self._like({k: c * s for k, c in self.terms.items() if c * s})

    def __mul__(self, other):
        if not isinstance(other, UEElement):
            return self.scale(other)
        env = envelope(self.alg)
        out: dict = {}
        for (k1, u), c1 in self.terms.items():
            for (k2, v), c2 in other.terms.items():
                slack = None
                if self.order is not None:
                    slack = self.order - k1 - k2
                    if slack < 0:
                        continue
                for w, c in env.mul_words(u, v, slack if self.graded else None).items():
                    k = k1 + k2 + (len(u) + len(v) - len(w) if self.graded else 0)
                    _acc(out, (k, w), c1 * c2 * c)
        return self._like(out)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, UEElement) and self.terms == other.terms

    __hash__ = None

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (k, w), c in sorted(self.terms.items()):
            word = "*".join(self.alg.labels[i] for i in w) or "1"
            h = "" if k == 0 else ("hbar*" if k == 1 else f"hbar^{k}*")
            parts.append(f"({c})*{h}{word}")
        return " + ".join(parts)

    __repr__ = to_str


def normal_order(word: Sequence[int], alg: LieAlgebra, graded: bool = True) -> UEElement:
    return UEElement(alg, {(0, tuple(word)): 1}, graded=graded)


def coproduct_word(w: Word) -> dict[tuple[Word, Word], int]:
    """``Δ(w)`` for a normal word: a sum over splittings into two
    subsequences, both still non-decreasing."""
    out: dict[tuple[Word, Word], int] = {((), ()): 1}
    for x in w:
        nxt: dict[tuple[Word, Word], int] = {}
        for (a, b), c in out.items():
            _acc(nxt, (a + (x,), b), c)
            _acc(nxt, (a, b + (x,)), c)
        out = nxt
    return out


def coproduct(u: UEElement) -> dict[tuple[int, Word, Word], object]:
    out: dict = {}
    for (k, w), c in u.terms.items():
        for (a, b), m in coproduct_word(w).items():
            _acc(out, (k, a, b), c * m)
    return out


def counit(u: UEElement, order: int | None = None) -> HSeries:
    n = order if order is not None else max([k for k, _ in u.terms] + [0])
    coeffs = [Fraction(0)] * (n + 1)
    for (k, w), c in u.terms.items():
        if not w and k <= n:
            coeffs[k] += c
    return HSeries(coeffs, n, Fraction(0))


# σ and the star product on polynomials ---------------------------------------------

def _exp_tuple(alpha: Sequence[int]) -> tuple[int, ...]:
    a = list(alpha)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def _full(e: Sequence[int], l: int) -> MultiIndex:
    return tuple(e) + (0,) * (l - len(e))


def _word_multi(w: Word, l: int) -> MultiIndex:
    counts = [0] * l
    for x in w:
        counts[x] += 1
    return tuple(counts)


class PBW:
    """PBW data for a base Lie algebra ``h`` with coordinates ``λ_1..λ_l``
    dual to its basis."""

    def __init__(self, base: LieAlgebra):
        self.alg = base
        self.l = base.dim
        self.env = envelope(base)
        self._star: dict[tuple[MultiIndex, MultiIndex, int], dict[int, dict[MultiIndex, Fraction]]] = {}
        self._B: dict[tuple[int, int], list[dict[tuple[MultiIndex, MultiIndex], Poly]]] = {}
        self._lock = threading.Lock()

    @property
    def abelian(self) -> bool:
        return self.alg.is_abelian()

    # σ ---------------------------------------------------------------------
    def sigma(self, f: Poly) -> UEElement:
        terms: dict = {}
        for e, c in f.terms.items():
            alpha = _full(e, self.l)
            if len(alpha) > self.l:
                raise ValueError("polynomial uses more coordinates than the base has")
            d = sum(alpha)
            for w, c2 in self.env.sym(alpha).items():
                _acc(terms, (d - len(w), w), c * c2)
        return UEElement(self.alg, terms, graded=True)

    def _sigma_inv_raw(self, u: Mapping[Word, Fraction], total: int, max_deficit: int | None):
        """σ^{-1} on an ungraded homogeneous-degree-``total`` element."""
        rem = dict(u)
        out: dict[MultiIndex, Fraction] = {}
        while rem:
            L = max(len(w) for w in rem)
            batch = [(w, c) for w, c in rem.items() if len(w) == L]
            for w, c in batch:
                alpha = _word_multi(w, self.l)
                _acc(out, alpha, c)
                for w2, c2 in self.env.sym(alpha).items():
                    if max_deficit is not None and total - len(w2) > max_deficit:
                        continue
                    _acc(rem, w2, -c * c2)
            for w, _ in batch:
                if w in rem:
                    raise ArithmeticError("sigma inverse failed to clear the leading term")
        return out

    def sigma_inv(self, u: UEElement, order: int | None = None) -> HSeries:
        for (_, w) in u.terms:
            if any(x >= self.l for x in w):
                raise NotInBaseSubalgebra(f"word {w} leaves the base subalgebra")
        # ℏ^k w stands for a homogeneous piece of degree k + len(w)
        by_total: dict[int, dict[Word, Fraction]] = {}
        for (k, w), c in u.terms.items():
            _acc(by_total.setdefault(k + len(w), {}), w, c)
        n = order if order is not None else max([k for k, _ in u.terms] + [0]) + max(by_total or [0])
        coeffs = [Poly() for _ in range(n + 1)]
        for total, part in by_total.items():
            for alpha, c in self._sigma_inv_raw(part, total, n).items():
                k = total - sum(alpha)
                if k <= n:
                    coeffs[k] = coeffs[k] + Poly.monomial(alpha, c)
        return HSeries(coeffs, n, Poly())

    def star_monomials(self, alpha: MultiIndex, beta: MultiIndex, N: int) -> dict[int, dict[MultiIndex, Fraction]]:
        """``λ^α ★ λ^β`` by ℏ-order ``k ≤ N``."""
        key = (alpha, beta, N)
        hit = self._star.get(key)
        if hit is not None:
            return hit
        total = sum(alpha) + sum(beta)
        if self.abelian:
            res = {0: {tuple(a + b for a, b in zip(alpha, beta)): Fraction(1)}}
        else:
            prod: dict[Word, Fraction] = {}
            for u, cu in self.env.sym(alpha).items():
                for v, cv in self.env.sym(beta).items():
                    slack = N - (sum(alpha) - len(u)) - (sum(beta) - len(v))
                    if slack < 0:
                        continue
                    for w, c in self.env.mul_words(u, v, slack).items():
                        _acc(prod, w, cu * cv * c)
            res = {}
            for gamma, c in self._sigma_inv_raw(prod, total, N).items():
                k = total - sum(gamma)
                res.setdefault(k, {})[gamma] = c
        with self._lock:
            self._star[key] = res
        return res

    def star(self, f: Poly, g: Poly, N: int) -> HSeries:
        coeffs: list[dict] = [dict() for _ in range(N + 1)]
        for e1, c1 in f.terms.items():
            a = _full(e1, self.l)
            for e2, c2 in g.terms.items():
                b = _full(e2, self.l)
                for k, part in self.star_monomials(a, b, N).items():
                    for gamma, c in part.items():
                        _acc(coeffs[k], _exp_tuple(gamma), c1 * c2 * c)
        return HSeries([Poly(c) for c in coeffs], N, Poly())

    def poisson(self, f: Poly, g: Poly) -> Poly:
        """``{f,g} = Σ c_ij^k λ_k ∂_i f ∂_j g``."""
        out = Poly()
        for i in range(self.l):
            fi = f.diff(i)
            if fi.is_zero():
                continue
            for j in range(self.l):
                terms = self.alg.c(i, j)
                if not terms:
                    continue
                gj = g.diff(j)
                if gj.is_zero():
                    continue
                lam = Poly.linear([terms.get(k, 0) for k in range(self.l)])
                out = out + lam * fi * gj
        return out

    # bidifferential operators -----------------------------------------------
    def extract_B(self, N: int, D: int | None = None, probes: int = 50, seed: int = 0):
        """Tables ``B_1..B_N``: ``B_k[(α, β)]`` is the coefficient polynomial of
        ``∂^α f ∂^β g``.

        Coefficients come from a triangular recursion over monomial pairs of
        total degree ``≤ D`` (default ``2N+2``) with each side of degree
        ``≤ N``, since ``B_k`` differentiates each argument at most ``k``
        times.  The result is then checked against the polynomial star
        product on ``probes`` random pairs of degree ``N+1``, which would
        expose any operator of higher order the recursion missed.
        """
        D = 2 * N + 2 if D is None else D
        key = (N, D)
        hit = self._B.get(key)
        if hit is not None:
            return hit
        tables: list[dict] = [dict() for _ in range(N + 1)]
        if not self.abelian:
            pairs = [(a, b) for a in _multis(self.l, min(N, D)) for b in _multis(self.l, min(N, D - sum(a)))]
            pairs.sort(key=lambda p: (sum(p[0]) + sum(p[1]), p))
            for a, b in pairs:
                st = self.star_monomials(a, b, N)
                fa, fb = _mfact(a), _mfact(b)
                for k in range(1, N + 1):
                    if sum(a) + sum(b) < k:
                        continue
                    target = Poly({_exp_tuple(g): c for g, c in st.get(k, {}).items()})
                    known = Poly()
                    for (a2, b2), coeff in tables[k].items():
                        if _leq(a2, a) and _leq(b2, b):
                            known = known + coeff * _dmono(a, a2) * _dmono(b, b2)
                    v = target - known
                    if not v.is_zero():
                        tables[k][(a, b)] = v.scale(Fraction(1, fa * fb))
            self._verify(tables, N, D, probes, seed)
        with self._lock:
            self._B[key] = tables
        return tables

    def _verify(self, tables, N, D, probes, seed):
        rng = random.Random(seed)
        top = min(N, D) + 1
        monos = [m for m in _multis(self.l, top) if sum(m) == top] or [(0,) * self.l]
        low = _multis(self.l, top)
        for t in range(probes):
            f = _random_poly(rng, monos, low)
            g = _random_poly(rng, monos, low)
            st = self.star(f, g, N)
            for k in range(1, N + 1):
                got = apply_B_poly(tables[k], f, g, self.l)
                if got != st[k]:
                    raise InterpolationInconsistent(
                        f"B_{k} disagrees with the star product on probe {t} (degree {top}); "
                        f"increase D (now {D})")

    def B_tables(self, N: int):
        return self.extract_B(N)


def _multis(l: int, maxdeg: int) -> list[MultiIndex]:
    out = []

    def rec(prefix, left):
        if len(prefix) == l:
            out.append(tuple(prefix))
            return
        for a in range(left + 1):
            rec(prefix + [a], left - a)

    rec([], maxdeg)
    return out


def _mfact(a: MultiIndex) -> int:
    out = 1
    for x in a:
        out *= factorial(x)
    return out


def _leq(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _dmono(a: MultiIndex, d: MultiIndex) -> Poly:
    """``∂^d λ^a``."""
    c = 1
    for x, y in zip(a, d):
        c *= factorial(x) // factorial(x - y)
    return Poly.monomial(tuple(x - y for x, y in zip(a, d)), c)


def _random_poly(rng: random.Random, top: list, low: list) -> Poly:
    terms = {}
    for m in [rng.choice(top)] + [rng.choice(low) for _ in range(2)]:
        c = Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 4))
        terms[_exp_tuple(m)] = terms.get(_exp_tuple(m), 0) + c
    return Poly(terms)


def _poly_dmulti(f: Poly, a: MultiIndex) -> Poly:
    for i, k in enumerate(a):
        for _ in range(k):
            f = f.diff(i)
    return f


def apply_B_poly(table, f: Poly, g: Poly, l: int) -> Poly:
    out = Poly()
    for (a, b), coeff in table.items():
        fa = _poly_dmulti(f, a)
        if fa.is_zero():
            continue
        gb = _poly_dmulti(g, b)
        if gb.is_zero():
            continue
        out = out + coeff * fa * gb
    return out


# rational coefficients --------------------------------------------------------------

class DerivCache:
    """Memoized ``∂^α`` of normal forms, keyed by expression identity.

    Holds references to the expressions so identities stay valid.
    """

    def __init__(self):
        self._d: dict[tuple[int, MultiIndex], RatFunc] = {}
        self._keep: dict[int, ScalarExpr] = {}

    def __call__(self, f: ScalarExpr, a: MultiIndex) -> RatFunc:
        key = (id(f), a)
        hit = self._d.get(key)
        if hit is not None:
            return hit
        self._keep[id(f)] = f
        if not any(a):
            out = f.normal_form()
        else:
            i = next(j for j, x in enumerate(a) if x)
            prev = a[:i] + (a[i] - 1,) + a[i + 1:]
            out = self(f, prev).diff(i)
        self._d[key] = out
        return out


def star_expr(pbw: PBW, f, g, N: int, cache: DerivCache | None = None,
              table_order: int | None = None) -> HSeries:
    """``Σ_k ℏ^k B_k(f, g)`` for rational-function expressions.

    ``table_order`` (``≥ N``) selects which extracted tables to reuse.
    """
    f, g = as_expr(f), as_expr(g)
    cache = cache or DerivCache()
    zero = from_ratfunc(RatFunc.const(0))
    coeffs = [(f * g).compact()]
    if pbw.abelian or f.is_const() or g.is_const():
        return HSeries(coeffs, N, zero)
    tables = pbw.extract_B(max(N, table_order or 0))
    for k in range(1, N + 1):
        acc = RatFunc.const(0)
        for (a, b), coeff in tables[k].items():
            fa = cache(f, a)
            if fa.is_zero():
                continue
            gb = cache(g, b)
            if gb.is_zero():
                continue
            acc = acc + RatFunc(coeff) * fa * gb
        coeffs.append(from_ratfunc(acc))
    return HSeries(coeffs, N, zero)


# shift --------------------------------------------------------------------------------

def shift(dec: Decomposition, f, N: int, cache: DerivCache | None = None) -> HSeries:
    """``f(λ+ℏh) = Σ_k ℏ^k Σ_{|α|=k} (1/α!) ∂^α f ⊗ Sym(h^α)``.

    Order ``k`` maps words over the full algebra (normal ordered in ``Ug``)
    to RatFunc coefficients.  The ``Uh`` leg carries the symmetrized
    product, which equals the unordered sum since ``∂^α f`` is symmetric in
    its indices.
    """
    f = as_expr(f)
    cache = cache or DerivCache()
    l = dec.l
    env = envelope(dec.alg)
    n = dec.alg.dim
    out = []
    for k in range(N + 1):
        part: dict[Word, RatFunc] = {}
        for a in _multis(l, k):
            if sum(a) != k:
                continue
            da = cache(f, a)
            if da.is_zero():
                continue
            da = da * RatFunc.const(Fraction(1, _mfact(a)))
            full = [0] * n
            for x, m in zip(dec.base, a):
                full[x] = m
            for gw, c in env.sym(tuple(full)).items():
                prev = part.get(gw)
                part[gw] = da * RatFunc.const(c) if prev is None else prev + da * RatFunc.const(c)
        out.append({w: c for w, c in part.items() if not c.is_zero()})
    return HSeries(out, N, {})


_PBW: dict[tuple, PBW] = {}
_PBW_LOCK = threading.Lock()


def _signature(alg: LieAlgebra) -> tuple:
    return alg.labels, tuple(sorted((key, tuple(sorted(v.items()))) for key, v in alg.table.items()))


def pbw_for(alg: LieAlgebra) -> PBW:
    """Shared :class:`PBW` per structure-constant table (so B tables are
    extracted once per process)."""
    sig = _signature(alg)
    with _PBW_LOCK:
        hit = _PBW.get(sig)
        if hit is None:
            hit = _PBW[sig] = PBW(alg)
        return hit
