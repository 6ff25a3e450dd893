"""The exterior algebra Λg with rational-function coefficients.

A :class:`Multivector` maps strictly increasing index tuples ("blades") to
:class:`ScalarExpr` coefficients.  The Schouten bracket is the graded
biderivation extending the Lie bracket; on decomposables

    [x1∧…∧xk, y1∧…∧ym] = Σ_{i,j} (-1)^{i+j} [xi,yj] ∧ x1…x̂i…xk ∧ y1…ŷj…ym

which is the Lie bracket on grade 1 and satisfies
``[a,b] = -(-1)^{(|a|-1)(|b|-1)} [b,a]``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .exact import ZERO, Const, ScalarExpr, ZeroVerdict, as_expr, expr_sum, is_zero
from .exact.errors import ExpansionTooLarge
from .liealg import LieAlgebra

Blade = tuple[int, ...]


def sort_blade(idx: Sequence[int]) -> tuple[int, Blade]:
    """(sign, sorted blade) for a wedge of basis indices; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions
    for a in range(1, len(idx)):
        b = a
        while b > 0 and idx[b - 1] > idx[b]:
            idx[b - 1], idx[b] = idx[b], idx[b - 1]
            sign = -sign
            b -= 1
    return sign, tuple(idx)


def _nonzero(c: ScalarExpr) -> bool:
    if c.is_const():
        return bool(c.value)
    try:
        return not c.normal_form(200_000).is_zero()
    except ExpansionTooLarge:
        return True


class Multivector:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: LieAlgebra, terms: Mapping[Blade, object] | None = None):
        self.alg = alg
        clean: dict[Blade, list[ScalarExpr]] = {}
        for blade, c in (terms or {}).items():
            sign, b = sort_blade(blade)
            if not sign:
                continue
            c = as_expr(c)
            clean.setdefault(b, []).append(c if sign > 0 else -c)
        self.terms = _finish(clean)

    @classmethod
    def _raw(cls, alg, terms):
        mv = cls.__new__(cls)
        mv.alg = alg
        mv.terms = terms
        return mv

    @classmethod
    def basis(cls, alg: LieAlgebra, *idx: int, coeff=1) -> Multivector:
        return cls(alg, {tuple(idx): coeff})

    @classmethod
    def scalar(cls, alg: LieAlgebra, c=1) -> Multivector:
        return cls(alg, {(): c})

    # structure -------------------------------------------------------------
    def grades(self) -> set[int]:
        return {len(b) for b in self.terms}

    def grade(self, k: int) -> Multivector:
        return Multivector._raw(self.alg, {b: c for b, c in self.terms.items() if len(b) == k})

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def degree(self) -> int:
        gs = self.grades()
        if len(gs) > 1:
            raise ValueError("multivector is not homogeneous")
        return gs.pop() if gs else 0

    def coefficient(self, *idx: int) -> ScalarExpr:
        sign, b = sort_blade(idx)
        c = self.terms.get(b, ZERO)
        return c if sign >= 0 else -c

    # linear structure ----------------------------------------------------
    def _same(self, other: Multivector):
        if other.alg is not self.alg:
            raise ValueError("multivectors over different algebras")

    def __add__(self, other: Multivector) -> Multivector:
        self._same(other)
        acc: dict[Blade, list[ScalarExpr]] = {b: [c] for b, c in self.terms.items()}
        for b, c in other.terms.items():
            acc.setdefault(b, []).append(c)
        return Multivector._raw(self.alg, _finish(acc))

    def __neg__(self) -> Multivector:
        return Multivector._raw(self.alg, {b: (-c).compact() for b, c in self.terms.items()})

    def __sub__(self, other: Multivector) -> Multivector:
        return self + (-other)

    def scale(self, s) -> Multivector:
        s = as_expr(s)
        return Multivector._raw(self.alg, _finish({b: [s * c] for b, c in self.terms.items()}))

    def __rmul__(self, s) -> Multivector:
        return self.scale(s)

    def map_coefficients(self, f) -> Multivector:
        return Multivector._raw(self.alg, _finish({b: [f(c)] for b, c in self.terms.items()}))

    def diff(self, i: int) -> Multivector:
        """Coefficient-wise ∂/∂λ^i (0-based)."""
        return self.map_coefficients(lambda c: c.diff(i))

    def eval(self, point) -> dict[Blade, Fraction]:
        return {b: c.eval(point) for b, c in self.terms.items()}

    # products ----------------------------------------------------------------
    def wedge(self, other: Multivector) -> Multivector:
        self._same(other)
        acc: dict[Blade, list[ScalarExpr]] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                sign, blade = sort_blade(a + b)
                if sign:
                    acc.setdefault(blade, []).append(_signed(ca * cb, sign))
        return Multivector._raw(self.alg, _finish(acc))

    def __xor__(self, other: Multivector) -> Multivector:
        return self.wedge(other)

    def schouten(self, other: Multivector) -> Multivector:
        self._same(other)
        table = _schouten_table(self.alg)
        acc: dict[Blade, list[ScalarExpr]] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                res = table(a, b)
                if not res:
                    continue
                prod = ca * cb
                for blade, k in res.items():
                    acc.setdefault(blade, []).append(Const(k) * prod)
        return Multivector._raw(self.alg, _finish(acc))

    def ad(self, i: int) -> Multivector:
        return ad_action(i, self)

    # zero-testing -------------------------------------------------------------
    def verdicts(self, **kw) -> dict[Blade, ZeroVerdict]:
        return {b: is_zero(c, **kw) for b, c in sorted(self.terms.items())}

    def is_zero(self, **kw) -> bool:
        return all(v.zero for v in self.verdicts(**kw).values())

    def __repr__(self) -> str:
        return f"Multivector({self.to_str()})"

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for b, c in sorted(self.terms.items()):
            blade = "∧".join(self.alg.labels[i] for i in b) or "1"
            parts.append(f"({c})*{blade}")
        return " + ".join(parts)


def _signed(c: ScalarExpr, sign: int) -> ScalarExpr:
    return c if sign > 0 else -c


def _finish(acc: Mapping[Blade, list[ScalarExpr]]) -> dict[Blade, ScalarExpr]:
    out = {}
    for b, items in acc.items():
        if len(items) == 1 and (items[0].is_const() or items[0]._canonical):
            c = items[0]
        else:
            c = expr_sum(items)
        if _nonzero(c):
            out[b] = c
    return out


@lru_cache(maxsize=None)
def _schouten_table_cached(alg_id: int, alg: LieAlgebra):
    @lru_cache(maxsize=None)
    def blade_bracket(a: Blade, b: Blade) -> dict[Blade, Fraction]:
        out: dict[Blade, Fraction] = {}
        for i, x in enumerate(a):
            rest_a = a[:i] + a[i + 1:]
            for j, y in enumerate(b):
                terms = alg.c(x, y)
                if not terms:
                    continue
                rest_b = b[:j] + b[j + 1:]
                # (-1)^{i+j} with 1-based positions equals (-1)^{i+j} 0-based
                sgn = -1 if (i + j) % 2 else 1
                for k, c in terms.items():
                    s, blade = sort_blade((k,) + rest_a + rest_b)
                    if s:
                        out[blade] = out.get(blade, 0) + sgn * s * c
        return {bl: v for bl, v in out.items() if v}
    return blade_bracket


def _schouten_table(alg: LieAlgebra):
    return _schouten_table_cached(id(alg), alg)


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return a.wedge(b)


def schouten(a: Multivector, b: Multivector) -> Multivector:
    return a.schouten(b)


def ad_action(h_index: int, a: Multivector) -> Multivector:
    """Derivation extension of ``x -> [e_h, x]`` to Λg."""
    alg = a.alg
    acc: dict[Blade, list[ScalarExpr]] = {}
    for blade, c in a.terms.items():
        for pos, x in enumerate(blade):
            for k, s in alg.c(h_index, x).items():
                new = blade[:pos] + (k,) + blade[pos + 1:]
                sign, nb = sort_blade(new)
                if sign:
                    acc.setdefault(nb, []).append(Const(sign * s) * c)
    return Multivector._raw(alg, _finish(acc))


def bivector_from_matrix(alg: LieAlgebra, indices: Sequence[int], c: Sequence[Sequence[ScalarExpr]]) -> Multivector:
    """``½ Σ_ij c_ij e_i∧e_j`` over the listed basis indices."""
    acc: dict[Blade, list[ScalarExpr]] = {}
    half = Const(Fraction(1, 2))
    for a, i in enumerate(indices):
        for b, j in enumerate(indices):
            if i == j:
                continue
            sign, blade = sort_blade((i, j))
            acc.setdefault(blade, []).append(_signed(half * c[a][b], sign))
    return Multivector._raw(alg, _finish(acc))
