"""Triangular dynamical r-matrices from fat reductive decompositions.

For ``g = h ⊕ m`` with ``m`` spanned by ``e_1..e_n`` put
``a_ij(λ) = <λ, [e_i, e_j]_h>``.  When ``a`` is generically invertible,
``r(λ) = ½ Σ c_ij(λ) e_i∧e_j`` with ``c = a^{-1}`` solves

    Σ_i h_i ∧ ∂r/∂λ^i - ½ [r, r] = 0

and is H-equivariant: ``[h_i, r] + Σ_j f_ij ∂r/∂λ^j = 0`` with
``f_ij = <λ, [h_i, h_j]>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact import (ONE, ZERO, Const, Poly, RatFunc, ScalarExpr, as_expr, from_ratfunc,
                    substitute_shift)
from .exact.linalg import inverse as frac_inverse, matmul
from .exterior import Multivector, ad_action, bivector_from_matrix
from .liealg import Decomposition, UnknownName, builtin

SYMBOLIC_LIMIT = 8


class DegenerateEverywhere(ValueError):
    """``det a(λ)`` vanishes identically: the decomposition is fat nowhere."""


class NotConstructorForm(ValueError):
    pass


@dataclass(frozen=True)
class BaseStructure:
    dec: Decomposition
    f: tuple[tuple[ScalarExpr, ...], ...]

    @classmethod
    def of(cls, dec: Decomposition) -> BaseStructure:
        alg = dec.alg
        rows = []
        for hi in dec.base:
            rows.append(tuple(from_ratfunc(RatFunc(dec.pair_h(alg.c(hi, hj)))) for hj in dec.base))
        return cls(dec, tuple(rows))


@dataclass
class DynamicalR:
    dec: Decomposition
    r: Multivector
    a: list[list[Poly]] | None = None
    c: list[list[ScalarExpr]] | None = None
    det: Poly | None = None
    source: str = "explicit"

    @property
    def l(self) -> int:
        return self.dec.l

    def coefficient(self, i: int, j: int) -> ScalarExpr:
        """Coefficient of ``e_i∧e_j`` (basis indices)."""
        return self.r.coefficient(i, j)

    def partial(self, k: int) -> Multivector:
        return self.r.diff(k)

    def is_nondegenerate_at(self, point: Sequence) -> bool:
        if self.a is None:
            raise NotConstructorForm(
                "non-degeneracy is only decided for r built from a decomposition "
                "(as invertibility of a(λ)); no criterion is implemented for general r")
        return fatness(self.dec, point)["fat"]

    def shifted(self, mu: Sequence) -> DynamicalR:
        """The reparameterization ``λ -> λ - μ`` of every coefficient."""
        mu = [Fraction(x) for x in mu]
        r = self.r.map_coefficients(lambda c: substitute_shift(c, mu))
        return DynamicalR(self.dec, r, source=f"shift({self.source})")

    def __repr__(self) -> str:
        return f"DynamicalR({self.dec.name or self.dec.alg.name}: {self.r.to_str()})"


# matrices ----------------------------------------------------------------------

def a_matrix(dec: Decomposition) -> list[list[Poly]]:
    alg = dec.alg
    return [[dec.pair_h(alg.c(i, j)) for j in dec.complement] for i in dec.complement]


def _minor_table(rows: Sequence[Sequence[Poly]]):
    """``det`` of the leading ``|S|`` rows restricted to column subset ``S``."""
    n = len(rows)

    @lru_cache(maxsize=None)
    def minor(cols: tuple[int, ...]) -> Poly:
        k = len(cols)
        if k == 0:
            return Poly.const(1)
        row = rows[k - 1]
        out = Poly()
        for pos, j in enumerate(cols):
            if row[j].is_zero():
                continue
            sub = minor(cols[:pos] + cols[pos + 1:])
            if sub.is_zero():
                continue
            term = row[j] * sub
            # expanding along the last row: sign (-1)^{(k-1)+pos}
            out = out - term if (k - 1 + pos) % 2 else out + term
        return out

    return minor, n


def determinant(m: Sequence[Sequence[Poly]]) -> Poly:
    minor, n = _minor_table(m)
    return minor(tuple(range(n)))


def pfaffian(m: Sequence[Sequence[Poly]]) -> Poly:
    n = len(m)
    if n % 2:
        return Poly()

    @lru_cache(maxsize=None)
    def pf(idx: tuple[int, ...]) -> Poly:
        if not idx:
            return Poly.const(1)
        first, rest = idx[0], idx[1:]
        out = Poly()
        for pos, j in enumerate(rest):
            if m[first][j].is_zero():
                continue
            sub = pf(rest[:pos] + rest[pos + 1:])
            term = m[first][j] * sub
            out = out - term if pos % 2 else out + term
        return out

    return pf(tuple(range(n)))


def cofactor(m: Sequence[Sequence[Poly]], i: int, j: int) -> Poly:
    n = len(m)
    rows = [[m[r][s] for s in range(n) if s != j] for r in range(n) if r != i]
    d = determinant(rows)
    return -d if (i + j) % 2 else d


def _split(p: Poly, candidates: Sequence[Poly]) -> tuple[list[tuple[Poly, int]], Poly]:
    """Peel candidate factors off ``p``; returns (factors, cofactor)."""
    out = []
    for f in candidates:
        k = 0
        while not p.is_constant():
            q = p.exact_div(f)
            if q is None:
                break
            p, k = q, k + 1
        if k:
            out.append((f, k))
    return out, p


def _linear_atoms(a: Sequence[Sequence[Poly]]) -> list[Poly]:
    seen: dict[tuple, Poly] = {}
    for row in a:
        for p in row:
            if p.is_zero() or p.is_constant():
                continue
            _, lc = p.leading()
            q = p.scale(1 / lc)
            seen.setdefault(q.key(), q)
    return [seen[k] for k in sorted(seen)]


def _den_ratfunc(factors, rest: Poly) -> RatFunc:
    out = RatFunc.quotient(Poly.const(1), rest)
    for f, k in factors:
        out = out * RatFunc.quotient(Poly.const(1), f ** k)
    return out


def construct_r(dec: Decomposition) -> DynamicalR:
    """``r = ½ Σ c_ij e_i∧e_j`` with ``c = a^{-1}`` computed as adjugate/det.

    For even ``|M|`` the common Pfaffian factor of the adjugate is divided out
    exactly, which keeps the coefficient expressions small.
    """
    n = len(dec.complement)
    if n > SYMBOLIC_LIMIT:
        raise ValueError(f"|M| = {n} exceeds the symbolic limit {SYMBOLIC_LIMIT}; "
                         "use cdybe_residual_at for point evaluation")
    a = a_matrix(dec)
    det = determinant(a)
    if det.is_zero():
        raise DegenerateEverywhere(f"det a(λ) vanishes identically for {dec.name or dec.alg.name}")
    pf = pfaffian(a)
    if pf.is_zero() or pf * pf != det:
        pf = None
    divisor = pf if pf is not None else det
    factors, rest = _split(divisor, _linear_atoms(a))
    inv_div = _den_ratfunc(factors, rest)
    c: list[list[ScalarExpr]] = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            cof = cofactor(a, j, i)
            if pf is not None:
                q = cof.exact_div(pf)
                if q is None:
                    raise ArithmeticError("adjugate entry not divisible by the Pfaffian")
                c[i][j] = from_ratfunc(RatFunc(q) * inv_div)
            else:
                c[i][j] = from_ratfunc(RatFunc(cof) * inv_div)
    # diagonal of the inverse of a skew matrix vanishes
    r = bivector_from_matrix(dec.alg, dec.complement, c)
    return DynamicalR(dec, r, a=a, c=c, det=det, source="constructed")


def from_bivector(dec: Decomposition, coeffs: dict[tuple[int, int], object]) -> DynamicalR:
    """A user-supplied ``r = Σ_{i<j} coeffs[i,j] e_i∧e_j``."""
    return DynamicalR(dec, Multivector(dec.alg, coeffs), source="explicit")


# residuals ---------------------------------------------------------------------

def cdybe_residual(r: DynamicalR) -> Multivector:
    """``Σ_i h_i ∧ ∂r/∂λ^i - ½ [r, r]``."""
    dec = r.dec
    alg = dec.alg
    out = r.r.schouten(r.r).scale(Const(Fraction(-1, 2)))
    for k, hk in enumerate(dec.base):
        d = r.r.diff(k)
        if d.terms:
            out = out + Multivector.basis(alg, hk).wedge(d)
    return out


def equivariance_residual(r: DynamicalR, base: BaseStructure | None, i: int) -> Multivector:
    """``ad(h_i) r + Σ_j f_ij ∂r/∂λ^j`` for the ``i``-th base direction (0-based)."""
    dec = r.dec
    base = base or BaseStructure.of(dec)
    out = ad_action(dec.base[i], r.r)
    for j in range(dec.l):
        fij = base.f[i][j]
        if fij.is_const() and not fij.value:
            continue
        out = out + r.r.diff(j).scale(fij)
    return out


# closed forms -----------------------------------------------------------------

def _pair_expr(dec: Decomposition, i: int, j: int) -> ScalarExpr:
    return from_ratfunc(RatFunc(dec.pair_h(dec.alg.c(i, j))))


def closed_form(kind: str, dec: Decomposition | None = None, **params) -> DynamicalR:
    """Printed closed forms.

    * ``simple_cartan``: ``-Σ_{α>0} 1/(λ,α) e_α∧e_{-α}`` on a Cartan decomposition;
    * ``simple_reductive_restricted``: the same sum over the root pairs in ``m``
      for a Levi-type base (a function of the Cartan coordinates only);
    * ``heisenberg``: ``-(1/x) Σ_{i≤m} p_i∧q_i`` with ``x`` the central coordinate.

    ``(λ,α)`` is always ``<λ, [e_α, e_{-α}]_h>``.
    """
    if kind == "heisenberg":
        if dec is None:
            _, dec = builtin(f"heisenberg({params['m']},{params['n']})")
        alg = dec.alg
        c_idx = alg.index("c")
        x = dec.coordinate(c_idx)
        coeff = from_ratfunc(RatFunc.quotient(Poly.const(-1), x))
        terms = {pair: coeff for pair in dec.root_pairs}
        return DynamicalR(dec, Multivector(alg, terms), source="closed_form:heisenberg")
    if kind in ("simple_cartan", "simple_reductive_restricted"):
        if dec is None:
            name = params.get("name")
            if not name:
                raise UnknownName(kind)
            _, dec = builtin(name)
        if not dec.root_pairs:
            raise UnknownName(f"{kind}: decomposition carries no root pairs")
        terms = {}
        for ea, fa in dec.root_pairs:
            p = dec.pair_h(dec.alg.c(ea, fa))
            terms[(ea, fa)] = from_ratfunc(RatFunc.quotient(Poly.const(-1), p))
        return DynamicalR(dec, Multivector(dec.alg, terms), source=f"closed_form:{kind}")
    raise UnknownName(kind)


# fatness and point evaluation ---------------------------------------------------

def fatness(dec: Decomposition, point: Sequence) -> dict:
    point = [Fraction(x) for x in point]
    if len(point) != dec.l:
        raise ValueError(f"point has {len(point)} coordinates, expected {dec.l}")
    a = a_matrix(dec)
    det = determinant(a)
    value = det.eval(point)
    return {"fat": value != 0, "det": det, "value": value}


def _a_at(dec: Decomposition, point) -> list[list[Fraction]]:
    return [[p.eval(point) for p in row] for row in a_matrix(dec)]


def c_at(dec: Decomposition, point) -> list[list[Fraction]]:
    return frac_inverse(_a_at(dec, point))


def dc_at(dec: Decomposition, point, k: int) -> list[list[Fraction]]:
    """``∂c/∂λ^k = -c (∂a/∂λ^k) c`` at a point."""
    c = c_at(dec, point)
    da = [[p.diff(k).eval(()) if p.degree() <= 1 else p.diff(k).eval(point) for p in row]
          for row in a_matrix(dec)]
    prod = matmul(matmul(c, da), c)
    return [[-x for x in row] for row in prod]


def cdybe_residual_at(dec: Decomposition, point) -> dict[tuple[int, ...], Fraction]:
    """The residual's coefficients at one point, for decompositions too large
    for the symbolic inverse.  Derivatives come from ``-c (∂a) c``."""
    point = [Fraction(x) for x in point]
    alg = dec.alg
    c = c_at(dec, point)
    r = bivector_from_matrix(alg, dec.complement, [[Const(x) for x in row] for row in c])
    out = r.schouten(r).scale(Const(Fraction(-1, 2)))
    for k, hk in enumerate(dec.base):
        d = dc_at(dec, point, k)
        dr = bivector_from_matrix(alg, dec.complement, [[Const(x) for x in row] for row in d])
        out = out + Multivector.basis(alg, hk).wedge(dr)
    return {b: v.value for b, v in out.terms.items()}
