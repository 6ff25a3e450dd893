"""Order-by-order search for twists.

With ``F = F_partial + ℏ^k Σ_a t_a φ_a(λ) U_a⊗V_a`` the ``ℏ^k`` parts of the
cocycle and counit residuals are affine in the unknowns ``t``.  Requiring
every coefficient to vanish identically in ``λ`` gives a linear system over
Q, solved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..exact import Poly, RatFunc, ScalarExpr, as_expr
from ..exact.linalg import rref, solve_affine
from ..exterior import Multivector
from .identities import cocycle_residual, counit_check
from .tensor import Context, DynTensor


class Infeasible(ArithmeticError):
    """No combination of the ansatz clears the order-``k`` residual."""

    def __init__(self, msg: str, residual: DynTensor | None = None, rank: int | None = None):
        super().__init__(msg)
        self.residual = residual
        self.rank = rank


@dataclass
class TwistSolution:
    F_partial: DynTensor
    ansatz: list[tuple[ScalarExpr, tuple[tuple[int, ...], tuple[int, ...]]]]
    k: int
    particular: list[Fraction]
    kernel: list[list[Fraction]]
    equations: int = 0

    @property
    def dimension(self) -> int:
        return len(self.kernel)

    def instantiate(self, t: Sequence | None = None) -> DynTensor:
        """``F_partial + ℏ^k Σ t_a φ_a``; ``t`` defaults to the particular solution."""
        t = self.particular if t is None else [Fraction(x) for x in t]
        return self.F_partial + _ansatz_tensor(self.F_partial.ctx, self.ansatz, self.k, t)

    def member(self, coords: Sequence) -> DynTensor:
        """Particular solution plus ``Σ coords_i kernel_i``."""
        t = list(self.particular)
        for c, v in zip(coords, self.kernel):
            t = [a + Fraction(c) * b for a, b in zip(t, v)]
        return self.instantiate(t)

    def to_json(self) -> dict:
        return {"k": self.k, "particular": [str(x) for x in self.particular],
                "kernel": [[str(x) for x in v] for v in self.kernel], "equations": self.equations}


def _ansatz_tensor(ctx: Context, ansatz, k: int, t: Sequence[Fraction]) -> DynTensor:
    terms: dict = {}
    for (phi, words), ta in zip(ansatz, t):
        if not ta:
            continue
        key = (k, tuple(words))
        prev = terms.get(key)
        val = phi * ta
        terms[key] = val if prev is None else prev + val
    return DynTensor(ctx, 2, terms)


def _rebase(T: DynTensor, ctx: Context) -> DynTensor:
    return DynTensor(ctx, T.n, {key: c for key, c in T.terms.items() if key[0] <= ctx.N}, normalize=False)


def _order_k_residuals(F: DynTensor, k: int, r_tensor: DynTensor | None) -> list[DynTensor]:
    out = [cocycle_residual(F).order_part(k)]
    out += [c.order_part(k) for c in counit_check(F)]
    if r_tensor is not None and k == 1:
        diff = F.order_part(1) - F.order_part(1).place((2, 1), 2)
        out.append(diff - r_tensor)
    return out


def _linear_rows(base: list[DynTensor], columns: list[list[DynTensor]]):
    """Rows ``Σ_a t_a N_a[m] = -N_0[m]`` for every residual coefficient and
    numerator monomial after clearing denominators."""
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for idx, b in enumerate(base):
        keys = set(b.terms)
        for col in columns:
            keys |= set(col[idx].terms)
        for key in sorted(keys):
            exprs = [b.terms.get(key)] + [col[idx].terms.get(key) for col in columns]
            rfs = [e.normal_form() if e is not None else RatFunc.const(0) for e in exprs]
            den: dict[Poly, int] = {}
            for rf in rfs:
                for atom, e in rf.den:
                    den[atom] = max(den.get(atom, 0), e)
            D = Poly.const(1)
            for atom, e in den.items():
                D = D * atom ** e
            nums = []
            for rf in rfs:
                q = rf * RatFunc(D)
                if not q.is_polynomial():
                    raise ArithmeticError("could not clear denominators")
                nums.append(q.num)
            monos = set()
            for p in nums:
                monos |= set(p.terms)
            for m in sorted(monos):
                rows.append([p.terms.get(m, Fraction(0)) for p in nums[1:]])
                rhs.append(-nums[0].terms.get(m, Fraction(0)))
    return rows, rhs


def solve_twist_order(F_partial: DynTensor, ansatz, k: int, classical_r: Multivector | None = None) -> TwistSolution:
    """Affine solution set of the order-``k`` cocycle and counit conditions.

    ``ansatz`` is a sequence of ``(coefficient, (word1, word2))`` with words as
    index tuples (or label sequences).  ``classical_r`` (only used at
    ``k = 1``) adds the constraint ``F1_12 - F1_21 = r``.
    """
    if F_partial.n != 2:
        raise ValueError("twists have arity 2")
    ctx = F_partial.ctx.with_order(k)
    Fp = _rebase(F_partial, ctx).truncate(k - 1)
    alg = ctx.alg
    norm = []
    for phi, (u, v) in ansatz:
        u = tuple(alg.index(x) if isinstance(x, str) else x for x in u)
        v = tuple(alg.index(x) if isinstance(x, str) else x for x in v)
        norm.append((as_expr(phi), (u, v)))
    r_t = DynTensor.from_bivector(ctx, classical_r, hbar=1).order_part(1) if classical_r is not None else None
    base = _order_k_residuals(Fp, k, r_t)
    columns = []
    for a in range(len(norm)):
        unit = [Fraction(int(a == b)) for b in range(len(norm))]
        Fa = Fp + _ansatz_tensor(ctx, norm, k, unit)
        res = _order_k_residuals(Fa, k, r_t)
        columns.append([x - y for x, y in zip(res, base)])
    rows, rhs = _linear_rows(base, columns)
    if not rows:
        part = [Fraction(0)] * len(norm)
        kernel = [[Fraction(int(a == b)) for b in range(len(norm))] for a in range(len(norm))]
        return TwistSolution(F_partial, norm, k, part, kernel, 0)
    sol = solve_affine(rows, rhs)
    if sol is None:
        _, piv = rref(rows, len(norm))
        raise Infeasible(f"no ansatz combination clears the order-{k} residual "
                         f"({len(rows)} equations, rank {len(piv)} over {len(norm)} unknowns)",
                         base[0], len(piv))
    part, kernel = sol
    return TwistSolution(F_partial, norm, k, part, kernel, len(rows))
