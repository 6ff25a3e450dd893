"""Truncated ℏ-series in ``C(h*) ⊗ (Ug)^{⊗n}``.

A :class:`DynTensor` stores ``(k, (w_1, ..., w_n)) -> f(λ)`` meaning
``ℏ^k f(λ) w_1⊗...⊗w_n`` with every ``w_s`` a normal-ordered word of ``Ug``.
Scalars multiply with the PBW-star product of the base, legs with the
ordinary product of ``Ug``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

from ..exact import ONE, ZERO, Const, ScalarExpr, as_expr, expr_sum, from_ratfunc, is_zero
from ..exact.errors import ExpansionTooLarge
from ..exterior import Multivector
from ..liealg import Decomposition, LieAlgebra
from ..pbw import DerivCache, envelope, pbw_for, shift, star_expr

Word = tuple[int, ...]
Key = tuple[int, tuple[Word, ...]]

DEFAULT_ORDER = 4
DEFAULT_MAX_DEGREE = 48


class NotUnital(ValueError):
    pass


class SlotOutOfRange(IndexError):
    pass


class SlotNotFree(ValueError):
    pass


class DegreeBudgetExceeded(ArithmeticError):
    pass


class Context:
    """Algebra, decomposition and truncation order shared by tensors."""

    def __init__(self, dec: Decomposition, order: int = DEFAULT_ORDER, max_degree: int = DEFAULT_MAX_DEGREE):
        self.dec = dec
        self.alg: LieAlgebra = dec.alg
        self.N = order
        self.max_degree = max_degree
        self.env = envelope(dec.alg)
        self.pbw = pbw_for(dec.base_algebra)
        self.dcache = DerivCache()

    def with_order(self, order: int) -> Context:
        out = Context.__new__(Context)
        out.__dict__.update(self.__dict__)
        out.N = order
        return out

    def star(self, f: ScalarExpr, g: ScalarExpr, n: int):
        return star_expr(self.pbw, f, g, n, self.dcache, self.N)

    def parse_word(self, labels: Sequence[str]) -> dict[Word, Fraction]:
        return self.env.normal_order([self.alg.index(x) for x in labels])


def _nonzero(c: ScalarExpr) -> bool:
    if c.is_const():
        return bool(c.value)
    try:
        return not c.normal_form(200_000).is_zero()
    except ExpansionTooLarge:
        return True


def _finish(acc: Mapping[Key, list[ScalarExpr]]) -> dict[Key, ScalarExpr]:
    out = {}
    for key, items in acc.items():
        if len(items) == 1 and (items[0].is_const() or items[0]._canonical):
            c = items[0]
        else:
            c = expr_sum(items)
        if _nonzero(c):
            out[key] = c
    return out


class DynTensor:
    __slots__ = ("ctx", "n", "terms")

    def __init__(self, ctx: Context, n: int, terms: Mapping[Key, object] | None = None, *, normalize=True):
        self.ctx = ctx
        self.n = n
        if not normalize:
            self.terms = dict(terms or {})
            return
        acc: dict[Key, list[ScalarExpr]] = {}
        env = ctx.env
        for (k, words), c in (terms or {}).items():
            if k > ctx.N:
                continue
            if len(words) != n:
                raise ValueError(f"expected {n} legs, got {len(words)}")
            c = as_expr(c)
            parts = [env.normal_order(w) if tuple(w) != tuple(sorted(w)) else {tuple(w): Fraction(1)}
                     for w in words]
            for combo in iproduct(*[p.items() for p in parts]):
                coef = Fraction(1)
                for _, cc in combo:
                    coef *= cc
                key = (k, tuple(w for w, _ in combo))
                acc.setdefault(key, []).append(c if coef == 1 else Const(coef) * c)
        self.terms = _finish(acc)

    # constructors --------------------------------------------------------------
    @classmethod
    def one(cls, ctx: Context, n: int) -> DynTensor:
        return cls(ctx, n, {(0, ((),) * n): ONE}, normalize=False)

    @classmethod
    def zero(cls, ctx: Context, n: int) -> DynTensor:
        return cls(ctx, n, {}, normalize=False)

    @classmethod
    def from_labels(cls, ctx: Context, items: Iterable[tuple[int, object, Sequence[Sequence[str]]]]) -> DynTensor:
        """``[(k, coeff, [[labels of leg 1], [labels of leg 2], ...]), ...]``."""
        items = list(items)
        n = len(items[0][2]) if items else 0
        terms: dict[Key, object] = {}
        acc: dict[Key, list] = {}
        for k, c, legs in items:
            words = tuple(tuple(ctx.alg.index(x) for x in leg) for leg in legs)
            acc.setdefault((k, words), []).append(as_expr(c))
        for key, cs in acc.items():
            terms[key] = expr_sum(cs)
        return cls(ctx, n, terms)

    @classmethod
    def from_bivector(cls, ctx: Context, r: Multivector, hbar: int = 0, scale=1) -> DynTensor:
        """``e_i∧e_j -> e_i⊗e_j - e_j⊗e_i``."""
        s = as_expr(scale)
        terms: dict[Key, object] = {}
        for blade, c in r.terms.items():
            if len(blade) != 2:
                raise ValueError("bivector expected")
            i, j = blade
            terms[(hbar, ((i,), (j,)))] = s * c
            terms[(hbar, ((j,), (i,)))] = -(s * c)
        return cls(ctx, 2, terms)

    @classmethod
    def from_trivector(cls, ctx: Context, t: Multivector, hbar: int = 0) -> DynTensor:
        """``x∧y∧z -> Σ_π sgn(π) π(x⊗y⊗z)``."""
        perms = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]
        acc: dict[Key, list] = {}
        for blade, c in t.terms.items():
            if len(blade) != 3:
                raise ValueError("trivector expected")
            for p, s in perms:
                key = (hbar, tuple((blade[p[a]],) for a in range(3)))
                acc.setdefault(key, []).append(c if s > 0 else -c)
        return cls(ctx, 3, {k: expr_sum(v) for k, v in acc.items()})

    def _like(self, terms: dict[Key, ScalarExpr], n: int | None = None) -> DynTensor:
        return DynTensor(self.ctx, self.n if n is None else n, terms, normalize=False)

    # inspection ------------------------------------------------------------------
    def order_part(self, k: int) -> DynTensor:
        return self._like({key: c for key, c in self.terms.items() if key[0] == k})

    def orders(self) -> list[int]:
        return sorted({k for k, _ in self.terms})

    def coefficient(self, k: int, *legs: Sequence[str]) -> ScalarExpr:
        words = tuple(tuple(sorted(self.ctx.alg.index(x) for x in leg)) for leg in legs)
        return self.terms.get((k, words), ZERO)

    def max_word_degree(self) -> int:
        return max((sum(len(w) for w in words) for _, words in self.terms), default=0)

    def is_zero(self, **kw) -> bool:
        return all(v.zero for v in self.verdicts(**kw).values())

    def verdicts(self, strategy: str = "auto", seed: int = 0, threads: int | None = None, **kw):
        keys = sorted(self.terms)
        threads = threads or _threads()

        def run(key):
            return is_zero(self.terms[key], strategy, seed=seed, **kw)

        if threads > 1 and len(keys) > 1:
            with ThreadPoolExecutor(threads) as ex:
                results = list(ex.map(run, keys))
        else:
            results = [run(k) for k in keys]
        return dict(zip(keys, results))

    def label_key(self, key: Key) -> dict:
        k, words = key
        return {"hbar": k, "legs": [[self.ctx.alg.labels[i] for i in w] for w in words]}

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        labels = self.ctx.alg.labels
        parts = []
        for (k, words), c in sorted(self.terms.items()):
            legs = "⊗".join("*".join(labels[i] for i in w) or "1" for w in words)
            h = "" if k == 0 else ("hbar*" if k == 1 else f"hbar^{k}*")
            parts.append(f"{h}({c})*{legs}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DynTensor[{self.n}]({self.to_str()})"

    # linear structure -------------------------------------------------------------
    def _check(self, other: DynTensor):
        if other.n != self.n:
            raise ValueError(f"arity mismatch: {self.n} vs {other.n}")

    def __add__(self, other: DynTensor) -> DynTensor:
        self._check(other)
        acc: dict[Key, list] = {k: [c] for k, c in self.terms.items()}
        for k, c in other.terms.items():
            acc.setdefault(k, []).append(c)
        return self._like(_finish(acc))

    def __neg__(self) -> DynTensor:
        return self._like({k: (-c).compact() for k, c in self.terms.items()})

    def __sub__(self, other: DynTensor) -> DynTensor:
        return self + (-other)

    def scale(self, s) -> DynTensor:
        """Multiply by a λ-independent constant."""
        s = as_expr(s)
        if not s.is_const():
            raise ValueError("scale expects a constant; use mul for λ-dependent factors")
        return self._like(_finish({k: [s * c] for k, c in self.terms.items()}))

    def hbar_shift(self, m: int) -> DynTensor:
        N = self.ctx.N
        return self._like({(k + m, w): c for (k, w), c in self.terms.items() if k + m <= N})

    def truncate(self, order: int) -> DynTensor:
        return self._like({key: c for key, c in self.terms.items() if key[0] <= order})

    def map_coefficients(self, f) -> DynTensor:
        return self._like(_finish({k: [f(c)] for k, c in self.terms.items()}))

    def diff(self, j: int) -> DynTensor:
        return self.map_coefficients(lambda c: c.diff(j))

    # algebra -------------------------------------------------------------------------
    def mul(self, other: DynTensor) -> DynTensor:
        self._check(other)
        ctx = self.ctx
        N = ctx.N
        env = ctx.env
        acc: dict[Key, list[ScalarExpr]] = {}
        for (k1, u), f in self.terms.items():
            for (k2, v), g in other.terms.items():
                room = N - k1 - k2
                if room < 0:
                    continue
                legs = [env.mul_words(a, b) for a, b in zip(u, v)]
                deg = sum(len(a) + len(b) for a, b in zip(u, v))
                if deg > ctx.max_degree:
                    raise DegreeBudgetExceeded(
                        f"Ug monomial degree {deg} exceeds the budget {ctx.max_degree}")
                sc = ctx.star(f, g, room)
                for j in range(room + 1):
                    s = sc[j]
                    if s.is_const() and not s.value:
                        continue
                    for combo in iproduct(*[leg.items() for leg in legs]):
                        coef = Fraction(1)
                        for _, cc in combo:
                            coef *= cc
                        key = (k1 + k2 + j, tuple(w for w, _ in combo))
                        acc.setdefault(key, []).append(s if coef == 1 else Const(coef) * s)
        return self._like(_finish(acc))

    __mul__ = mul

    def is_unital(self) -> bool:
        base = {key: c for key, c in self.terms.items() if key[0] == 0}
        one_key = (0, ((),) * self.n)
        if set(base) != {one_key}:
            return False
        return is_zero(base[one_key] - ONE, "auto").zero

    def invert(self) -> DynTensor:
        """``Σ_j (1 - A)^j`` for unital ``A``."""
        if not self.is_unital():
            raise NotUnital("order-0 part is not the identity tensor")
        one = DynTensor.one(self.ctx, self.n)
        x = one - self
        out = one
        power = one
        for _ in range(self.ctx.N):
            power = power.mul(x)
            if not power.terms:
                break
            out = out + power
        return out

    # legs ---------------------------------------------------------------------------------
    def place(self, slots: Sequence[int], n: int) -> DynTensor:
        """Move leg ``a`` to slot ``slots[a]`` (1-based) of an arity-``n`` tensor."""
        slots = list(slots)
        if len(slots) != self.n or len(set(slots)) != len(slots):
            raise SlotOutOfRange(f"need {self.n} distinct slots, got {slots}")
        for s in slots:
            if not 1 <= s <= n:
                raise SlotOutOfRange(f"slot {s} outside 1..{n}")
        out = {}
        for (k, words), c in self.terms.items():
            new = [()] * n
            for w, s in zip(words, slots):
                new[s - 1] = w
            out[(k, tuple(new))] = c
        return self._like(out, n)

    def permute(self, legs_in_slots: Sequence[int]) -> DynTensor:
        """Slot ``s`` receives leg ``legs_in_slots[s-1]`` (1-based)."""
        slots = [0] * self.n
        for s, leg in enumerate(legs_in_slots, start=1):
            slots[leg - 1] = s
        return self.place(slots, self.n)

    def shift_insert(self, slot: int) -> DynTensor:
        """Replace every ``f(λ)`` by ``f(λ+ℏh)`` with the ``Uh`` part in ``slot``."""
        if not 1 <= slot <= self.n:
            raise SlotOutOfRange(f"slot {slot} outside 1..{self.n}")
        ctx = self.ctx
        N = ctx.N
        acc: dict[Key, list[ScalarExpr]] = {}
        for (k, words), c in self.terms.items():
            if words[slot - 1]:
                raise SlotNotFree(f"slot {slot} carries {words[slot - 1]}")
            if c.is_const():
                acc.setdefault((k, words), []).append(c)
                continue
            series = shift(ctx.dec, c, N - k, ctx.dcache)
            for m in range(N - k + 1):
                for w, rf in series[m].items():
                    new = list(words)
                    new[slot - 1] = w
                    acc.setdefault((k + m, tuple(new)), []).append(from_ratfunc(rf))
        return self._like(_finish(acc))

    def coproduct(self, leg: int) -> DynTensor:
        """``Δ`` on leg ``leg`` (1-based); arity grows by one."""
        from ..pbw import coproduct_word

        acc: dict[Key, list[ScalarExpr]] = {}
        for (k, words), c in self.terms.items():
            w = words[leg - 1]
            for (a, b), m in coproduct_word(w).items():
                new = words[:leg - 1] + (a, b) + words[leg:]
                acc.setdefault((k, new), []).append(c if m == 1 else Const(m) * c)
        return self._like(_finish(acc), self.n + 1)

    def counit(self, leg: int) -> DynTensor:
        out = {}
        for (k, words), c in self.terms.items():
            if not words[leg - 1]:
                out[(k, words[:leg - 1] + words[leg:])] = c
        return self._like(out, self.n - 1)

    def ad(self, x: int) -> DynTensor:
        """``Σ_s ad_x`` acting on every leg as a derivation."""
        env = self.ctx.env
        acc: dict[Key, list[ScalarExpr]] = {}
        for (k, words), c in self.terms.items():
            for s, w in enumerate(words):
                if not w:
                    continue
                comm: dict[Word, Fraction] = {}
                for w2, cc in env.mul_words((x,), w).items():
                    comm[w2] = comm.get(w2, 0) + cc
                for w2, cc in env.mul_words(w, (x,)).items():
                    comm[w2] = comm.get(w2, 0) - cc
                for w2, cc in comm.items():
                    if cc:
                        new = words[:s] + (w2,) + words[s + 1:]
                        acc.setdefault((k, new), []).append(Const(cc) * c)
        return self._like(_finish(acc))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("THREADS", "1")))
    except ValueError:
        return 1


def mul_all(*ts: DynTensor) -> DynTensor:
    out = ts[0]
    for t in ts[1:]:
        out = out.mul(t)
    return out
