"""Finite-dimensional Lie algebras over Q given by structure constants.

Builtin algebras:

* ``sl2``: basis ``h, e, f`` with ``[h,e]=2e, [h,f]=-2f, [e,f]=h``.
* ``sl3``: Chevalley basis ``h1, h2, e1, e2, e3, f1, f2, f3`` read off the
  elementary matrices (``e1=E12, e2=E23, e3=E13`` and transposes for the
  ``f``'s, ``h1=E11-E22, h2=E22-E33``).  Paired root vectors satisfy
  ``[e_a, f_a] = coroot``, so the pairing ``(λ, α)`` is realized as
  ``<λ, [e_α, e_{-α}]_h>``; no Killing-form normalization is assumed.
* ``heisenberg(m,n)``: ``p1..p_{m+n}, q1..q_{m+n}, c`` with ``[p_i,q_j]=δ_ij c``.
* ``abelian(n)``: ``x1..xn`` with zero bracket.

Coordinates on the dual of the base subalgebra are always the duals of the
base basis, in the order the base indices are listed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .exact import ZERO, Const, Poly, ScalarExpr, as_expr, as_fraction, is_zero


class UnknownName(KeyError):
    pass


class LieAlgebra:
    """Structure constants ``[e_i, e_j] = Σ_k c[i][j][k] e_k``.

    The raw table is stored as given (both orders), so a table that is not
    antisymmetric can be represented and flagged by :meth:`validate`.
    """

    def __init__(self, labels: Sequence[str], table: Mapping[tuple[int, int], Mapping[int, object]],
                 *, antisymmetrize: bool = False, name: str | None = None):
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        if len(set(self.labels)) != self.dim:
            raise ValueError("basis labels must be distinct")
        self.name = name or f"lie{self.dim}"
        raw: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), terms in table.items():
            for k, c in terms.items():
                c = as_fraction(c)
                if not c:
                    continue
                self._check(i, j, k)
                raw.setdefault((i, j), {})
                raw[(i, j)][k] = raw[(i, j)].get(k, 0) + c
                if antisymmetrize:
                    raw.setdefault((j, i), {})
                    raw[(j, i)][k] = raw[(j, i)].get(k, 0) - c
        self.table = {key: {k: c for k, c in v.items() if c} for key, v in raw.items()}
        self.table = {key: v for key, v in self.table.items() if v}

    def _check(self, *idx):
        for i in idx:
            if not 0 <= i < self.dim:
                raise IndexError(f"basis index {i} out of range for dimension {self.dim}")

    def c(self, i: int, j: int) -> Mapping[int, Fraction]:
        return self.table.get((i, j), {})

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownName(label) from None

    def is_abelian(self) -> bool:
        return not self.table

    def structure_constant(self, i, j, k) -> Fraction:
        return self.c(i, j).get(k, Fraction(0))

    def bracket_basis(self, i: int, j: int) -> dict[int, Fraction]:
        return dict(self.c(i, j))

    def validate(self) -> list[dict]:
        """Every antisymmetry and Jacobi violation; an empty list means valid."""
        out = []
        n = self.dim
        for i in range(n):
            for j in range(i, n):
                for k in range(n):
                    s = self.structure_constant(i, j, k) + self.structure_constant(j, i, k)
                    if s:
                        out.append({"kind": "antisymmetry", "indices": [i, j, k], "value": s})
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc: dict[int, Fraction] = {}
                    for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
                        for m, cm in self.c(a, b).items():
                            for p, cp in self.c(m, cc).items():
                                acc[p] = acc.get(p, 0) + cm * cp
                    for p in sorted(acc):
                        if acc[p]:
                            out.append({"kind": "jacobi", "indices": [i, j, k, p], "value": acc[p]})
        return out

    def subalgebra(self, indices: Sequence[int], name: str | None = None) -> LieAlgebra:
        """The span of ``indices`` as an algebra in its own right (must be closed)."""
        pos = {g: a for a, g in enumerate(indices)}
        table = {}
        for a, i in enumerate(indices):
            for b, j in enumerate(indices):
                terms = {}
                for k, c in self.c(i, j).items():
                    if k not in pos:
                        raise ValueError(f"[{self.labels[i]}, {self.labels[j]}] leaves the subalgebra")
                    terms[pos[k]] = c
                if terms:
                    table[(a, b)] = terms
        return LieAlgebra([self.labels[i] for i in indices], table, name=name or f"{self.name}|sub")

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name}, dim={self.dim})"


# vectors ---------------------------------------------------------------------

Vector = tuple  # dense tuple of ScalarExpr, one per basis element


def basis_vector(alg: LieAlgebra, i: int) -> Vector:
    return tuple(Const(1) if k == i else ZERO for k in range(alg.dim))


def vector(alg: LieAlgebra, coeffs: Sequence) -> Vector:
    if len(coeffs) != alg.dim:
        raise ValueError(f"vector needs {alg.dim} coefficients")
    return tuple(as_expr(c) for c in coeffs)


def bracket(alg: LieAlgebra, x: Sequence[ScalarExpr], y: Sequence[ScalarExpr]) -> Vector:
    out: list[ScalarExpr] = [ZERO] * alg.dim
    for (i, j), terms in alg.table.items():
        xi, yj = x[i], y[j]
        if (xi.is_const() and not xi.value) or (yj.is_const() and not yj.value):
            continue
        prod = xi * yj
        for k, c in terms.items():
            out[k] = out[k] + Const(c) * prod
    return tuple(o.compact() for o in out)


def vector_is_zero(v: Sequence[ScalarExpr], **kw) -> bool:
    return all(is_zero(c, **kw).zero for c in v)


# decompositions --------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """``g = h ⊕ m`` with ``h`` spanned by ``base`` and ``m`` by ``complement``.

    ``root_pairs`` optionally lists ``(e_α, e_{-α})`` index pairs in ``m`` for
    positive roots; it is metadata for closed-form r-matrices.
    """

    alg: LieAlgebra
    base: tuple[int, ...]
    complement: tuple[int, ...]
    root_pairs: tuple[tuple[int, int], ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "complement", tuple(self.complement))
        both = list(self.base) + list(self.complement)
        if sorted(both) != list(range(self.alg.dim)):
            raise ValueError("base and complement must partition the basis")

    @property
    def l(self) -> int:
        return len(self.base)

    @cached_property
    def base_algebra(self) -> LieAlgebra:
        return self.alg.subalgebra(self.base, name=f"{self.alg.name}|h")

    def coordinate(self, k: int) -> Poly:
        """``<λ, e_k>`` for a base basis element ``e_k`` (a coordinate function)."""
        return Poly.var(self.base.index(k))

    def pair_h(self, terms: Mapping[int, Fraction]) -> Poly:
        """``<λ, v_h>`` for ``v = Σ terms[k] e_k`` (only the base component counts)."""
        coeffs = [Fraction(0)] * self.l
        for k, c in terms.items():
            if k in self.base:
                coeffs[self.base.index(k)] += c
        return Poly.linear(coeffs)

    def check_reductive(self) -> list[dict]:
        """Violations of ``[h,h] ⊆ h`` and ``[h,m] ⊆ m``; empty means reductive."""
        alg = self.alg
        base, comp = set(self.base), set(self.complement)
        out = []
        for i in self.base:
            for j in self.base:
                bad = {k: c for k, c in alg.c(i, j).items() if k in comp}
                if bad:
                    out.append({"kind": "base_not_closed", "pair": [alg.labels[i], alg.labels[j]],
                                "leaks": {alg.labels[k]: str(c) for k, c in sorted(bad.items())}})
            for j in self.complement:
                bad = {k: c for k, c in alg.c(i, j).items() if k in base}
                if bad:
                    out.append({"kind": "not_reductive", "pair": [alg.labels[i], alg.labels[j]],
                                "leaks": {alg.labels[k]: str(c) for k, c in sorted(bad.items())}})
        return out

    def variable_names(self) -> list[str]:
        return [f"l{a + 1}" for a in range(self.l)]


def check_reductive(dec: Decomposition) -> list[dict]:
    return dec.check_reductive()


def validate(alg: LieAlgebra) -> list[dict]:
    return alg.validate()


# builtins --------------------------------------------------------------------

def _sl_n(n: int) -> tuple[LieAlgebra, list[int], list[tuple[int, int]]]:
    """sl(n) in a Chevalley basis from elementary matrices."""
    labels: list[str] = []
    mats: list[dict[tuple[int, int], Fraction]] = []
    for i in range(n - 1):
        labels.append(f"h{i + 1}")
        mats.append({(i, i): Fraction(1), (i + 1, i + 1): Fraction(-1)})
    pos: list[tuple[int, int]] = []
    # positive roots ordered by height, then position
    for height in range(1, n):
        for i in range(n - height):
            pos.append((i, i + height))
    for r, (i, j) in enumerate(pos):
        labels.append(f"e{r + 1}")
        mats.append({(i, j): Fraction(1)})
    for r, (i, j) in enumerate(pos):
        labels.append(f"f{r + 1}")
        mats.append({(j, i): Fraction(1)})

    def matmul(a, b):
        out: dict[tuple[int, int], Fraction] = {}
        for (i, k), x in a.items():
            for (k2, j), y in b.items():
                if k == k2:
                    out[(i, j)] = out.get((i, j), 0) + x * y
        return out

    def decompose(m):
        m = {k: v for k, v in m.items() if v}
        coeffs: dict[int, Fraction] = {}
        # off-diagonal entries
        for r, (i, j) in enumerate(pos):
            if m.get((i, j)):
                coeffs[n - 1 + r] = m[(i, j)]
            if m.get((j, i)):
                coeffs[n - 1 + len(pos) + r] = m[(j, i)]
        # diagonal: d = Σ a_i (E_ii - E_{i+1,i+1}); a_i = Σ_{k≤i} d_k
        run = Fraction(0)
        for i in range(n - 1):
            run += m.get((i, i), 0)
            if run:
                coeffs[i] = run
        return coeffs

    table = {}
    for a in range(len(mats)):
        for b in range(len(mats)):
            comm = matmul(mats[a], mats[b])
            for k, v in matmul(mats[b], mats[a]).items():
                comm[k] = comm.get(k, 0) - v
            terms = decompose(comm)
            if terms:
                table[(a, b)] = terms
    if n == 2:
        labels = ["h", "e", "f"]
    alg = LieAlgebra(labels, table, name=f"sl{n}")
    cartan = list(range(n - 1))
    pairs = [(n - 1 + r, n - 1 + len(pos) + r) for r in range(len(pos))]
    return alg, cartan, pairs


def sl(n: int) -> tuple[LieAlgebra, Decomposition]:
    alg, cartan, pairs = _sl_n(n)
    comp = [k for k in range(alg.dim) if k not in cartan]
    return alg, Decomposition(alg, tuple(cartan), tuple(comp), tuple(pairs), name=f"sl{n}")


def levi(n: int, simple: Sequence[int]) -> tuple[LieAlgebra, Decomposition]:
    """sl(n) with base ``l = h ⊕ Σ_{α∈Δ(l)} g_{±α}`` for the Levi subalgebra
    generated by the given simple roots (1-based)."""
    alg, cartan, pairs = _sl_n(n)
    _, _, pos = _roots(n)
    simple = set(simple)
    in_levi = []
    for r, (i, j) in enumerate(pos):
        if set(range(i + 1, j + 1)) <= simple:
            in_levi.append(r)
    base = list(cartan)
    for r in in_levi:
        base += [pairs[r][0], pairs[r][1]]
    reduced = tuple(p for r, p in enumerate(pairs) if r not in in_levi)
    comp = [k for k in range(alg.dim) if k not in base]
    tag = "".join(str(s) for s in sorted(simple))
    return alg, Decomposition(alg, tuple(base), tuple(comp), reduced, name=f"sl{n}_levi{tag}")


def _roots(n: int):
    pos = []
    for height in range(1, n):
        for i in range(n - height):
            pos.append((i, i + height))
    return n - 1, len(pos), pos


def heisenberg(m: int, n: int) -> tuple[LieAlgebra, Decomposition]:
    if m < 1 or n < 0:
        raise ValueError("heisenberg(m, n) needs m >= 1 and n >= 0")
    k = m + n
    labels = [f"p{i + 1}" for i in range(k)] + [f"q{i + 1}" for i in range(k)] + ["c"]
    c = 2 * k
    table = {(i, k + i): {c: 1} for i in range(k)}
    alg = LieAlgebra(labels, table, antisymmetrize=True, name=f"heisenberg({m},{n})")
    base = [m + i for i in range(n)] + [k + m + i for i in range(n)] + [c]
    comp = [i for i in range(m)] + [k + i for i in range(m)]
    pairs = tuple((i, k + i) for i in range(m))
    return alg, Decomposition(alg, tuple(base), tuple(comp), pairs, name=f"heisenberg({m},{n})")


def abelian(n: int, base: Sequence[int] = ()) -> tuple[LieAlgebra, Decomposition]:
    if n < 1:
        raise ValueError("abelian(n) needs n >= 1")
    alg = LieAlgebra([f"x{i + 1}" for i in range(n)], {}, name=f"abelian({n})")
    comp = [i for i in range(n) if i not in base]
    return alg, Decomposition(alg, tuple(base), tuple(comp), name=f"abelian({n})")


_PARAM = re.compile(r"^\s*(\w+)\s*(?:\(\s*([\d\s,]*)\))?\s*$")


def builtin(name: str) -> tuple[LieAlgebra, Decomposition]:
    """``sl2``, ``sl3``, ``sl3_levi1`` / ``sl3_levi2``, ``heisenberg(m,n)``, ``abelian(n)``."""
    mt = _PARAM.match(name)
    if not mt:
        raise UnknownName(name)
    key, args = mt.group(1), mt.group(2)
    params = [int(a) for a in args.split(",") if a.strip()] if args else []
    if key in ("sl2", "sl3") and not params:
        return sl(int(key[2:]))
    lv = re.fullmatch(r"sl(\d)_levi(\d+)", key)
    if lv and not params:
        return levi(int(lv.group(1)), [int(ch) for ch in lv.group(2)])
    if key == "heisenberg" and len(params) == 2:
        return heisenberg(*params)
    if key == "abelian" and len(params) == 1:
        return abelian(params[0])
    raise UnknownName(name)


BUILTIN_NAMES = ("sl2", "sl3", "sl3_levi1", "heisenberg(1,1)", "heisenberg(2,1)", "heisenberg(2,2)",
                 "abelian(2)")
