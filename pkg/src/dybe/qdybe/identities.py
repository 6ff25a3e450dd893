"""Twist identities, all as residuals (left side minus right side)."""

from __future__ import annotations

from ..dynr import BaseStructure
from .tensor import DynTensor, mul_all


def F12(F: DynTensor) -> DynTensor:
    return F.place((1, 2), 3)


def F23(F: DynTensor) -> DynTensor:
    return F.place((2, 3), 3)


def cocycle_sides(F: DynTensor) -> tuple[DynTensor, DynTensor]:
    """``(Δ⊗id)F ★ F12(λ+ℏh^(3))`` and ``(id⊗Δ)F ★ F23(λ)``."""
    lhs = F.coproduct(1).mul(F12(F).shift_insert(3))
    rhs = F.coproduct(2).mul(F23(F))
    return lhs, rhs


def cocycle_residual(F: DynTensor) -> DynTensor:
    lhs, rhs = cocycle_sides(F)
    return lhs - rhs


def counit_check(F: DynTensor) -> tuple[DynTensor, DynTensor]:
    """``(ε⊗id)F - 1`` and ``(id⊗ε)F - 1``."""
    one = DynTensor.one(F.ctx, 1)
    return F.counit(1) - one, F.counit(2) - one


def r_from_twist(F: DynTensor) -> DynTensor:
    """``R = F21^{-1} ★ F12``."""
    return F.place((2, 1), 2).invert().mul(F)


def qdybe_sides(R: DynTensor) -> tuple[DynTensor, DynTensor]:
    R12, R13, R23 = R.place((1, 2), 3), R.place((1, 3), 3), R.place((2, 3), 3)
    lhs = mul_all(R12, R13.shift_insert(2), R23)
    rhs = mul_all(R23.shift_insert(1), R13, R12.shift_insert(3))
    return lhs, rhs


def qdybe_residual(R: DynTensor) -> DynTensor:
    lhs, rhs = qdybe_sides(R)
    return lhs - rhs


def phi(F: DynTensor) -> DynTensor:
    """``Φ123 = F23^{-1} ★ (id⊗Δ)F^{-1} ★ (Δ⊗id)F ★ F12``."""
    return mul_all(F23(F).invert(), F.coproduct(2).invert(), F.coproduct(1), F12(F))


def phi_shifted(F: DynTensor) -> DynTensor:
    """``F12(λ+ℏh^(3))^{-1} ★ F12(λ)``; equals :func:`phi` for cocycles."""
    f12 = F12(F)
    return f12.shift_insert(3).invert().mul(f12)


def phi_residual(F: DynTensor) -> DynTensor:
    return phi(F) - phi_shifted(F)


def twisted_coproduct(F: DynTensor, a: DynTensor) -> DynTensor:
    """``F^{-1} ★ Δa ★ F``."""
    return mul_all(F.invert(), a.coproduct(1), F)


def eq31_residual(F: DynTensor, a: DynTensor) -> DynTensor:
    """``Δ̃^op a - R ★ Δ̃a ★ R^{-1}``."""
    t = twisted_coproduct(F, a)
    R = r_from_twist(F)
    return t.place((2, 1), 2) - mul_all(R, t, R.invert())


def _legs(T: DynTensor, subscript: str) -> DynTensor:
    """``T_{abc}``: slot ``s`` carries leg ``subscript[s-1]`` of ``T``.

    This reading matches the expansions used for ``Φ_{132}`` and ``Φ_{231}``
    in terms of ``F``; for transpositions both readings agree.
    """
    return T.permute([int(ch) for ch in subscript])


def lemma_sides(F: DynTensor):
    """Both sides of the two leg-coproduct identities for ``R``.

    ``(Δ̃⊗id)R = Φ231 ★ R13 ★ Φ132^{-1} ★ R23 ★ Φ123`` and
    ``(id⊗Δ̃)R = Φ312^{-1} ★ R13 ★ Φ213 ★ R12 ★ Φ123^{-1}``, where
    ``(Δ̃⊗id)X = F12^{-1} ★ (Δ⊗id)X ★ F12`` and similarly on the second leg.
    """
    R = r_from_twist(F)
    P = phi(F)
    Pinv = P.invert()
    R12, R13, R23 = R.place((1, 2), 3), R.place((1, 3), 3), R.place((2, 3), 3)
    f12, f23 = F12(F), F23(F)
    lhs34 = mul_all(f12.invert(), R.coproduct(1), f12)
    rhs34 = mul_all(_legs(P, "231"), R13, _legs(Pinv, "132"), R23, P)
    lhs35 = mul_all(f23.invert(), R.coproduct(2), f23)
    rhs35 = mul_all(_legs(Pinv, "312"), R13, _legs(P, "213"), R12, Pinv)
    return (lhs34, rhs34), (lhs35, rhs35)


def lemma_check(F: DynTensor) -> tuple[DynTensor, DynTensor]:
    (a, b), (c, d) = lemma_sides(F)
    return a - b, c - d


def proof_identity_residual(F: DynTensor) -> DynTensor:
    """``Φ213 ★ R12 ★ Φ123^{-1} - R12(λ+ℏh^(3))``; zero for cocycles."""
    R = r_from_twist(F)
    P = phi(F)
    R12 = R.place((1, 2), 3)
    return mul_all(_legs(P, "213"), R12, P.invert()) - R12.shift_insert(3)


def equivariance_residual_F(F: DynTensor, i: int, base: BaseStructure | None = None) -> DynTensor:
    """``(ad_{h_i}⊗1 + 1⊗ad_{h_i}) F + Σ_j f_ij ∂F/∂λ^j`` (``i`` 0-based)."""
    dec = F.ctx.dec
    base = base or BaseStructure.of(dec)
    out = F.ad(dec.base[i])
    for j in range(dec.l):
        fij = base.f[i][j]
        if fij.is_const() and not fij.value:
            continue
        out = out + F.diff(j).map_coefficients(lambda c, fij=fij: fij * c)
    return out
