"""Twists, R-matrices and the quantum dynamical Yang-Baxter equation over
truncated ℏ-series of ``C(h*) ⊗ (Ug)^{⊗n}``."""

from .identities import (cocycle_residual, cocycle_sides, counit_check, eq31_residual,
                         equivariance_residual_F, lemma_check, lemma_sides, phi, phi_residual,
                         phi_shifted, proof_identity_residual, qdybe_residual, qdybe_sides,
                         r_from_twist, twisted_coproduct)
from .tensor import (Context, DegreeBudgetExceeded, DynTensor, NotUnital, SlotNotFree,
                     SlotOutOfRange, mul_all)
from .solver import Infeasible, TwistSolution, solve_twist_order
