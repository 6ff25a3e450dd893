from fractions import Fraction

import pytest

from conftest import zero
from dybe.exact import Const, var
from dybe.liealg import (BUILTIN_NAMES, Decomposition, LieAlgebra, UnknownName, basis_vector, bracket, builtin,
                         check_reductive, validate, vector, vector_is_zero)


def test_sl2_bracket_ef_is_h():
    alg, _ = builtin("sl2")
    e, f = basis_vector(alg, alg.index("e")), basis_vector(alg, alg.index("f"))
    out = bracket(alg, e, f)
    assert [x.eval(()) for x in out] == [1, 0, 0]


def test_bracket_antisymmetric_on_random_vectors(rng):
    for name in ("sl2", "sl3", "heisenberg(1,1)"):
        alg, _ = builtin(name)
        for _ in range(5):
            x = vector(alg, [Const(Fraction(rng.randint(-3, 3))) + var(0) * rng.randint(0, 2)
                             for _ in range(alg.dim)])
            assert vector_is_zero(bracket(alg, x, x))


def test_heisenberg_p1_q1_is_c():
    alg, _ = builtin("heisenberg(1,1)")
    out = bracket(alg, basis_vector(alg, alg.index("p1")), basis_vector(alg, alg.index("q1")))
    assert [x.eval(()) for x in out] == [int(lab == "c") for lab in alg.labels]


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_validate_and_are_reductive(name):
    alg, dec = builtin(name)
    assert validate(alg) == []
    assert check_reductive(dec) == []


def test_jacobi_on_random_symbolic_vectors(rng):
    for name in ("sl3", "heisenberg(2,1)"):
        alg, _ = builtin(name)
        def rv():
            return vector(alg, [var(rng.randrange(3)) * rng.randint(-2, 2) + rng.randint(-2, 2)
                                for _ in range(alg.dim)])
        x, y, z = rv(), rv(), rv()
        terms = [bracket(alg, x, bracket(alg, y, z)), bracket(alg, y, bracket(alg, z, x)),
                 bracket(alg, z, bracket(alg, x, y))]
        assert all(zero(a + b + c) for a, b, c in zip(*terms))


def _perturbed(alg, key, k, delta=1):
    t = {kk: dict(v) for kk, v in alg.table.items()}
    t.setdefault(key, {})
    t[key][k] = t[key].get(k, 0) + delta
    return LieAlgebra(alg.labels, t)


def test_every_single_entry_perturbation_of_sl2_is_flagged():
    alg, _ = builtin("sl2")
    entries = [(key, k) for key, v in alg.table.items() for k in v]
    assert len(entries) == 6
    for key, k in entries:
        problems = validate(_perturbed(alg, key, k))
        assert problems, (key, k)


def test_ef_slot_perturbation_reports_jacobi_at_h_e_f():
    alg, _ = builtin("sl2")
    bad = _perturbed(alg, (1, 2), 0)  # c[e][f][h]: 1 -> 2 in one order only
    jac = [p for p in validate(bad) if p["kind"] == "jacobi"]
    assert any(sorted(p["indices"][:3]) == [0, 1, 2] for p in jac)


def test_consistent_rescaling_of_ef_is_still_a_lie_algebra():
    # [e,f] = 2h in both orders is isomorphic to sl2, so nothing is flagged
    alg, _ = builtin("sl2")
    ok = _perturbed(_perturbed(alg, (1, 2), 0), (2, 1), 0, -1)
    assert validate(ok) == []


def test_abelian_is_valid():
    alg, _ = builtin("abelian(3)")
    assert alg.table == {} and validate(alg) == []


def test_sl2_cartan_decomposition_is_reductive():
    _, dec = builtin("sl2")
    assert dec.base == (0,) and dec.complement == (1, 2)
    assert check_reductive(dec) == []


def test_sl2_with_e_as_base_is_not_reductive():
    alg, _ = builtin("sl2")
    dec = Decomposition(alg, (1,), (0, 2))
    kinds = {p["kind"] for p in check_reductive(dec)}
    assert "not_reductive" in kinds


def test_builtin_shapes():
    alg, dec = builtin("sl2")
    assert alg.dim == 3 and len(dec.base) == 1 and len(dec.complement) == 2
    alg, dec = builtin("heisenberg(1,1)")
    assert alg.dim == 5 and len(dec.base) == 3 and len(dec.complement) == 2
    alg, _ = builtin("abelian(2)")
    assert alg.dim == 2 and not alg.table


def test_heisenberg_base_follows_the_standard_split():
    alg, dec = builtin("heisenberg(2,1)")
    base = {alg.labels[i] for i in dec.base}
    assert base == {"p3", "q3", "c"}


def test_unknown_builtin():
    with pytest.raises(UnknownName):
        builtin("so5")
    with pytest.raises(UnknownName):
        builtin("heisenberg(1)")
