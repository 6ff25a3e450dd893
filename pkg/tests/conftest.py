import random
from fractions import Fraction

import pytest

from dybe.exact import Const, Poly, is_zero, var


def zero(e) -> bool:
    return is_zero(e, "exact").zero


def random_expr(rng: random.Random, nvars: int, depth: int):
    """Random tree over + - * / with nonzero-constant divisors kept away from
    identically vanishing denominators."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.6:
            return var(rng.randrange(nvars))
        return Const(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    a = random_expr(rng, nvars, depth - 1)
    b = random_expr(rng, nvars, depth - 1)
    op = rng.choice("+-*/")
    if op == "/":
        if b.is_const() and b.value == 0:
            b = Const(1)
        if b.normal_form().is_zero():
            b = b + var(0) + Const(3)
            if b.normal_form().is_zero():
                b = Const(2)
        return a / b
    return {"+": a + b, "-": a - b, "*": a * b}[op]


def random_poly(rng: random.Random, nvars: int, degree: int, terms: int = 4) -> Poly:
    out = {}
    for _ in range(terms):
        d = rng.randint(0, degree)
        exp = [0] * nvars
        for _ in range(d):
            exp[rng.randrange(nvars)] += 1
        out[tuple(exp)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return Poly(out)


@pytest.fixture
def rng():
    return random.Random(20240601)


def random_unital(ctx, n: int, rng: random.Random, terms: int = 2, maxlen: int = 1, rational: bool = True,
                  skew_first: bool = False):
    """``1 + Σ_{k≥1} ℏ^k (random terms)`` with coefficients rational in the
    base coordinates (constants when the base is trivial)."""
    from dybe.qdybe import DynTensor

    l = ctx.dec.l
    dim = ctx.alg.dim
    out = {(0, ((),) * n): 1}
    for k in range(1, ctx.N + 1):
        for _ in range(terms):
            words = tuple(tuple(rng.randrange(dim) for _ in range(rng.randint(0, maxlen))) for _ in range(n))
            c = Const(Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 3)))
            if l and rational:
                i = rng.randrange(l)
                c = c + Const(rng.randint(1, 2)) * var(i) if rng.random() < 0.5 else c / (var(i) + rng.randint(1, 3))
            key = (k, words)
            out[key] = out[key] + c if key in out else c
    T = DynTensor(ctx, n, out)
    if skew_first and n == 2:
        one = T.order_part(1)
        T = T - one + (one - one.place((2, 1), 2)).scale(Fraction(1, 2))
    return T


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
