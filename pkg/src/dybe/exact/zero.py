"""Zero-testing for expressions: exact expansion or random evaluation."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DivisionByZero, ExpansionTooLarge
from .expr import ScalarExpr, as_expr

DEFAULT_BUDGET = 200_000
DEFAULT_TRIALS = 32
NUM_RANGE = 10 ** 4
DEN_RANGE = 10 ** 3
# for a fixed denominator each coordinate is uniform on 2*NUM_RANGE values
SAMPLE_SET_SIZE = 2 * NUM_RANGE


@dataclass(frozen=True)
class ZeroVerdict:
    zero: bool
    method: str  # "exact" or "sampled"
    seed: int | None = None
    trials: int | None = None
    failure_bound: Fraction | None = None
    witness: tuple | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out: dict = {"zero": self.zero, "method": self.method}
        if self.method == "sampled":
            out["seed"] = self.seed
            out["trials"] = self.trials
            out["failure_bound"] = str(self.failure_bound)
        if self.witness is not None:
            out["witness"] = [str(x) for x in self.witness]
        if self.note:
            out["note"] = self.note
        return out


def random_point(rng: random.Random, n: int) -> tuple[Fraction, ...]:
    pts = []
    for _ in range(n):
        p = rng.randint(1, NUM_RANGE) * rng.choice((-1, 1))
        q = rng.randint(1, DEN_RANGE)
        pts.append(Fraction(p, q))
    return tuple(pts)


def find_witness(expr: ScalarExpr, seed: int = 0, nvars: int | None = None, attempts: int = 200):
    """A point where ``expr`` is defined and nonzero, or ``None``.

    Small positive integer points are tried first, first coordinate fastest.
    """
    n = max(expr.nvars, nvars or 0)
    if n == 0:
        try:
            return () if expr.eval(()) != 0 else None
        except DivisionByZero:
            return None
    for combo in itertools.islice(itertools.product(range(1, 4), repeat=n), 27):
        pt = tuple(Fraction(c) for c in reversed(combo))
        try:
            if expr.eval(pt) != 0:
                return pt
        except DivisionByZero:
            pass
    rng = random.Random(seed)
    for _ in range(attempts):
        pt = random_point(rng, n)
        try:
            if expr.eval(pt) != 0:
                return pt
        except DivisionByZero:
            pass
    return None


def _sampled(expr: ScalarExpr, seed: int, trials: int, nvars: int | None) -> ZeroVerdict:
    n = max(expr.nvars, nvars or 0)
    num_deg, _ = expr.degree_bound()
    per_trial = min(Fraction(1), Fraction(max(num_deg, 0), SAMPLE_SET_SIZE))
    rng = random.Random(seed)
    done = 0
    misses = 0
    while done < trials:
        pt = random_point(rng, n)
        try:
            v = expr.eval(pt)
        except DivisionByZero:
            misses += 1
            if misses > 50 * trials:
                return ZeroVerdict(False, "sampled", seed, done, None, None,
                                   "could not find points avoiding poles")
            continue
        done += 1
        if v != 0:
            return ZeroVerdict(False, "sampled", seed, done, Fraction(0), pt)
        if n == 0:
            break
    bound = per_trial ** done if n else Fraction(0)
    return ZeroVerdict(True, "sampled", seed, done, bound)


def is_zero(expr, strategy: str = "auto", *, seed: int = 0, trials: int = DEFAULT_TRIALS,
            budget: int = DEFAULT_BUDGET, nvars: int | None = None, witness: bool = True) -> ZeroVerdict:
    """Decide whether ``expr`` is identically zero.

    ``strategy`` is ``"exact"``, ``"sampled"`` or ``"auto"`` (exact, falling back
    to sampled when the expansion exceeds ``budget`` terms).  A sampled "zero"
    verdict carries the Schwartz-Zippel bound ``(deg/|S|)^trials``.
    """
    expr = as_expr(expr)
    if strategy not in ("auto", "exact", "sampled"):
        raise ValueError(f"unknown zero-test strategy {strategy!r}")
    if strategy in ("auto", "exact"):
        try:
            nf = expr.normal_form(budget)
        except ExpansionTooLarge:
            if strategy == "exact":
                raise
        else:
            if nf.is_zero():
                return ZeroVerdict(True, "exact")
            pt = find_witness(expr, seed, nvars) if witness else None
            return ZeroVerdict(False, "exact", witness=pt)
    return _sampled(expr, seed, trials, nvars)
