"""``dybe`` command line.

Every run writes a JSON report (``--out`` or stdout).  Exit status: 0 when
all requested checks pass, 1 when a check fails, 2 on unreadable or invalid
input.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .. import dynr
from ..exact import as_expr, is_zero
from ..exact.errors import DivisionByZero
from ..liealg import BUILTIN_NAMES, abelian
from ..pbw import pbw_for, star_expr
from ..qdybe import (Context, DynTensor, Infeasible, cocycle_residual, counit_check, lemma_check,
                     proof_identity_residual, qdybe_residual, r_from_twist, solve_twist_order)
from .exprparse import ExprSyntaxError, format_expr, parse_expr
from .formats import (InputError, Source, algebra_problems, algebra_to_json, dumps, load_algebra, load_ansatz,
                      load_rmatrix, load_twist_doc, rmatrix_to_json, tensor_to_json, twist_from_doc)

COMMANDS = ("validate", "construct-r", "check-cdybe", "check-equivariance", "fatness", "star", "check-cocycle",
            "check-qdybe", "derive-R", "check-lemma", "solve-twist")


class Run:
    """Collects inputs and checks for one report."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict = {}
        self.checks: list[dict] = []
        self.result: dict = {}
        self.messages: list[str] = []

    def note_input(self, role: str, src: Source):
        self.inputs[role] = {"source": src.name, "sha256": src.digest}

    @property
    def zkw(self) -> dict:
        return {"strategy": self.args.zero_test, "seed": self.args.seed}

    def check(self, name: str, passed: bool, **extra) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), **extra})
        return passed

    def multivector_check(self, name: str, mv) -> bool:
        labels = mv.alg.labels
        verdicts = mv.verdicts(**self.zkw)
        rows = [{"blade": [labels[i] for i in b], **v.to_json()} for b, v in verdicts.items()]
        return self.check(name, all(v.zero for v in verdicts.values()), terms=rows)

    def tensor_check(self, name: str, T: DynTensor) -> bool:
        verdicts = T.verdicts(self.args.zero_test, self.args.seed)
        per_order: dict[str, list] = {}
        for key, v in verdicts.items():
            per_order.setdefault(str(key[0]), []).append({"legs": T.label_key(key)["legs"], **v.to_json()})
        first = min((key[0] for key, v in verdicts.items() if not v.zero), default=None)
        extra = {"orders": per_order, "truncation": T.ctx.N}
        if first is not None:
            extra["first_failing_order"] = first
        return self.check(name, all(v.zero for v in verdicts.values()), **extra)

    def report(self, error: str | None = None) -> dict:
        doc = {"command": self.args.command, "inputs": self.inputs, "seed": self.args.seed,
               "zero_test": self.args.zero_test, "order": self.args.order, "checks": self.checks,
               "result": self.result, "passed": error is None and all(c["passed"] for c in self.checks)}
        if self.messages:
            doc["messages"] = self.messages
        if error is not None:
            doc["error"] = error
        return doc


# input helpers ---------------------------------------------------------------------------

def _algebra(run: Run, spec: str | None, strict: bool = True):
    if spec is None:
        raise InputError("--algebra is required for this command", "<args>")
    alg, dec, src = load_algebra(spec)
    if src.name.startswith("builtin:"):
        src = Source(src.name, dumps(algebra_to_json(alg, dec)))
    run.note_input("algebra", src)
    if strict:
        jac, red = algebra_problems(alg, dec)
        if jac or red:
            raise InputError(f"algebra fails validation: {_summary(jac + red)}", src.name)
    return alg, dec


def _summary(problems: list[dict]) -> str:
    return "; ".join(f"{p.get('kind')} {p.get('indices', p.get('pair', ''))}" for p in problems[:5])


def _point(text: str, l: int) -> list[Fraction]:
    parts = [p.strip() for p in text.split(",")] if text.strip() else []
    out = []
    for n, p in enumerate(parts):
        try:
            out.append(Fraction(p))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"coordinate {n + 1} ({p!r}) is not a rational", "--point", 1,
                             text.find(p) + 1) from None
    if len(out) != l:
        raise InputError(f"point has {len(out)} coordinates, expected {l}", "--point")
    return out


def _context(run: Run, need_twist: bool = True):
    """Algebra context and twist.  Without ``--twist`` the twist is ``F = 1``."""
    args = run.args
    doc = src = None
    if args.twist:
        doc, src = load_twist_doc(args.twist)
        run.note_input("twist", src)
    spec = args.algebra or (doc.get("algebra") if isinstance(doc, dict) else None)
    if spec and args.twist and not args.algebra:
        rel = Path(args.twist).parent / spec
        if rel.exists():
            spec = str(rel)
    if spec is None:
        if need_twist and doc is None:
            raise InputError("--twist or --algebra is required", "<args>")
        alg, dec = abelian(2)
        run.messages.append("no algebra given; using abelian(2)")
    else:
        alg, dec = _algebra(run, spec)
    order = args.order
    if order is None:
        order = doc.get("truncation", 4) if isinstance(doc, dict) else 4
    ctx = Context(dec, order)
    run.result["truncation"] = order
    F = twist_from_doc(doc, src, ctx) if doc is not None else DynTensor.one(ctx, 2)
    return ctx, F


def _poly(p) -> str:
    return p.to_str()


def _order(args) -> int:
    return 4 if args.order is None else args.order


# commands --------------------------------------------------------------------------------

def cmd_validate(run: Run):
    alg, dec = _algebra(run, run.args.algebra, strict=False)
    jac, red = algebra_problems(alg, dec)
    run.check("validate", not jac, problems=jac)
    run.check("check_reductive", not red, problems=red)
    run.result["algebra"] = algebra_to_json(alg, dec)


def cmd_construct_r(run: Run):
    _, dec = _algebra(run, run.args.algebra)
    try:
        r = dynr.construct_r(dec)
    except dynr.DegenerateEverywhere as ex:
        run.check("nondegenerate", False, message=str(ex))
        return
    run.check("nondegenerate", True, det=_poly(r.det) if r.det is not None else None)
    run.result["rmatrix"] = rmatrix_to_json(r)


def _rmatrix(run: Run, dec):
    try:
        r, src = load_rmatrix(run.args.rmatrix or "constructed", dec)
    except dynr.DegenerateEverywhere as ex:
        # no r exists to check, which is a failed check and not bad input
        run.check("nondegenerate", False, message=str(ex))
        return None
    run.note_input("rmatrix", src)
    run.result["rmatrix"] = rmatrix_to_json(r)
    return r


def cmd_check_cdybe(run: Run):
    _, dec = _algebra(run, run.args.algebra)
    r = _rmatrix(run, dec)
    if r is not None:
        run.multivector_check("cdybe", dynr.cdybe_residual(r))


def cmd_check_equivariance(run: Run):
    _, dec = _algebra(run, run.args.algebra)
    r = _rmatrix(run, dec)
    if r is None:
        return
    base = dynr.BaseStructure.of(dec)
    for i in range(dec.l):
        run.multivector_check(f"equivariance[{dec.alg.labels[dec.base[i]]}]",
                              dynr.equivariance_residual(r, base, i))


def cmd_fatness(run: Run):
    _, dec = _algebra(run, run.args.algebra)
    det = dynr.determinant(dynr.a_matrix(dec))
    run.result["det"] = _poly(det)
    if not run.check("fat_somewhere", not det.is_zero(), det=_poly(det)):
        run.messages.append("the pairing is degenerate at every point")
        return
    if run.args.point is None:
        return
    pt = _point(run.args.point, dec.l)
    info = dynr.fatness(dec, pt)
    where = ",".join(f"λ{a + 1}={x}" for a, x in enumerate(pt))
    run.check("fat_at_point", info["fat"], point=[str(x) for x in pt], value=str(info["value"]))
    run.messages.append(("fat" if info["fat"] else "not fat") + f" at {where}")


def cmd_star(run: Run):
    _, dec = _algebra(run, run.args.algebra)
    exprs = []
    for n, text in enumerate(run.args.exprs):
        try:
            exprs.append(parse_expr(text, dec.l))
        except ExprSyntaxError as ex:
            raise InputError(ex.msg, f"<expr {n + 1}>", 1, ex.column) from None
    if len(exprs) != 2:
        raise InputError("star takes exactly two expressions", "<args>")
    N = _order(run.args)
    pbw = pbw_for(dec.base_algebra)
    series = star_expr(pbw, exprs[0], exprs[1], N)
    run.result["star"] = {str(k): format_expr(series[k]) for k in range(N + 1)}
    poisson_half = series[1] * 2 if N >= 1 else None
    if poisson_half is not None:
        # first order must be half the linear Poisson bracket
        pb = _poisson(dec, exprs[0], exprs[1])
        run.check("first_order_is_half_poisson", is_zero(poisson_half - pb, run.args.zero_test,
                                                         seed=run.args.seed).zero)


def _poisson(dec, f, g):
    """``{f,g}(λ) = Σ <λ,[e_i,e_j]> ∂_i f ∂_j g`` over the base."""
    alg = dec.alg
    acc = as_expr(0)
    for a, i in enumerate(dec.base):
        for b, j in enumerate(dec.base):
            p = dec.pair_h(alg.c(i, j))
            if p.is_zero():
                continue
            acc = acc + as_expr(p) * f.diff(a) * g.diff(b)
    return acc


def cmd_check_cocycle(run: Run):
    ctx, F = _context(run)
    run.tensor_check("cocycle", cocycle_residual(F))
    e1, e2 = counit_check(F)
    run.tensor_check("counit_left", e1)
    run.tensor_check("counit_right", e2)


def cmd_check_qdybe(run: Run):
    ctx, F = _context(run)
    R = r_from_twist(F)
    run.result["R"] = tensor_to_json(R)
    run.tensor_check("qdybe", qdybe_residual(R))


def cmd_derive_R(run: Run):
    ctx, F = _context(run)
    if not F.is_unital():
        run.check("unital", False, message="the twist has no unit constant term; R is undefined")
        return
    run.check("unital", True)
    R = r_from_twist(F)
    run.result["R"] = tensor_to_json(R)
    classical = (R.order_part(1)).hbar_shift(-1) if 1 in R.orders() else DynTensor.zero(ctx, 2)
    run.result["classical_r"] = tensor_to_json(classical)


def cmd_check_lemma(run: Run):
    ctx, F = _context(run)
    r34, r35 = lemma_check(F)
    run.tensor_check("lemma_first_leg", r34)
    run.tensor_check("lemma_second_leg", r35)
    run.tensor_check("shifted_R12", proof_identity_residual(F))


def cmd_solve_twist(run: Run):
    args = run.args
    if not args.ansatz:
        raise InputError("--ansatz is required for solve-twist", "<args>")
    k = _order(args)
    ctx, F = _context(run)
    ansatz, src = load_ansatz(args.ansatz, ctx)
    run.note_input("ansatz", src)
    classical = None
    if args.rmatrix:
        r = _rmatrix(run, ctx.dec)
        if r is None:
            return
        classical = r.r
    try:
        sol = solve_twist_order(F, ansatz, k, classical_r=classical)
    except Infeasible as ex:
        run.check("feasible", False, message=str(ex), rank=ex.rank)
        return
    run.check("feasible", True, dimension=sol.dimension)
    run.result["solution"] = sol.to_json()
    Fk = sol.instantiate()
    run.result["twist"] = tensor_to_json(Fk)
    checked = Fk.ctx.with_order(k)
    Fk = DynTensor(checked, 2, {key: c for key, c in Fk.terms.items() if key[0] <= k})
    run.tensor_check("cocycle_particular", cocycle_residual(Fk))


HANDLERS = {
    "validate": cmd_validate, "construct-r": cmd_construct_r, "check-cdybe": cmd_check_cdybe,
    "check-equivariance": cmd_check_equivariance, "fatness": cmd_fatness, "star": cmd_star,
    "check-cocycle": cmd_check_cocycle, "check-qdybe": cmd_check_qdybe, "derive-R": cmd_derive_R,
    "check-lemma": cmd_check_lemma, "solve-twist": cmd_solve_twist,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dybe", description="Exact checks for dynamical r-matrices and twists.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("exprs", nargs="*", help="two coefficient expressions (star only)")
    p.add_argument("--algebra", help=f"algebra file, packaged file name or builtin ({', '.join(BUILTIN_NAMES)})")
    p.add_argument("--rmatrix", help="'constructed', 'closed-form' or an r-matrix file")
    p.add_argument("--twist", help="twist file (default: F = 1)")
    p.add_argument("--ansatz", help="ansatz file for solve-twist")
    p.add_argument("--order", type=int, help="truncation order (default 4; solve-twist: the order k)")
    p.add_argument("--zero-test", dest="zero_test", choices=("auto", "exact", "sampled"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--point", help='evaluation point "a/b,c/d,..."')
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte determinism)")
    return p


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    state = Run(args)
    t0 = time.perf_counter()
    try:
        if args.order is not None and args.order < 0:
            raise InputError("--order must be non-negative", "--order")
        HANDLERS[args.command](state)
        doc = state.report()
        code = 0 if doc["passed"] else 1
    except (InputError, ExprSyntaxError, DivisionByZero) as ex:
        doc = state.report(error=str(ex))
        code = 2
    except (ValueError, KeyError) as ex:
        doc = state.report(error=f"{type(ex).__name__}: {ex}")
        code = 2
    if args.timing:
        doc["timing_s"] = round(time.perf_counter() - t0, 3)
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == 2:
        print(f"dybe: {doc['error']}", file=sys.stderr)
    return code, doc


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
