"""JSON file formats: algebras, r-matrices, twists, ansatz lists and reports.

Rationals travel as strings (``"p/q"``) so nothing passes through floats.
Every loader raises :class:`InputError` carrying ``file:line:col`` when the
position can be recovered.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from ..dynr import DynamicalR, closed_form, construct_r, from_bivector
from ..exact import as_fraction
from ..liealg import (BUILTIN_NAMES, Decomposition, LieAlgebra, UnknownName, builtin, check_reductive,
                      validate)
from ..qdybe import Context, DynTensor
from .exprparse import ExprSyntaxError, format_expr, parse_expr


class InputError(ValueError):
    def __init__(self, msg: str, source: str = "<input>", line: int | None = None, column: int | None = None):
        loc = source
        if line is not None:
            loc += f":{line}"
            if column is not None:
                loc += f":{column}"
        super().__init__(f"{loc}: {msg}")
        self.source, self.line, self.column = source, line, column


@dataclass
class Source:
    name: str
    text: str

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def locate(self, needle: str, start: int = 0) -> tuple[int | None, int | None]:
        pos = self.text.find(needle, start)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col


def data_dir(kind: str) -> Path:
    return Path(str(resources.files("dybe") / "data" / kind))


def builtin_filename(name: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "_", name).strip("_") + ".json"


def read_source(spec: str, kind: str) -> Source:
    p = Path(spec)
    if not p.exists():
        alt = data_dir(kind) / spec
        if alt.exists():
            p = alt
        else:
            raise InputError("no such file", spec)
    return Source(str(spec), p.read_text())


def parse_json(src: Source) -> Any:
    try:
        return json.loads(src.text)
    except json.JSONDecodeError as ex:
        raise InputError(ex.msg, src.name, ex.lineno, ex.colno) from None


def _need(obj: dict, key: str, src: Source, ctx: str):
    if not isinstance(obj, dict) or key not in obj:
        line, col = src.locate(ctx) if ctx else (None, None)
        raise InputError(f"missing field {key!r}" + (f" in {ctx}" if ctx else ""), src.name, line, col)
    return obj[key]


def _expr(text: Any, nvars: int, src: Source, where: str):
    if not isinstance(text, str):
        raise InputError(f"{where}: expression must be a string", src.name)
    try:
        return parse_expr(text, nvars)
    except ExprSyntaxError as ex:
        line, col = src.locate(json.dumps(text))
        if line is not None:
            col = col + 1 + (ex.column - 1)
        raise InputError(f"{where}: {ex.msg} (expression column {ex.column})", src.name, line, col) from None


# algebras -------------------------------------------------------------------------------

def algebra_to_json(alg: LieAlgebra, dec: Decomposition) -> dict:
    brackets = []
    for (i, j), terms in sorted(alg.table.items()):
        if i < j:
            brackets.append({"i": i, "j": j, "terms": [{"k": k, "c": str(c)} for k, c in sorted(terms.items())]})
    out = {"name": dec.name or alg.name, "dim": alg.dim, "labels": list(alg.labels), "brackets": brackets,
           "base": list(dec.base), "complement": list(dec.complement)}
    if dec.root_pairs:
        out["root_pairs"] = [list(p) for p in dec.root_pairs]
    return out


def load_algebra(spec: str) -> tuple[LieAlgebra, Decomposition, Source]:
    """A builtin name, a path, or a file shipped in the package data."""
    try:
        alg, dec = builtin(spec)
        return alg, dec, Source(f"builtin:{spec}", spec)
    except UnknownName:
        pass
    src = read_source(spec, "algebras")
    return (*algebra_from_json(parse_json(src), src), src)


def algebra_from_json(doc: dict, src: Source) -> tuple[LieAlgebra, Decomposition]:
    dim = _need(doc, "dim", src, "")
    labels = _need(doc, "labels", src, "")
    if not isinstance(dim, int) or dim < 1 or len(labels) != dim:
        line, col = src.locate('"labels"')
        raise InputError(f"labels must list exactly dim={dim} names", src.name, line, col)
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for n, br in enumerate(_need(doc, "brackets", src, "")):
        i, j = _need(br, "i", src, '"brackets"'), _need(br, "j", src, '"brackets"')
        for t in _need(br, "terms", src, '"brackets"'):
            k = _need(t, "k", src, '"terms"')
            try:
                c = as_fraction(t.get("c", "1") if isinstance(t, dict) else None)
            except (ValueError, TypeError, ZeroDivisionError):
                line, col = src.locate(json.dumps(t.get("c")) if isinstance(t, dict) else '"terms"')
                raise InputError(f"bracket {n}: coefficient {t.get('c')!r} is not a rational", src.name,
                                 line, col) from None
            for idx in (i, j, k):
                if not isinstance(idx, int) or not 0 <= idx < dim:
                    line, col = src.locate('"brackets"')
                    raise InputError(f"bracket {n}: index {idx!r} outside 0..{dim - 1}", src.name, line, col)
            table.setdefault((i, j), {})
            table[(i, j)][k] = table[(i, j)].get(k, 0) + c
    alg = LieAlgebra(labels, table, antisymmetrize=True, name=doc.get("name"))
    base = _need(doc, "base", src, "")
    comp = _need(doc, "complement", src, "")
    try:
        dec = Decomposition(alg, tuple(base), tuple(comp), tuple(tuple(p) for p in doc.get("root_pairs", ())),
                            name=doc.get("name", ""))
    except ValueError as ex:
        line, col = src.locate('"base"')
        raise InputError(str(ex), src.name, line, col) from None
    return alg, dec


def algebra_problems(alg: LieAlgebra, dec: Decomposition) -> tuple[list[dict], list[dict]]:
    return validate(alg), check_reductive(dec)


# r-matrices -----------------------------------------------------------------------------

def load_rmatrix(spec: str, dec: Decomposition) -> tuple[DynamicalR, Source]:
    """``constructed``, ``closed-form`` or a file of ``{"terms": [{"i","j","coeff"}]}``."""
    if spec == "constructed":
        return construct_r(dec), Source("constructed", "constructed")
    if spec == "closed-form":
        if dec.alg.name.startswith("heisenberg"):
            return closed_form("heisenberg", dec), Source(spec, spec)
        kind = "simple_cartan" if all(i in dec.base for i in range(dec.l)) and dec.l == len(dec.base) \
            and len(dec.complement) == 2 * len(dec.root_pairs) else "simple_reductive_restricted"
        return closed_form(kind, dec), Source(spec, spec)
    src = read_source(spec, "rmatrices")
    doc = parse_json(src)
    alg = dec.alg
    coeffs = {}
    for n, t in enumerate(_need(doc, "terms", src, "")):
        i, j = _need(t, "i", src, '"terms"'), _need(t, "j", src, '"terms"')
        try:
            i = alg.index(i) if isinstance(i, str) else int(i)
            j = alg.index(j) if isinstance(j, str) else int(j)
        except (UnknownName, ValueError):
            line, col = src.locate(json.dumps(t.get("i")))
            raise InputError(f"term {n}: unknown basis element", src.name, line, col) from None
        c = _expr(_need(t, "coeff", src, '"terms"'), dec.l, src, f"term {n}")
        coeffs[(i, j)] = coeffs[(i, j)] + c if (i, j) in coeffs else c
    return from_bivector(dec, coeffs), src


def rmatrix_to_json(r: DynamicalR) -> dict:
    labels = r.dec.alg.labels
    return {"terms": [{"i": labels[i], "j": labels[j], "coeff": format_expr(c)}
                      for (i, j), c in sorted(r.r.terms.items())]}


# twists -----------------------------------------------------------------------------------

def load_twist_doc(spec: str) -> tuple[dict, Source]:
    src = read_source(spec, "twists")
    return parse_json(src), src


def twist_from_doc(doc: dict, src: Source, ctx: Context) -> DynTensor:
    arity = doc.get("arity", 2)
    alg = ctx.alg
    items = []
    for n, t in enumerate(_need(doc, "terms", src, "")):
        k = _need(t, "hbar", src, '"terms"')
        legs = _need(t, "legs", src, '"terms"')
        if not isinstance(k, int) or k < 0:
            raise InputError(f"term {n}: hbar must be a non-negative integer", src.name)
        if len(legs) != arity:
            line, col = src.locate('"legs"')
            raise InputError(f"term {n}: expected {arity} legs", src.name, line, col)
        for leg in legs:
            for x in leg:
                if x not in alg.labels:
                    line, col = src.locate(json.dumps(x))
                    raise InputError(f"term {n}: unknown basis label {x!r}", src.name, line, col)
        c = _expr(t.get("coeff", "1"), ctx.dec.l, src, f"term {n}")
        items.append((k, c, legs))
    if not items:
        return DynTensor.zero(ctx, arity)
    return DynTensor.from_labels(ctx, items)


def tensor_to_json(T: DynTensor) -> list[dict]:
    out = []
    for key, c in sorted(T.terms.items()):
        d = T.label_key(key)
        d["coeff"] = format_expr(c)
        out.append(d)
    return out


def twist_to_json(F: DynTensor, algebra: str | None = None) -> dict:
    doc: dict = {"arity": F.n, "truncation": F.ctx.N, "terms": tensor_to_json(F)}
    if algebra:
        doc = {"algebra": algebra, **doc}
    return doc


def load_ansatz(spec: str, ctx: Context) -> tuple[list, Source]:
    src = read_source(spec, "ansatz")
    doc = parse_json(src)
    out = []
    for n, t in enumerate(_need(doc, "terms", src, "")):
        legs = _need(t, "legs", src, '"terms"')
        if len(legs) != 2:
            raise InputError(f"term {n}: ansatz terms need two legs", src.name)
        try:
            words = tuple(tuple(ctx.alg.index(x) for x in leg) for leg in legs)
        except UnknownName as ex:
            raise InputError(f"term {n}: unknown basis label {ex}", src.name) from None
        out.append((_expr(t.get("coeff", "1"), ctx.dec.l, src, f"term {n}"), words))
    return out, src


def _plain(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, default=_plain) + "\n"
