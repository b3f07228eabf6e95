"""Deterministic text, DSL and LaTeX rendering of algebra elements."""

from __future__ import annotations

from fractions import Fraction

from .algebra import (
    BASE_THETA,
    BASE_X,
    FIBER,
    FIELD,
    JET,
    VDIFF,
    Generator,
    Poly,
)


def _indices(t) -> str:
    return ",".join(str(i) for i in t)


def gen_text(g: Generator) -> str:
    if g.role == BASE_X:
        s = f"x{g.base_index[0]}"
    elif g.role == BASE_THETA:
        s = f"th{g.base_index[0]}"
    elif g.role == FIBER:
        s = g.name
        if g.base_index:
            s += f"[{_indices(g.base_index)}]"
        if g.lie_index is not None and g.lie_index >= 0:
            s += f"{{{g.lie_index + 1}}}"
    elif g.role in (JET, VDIFF):
        s = g.name
        if g.base_index:
            s += f"[{_indices(g.base_index)}]"
        if g.lie_index is not None and g.lie_index >= 0:
            s += f"{{{g.lie_index + 1}}}"
        s += f"[{_indices(g.jet_I)}|{_indices(g.jet_J)}]"
    elif g.role == FIELD:
        s = g.name
        if g.base_index:
            s += f"[{_indices(g.base_index)}]"
        if g.lie_index is not None and g.lie_index >= 0:
            s += f"{{{g.lie_index + 1}}}"
        if g.jet_J:
            s += f"({_indices(g.jet_J)})"
        if g.deriv:
            s += "_" + "".join(str(i) for i in g.deriv)
    else:
        s = g.name
    if g.fdeg:
        if g.role == VDIFF:
            # vdiff generators are created with the dv prefix in the name
            return s
        if not s.startswith("d"):
            s = "d" + s
    return s


def _mono_sort_key(m):
    return tuple((g._sort, e) for g, e in m)


def poly_text(p: Poly) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for m in sorted(p.terms, key=_mono_sort_key):
        c = p.terms[m]
        factors = []
        for g, e in m:
            t = gen_text(g)
            factors.append(t if e == 1 else f"{t}^{e}")
        body = "*".join(factors)
        if not body:
            frag = str(c)
        elif c == 1:
            frag = body
        elif c == -1:
            frag = f"-{body}"
        else:
            frag = f"{c}*{body}"
        pieces.append(frag)
    out = pieces[0]
    for frag in pieces[1:]:
        if frag.startswith("-"):
            out += " - " + frag[1:]
        else:
            out += " + " + frag
    return out


# DSL rendering ---------------------------------------------------------


def gen_dsl(g: Generator) -> str:
    if g.fdeg:
        base = g.space.coordinate_of(g)
        inner = gen_dsl(base)
        if g.role == VDIFF:
            return f"dv({inner})"
        return f"d({inner})"
    if g.role == BASE_X:
        return f"x[{g.base_index[0]}]"
    if g.role == BASE_THETA:
        return f"theta[{g.base_index[0]}]"
    if g.role == FIBER:
        s = g.name
        if g.base_index:
            s += f"[{_indices(g.base_index)}]"
        if g.lie_index is not None and g.lie_index >= 0:
            s += f"{{{g.lie_index + 1}}}"
        return s
    raise ValueError(f"generator {gen_text(g)} has no surface-syntax form")


def poly_dsl(p: Poly) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for m in sorted(p.terms, key=_mono_sort_key):
        c = p.terms[m]
        factors = []
        for g, e in m:
            t = gen_dsl(g)
            for _ in range(e):
                factors.append(t)
        body = "*".join(factors)
        if not body:
            frag = str(c)
        elif c == 1:
            frag = body
        elif c == -1:
            frag = f"-{body}"
        else:
            num = f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
            frag = f"{num}*{body}"
        pieces.append(frag)
    out = pieces[0]
    for frag in pieces[1:]:
        if frag.startswith("-"):
            out += " - " + frag[1:]
        else:
            out += " + " + frag
    return out


# LaTeX rendering --------------------------------------------------------


def _latex_frac(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    sign = "-" if c < 0 else ""
    return rf"{sign}\tfrac{{{abs(c.numerator)}}}{{{c.denominator}}}"


def gen_latex(g: Generator) -> str:
    if g.fdeg and g.role != VDIFF:
        return r"\mathrm{d}" + gen_latex(g.space.coordinate_of(g))
    if g.role == VDIFF:
        return r"\mathrm{d_v}" + gen_latex(g.space.coordinate_of(g))
    if g.role == BASE_X:
        return rf"x^{{{g.base_index[0]}}}"
    if g.role == BASE_THETA:
        return rf"\theta^{{{g.base_index[0]}}}"
    sup = []
    if g.lie_index is not None and g.lie_index >= 0:
        sup.append(str(g.lie_index + 1))
    sub = list(str(i) for i in g.base_index)
    name = g.name
    if g.role in (JET, VDIFF):
        sub += [str(i) for i in g.jet_I]
        if g.jet_J:
            sub.append("|" + "".join(str(j) for j in g.jet_J))
    if g.role == FIELD:
        if g.jet_J:
            sup.append("(" + "".join(str(j) for j in g.jet_J) + ")")
        if g.deriv:
            sub = [",".join([""] + [str(i) for i in g.deriv])] + sub
    s = name
    if sup:
        s += "^{" + " ".join(sup) + "}"
    if sub:
        s += "_{" + " ".join(sub) + "}"
    return s


def poly_latex(p: Poly) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for m in sorted(p.terms, key=_mono_sort_key):
        c = p.terms[m]
        factors = []
        for g, e in m:
            t = gen_latex(g)
            factors.append(t if e == 1 else t + rf"^{{{e}}}")
        body = r"\, ".join(factors)
        if not body:
            frag = _latex_frac(c)
        elif c == 1:
            frag = body
        elif c == -1:
            frag = "-" + body
        else:
            frag = _latex_frac(c) + body
        pieces.append(frag)
    out = pieces[0]
    for frag in pieces[1:]:
        out += " - " + frag[1:] if frag.startswith("-") else " + " + frag
    return out
