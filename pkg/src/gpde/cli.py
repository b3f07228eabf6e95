"""Command line front end.

Every verb loads a model (a builtin name or a path to a model file), runs
its checks, prints a report and exits 0 exactly when all requested checks
passed.  On failure the failing checks are repeated on stderr, one per
line, prefixed with FAIL.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional

from .algebra import Generator, GradedAlgebraError, Poly
from .density import (
    action_density,
    boundary_reduction,
    generic_supersection,
    ghost_sector,
)
from .jets import JetModel, check_bv_identities, check_descent, theta_components
from .model import (
    Model,
    NotExactError,
    check_solution,
    solve_hamiltonian,
    standard_checks,
)
from .parser import DslError, builtin_names, load_builtin, load_model
from .printing import gen_text, poly_text
from .reduction import ReductionError, reduce_form
from .report import CheckResult, Report


def _load(ref: str) -> Model:
    if ref in builtin_names():
        return load_builtin(ref)
    if os.path.exists(ref):
        return load_model(ref)
    raise SystemExit(
        f"gpde: no file {ref!r} and no builtin of that name "
        f"(builtins: {', '.join(builtin_names())})"
    )


def _parse_point(spec: str, candidates: Dict[str, Generator]) -> Dict[Generator, Fraction]:
    point = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise SystemExit(f"gpde: --at expects name=value pairs, got {item!r}")
        name, _, val = item.partition("=")
        g = candidates.get(name.strip())
        if g is None:
            raise SystemExit(
                f"gpde: unknown coordinate {name.strip()!r} in --at "
                f"(known: {', '.join(sorted(candidates))})"
            )
        try:
            point[g] = Fraction(val.strip())
        except (ValueError, ZeroDivisionError):
            raise SystemExit(f"gpde: bad rational value {val.strip()!r} in --at")
    return point


def _form_universe(m: Model, form: Poly) -> List[Generator]:
    cos = {m.space.coordinate_of(g)
           for mono in form.terms for g, _ in mono if g.fdeg == 1}
    return sorted(cos, key=lambda g: g._sort)


# verbs ----------------------------------------------------------------


def _run_check(m: Model, args) -> Report:
    rep = Report(m.name)
    for c in standard_checks(m):
        rep.add(c)
    return rep


def _run_hamiltonian(m: Model, args) -> Report:
    rep = Report(m.name)
    try:
        L = solve_hamiltonian(m)
    except (NotExactError, GradedAlgebraError) as e:
        rep.add(CheckResult("hamiltonian_exists", False, detail=str(e)))
        return rep
    rep.add(CheckResult("hamiltonian_exists", True))
    for c in check_solution(m, L):
        rep.add(c)
    rep.outputs["hamiltonian"] = poly_text(L)
    return rep


def _run_prolong(m: Model, args) -> Report:
    rep = Report(m.name)
    jm = JetModel(m, args.order)
    if m.chi is not None:
        jm.omegabar()
    # touch the gauge part so the seed registry is populated
    for g in m.fiber_coords():
        jm.s.coefficient(jm.jet(g, (), ())[1])
    stats = jm.registry_stats()
    rep.add(CheckResult("prolongation", True,
                        detail=f"order {args.order}, "
                               f"{stats['jet_coordinates']} jet coordinates"))
    rep.outputs["jet_coordinates"] = stats["jet_coordinates"]
    rep.outputs["beyond_order"] = stats["beyond_order"]
    return rep


def _run_descent(m: Model, args) -> Report:
    rep = Report(m.name)
    jm = JetModel(m, args.order)
    for c in check_descent(jm):
        rep.add(c)
    return rep


def _run_bv_identities(m: Model, args) -> Report:
    rep = Report(m.name)
    jm = JetModel(m, args.order)
    for c in check_bv_identities(jm):
        rep.add(c)
    return rep


def _run_bv_action(m: Model, args) -> Report:
    rep = Report(m.name)
    dens = action_density(m, generic_supersection(m))
    if args.ghost is not None:
        dens = ghost_sector(dens, args.ghost)
        rep.outputs["ghost"] = args.ghost
    rep.add(CheckResult("bv_action", True, detail=f"{dens.num_terms()} terms"))
    rep.outputs["bv_action"] = poly_text(dens)
    return rep


def _run_reduce(m: Model, args) -> Report:
    rep = Report(m.name)
    if m.chi is None:
        rep.add(CheckResult("reduction", False, detail="model has no presymplectic potential"))
        return rep
    if m.n == 0:
        form = m.omega()
        universe = m.fiber_coords()
        s = m.q
        strip = False
    else:
        jm = JetModel(m, args.order)
        comps = theta_components(jm.vertical_part(jm.omegabar()))
        form = comps.get(m.n, Poly.zero())
        if form.is_zero():
            rep.add(CheckResult("reduction", False,
                                detail="vertical two-form has no top component"))
            return rep
        universe = _form_universe(m, form)
        s = jm.s
        strip = True
    point = None
    if args.at:
        names = {gen_text(g): g for mono in form.terms for g, _ in mono if g.fdeg == 0}
        names.update({gen_text(g): g for g in universe})
        point = _parse_point(args.at, names)
    try:
        red = reduce_form(form, universe, point=point, strip_volume=strip, s=s)
    except ReductionError as e:
        rep.add(CheckResult("reduction", False, detail=str(e)))
        return rep
    rep.add(CheckResult("reduction", True,
                        detail=f"kernel {len(red.kernel_vectors)}, "
                               f"survivors {len(red.survivors)}"))
    rep.outputs["survivors"] = "; ".join(red.describe_survivors())
    rep.outputs["reduced"] = poly_text(red.reduced_form)
    return rep


def _run_boundary(m: Model, args) -> Report:
    rep = Report(m.name)
    kill = [int(s) for s in args.kill.split(",") if s.strip() != ""]
    try:
        br = boundary_reduction(m, kill, order=args.order)
    except (ReductionError, GradedAlgebraError) as e:
        rep.add(CheckResult("boundary", False, detail=str(e)))
        return rep
    for c in br.checks:
        rep.add(c)
    rep.outputs["survivors"] = "; ".join(br.reduced.describe_survivors())
    rep.outputs["reduced"] = poly_text(br.reduced.reduced_form)
    try:
        dens = action_density(br.restricted, generic_supersection(br.restricted))
        rep.outputs["charge_integrand"] = poly_text(dens)
    except (NotExactError, GradedAlgebraError) as e:
        rep.add(CheckResult("charge_integrand", False, detail=str(e)))
    return rep


def _run_report(m: Model, args) -> Report:
    rep = Report(m.name)
    for c in standard_checks(m):
        rep.add(c)
    if m.chi is not None:
        try:
            L = solve_hamiltonian(m)
        except (NotExactError, GradedAlgebraError) as e:
            rep.add(CheckResult("hamiltonian_exists", False, detail=str(e)))
            return rep
        rep.add(CheckResult("hamiltonian_exists", True))
        for c in check_solution(m, L):
            rep.add(c)
        rep.outputs["hamiltonian"] = poly_text(L)
        if m.n > 0:
            jm = JetModel(m, 1)
            for c in check_descent(jm):
                rep.add(c)
            for c in check_bv_identities(jm):
                rep.add(c)
        rep.outputs["bv_action"] = poly_text(
            action_density(m, generic_supersection(m)))
    return rep


_VERBS = {
    "check": _run_check,
    "hamiltonian": _run_hamiltonian,
    "prolong": _run_prolong,
    "descent": _run_descent,
    "bv-identities": _run_bv_identities,
    "bv-action": _run_bv_action,
    "reduce": _run_reduce,
    "boundary": _run_boundary,
    "report": _run_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gpde",
        description="symbolic checks for presymplectic gauge PDE models")
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name, help, **extra):
        p = sub.add_parser(name, help=help)
        p.add_argument("model", help="builtin model name or path to a model file")
        p.add_argument("--format", choices=("text", "json", "latex"),
                       default="text", help="report rendering")
        return p

    verb("check", "projection, nilpotency and presymplectic compatibility")
    verb("hamiltonian", "solve for the covariant hamiltonian and verify it")
    p = verb("prolong", "prolong to jets and summarize the coordinate registry")
    p.add_argument("--order", type=int, default=2)
    p = verb("descent", "descent tower on the vertical two-form")
    p.add_argument("--order", type=int, default=2)
    p = verb("bv-identities", "master identities on the jet prolongation")
    p.add_argument("--order", type=int, default=2)
    p = verb("bv-action", "field-space action density from a generic section")
    p.add_argument("--ghost", type=int, default=None,
                   help="restrict the density to one ghost degree")
    p = verb("reduce", "kernel reduction of the vertical two-form")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--at", default=None,
                   help="evaluation point, comma separated name=rational pairs")
    p = verb("boundary", "restrict to a submanifold and reduce the boundary form")
    p.add_argument("--kill", required=True,
                   help="comma separated base directions to drop")
    p.add_argument("--order", type=int, default=1)
    verb("report", "full check battery with hamiltonian and action outputs")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        m = _load(args.model)
    except DslError as e:
        for d in e.diagnostics:
            print(str(d), file=sys.stderr)
        return 2
    try:
        rep = _VERBS[args.verb](m, args)
    except (ReductionError, NotExactError, GradedAlgebraError) as e:
        rep = Report(m.name)
        rep.add(CheckResult(args.verb.replace("-", "_"), False, detail=str(e)))
    if args.format == "json":
        print(rep.to_json())
    elif args.format == "latex":
        print(rep.to_latex())
    else:
        print(rep.to_text())
    if not rep.all_passed:
        for c in rep.checks:
            if not c.passed:
                print(f"FAIL {c.name} residual_terms={c.residual_terms} {c.detail}",
                      file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
