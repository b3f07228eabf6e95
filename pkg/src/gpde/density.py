"""Sections, component fields, boundary restriction and action densities.

A section assigns to every bundle fiber coordinate a theta-expansion in
component field symbols phi(x); pulling the structure back along a section
turns the homological data into field-theory data: the covariance residual
(curvature), the gauge variation of the component fields, and the
first-order action density whose variational calculus lives here too.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .algebra import (
    BASE_THETA,
    BASE_X,
    FIBER,
    FIELD,
    JET,
    Generator,
    GradedAlgebraError,
    Poly,
    Space,
    derive,
    perm_sign,
)
from .cartan import VectorField
from .jets import JetModel, theta_coefficients, theta_components
from .model import Model, solve_hamiltonian
from .reduction import ReducedModel, reduce_form
from .report import CheckResult


def field_symbol(space: Space, fiber_gen: Generator, J=(), deriv=()):
    """Component field of a bundle coordinate at theta-level J, carrying a
    symmetric multi-index of base derivatives.  Returns (sign, generator);
    sign 0 on a repeated theta level."""
    J = tuple(J)
    sign = 1
    if J:
        if len(set(J)) != len(J):
            return 0, None
        sign = perm_sign(tuple(sorted(range(len(J)), key=lambda k: J[k])))
        J = tuple(sorted(J))
    name = f"{fiber_gen.name}{len(J)}"
    g = space.coordinate(name, FIELD, fiber_gen.gh - len(J),
                         base_index=fiber_gen.base_index,
                         lie_index=fiber_gen.lie_index,
                         jet_J=J, deriv=tuple(sorted(deriv)))
    return sign, g


def shift_field(space: Space, g: Generator, a: int) -> Generator:
    return space.coordinate(g.name, FIELD, g.gh, base_index=g.base_index,
                            lie_index=g.lie_index, jet_J=g.jet_J,
                            deriv=tuple(sorted(g.deriv + (a,))))


def total_field_derivative(m: Model, a: int) -> VectorField:
    def rule(g, a=a):
        if g.role == FIELD:
            return Poly.gen(shift_field(m.space, g, a))
        if g.role == BASE_X:
            return Poly.scalar(1) if g.base_index[0] == a else None
        if g.role in (FIBER, JET):
            raise GradedAlgebraError(
                "bundle or jet coordinate inside a component-field expression"
            )
        return None

    return VectorField(m.space, 0, rule=rule, name=f"del_{a}")


def horizontal_field_differential(m: Model) -> VectorField:
    """d_X = theta^a del_a on component-field expressions."""

    def rule(g):
        if g.role == FIELD:
            acc = Poly.zero()
            for a in m.base_indices:
                acc = acc + Poly.gen(m.theta[a]) * Poly.gen(shift_field(m.space, g, a))
            return acc
        if g.role == BASE_X:
            return Poly.gen(m.theta[g.base_index[0]])
        if g.role in (FIBER, JET):
            raise GradedAlgebraError(
                "bundle or jet coordinate inside a component-field expression"
            )
        return None

    return VectorField(m.space, 1, rule=rule, name="d_X")


class Section:
    """Theta-expansion of every bundle fiber coordinate in field symbols."""

    def __init__(self, model: Model, mapping: Dict[Generator, Poly]):
        self.model = model
        self.mapping = dict(mapping)

    def __getitem__(self, g: Generator) -> Poly:
        return self.mapping[g]

    def pull(self, p: Poly) -> Poly:
        return p.substitute(self.mapping)


def generic_supersection(m: Model) -> Section:
    """All theta-levels: the full BV-BFV field content, ghost degrees of the
    component fields running from gh(u) downwards."""
    mapping = {}
    for u in m.fiber_coords():
        exp = Poly.zero()
        idx = m.base_indices
        for k in range(len(idx) + 1):
            for J in itertools.combinations(idx, k):
                term = Poly.scalar(1)
                for j in J:
                    term = term * Poly.gen(m.theta[j])
                _, g = field_symbol(m.space, u, J)
                exp = exp + term * Poly.gen(g)
        mapping[u] = exp
    return Section(m, mapping)


def generic_section(m: Model) -> Section:
    """Ghost-zero field content only: each fiber coordinate contributes the
    theta-level matching its ghost degree (nothing when that is negative)."""
    mapping = {}
    for u in m.fiber_coords():
        exp = Poly.zero()
        k = u.gh
        if 0 <= k <= len(m.base_indices):
            for J in itertools.combinations(m.base_indices, k):
                term = Poly.scalar(1)
                for j in J:
                    term = term * Poly.gen(m.theta[j])
                _, g = field_symbol(m.space, u, J)
                exp = exp + term * Poly.gen(g)
        mapping[u] = exp
    return Section(m, mapping)


def covariance_residual(m: Model, sec: Section) -> Dict[Generator, Poly]:
    """R(u) = section-pullback of Q(u) minus d_X of the section image.
    Vanishes exactly on solutions; the theta-bilinear part is the curvature."""
    dx = horizontal_field_differential(m)
    out = {}
    for u in m.fiber_coords():
        out[u] = sec.pull(m.q.coefficient(u)) - dx.apply(sec[u])
    return out


def gauge_variation(m: Model, sec: Section) -> Dict[Generator, Poly]:
    """BRST-type variation of every component field, read off level by level
    from the covariance residual."""
    res = covariance_residual(m, sec)
    out = {}
    for u in m.fiber_coords():
        coeffs = theta_coefficients(res[u])
        idx = m.base_indices
        for k in range(len(idx) + 1):
            for J in itertools.combinations(idx, k):
                _, g = field_symbol(m.space, u, J)
                if g in sec[u].generators():
                    r = coeffs.get(J, Poly.zero())
                    out[g] = Fraction((-1) ** len(J)) * r
    return out


def theta_top_coefficient(m: Model, p: Poly) -> Poly:
    """Coefficient of the full odd volume; sign-free extraction because
    theta factors sort left of all field content."""
    want = frozenset(m.base_indices)
    out: Dict = {}
    for mono, c in p.terms.items():
        js = [g.base_index[0] for g, e in mono if g.role == BASE_THETA and g.fdeg == 0]
        if frozenset(js) != want or len(js) != len(want):
            continue
        rest = tuple((g, e) for g, e in mono if not (g.role == BASE_THETA and g.fdeg == 0))
        out[rest] = out.get(rest, Fraction(0)) + c
    return Poly(p.space, out)


def action_density(m: Model, sec: Section, L: Optional[Poly] = None) -> Poly:
    """First-order action integrand: pull the presymplectic potential back
    along the de Rham image of the section, add the hamiltonian, take the
    top theta coefficient."""
    if m.chi is None:
        raise GradedAlgebraError("model has no presymplectic potential")
    if L is None:
        L = solve_hamiltonian(m)
    dx_field = horizontal_field_differential(m)
    mapping = dict(sec.mapping)
    for u in m.fiber_coords():
        du = m.space.differential(u)
        mapping[du] = dx_field.apply(sec[u])
    for a in m.base_indices:
        mapping[m.space.differential(m.x[a])] = Poly.gen(m.theta[a])
        mapping[m.space.differential(m.theta[a])] = Poly.zero()
    total = m.chi.substitute(mapping) + sec.pull(L)
    return theta_top_coefficient(m, total)


def ghost_sector(p: Poly, gh: int) -> Poly:
    """Terms whose positive-ghost field symbols carry total degree gh.

    A BV-type density is homogeneous in the plain total, so the useful
    grading counts the ghost content only: the gh=0 sector of a master
    density is exactly the part free of ghosts and their momenta."""

    def pred(mono):
        return sum(g.gh * e for g, e in mono if g.role == FIELD and g.gh > 0) == gh

    return p.filter(pred)


# variational calculus ------------------------------------------------------


def _field_base_key(g: Generator):
    return (g.name, g.base_index, g.lie_index, g.jet_J)


def euler_lagrange(m: Model, dens: Poly) -> Dict[Generator, Poly]:
    """Variational derivative with respect to every undifferentiated field
    symbol present: sum over derivative multi-indices I of
    (-1)^{|I|} D_I (left-partial w.r.t. the I-shifted symbol)."""
    groups: Dict = {}
    for g in dens.generators():
        if g.role == FIELD:
            groups.setdefault(_field_base_key(g), []).append(g)
    out = {}
    for key, gens in groups.items():
        sample = gens[0]
        base = m.space.coordinate(sample.name, FIELD, sample.gh, base_index=sample.base_index,
                                  lie_index=sample.lie_index, jet_J=sample.jet_J, deriv=())
        acc = Poly.zero()
        for g in gens:
            partial = derive(dens, g.parity, lambda h, g=g: 1 if h is g else None)
            for a in g.deriv:
                partial = total_field_derivative(m, a).apply(partial)
            acc = acc + Fraction((-1) ** len(g.deriv)) * partial
        out[base] = acc
    return {g: v for g, v in out.items() if not v.is_zero()}


def el_equivalent(m: Model, a: Poly, b: Poly) -> bool:
    return not euler_lagrange(m, a - b)


def el_proportional(m: Model, a: Poly, b: Poly) -> Tuple[bool, Optional[Fraction]]:
    """Whether a and b have proportional variational content; returns the
    single scalar when it exists."""
    ea = euler_lagrange(m, a)
    eb = euler_lagrange(m, b)
    if not eb:
        return (not ea), None
    lam = None
    for g, pb in eb.items():
        pa = ea.get(g, Poly.zero())
        for mono, cb in pb.terms.items():
            ca = pa.coefficient(mono)
            cand = ca / cb
            if lam is None:
                lam = cand
            elif lam != cand:
                return False, None
    if lam is None:
        return (not ea), None
    keys = set(ea) | set(eb)
    for g in keys:
        pa = ea.get(g, Poly.zero())
        pb = eb.get(g, Poly.zero())
        if not (pa - lam * pb).is_zero():
            return False, None
    return True, lam


# boundary restriction ------------------------------------------------------


def restrict_to_submanifold(m: Model, keep: Iterable[int]) -> Model:
    """Kill the base directions outside `keep`: their coordinates, odd
    partners and differentials are set to zero in the Q-structure and the
    presymplectic potential.  Fiber content is untouched."""
    keep = tuple(sorted(keep))
    unknown = [a for a in keep if a not in m.base_indices]
    if unknown:
        raise GradedAlgebraError(f"cannot keep absent base directions {unknown}")
    killed = [a for a in m.base_indices if a not in keep]
    ksub0: Dict[Generator, Poly] = {}
    ksub1: Dict[Generator, Poly] = {}
    for a in killed:
        ksub0[m.x[a]] = Poly.zero()
        ksub0[m.theta[a]] = Poly.zero()
        ksub1[m.space.differential(m.x[a])] = Poly.zero()
        ksub1[m.space.differential(m.theta[a])] = Poly.zero()
    full = dict(ksub0)
    full.update(ksub1)

    coeffs: Dict[Generator, Poly] = {}
    for a in keep:
        coeffs[m.x[a]] = Poly.gen(m.theta[a])
        coeffs[m.theta[a]] = Poly.zero()
    for g in m.fiber_coords():
        coeffs[g] = m.q.coefficient(g).substitute(ksub0)
    q = VectorField(m.space, 1, coeffs=coeffs, name="Q|")
    chi = m.chi.substitute(full) if m.chi is not None else None
    tensors = m.tensors
    if tensors is not None:
        from .algebra import BackgroundTensors

        tensors = BackgroundTensors([tensors.diag[m.base_indices.index(a)] for a in keep])
    return Model(m.space, f"{m.name}_on_{''.join(map(str, keep))}",
                 len(keep), keep,
                 {a: m.x[a] for a in keep}, {a: m.theta[a] for a in keep},
                 m.fibers, q, chi, m.lies, tensors, m.weak)


def tangency_residuals(m: Model, keep: Iterable[int]) -> Dict[Generator, Poly]:
    """The Q-image of every killed coordinate, restricted to the surface;
    nonzero entries mean Q is not tangent to the restriction."""
    keep = tuple(sorted(keep))
    killed = [a for a in m.base_indices if a not in keep]
    ksub: Dict[Generator, Poly] = {}
    for a in killed:
        ksub[m.x[a]] = Poly.zero()
        ksub[m.theta[a]] = Poly.zero()
    out = {}
    for a in killed:
        out[m.x[a]] = m.q.coefficient(m.x[a]).substitute(ksub)
        out[m.theta[a]] = m.q.coefficient(m.theta[a]).substitute(ksub)
    return out


class BoundaryReduction:
    def __init__(self, restricted: Model, jets: JetModel, reduced: ReducedModel,
                 checks: List[CheckResult]):
        self.restricted = restricted
        self.jets = jets
        self.reduced = reduced
        self.checks = checks


def boundary_reduction(m: Model, kill: Iterable[int], order: int = 1,
                       with_s: bool = True) -> BoundaryReduction:
    """Restrict, prolong, verticalize, and quotient by the kernel of the top
    theta-degree block of the boundary two-form."""
    kill = set(kill)
    keep = [a for a in m.base_indices if a not in kill]
    checks = []
    tang = tangency_residuals(m, keep)
    bad = sum(p.num_terms() for p in tang.values())
    checks.append(CheckResult("tangency", bad == 0, residual_terms=bad))
    mr = restrict_to_submanifold(m, keep)
    jr = JetModel(mr, order)
    ov = jr.vertical_part(jr.omegabar())
    comps = theta_components(ov)
    top = comps.get(mr.n, Poly.zero())
    if top.is_zero():
        raise GradedAlgebraError("boundary two-form has no top theta component")
    universe = sorted({mr.space.coordinate_of(g)
                       for mono in top.terms for g, _ in mono if g.fdeg == 1},
                      key=lambda g: g._sort)
    reduced = reduce_form(top, universe, strip_volume=True,
                          s=jr.s if with_s else None, survivor_prefix="w")
    checks.append(CheckResult("kernel_split", True,
                              detail=f"kernel dimension {len(reduced.kernel_vectors)}"))
    return BoundaryReduction(mr, jr, reduced, checks)
