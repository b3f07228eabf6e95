"""Super-jet prolongation of a gauge PDE model.

Bundle coordinates u^A acquire jet coordinates psi^A_{I|J}: I a symmetric
multi-index of base derivatives, J a strictly increasing tuple of odd base
directions (the theta-expansion level, lowering ghost degree by |J|).  The
expansion convention is u^A = sum_J theta^J psi^A_{|J} with unit
coefficients and theta factors on the left.

Two odd vector fields act on jet space: the total derivative
D = theta^a D_a and the evolutionary differential s, seeded so that the
pulled-back Q-structure equals s + D on expansions and extended to deeper
jets by commuting with the total derivatives.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import (
    BASE_THETA,
    BASE_X,
    FIBER,
    JET,
    VDIFF,
    DegreeError,
    Generator,
    GradedAlgebraError,
    Poly,
    derive,
    perm_sign,
)
from .cartan import VectorField, d_vertical, de_rham, interior
from .model import Model, solve_hamiltonian
from .report import CheckResult


def theta_coefficients(p: Poly) -> Dict[Tuple[int, ...], Poly]:
    """Split a polynomial as sum_J theta^J c_J.  The extraction is sign-free
    because theta factors sit left of every odd factor in canonical order."""
    out: Dict[Tuple[int, ...], Poly] = {}
    for mono, c in p.terms.items():
        J = tuple(g.base_index[0] for g, e in mono if g.role == BASE_THETA and g.fdeg == 0)
        rest = tuple((g, e) for g, e in mono if not (g.role == BASE_THETA and g.fdeg == 0))
        acc = out.setdefault(J, Poly(p.space, {}))
        out[J] = acc + Poly(p.space, {rest: c})
    return {J: v for J, v in out.items() if not v.is_zero()}


def theta_components(p: Poly) -> Dict[int, Poly]:
    """Split by total theta degree (odd base coordinates, not their
    differentials).  Summing the components reconstructs the input."""
    out: Dict[int, Poly] = {}
    for mono, c in p.terms.items():
        k = sum(e for g, e in mono if g.role == BASE_THETA and g.fdeg == 0)
        acc = out.setdefault(k, Poly(p.space, {}))
        out[k] = acc + Poly(p.space, {mono: c})
    return {k: v for k, v in out.items() if not v.is_zero()}


def vertical_lie(V: VectorField, p: Poly) -> Poly:
    """Lie derivative along an evolutionary-type field on vertical forms:
    coordinates move by V, vertical differentials by
    dv(c) -> (-1)^{parity(V)} dv(V(c)).  Rejects horizontal differentials."""
    space = p.space
    if space is None:
        return Poly.zero()
    sign = -1 if V.parity else 1

    def img(g):
        if g.fdeg == 0:
            v = V.coefficient(g)
            return v if not v.is_zero() else None
        if g.role != VDIFF:
            raise DegreeError("vertical_lie acts on vertical forms only")
        base = space.coordinate_of(g)
        return sign * d_vertical(V.coefficient(base))

    return derive(p, V.parity, img)


class JetModel:
    """Jet prolongation of a model to a stated truncation order.

    Jet coordinates are materialized on demand; the truncation order only
    controls the retained/excluded split in reports, never the values."""

    def __init__(self, parent: Model, order: int):
        if order < 0:
            raise GradedAlgebraError("truncation order must be nonnegative")
        self.parent = parent
        self.N = order
        self.space = parent.space
        self._info: Dict[Generator, Tuple[Generator, Tuple[int, ...], Tuple[int, ...]]] = {}
        self._expansions: Dict[Generator, Poly] = {}
        self._seeds: Dict[Generator, Dict[Tuple[int, ...], Poly]] = {}
        self._totals: Dict[int, VectorField] = {}
        self._chibar: Optional[Poly] = None
        self._omegabar: Optional[Poly] = None
        self._lbar: Optional[Poly] = None
        self.D = VectorField(self.space, 1, rule=self._d_rule, name="D")
        self.s = VectorField(self.space, 1, rule=self._s_rule, name="s")

    # jet coordinates ------------------------------------------------------

    def jet(self, fiber_gen: Generator, I=(), J=()):
        """The jet coordinate psi_{I|J} of a bundle coordinate.  I is
        symmetrized silently; J antisymmetrizes with a sign, returning
        (0, None) on a repeated odd direction."""
        if fiber_gen.role != FIBER:
            raise GradedAlgebraError("jets are indexed by bundle fiber coordinates")
        I = tuple(sorted(I))
        J = tuple(J)
        sign = 1
        if J:
            if len(set(J)) != len(J):
                return 0, None
            sign = perm_sign(tuple(sorted(range(len(J)), key=lambda k: J[k])))
            J = tuple(sorted(J))
        g = self.space.coordinate(fiber_gen.name, JET, fiber_gen.gh - len(J),
                                  base_index=fiber_gen.base_index,
                                  lie_index=fiber_gen.lie_index,
                                  jet_I=I, jet_J=J)
        self._info.setdefault(g, (fiber_gen, I, J))
        return sign, g

    def theta_expansion(self, fiber_gen: Generator) -> Poly:
        exp = self._expansions.get(fiber_gen)
        if exp is None:
            idx = self.parent.base_indices
            exp = Poly.zero()
            for k in range(len(idx) + 1):
                for J in itertools.combinations(idx, k):
                    term = Poly.scalar(1)
                    for j in J:
                        term = term * Poly.gen(self.parent.theta[j])
                    _, g = self.jet(fiber_gen, (), J)
                    exp = exp + term * Poly.gen(g)
            self._expansions[fiber_gen] = exp
        return exp

    def pullback(self, p: Poly) -> Poly:
        """Substitute every bundle fiber coordinate (and its differential)
        by its theta-expansion (and the expansion's differential)."""
        mapping = {}
        for g in p.generators():
            if g.fdeg == 0 and g.role == FIBER:
                mapping[g] = self.theta_expansion(g)
            elif g.fdeg == 1 and g.role == FIBER:
                base = self.space.coordinate_of(g)
                mapping[g] = de_rham(self.theta_expansion(base))
        return p.substitute(mapping)

    # the two odd vector fields --------------------------------------------

    def total_derivative(self, a: int) -> VectorField:
        td = self._totals.get(a)
        if td is None:

            def rule(g, a=a):
                if g.role == JET:
                    fib, I, J = self._info[g]
                    _, shifted = self.jet(fib, I + (a,), J)
                    return Poly.gen(shifted)
                if g.role == BASE_X:
                    return Poly.scalar(1) if g.base_index[0] == a else None
                if g.role == FIBER:
                    raise GradedAlgebraError(
                        f"bundle coordinate {g.name!r} inside a jet-space expression"
                    )
                return None

            td = VectorField(self.space, 0, rule=rule, name=f"D_{a}")
            self._totals[a] = td
        return td

    def _d_rule(self, g: Generator):
        if g.role == JET:
            fib, I, J = self._info[g]
            acc = Poly.zero()
            for a in self.parent.base_indices:
                _, shifted = self.jet(fib, I + (a,), J)
                acc = acc + Poly.gen(self.parent.theta[a]) * Poly.gen(shifted)
            return acc
        if g.role == BASE_X:
            return Poly.gen(self.parent.theta[g.base_index[0]])
        if g.role == FIBER:
            raise GradedAlgebraError(
                f"bundle coordinate {g.name!r} inside a jet-space expression"
            )
        return None

    def _seed(self, fiber_gen: Generator) -> Dict[Tuple[int, ...], Poly]:
        seeds = self._seeds.get(fiber_gen)
        if seeds is None:
            mapping = {u: self.theta_expansion(u) for u in self.parent.fiber_coords()}
            q_of = self.parent.q.coefficient(fiber_gen)
            residue = q_of.substitute(mapping) - self.D.apply(self.theta_expansion(fiber_gen))
            seeds = {}
            for J, coeff in theta_coefficients(residue).items():
                seeds[J] = Fraction((-1) ** len(J)) * coeff
            self._seeds[fiber_gen] = seeds
        return seeds

    def _s_rule(self, g: Generator):
        if g.role == JET:
            fib, I, J = self._info[g]
            if I:
                _, lower = self.jet(fib, I[1:], J)
                return self.total_derivative(I[0]).apply(self.s.coefficient(lower))
            return self._seed(fib).get(J)
        if g.role == FIBER:
            raise GradedAlgebraError(
                f"bundle coordinate {g.name!r} inside a jet-space expression"
            )
        return None

    # pulled-back structures -------------------------------------------------

    def chibar(self) -> Poly:
        if self._chibar is None:
            if self.parent.chi is None:
                raise GradedAlgebraError("parent model has no presymplectic potential")
            self._chibar = self.pullback(self.parent.chi)
        return self._chibar

    def omegabar(self) -> Poly:
        if self._omegabar is None:
            self._omegabar = de_rham(self.chibar())
        return self._omegabar

    def lbar(self) -> Poly:
        if self._lbar is None:
            self._lbar = self.pullback(solve_hamiltonian(self.parent))
        return self._lbar

    def vertical_part(self, p: Poly) -> Poly:
        """Keep only fiber-direction differentials, renamed to vertical
        ones; base differentials are set to zero."""
        mapping = {}
        for g in p.generators():
            if g.fdeg != 1:
                continue
            if g.role in (BASE_X, BASE_THETA):
                mapping[g] = Poly.zero()
            elif g.role == JET:
                base = self.space.coordinate_of(g)
                mapping[g] = Poly.gen(self.space.differential(base, vertical=True))
            elif g.role == FIBER:
                raise GradedAlgebraError("bundle differential inside a jet-space expression")
        return p.substitute(mapping)

    def truncation_split(self, p: Poly) -> Tuple[Poly, Poly]:
        """(retained, excluded): a term is excluded when it touches a jet
        coordinate of base-derivative order above the truncation order."""

        def retained(mono):
            for g, _ in mono:
                if g.role in (JET, VDIFF) and len(g.jet_I) > self.N:
                    return False
            return True

        keep = p.filter(retained)
        return keep, p - keep

    def registry_stats(self) -> Dict[str, int]:
        total = len(self._info)
        deep = sum(1 for g in self._info if len(g.jet_I) > self.N)
        return {"jet_coordinates": total, "beyond_order": deep}


def prolong(model: Model, order: int) -> JetModel:
    return JetModel(model, order)


# identity checks -----------------------------------------------------------


def _split_result(jm: JetModel, name: str, residual: Poly) -> CheckResult:
    retained, excluded = jm.truncation_split(residual)
    return CheckResult(name, retained.is_zero(),
                       residual_terms=retained.num_terms(),
                       excluded_terms=excluded.num_terms())


def check_descent(jm: JetModel) -> List[CheckResult]:
    """The descent tower: on each theta-degree k component of the vertical
    pulled-back form, L_s moves degree k to k and L_D degree k-1 to k; the
    two contributions must cancel."""
    ov = jm.vertical_part(jm.omegabar())
    comps = theta_components(ov)
    n = jm.parent.n
    out = []
    for k in range(n + 2):
        r = Poly.zero()
        if k in comps:
            r = r + vertical_lie(jm.s, comps[k])
        if k - 1 in comps:
            r = r + vertical_lie(jm.D, comps[k - 1])
        out.append(_split_result(jm, f"descent_theta_{k}", r))
    return out


def check_bv_identities(jm: JetModel) -> List[CheckResult]:
    """Two master identities tying the vertical two-form, the pulled-back
    potential and the pulled-back hamiltonian together."""
    chib = jm.chibar()
    lb = jm.lbar()
    scalar = interior(jm.D, chib) + lb

    ov = jm.vertical_part(jm.omegabar())
    r1 = interior(jm.s, ov) + d_vertical(scalar) \
        + vertical_lie(jm.D, jm.vertical_part(chib))
    out = [_split_result(jm, "master_vertical", r1)]

    # only terms with two fiber differentials survive the double contraction
    def two_jets(mono):
        return all(g.role == JET for g, _ in mono if g.fdeg == 1)

    opp = jm.omegabar().filter(two_jets)
    r2 = Fraction(1, 2) * interior(jm.s, interior(jm.s, opp)) - jm.D.apply(scalar)
    out.append(_split_result(jm, "master_scalar", r2))
    return out


def bv_lagrangian(jm: JetModel) -> Poly:
    """Top theta-degree component of the pulled-back hamiltonian plus the
    D-contraction of the pulled-back potential."""
    scalar = interior(jm.D, jm.chibar()) + jm.lbar()
    return theta_components(scalar).get(jm.parent.n, Poly.zero())
