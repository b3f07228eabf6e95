"""Kernel distribution of the presymplectic form and the reduced phase space.

All linear algebra is exact over the rationals.  The form is flattened to a
coefficient system over a declared universe of coordinates; kernel vectors
are constant rational combinations of coordinate directions, and survivors
are returned as the canonical (reduced row echelon) basis of the linear
forms annihilating the kernel, so coordinate kernels give back plain
surviving coordinates and trace-like combinations come out with unit
leading coefficient.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import (
    BASE_THETA,
    FIBER,
    VDIFF,
    GradedAlgebraError,
    Generator,
    Poly,
)
from .cartan import VectorField, interior


class ReductionError(GradedAlgebraError):
    pass


def rref(rows: List[List[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot column indices)."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def nullspace(rows: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of the right kernel of the row system, one vector per free column."""
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -red[ri][fc]
        basis.append(vec)
    return basis


def strip_theta_volume(form: Poly) -> Poly:
    """Remove the full odd-volume factor from every monomial.  Sign-free
    because theta factors sort left of all fiber content."""
    stripped: Dict = {}
    for mono, c in form.terms.items():
        rest = tuple((g, e) for g, e in mono
                     if not (g.role == BASE_THETA and g.fdeg == 0))
        if rest in stripped:
            raise ReductionError("volume stripping collided; form is not top-degree")
        stripped[rest] = c
    return Poly(form.space, stripped)


class PresymplecticMatrix:
    """Contractions of a two-form along the unit field of each universe
    coordinate.  A constant vector K is in the kernel of the form exactly
    when sum_A K^A columns[A] vanishes identically."""

    def __init__(self, form: Poly, universe: Sequence[Generator]):
        self.form = form
        self.universe = list(universe)
        space = form.space
        self.columns = []
        for g in self.universe:
            unit = VectorField(space, -g.gh, coeffs={g: 1}, name=f"e_{g.name}")
            self.columns.append(interior(unit, form))

    def is_constant(self) -> bool:
        for col in self.columns:
            for mono in col.terms:
                if any(g.fdeg == 0 for g, _ in mono):
                    return False
        return True

    def matrix(self) -> List[List[Fraction]]:
        rows: Dict = {}
        for A, col in enumerate(self.columns):
            for mono, c in col.terms.items():
                rows.setdefault(mono, {})[A] = c
        keys = sorted(rows, key=lambda m: tuple((g._sort, e) for g, e in m))
        return [[rows[m].get(A, Fraction(0)) for A in range(len(self.universe))]
                for m in keys]

    def kernel(self) -> List[List[Fraction]]:
        return nullspace(self.matrix(), len(self.universe))


def _evaluate_coefficients(p: Poly, point: Dict[Generator, Fraction]) -> Poly:
    """Evaluate coordinate dependence: even coordinates at the point values,
    odd ones at zero, differentials untouched."""
    subs: Dict[Generator, Poly] = {}
    for g in p.generators():
        if g.fdeg:
            continue
        if g.parity:
            subs[g] = Poly.zero()
        else:
            subs[g] = Poly.scalar(point.get(g, Fraction(0)))
    return p.substitute(subs)


def _kernel_with_context(form: Poly, universe: Sequence[Generator],
                         point: Optional[Dict[Generator, Fraction]],
                         strip_volume: bool, samples: int):
    work = strip_theta_volume(form) if strip_volume else form
    pm = PresymplecticMatrix(work, universe)
    if pm.is_constant() and point is None:
        return pm.kernel(), work, None
    even_coords = sorted({g for col in pm.columns for mono in col.terms
                          for g, _ in mono if g.fdeg == 0 and g.parity == 0},
                         key=lambda g: g._sort)
    if point is not None:
        pts = [dict(point)]
    else:
        import random

        rng = random.Random(20260819)
        pts = [{g: Fraction(rng.randint(1, 97), rng.randint(2, 13))
                for g in even_coords} for _ in range(samples)]
    kernels = []
    for pt in pts:
        ev = _evaluate_coefficients(work, pt)
        kernels.append(PresymplecticMatrix(ev, universe).kernel())
    dims = {len(k) for k in kernels}
    if len(dims) != 1:
        raise ReductionError(
            f"kernel dimension is not stable across sample points: {sorted(dims)}"
        )
    chosen = pts[0]
    return kernels[0], _evaluate_coefficients(work, chosen), chosen


def kernel_basis(form: Poly, universe: Sequence[Generator],
                 point: Optional[Dict[Generator, Fraction]] = None,
                 strip_volume: bool = False,
                 samples: int = 3) -> List[List[Fraction]]:
    """Constant-coefficient kernel of the form over the universe.  When the
    flattened system is field-dependent, it is evaluated at the supplied
    point, or at several random rational points which must agree on the
    kernel dimension."""
    kernel, _, _ = _kernel_with_context(form, universe, point, strip_volume, samples)
    return kernel


class ReducedModel:
    """Quotient by the kernel distribution.

    survivors[i] is a fresh coordinate generator representing the linear
    form survivor_forms[i] over the original universe; reduced_form is the
    two-form rewritten in the surviving differentials; s_action, when
    requested, is the projected evolutionary field on the survivors."""

    def __init__(self, space, survivors, survivor_forms, kernel_vectors,
                 reduced_form, universe, point=None, s_action=None):
        self.space = space
        self.survivors = survivors
        self.survivor_forms = survivor_forms
        self.kernel_vectors = kernel_vectors
        self.reduced_form = reduced_form
        self.universe = universe
        self.point = point
        self.s_action = s_action

    def describe_survivors(self) -> List[str]:
        from .printing import gen_text

        out = []
        for g, lam in zip(self.survivors, self.survivor_forms):
            parts = []
            for A, c in enumerate(lam):
                if not c:
                    continue
                name = gen_text(self.universe[A])
                if c == 1:
                    parts.append(name)
                elif c == -1:
                    parts.append(f"-{name}")
                else:
                    parts.append(f"{c}*{name}")
            out.append(f"{gen_text(g)} = " + " + ".join(parts).replace("+ -", "- "))
        return out


def _annihilator(kernel: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    if not kernel:
        ident = [[Fraction(1) if j == i else Fraction(0) for j in range(ncols)]
                 for i in range(ncols)]
        return ident
    return nullspace([list(v) for v in kernel], ncols)


def reduce_form(form: Poly, universe: Sequence[Generator],
                point: Optional[Dict[Generator, Fraction]] = None,
                strip_volume: bool = False,
                s: Optional[VectorField] = None,
                survivor_prefix: str = "w",
                samples: int = 3) -> ReducedModel:
    """Quotient the universe by the kernel of the form.

    Refuses kernels that mix ghost degrees (no graded splitting exists).
    When an evolutionary field s is supplied, the projected action must be
    constant along the kernel, otherwise the reduction is refused.
    """
    universe = list(universe)
    ncols = len(universe)
    space = form.space
    kernel, work, used_point = _kernel_with_context(form, universe, point,
                                                    strip_volume, samples)
    kernel, _ = rref(kernel)
    for vec in kernel:
        ghs = {universe[A].gh for A in range(ncols) if vec[A]}
        if len(ghs) > 1:
            raise ReductionError(
                "kernel mixes coordinates of different ghost degree; "
                "no graded splitting exists"
            )

    ann = _annihilator(kernel, ncols)
    survivors: List[Generator] = []
    survivor_forms: List[List[Fraction]] = []
    for i, lam in enumerate(ann):
        nz = [A for A in range(ncols) if lam[A]]
        gh = universe[nz[0]].gh
        if any(universe[A].gh != gh for A in nz):
            raise ReductionError("annihilator mixes ghost degrees")
        g = space.coordinate(f"{survivor_prefix}{i}", FIBER, gh)
        survivors.append(g)
        survivor_forms.append(list(lam))

    # invert the (survivor rows; kernel rows) basis change
    T = [list(r) for r in ann] + [list(r) for r in kernel]
    if len(T) != ncols:
        raise ReductionError("annihilator and kernel do not split the universe")
    aug = [row + [Fraction(1) if j == i else Fraction(0) for j in range(ncols)]
           for i, row in enumerate(T)]
    red, pivots = rref(aug)
    if pivots != list(range(ncols)):
        raise ReductionError("basis change is singular")
    tinv = [[red[i][ncols + j] for j in range(ncols)] for i in range(ncols)]
    nsurv = len(survivors)

    # substitution tables: coordinates to survivor combinations (kernel part
    # dropped, which is evaluation at kernel coordinates zero), and each
    # differential present in the form to the matching survivor differentials
    csub: Dict[Generator, Poly] = {}
    for A, g in enumerate(universe):
        expr = Poly.zero()
        for i in range(nsurv):
            if tinv[A][i]:
                expr = expr + tinv[A][i] * Poly.gen(survivors[i])
        csub[g] = expr
    dsub: Dict[Generator, Poly] = {}
    uset = set(universe)
    for mono in work.terms:
        for g, _ in mono:
            if g.fdeg != 1 or g in dsub:
                continue
            base = space.coordinate_of(g)
            if base not in uset:
                raise ReductionError(
                    f"form contains the differential of {base.name!r}, "
                    "which is outside the universe"
                )
            A = universe.index(base)
            vertical = g.role == VDIFF
            expr = Poly.zero()
            for i in range(nsurv):
                if tinv[A][i]:
                    dw = space.differential(survivors[i], vertical=vertical)
                    expr = expr + tinv[A][i] * Poly.gen(dw)
            dsub[g] = expr

    reduced = work.substitute(dsub)

    s_action = None
    if s is not None:
        s_action = {}
        for i, g in enumerate(survivors):
            expr = Poly.zero()
            for A in range(ncols):
                if survivor_forms[i][A]:
                    expr = expr + survivor_forms[i][A] * s.apply(Poly.gen(universe[A]))
            # constancy along every kernel direction
            for vec in kernel:
                touched = [A for A in range(ncols) if vec[A]]
                if not touched:
                    continue
                kgh = universe[touched[0]].gh
                kfield = VectorField(space, -kgh,
                                     coeffs={universe[A]: vec[A] for A in touched})
                if not kfield.apply(expr).is_zero():
                    raise ReductionError(
                        "the evolutionary field does not descend: "
                        "survivor image varies along the kernel"
                    )
            s_action[g] = expr.substitute(csub)

    return ReducedModel(space, survivors, survivor_forms, kernel, reduced,
                        universe, point=used_point, s_action=s_action)
