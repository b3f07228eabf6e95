"""Vector fields, de Rham and vertical differentials, contraction, Lie derivative.

Conventions used throughout the kernel:
  * d is a left derivation of parity 1 with d(coord) = dcoord, d(dcoord) = 0.
  * i_V has parity parity(V)+1 and contracts any differential to the field's
    coefficient on the underlying coordinate: i_V(dc) = V(c), i_V(c) = 0.
  * L_V is the graded commutator [i_V, d] = i_V d - (-1)^{parity(i_V)} d i_V,
    so L_V acts as +V on functions for every parity of V.
"""

from __future__ import annotations

from typing import Callable, Mapping, Optional

from .algebra import (
    BASE_THETA,
    BASE_X,
    FIBER,
    FIELD,
    JET,
    DegreeError,
    Generator,
    Poly,
    Space,
    derive,
    mono_fdeg,
    normal_form,
)


class VectorField:
    """Graded vector field given by coefficients on coordinate generators.

    coeffs maps coordinates to coefficient polynomials (0-forms).  rule, if
    supplied, produces coefficients on demand for coordinates not yet in the
    table; results are memoized.  Coefficients must be 0-forms whose parity
    is coordinate parity + field parity, checked on first access.
    """

    def __init__(self, space: Space, gh: int,
                 coeffs: Optional[Mapping[Generator, object]] = None,
                 rule: Optional[Callable[[Generator], object]] = None,
                 name: str = ""):
        self.space = space
        self.gh = gh
        self.name = name or "V"
        self.rule = rule
        self._coeffs: dict = {}
        if coeffs:
            for g, v in coeffs.items():
                self._coeffs[g] = self._validate(g, normal_form(v))

    @property
    def parity(self) -> int:
        return self.gh & 1

    def _validate(self, g: Generator, v: Poly) -> Poly:
        if g.fdeg:
            raise DegreeError(f"vector field coefficient declared on a differential")
        if not v.is_zero():
            if v.fdeg() != 0:
                raise DegreeError(f"coefficient of {self.name} on {g.name} is not a function")
            if v.parity() != (g.parity + self.parity) % 2:
                raise DegreeError(f"coefficient of {self.name} on {g.name} has wrong parity")
        return v

    def coefficient(self, g: Generator) -> Poly:
        v = self._coeffs.get(g)
        if v is None:
            if self.rule is not None:
                raw = self.rule(g)
                v = self._validate(g, normal_form(raw if raw is not None else 0))
            else:
                v = Poly.zero()
            self._coeffs[g] = v
        return v

    def apply(self, p) -> Poly:
        """Act as a derivation on a function (0-form)."""
        p = normal_form(p)
        if any(mono_fdeg(m) for m in p.terms):
            raise DegreeError("vector fields act on functions; contract forms with interior()")
        return derive(p, self.parity, self._image)

    def _image(self, g: Generator):
        v = self.coefficient(g)
        return v if not v.is_zero() else None

    def __repr__(self):
        return f"<vector field {self.name} gh={self.gh}>"


def de_rham(p, vertical: bool = False) -> Poly:
    """The differential d (or the vertical differential with vertical=True).

    d sends every coordinate to its differential and every differential to
    zero.  The vertical differential only moves fiber and jet coordinates,
    leaving base coordinates and all differentials alone.
    """
    p = normal_form(p)
    space = p.space
    if space is None:
        return Poly.zero()

    def img(g):
        if g.fdeg:
            return None
        if vertical:
            if g.role not in (FIBER, JET):
                return None
        elif g.role == FIELD:
            raise DegreeError(
                "the de Rham differential does not act on component fields; "
                "use the horizontal differential of the density module"
            )
        return Poly.gen(space.differential(g, vertical=vertical))

    return derive(p, 1, img)


def d_vertical(p) -> Poly:
    return de_rham(p, vertical=True)


def interior(V: VectorField, p) -> Poly:
    """Contraction i_V: differentials (horizontal and vertical) are replaced
    by the field's coefficient on the underlying coordinate."""
    p = normal_form(p)
    space = p.space
    if space is None:
        return Poly.zero()
    ipar = (V.parity + 1) % 2

    def img(g):
        if not g.fdeg:
            return None
        c = V.coefficient(space.coordinate_of(g))
        return c if not c.is_zero() else None

    return derive(p, ipar, img)


def lie_derivative(V: VectorField, p, vertical: bool = False) -> Poly:
    """L_V = [i_V, d].  With vertical=True the vertical differential is used
    (the contraction is the same operator either way)."""
    p = normal_form(p)
    ipar = (V.parity + 1) % 2
    first = interior(V, de_rham(p, vertical=vertical))
    second = de_rham(interior(V, p), vertical=vertical)
    if ipar & 1:
        return first + second
    return first - second


def vf_commutator(V: VectorField, W: VectorField, name: str = "") -> VectorField:
    """Graded commutator [V, W] = V W - (-1)^{|V||W|} W V as a vector field."""
    if V.space is not W.space:
        raise DegreeError("commutator of vector fields on different spaces")
    sign = -1 if (V.parity and W.parity) else 1

    def rule(g):
        return V.apply(W.coefficient(g)) - sign * W.apply(V.coefficient(g))

    return VectorField(V.space, V.gh + W.gh, rule=rule,
                       name=name or f"[{V.name},{W.name}]")
