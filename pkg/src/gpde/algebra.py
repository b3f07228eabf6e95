"""Graded-commutative polynomial algebra over the rationals.

Generators carry an integer ghost number and a form degree (0 or 1); the
Koszul parity of a generator is (ghost + form degree) mod 2.  Polynomials
are dictionaries mapping canonical monomials to nonzero Fractions, so all
arithmetic is exact and equality is literal dictionary equality.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

Scalar = Union[int, Fraction]


class GradedAlgebraError(Exception):
    """Base class for kernel errors."""


class ForeignGeneratorError(GradedAlgebraError):
    """Mixing generators from two different spaces."""


class DegreeError(GradedAlgebraError):
    """An operation received an argument of the wrong degree or parity."""


# generator roles, in canonical sort order
BASE_X = 0
BASE_THETA = 1
FIBER = 2
JET = 3
VDIFF = 4
FIELD = 5

_ROLE_NAMES = {
    BASE_X: "base_x",
    BASE_THETA: "base_theta",
    FIBER: "fiber",
    JET: "jet",
    VDIFF: "vdiff",
    FIELD: "field",
}


class Generator:
    """A single graded coordinate or differential.

    Identity is structural: two declarations with the same key are the same
    object (interned per Space).  The sort key orders base coordinates before
    fiber coordinates before jets, with differentials adjacent to their
    coordinate, so canonical monomials put the theta-volume factor leftmost.
    """

    __slots__ = (
        "space",
        "role",
        "name",
        "gh",
        "fdeg",
        "base_index",
        "lie_index",
        "jet_I",
        "jet_J",
        "deriv",
        "_key",
        "_sort",
    )

    def __init__(self, space, role, name, gh, fdeg, base_index, lie_index, jet_I, jet_J, deriv):
        self.space = space
        self.role = role
        self.name = name
        self.gh = gh
        self.fdeg = fdeg
        self.base_index = base_index
        self.lie_index = lie_index
        self.jet_I = jet_I
        self.jet_J = jet_J
        self.deriv = deriv
        li = -1 if lie_index is None else lie_index
        self._key = (role, name, base_index, li, jet_I, jet_J, deriv, fdeg)
        self._sort = self._key

    @property
    def parity(self) -> int:
        return (self.gh + self.fdeg) & 1

    def __repr__(self):
        return f"<gen {self.name} gh={self.gh} fdeg={self.fdeg}>"

    def __lt__(self, other):
        return self._sort < other._sort

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return self is other


def _unify(a: Optional["Space"], b: Optional["Space"]) -> Optional["Space"]:
    if a is None:
        return b
    if b is None:
        return a
    if a is not b:
        raise ForeignGeneratorError(
            f"cannot combine elements of space {a.label!r} with space {b.label!r}"
        )
    return a


class Space:
    """Registry of generators for one model (including its jets and fields).

    A Space owns interning: declaring the same structural key twice with a
    different ghost number is an error, with the same ghost number returns
    the existing generator.
    """

    _counter = itertools.count()

    def __init__(self, label: str = ""):
        self.label = label or f"space{next(Space._counter)}"
        self._gens: dict = {}
        self._diff: dict = {}          # coordinate -> its differential
        self._vdiff: dict = {}         # coordinate -> its vertical differential
        self._coord_of: dict = {}      # differential -> coordinate

    def coordinate(self, name, role, gh, base_index=(), lie_index=None,
                   jet_I=(), jet_J=(), deriv=(), fdeg=0) -> Generator:
        li = -1 if lie_index is None else lie_index
        key = (role, name, base_index, li, jet_I, jet_J, deriv, fdeg)
        g = self._gens.get(key)
        if g is not None:
            if g.gh != gh:
                raise GradedAlgebraError(
                    f"generator {name!r} redeclared with ghost {gh}, was {g.gh}"
                )
            return g
        g = Generator(self, role, name, gh, fdeg, base_index, lie_index, jet_I, jet_J, deriv)
        self._gens[key] = g
        return g

    def differential(self, g: Generator, vertical: bool = False) -> Generator:
        if g.fdeg != 0:
            raise DegreeError(f"{g.name} is already a differential")
        table = self._vdiff if vertical else self._diff
        dg = table.get(g)
        if dg is None:
            role = VDIFF if vertical else g.role
            prefix = "dv" if vertical else "d"
            dg = self.coordinate(prefix + g.name, role, g.gh,
                                 base_index=g.base_index, lie_index=g.lie_index,
                                 jet_I=g.jet_I, jet_J=g.jet_J, deriv=g.deriv, fdeg=1)
            table[g] = dg
            self._coord_of[dg] = g
        return dg

    def coordinate_of(self, dg: Generator) -> Generator:
        try:
            return self._coord_of[dg]
        except KeyError:
            raise DegreeError(f"{dg.name} is not a differential") from None

    def generators(self):
        return list(self._gens.values())


Monomial = tuple  # tuple[tuple[Generator, int], ...] sorted by generator


def mono_mul(m1: Monomial, m2: Monomial):
    """Merge two canonical monomials.  Returns (sign, monomial) or None if an
    odd generator squares to zero."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    out = []
    sign = 1
    i = j = 0
    n1, n2 = len(m1), len(m2)
    # tails[i] = number of odd-generator factors in m1[i:]
    tails = [0] * (n1 + 1)
    for k in range(n1 - 1, -1, -1):
        g, e = m1[k]
        tails[k] = tails[k + 1] + (e if g.parity else 0)
    while i < n1 and j < n2:
        g1, e1 = m1[i]
        g2, e2 = m2[j]
        if g1 is g2 or g1._sort == g2._sort:
            if g1.parity:
                return None
            out.append((g1, e1 + e2))
            i += 1
            j += 1
        elif g1._sort < g2._sort:
            out.append(m1[i])
            i += 1
        else:
            # g2 moves left past everything remaining in m1
            if g2.parity and (tails[i] & 1):
                sign = -sign
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return sign, tuple(out)


def mono_parity(m: Monomial) -> int:
    p = 0
    for g, e in m:
        p += g.parity * e
    return p & 1


def mono_gh(m: Monomial) -> int:
    return sum(g.gh * e for g, e in m)


def mono_fdeg(m: Monomial) -> int:
    return sum(g.fdeg * e for g, e in m)


class Poly:
    """Polynomial in graded generators with Fraction coefficients.

    terms: dict mapping canonical monomial tuples to nonzero Fractions.
    space is None for pure scalars and unifies on every binary operation.
    """

    __slots__ = ("space", "terms")

    def __init__(self, space: Optional[Space], terms: Mapping[Monomial, Fraction]):
        self.space = space
        self.terms = {m: c for m, c in terms.items() if c}

    # constructors -----------------------------------------------------

    @staticmethod
    def scalar(c: Scalar) -> "Poly":
        c = Fraction(c)
        return Poly(None, {(): c} if c else {})

    @staticmethod
    def gen(g: Generator) -> "Poly":
        return Poly(g.space, {((g, 1),): Fraction(1)})

    @staticmethod
    def zero() -> "Poly":
        return Poly(None, {})

    # queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> Optional[int]:
        """Koszul parity if homogeneous, else raises DegreeError."""
        ps = {mono_parity(m) for m in self.terms}
        if not ps:
            return None
        if len(ps) > 1:
            raise DegreeError("polynomial is not parity-homogeneous")
        return ps.pop()

    def fdeg(self) -> Optional[int]:
        ds = {mono_fdeg(m) for m in self.terms}
        if not ds:
            return None
        if len(ds) > 1:
            raise DegreeError("polynomial is not form-degree homogeneous")
        return ds.pop()

    def gh(self) -> Optional[int]:
        gs = {mono_gh(m) for m in self.terms}
        if not gs:
            return None
        if len(gs) > 1:
            raise DegreeError("polynomial is not ghost-homogeneous")
        return gs.pop()

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def coefficient(self, m: Monomial) -> Fraction:
        return self.terms.get(m, Fraction(0))

    def generators(self):
        seen = set()
        for m in self.terms:
            for g, _ in m:
                seen.add(g)
        return seen

    def form_component(self, k: int) -> "Poly":
        return Poly(self.space, {m: c for m, c in self.terms.items() if mono_fdeg(m) == k})

    def gh_component(self, k: int) -> "Poly":
        return Poly(self.space, {m: c for m, c in self.terms.items() if mono_gh(m) == k})

    def filter(self, pred) -> "Poly":
        return Poly(self.space, {m: c for m, c in self.terms.items() if pred(m)})

    def num_terms(self) -> int:
        return len(self.terms)

    # arithmetic -------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = normal_form(other)
        space = _unify(self.space, other.space)
        if len(self.terms) < len(other.terms):
            small, big = self.terms, dict(other.terms)
        else:
            small, big = other.terms, dict(self.terms)
        for m, c in small.items():
            nc = big.get(m, 0) + c
            if nc:
                big[m] = nc
            else:
                big.pop(m, None)
        return Poly(space, big)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.space, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-normal_form(other))

    def __rsub__(self, other) -> "Poly":
        return normal_form(other) + (-self)

    def __mul__(self, other) -> "Poly":
        other = normal_form(other)
        space = _unify(self.space, other.space)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = mono_mul(m1, m2)
                if r is None:
                    continue
                s, m = r
                nc = out.get(m, 0) + s * c1 * c2
                if nc:
                    out[m] = nc
                else:
                    del out[m]
        return Poly(space, out)

    def __rmul__(self, other) -> "Poly":
        # scalars commute with everything
        return self * other

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.terms and set(other.terms) == {()}:
                other = other.constant_term()
            else:
                raise DegreeError("division only by nonzero scalars")
        c = Fraction(other)
        if not c:
            raise ZeroDivisionError("division of a polynomial by zero")
        return Poly(self.space, {m: v / c for m, v in self.terms.items()})

    def __eq__(self, other):
        other = normal_form(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        from .printing import poly_text
        return poly_text(self)

    # substitution -----------------------------------------------------

    def substitute(self, mapping: Mapping[Generator, "Poly"]) -> "Poly":
        """Simultaneous substitution g -> mapping[g].  Images must be
        parity-homogeneous of the generator's parity (or zero)."""
        for g, img in mapping.items():
            img = normal_form(img)
            if not img.is_zero() and img.parity() != g.parity:
                raise DegreeError(f"substitution image for {g.name} has wrong parity")
        out = Poly(self.space if not mapping else None, {})
        cache = {}
        for m, c in self.terms.items():
            term = Poly.scalar(c)
            for g, e in m:
                img = mapping.get(g)
                if img is None:
                    factor = Poly.gen(g)
                    for _ in range(e):
                        term = term * factor
                else:
                    img = normal_form(img)
                    if e == 1:
                        term = term * img
                    else:
                        pw = cache.get((g, e))
                        if pw is None:
                            pw = img
                            for _ in range(e - 1):
                                pw = pw * img
                            cache[(g, e)] = pw
                        term = term * pw
            out = out + term
        if out.space is None:
            out.space = self.space
        return out


def normal_form(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, Generator):
        return Poly.gen(x)
    if isinstance(x, (int, Fraction)):
        return Poly.scalar(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into the graded algebra")


def derive(p: Poly, parity: int, image) -> Poly:
    """Apply a graded derivation of the given parity to p.

    image(g) must return the derivation's value on each generator (Poly or
    anything normal_form accepts, or None for zero).  Left Leibniz rule:
    the sign picked up moving the derivation past a monomial prefix of
    parity q is (-1)^(parity*q).
    """
    space = p.space
    acc = Poly(space, {})
    for m, c in p.terms.items():
        prefix_parity = 0
        for idx, (g, e) in enumerate(m):
            img = image(g)
            if img is not None:
                img = normal_form(img)
                if img.is_zero():
                    img = None
            if img is None:
                prefix_parity ^= (g.parity & 1) * (e & 1)
                continue
            # d(g^e) = e g^(e-1) dg for even g; odd g has e == 1
            sign = -1 if (parity & prefix_parity) else 1
            coeff = Fraction(sign * e) * c
            rest_pref = m[:idx]
            if e > 1:
                rest_pref = rest_pref + ((g, e - 1),)
            rest_suff = m[idx + 1:]
            term = Poly(space, {rest_pref: coeff}) * img
            if rest_suff:
                term = term * Poly(space, {rest_suff: Fraction(1)})
            acc = acc + term
            prefix_parity ^= (g.parity & 1) * (e & 1)
    return acc


# Lie algebra data ----------------------------------------------------


class LieAlgebraData:
    """Structure constants and invariant pairing for an internal Lie algebra.

    f is stored densely as a dim^3 nested tuple f[a][b][c] (value of the
    a-component of [e_b, e_c]); kappa as a dim x dim symmetric matrix.
    Indices here are 0-based.
    """

    def __init__(self, name: str, dim: int, f, kappa, check: bool = True):
        self.name = name
        self.dim = dim
        self.f = tuple(tuple(tuple(Fraction(x) for x in row) for row in plane) for plane in f)
        self.kappa = tuple(tuple(Fraction(x) for x in row) for row in kappa)
        if check:
            self.validate()

    def validate(self):
        d = self.dim
        f, k = self.f, self.kappa
        for a in range(d):
            for b in range(d):
                if k[a][b] != k[b][a]:
                    raise GradedAlgebraError(f"kappa not symmetric in lie {self.name!r}")
                for c in range(d):
                    if f[a][b][c] != -f[a][c][b]:
                        raise GradedAlgebraError(
                            f"structure constants not antisymmetric in lie {self.name!r}"
                        )
        # Jacobi: sum_e f[e][a][b] f[m][e][c] + cyclic(a,b,c) = 0
        for m in range(d):
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        s = Fraction(0)
                        for e in range(d):
                            s += f[e][a][b] * f[m][e][c]
                            s += f[e][b][c] * f[m][e][a]
                            s += f[e][c][a] * f[m][e][b]
                        if s:
                            raise GradedAlgebraError(f"Jacobi identity fails in lie {self.name!r}")
        # invariance: kappa([x,y],z) + kappa(y,[x,z]) = 0
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    s = Fraction(0)
                    for e in range(d):
                        s += k[e][c] * f[e][a][b] + k[b][e] * f[e][a][c]
                    if s:
                        raise GradedAlgebraError(f"kappa not invariant in lie {self.name!r}")

    @staticmethod
    def su2() -> "LieAlgebraData":
        d = 3
        f = [[[0] * d for _ in range(d)] for _ in range(d)]
        for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            f[a][b][c] = 1
            f[a][c][b] = -1
        kappa = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
        return LieAlgebraData("su2", d, f, kappa)

    @staticmethod
    def abelian(dim: int = 1, name: str = "u1") -> "LieAlgebraData":
        f = [[[0] * dim for _ in range(dim)] for _ in range(dim)]
        kappa = [[1 if i == j else 0 for j in range(dim)] for i in range(dim)]
        return LieAlgebraData(name, dim, f, kappa)


class LieValued:
    """Tuple of polynomials indexed by a Lie algebra basis."""

    __slots__ = ("lie", "components")

    def __init__(self, lie: LieAlgebraData, components: Iterable):
        comps = tuple(normal_form(c) for c in components)
        if len(comps) != lie.dim:
            raise GradedAlgebraError("component count does not match lie dimension")
        self.lie = lie
        self.components = comps

    def __getitem__(self, i):
        return self.components[i]

    def __add__(self, other):
        self._check(other)
        return LieValued(self.lie, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return LieValued(self.lie, [a - b for a, b in zip(self.components, other.components)])

    def __rmul__(self, c):
        return LieValued(self.lie, [normal_form(c) * a for a in self.components])

    def _check(self, other):
        if not isinstance(other, LieValued) or other.lie is not self.lie:
            raise GradedAlgebraError("mixing values of different lie algebras")

    def is_zero(self):
        return all(c.is_zero() for c in self.components)


def lie_bracket(x: LieValued, y: LieValued) -> LieValued:
    """[x, y]^a = f^a_{bc} x^b y^c.  Works for any parity of the entries;
    signs come from the graded product of the component polynomials."""
    x._check(y)
    lie = x.lie
    out = []
    for a in range(lie.dim):
        acc = Poly.zero()
        for b in range(lie.dim):
            for c in range(lie.dim):
                coef = lie.f[a][b][c]
                if coef:
                    acc = acc + Fraction(coef) * (x[b] * y[c])
        out.append(acc)
    return LieValued(lie, out)


def trace_pair(x: LieValued, y: LieValued) -> Poly:
    """kappa(x, y) = kappa_{ab} x^a y^b, factors kept in the given order."""
    x._check(y)
    lie = x.lie
    acc = Poly.zero()
    for a in range(lie.dim):
        for b in range(lie.dim):
            k = lie.kappa[a][b]
            if k:
                acc = acc + Fraction(k) * (x[a] * y[b])
    return acc


# background tensors ---------------------------------------------------


def perm_sign(perm) -> int:
    """Sign of a permutation given as a tuple of distinct integers."""
    perm = list(perm)
    n = len(perm)
    sign = 1
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


class BackgroundTensors:
    """Diagonal metric, its inverse, and the Levi-Civita symbol on the base."""

    def __init__(self, diag: Iterable[Scalar]):
        d = tuple(Fraction(x) for x in diag)
        if any(x == 0 for x in d):
            raise GradedAlgebraError("metric diagonal entries must be nonzero")
        self.dim = len(d)
        self.diag = d

    def eta(self, a: int, b: int) -> Fraction:
        return self.diag[a] if a == b else Fraction(0)

    def inveta(self, a: int, b: int) -> Fraction:
        return 1 / self.diag[a] if a == b else Fraction(0)

    def eps(self, indices) -> Fraction:
        indices = tuple(indices)
        if len(indices) != self.dim:
            raise DegreeError("epsilon needs exactly base-dimension indices")
        if len(set(indices)) != self.dim:
            return Fraction(0)
        return Fraction(perm_sign(indices))


def theta_basis(thetas, indices) -> Poly:
    """Density-weighted top form with k indices left open:
    (1/(n-k)!) eps_{i1..ik j1..j(n-k)} theta^{j1}..theta^{j(n-k)}.

    thetas: sequence of the n odd base differentials (theta generators) in
    index order.  With all indices distinct this is a single monomial
    eps(indices + complement) * theta^{complement sorted}.
    """
    n = len(thetas)
    indices = tuple(indices)
    if len(set(indices)) != len(indices):
        return Poly.zero()
    complement = tuple(sorted(set(range(n)) - set(indices)))
    sign = perm_sign(indices + complement)
    mono = tuple((thetas[j], 1) for j in complement)
    space = thetas[0].space if thetas else None
    return Poly(space, {mono: Fraction(sign)})
