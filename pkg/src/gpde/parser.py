"""Model definition language: lexer, Pratt expression parser, evaluator.

A model file is a sequence of declarations:

    base dim = 4;
    metric = diag(-1, 1, 1, 1);
    lie su2 { dim = 3; f[1][2][3] = 1; antisymmetrize; kappa = diag(1, 1, 1); }
    coord C : gh = 1 in su2;
    coord F[a, b] : gh = 0 antisym in su2;
    Q C = -1/2*[C, C] + 1/2*theta[a]*theta[b]*F[a, b];
    Q F[a, b] = [F[a, b], C];
    chi = inveta[a, c]*inveta[b, d]*theta(2; a, b)*Tr(F[c, d]*d(C));
    weak = true;

Expressions support + - * /, unary minus, the bracket [X, Y], Tr(...) with
exactly two Lie-valued factors per term, the de Rham differential d(...),
theta(k; i1..ik) volume cofactors, and eps/eta/inveta (metric required).
Lowercase index variables repeated inside an additive term are summed over
the base range; variables appearing once must be bound by the left side.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import (
    BASE_THETA,
    BASE_X,
    DegreeError,
    Generator,
    GradedAlgebraError,
    LieAlgebraData,
    LieValued,
    Poly,
    lie_bracket,
    theta_basis,
    trace_pair,
)
from .cartan import de_rham
from .model import Model, ModelBuilder

RESERVED = {"x", "theta", "d", "Tr", "eps", "eta", "inveta", "diag",
            "base", "metric", "lie", "coord", "Q", "chi", "weak",
            "include", "model", "true", "false"}

PUNCT = ";:,=+-*/()[]{}"


class Span:
    __slots__ = ("source", "line", "col", "length")

    def __init__(self, source, line, col, length=1):
        self.source = source
        self.line = line
        self.col = col
        self.length = length

    def __str__(self):
        return f"{self.source}:{self.line}:{self.col}"


class Diagnostic:
    def __init__(self, severity: str, message: str, span: Optional[Span],
                 hint: Optional[str] = None):
        self.severity = severity
        self.message = message
        self.span = span
        self.hint = hint

    def __str__(self):
        loc = f"{self.span}: " if self.span else ""
        out = f"{loc}{self.severity}: {self.message}"
        if self.hint:
            out += f" ({self.hint})"
        return out


class DslError(GradedAlgebraError):
    """Raised when parsing produced at least one error diagnostic."""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = diagnostics
        msg = "; ".join(str(d) for d in diagnostics if d.severity == "error")
        super().__init__(msg or "model file is invalid")


class Token:
    __slots__ = ("kind", "value", "span")

    def __init__(self, kind, value, span):
        self.kind = kind
        self.value = value
        self.span = span

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r})"


def tokenize(text: str, source: str) -> List[Token]:
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#" or text[i:i + 2] == "//":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(source, line, col)
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            span.length = j - i
            toks.append(Token("int", int(text[i:j]), span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            span.length = j - i
            toks.append(Token("name", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise DslError([Diagnostic("error", "unterminated string", span)])
            span.length = j + 1 - i
            toks.append(Token("string", text[i + 1:j], span))
            col += j + 1 - i
            i = j + 1
            continue
        if ch in PUNCT:
            toks.append(Token(ch, ch, span))
            i += 1
            col += 1
            continue
        raise DslError([Diagnostic("error", f"unexpected character {ch!r}", span)])
    toks.append(Token("eof", None, Span(source, line, col)))
    return toks


# expression AST: tuples (kind, ..., span) ----------------------------------


class ExprParser:
    """Pratt parser for the expression sublanguage."""

    LBP = {"+": 10, "-": 10, "*": 20, "/": 20}

    def __init__(self, toks: List[Token], pos: int):
        self.toks = toks
        self.pos = pos

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind) -> Token:
        t = self.next()
        if t.kind != kind:
            raise DslError([Diagnostic(
                "error", f"expected {kind!r}, found {t.value!r}", t.span)])
        return t

    def parse(self, rbp: int = 0):
        t = self.next()
        left = self.nud(t)
        while self.LBP.get(self.peek().kind, 0) > rbp:
            t = self.next()
            left = self.led(t, left)
        return left

    def nud(self, t: Token):
        if t.kind == "int":
            return ("num", Fraction(t.value), t.span)
        if t.kind == "(":
            e = self.parse(0)
            self.expect(")")
            return e
        if t.kind == "-":
            return ("neg", self.parse(25), t.span)
        if t.kind == "[":
            left = self.parse(0)
            self.expect(",")
            right = self.parse(0)
            closer = self.next()
            if closer.kind != "]":
                raise DslError([Diagnostic(
                    "error", "the bracket takes exactly two arguments",
                    closer.span)])
            return ("bracket", left, right, t.span)
        if t.kind == "name":
            return self.name_atom(t)
        raise DslError([Diagnostic("error", f"unexpected token {t.value!r}", t.span)])

    def led(self, t: Token, left):
        ops = {"+": "add", "-": "sub", "*": "mul", "/": "div"}
        right = self.parse(self.LBP[t.kind])
        return (ops[t.kind], left, right, t.span)

    def name_atom(self, t: Token):
        name = t.value
        if name in ("d", "Tr") and self.peek().kind == "(":
            self.next()
            e = self.parse(0)
            self.expect(")")
            return ("d" if name == "d" else "tr", e, t.span)
        if name == "theta" and self.peek().kind == "(":
            self.next()
            k = self.expect("int").value
            self.expect(";")
            idx = []
            if self.peek().kind != ")":
                idx.append(self.index_atom())
                while self.peek().kind == ",":
                    self.next()
                    idx.append(self.index_atom())
            self.expect(")")
            if len(idx) != k:
                raise DslError([Diagnostic(
                    "error", f"theta({k}; ...) takes {k} indices, got {len(idx)}",
                    t.span)])
            return ("theta_basis", idx, t.span)
        args = []
        lie_sel = None
        if self.peek().kind == "[":
            self.next()
            if self.peek().kind != "]":
                args.append(self.index_atom())
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.index_atom())
            self.expect("]")
        if self.peek().kind == "{":
            self.next()
            lie_sel = self.expect("int").value
            self.expect("}")
        return ("ref", name, args, lie_sel, t.span)

    def index_atom(self):
        t = self.next()
        if t.kind == "int":
            return ("int", t.value, t.span)
        if t.kind == "name":
            return ("var", t.value, t.span)
        raise DslError([Diagnostic("error", "expected an index", t.span)])


def _collect_vars(node, counts: Dict[str, int]):
    kind = node[0]
    if kind == "ref":
        for a in node[2]:
            if a[0] == "var":
                counts[a[1]] = counts.get(a[1], 0) + 1
    elif kind == "theta_basis":
        for a in node[1]:
            if a[0] == "var":
                counts[a[1]] = counts.get(a[1], 0) + 1
    elif kind in ("neg", "d", "tr"):
        _collect_vars(node[1], counts)
    elif kind in ("add", "sub", "mul", "div", "bracket"):
        _collect_vars(node[1], counts)
        _collect_vars(node[2], counts)


def _distribute(node) -> List[Tuple[Fraction, List]]:
    """Expand an expression into (coefficient, factor list) terms."""
    kind = node[0]
    if kind == "num":
        return [(node[1], [])]
    if kind == "neg":
        return [(-c, fs) for c, fs in _distribute(node[1])]
    if kind == "add":
        return _distribute(node[1]) + _distribute(node[2])
    if kind == "sub":
        return _distribute(node[1]) + [(-c, fs) for c, fs in _distribute(node[2])]
    if kind == "mul":
        out = []
        for c1, f1 in _distribute(node[1]):
            for c2, f2 in _distribute(node[2]):
                out.append((c1 * c2, f1 + f2))
        return out
    if kind == "div":
        denom = _distribute(node[2])
        if len(denom) != 1 or denom[0][1]:
            raise DslError([Diagnostic(
                "error", "division is only defined by numeric constants",
                node[3])])
        c2 = denom[0][0]
        if c2 == 0:
            raise DslError([Diagnostic("error", "division by zero", node[3])])
        return [(c / c2, fs) for c, fs in _distribute(node[1])]
    return [(Fraction(1), [node])]


class Evaluator:
    """Turns expression trees into Poly / LieValued values over a builder."""

    def __init__(self, builder: ModelBuilder, diags: List[Diagnostic]):
        self.b = builder
        self.diags = diags

    def fail(self, message, span, hint=None):
        raise DslError([Diagnostic("error", message, span, hint)])

    def statement_value(self, node, bound: Dict[str, int]):
        """Evaluate with Einstein summation over repeated free variables."""
        total = None
        for coeff, factors in _distribute(node):
            counts: Dict[str, int] = {}
            for f in factors:
                _collect_vars(f, counts)
            dummies = []
            for v, k in sorted(counts.items()):
                if v in bound:
                    continue
                if k == 1:
                    span = node[-1] if isinstance(node[-1], Span) else None
                    self.fail(f"index variable {v!r} appears once and is not "
                              f"bound by the left-hand side", span,
                              hint="repeated variables are summed")
                dummies.append(v)
            total = self._sum_assignments(coeff, factors, dict(bound),
                                          dummies, total, in_tr=False)
        return total if total is not None else Poly.zero()

    def _sum_assignments(self, coeff, factors, env, dummies, total, in_tr):
        if not dummies:
            v = self.eval_term(coeff, factors, env, in_tr)
            return v if total is None else self._add(total, v)
        head, rest = dummies[0], dummies[1:]
        for a in self.b.base_indices:
            env[head] = a
            total = self._sum_assignments(coeff, factors, env, rest, total, in_tr)
        del env[head]
        return total

    def _add(self, a, b):
        if isinstance(a, LieValued) != isinstance(b, LieValued):
            if isinstance(a, Poly) and a.is_zero():
                return b
            if isinstance(b, Poly) and b.is_zero():
                return a
            self.fail("cannot add a scalar and a lie-algebra valued expression", None)
        return a + b

    def eval_term(self, coeff, factors, env, in_tr):
        value = Poly.scalar(coeff)
        paired = 0
        for f in factors:
            v = self.eval_factor(f, env)
            value, paired = self._mul(value, v, in_tr, paired, f[-1])
        if in_tr and (paired != 1 or isinstance(value, LieValued)):
            self.fail("Tr needs exactly two lie-algebra valued factors in "
                      "each term", factors[-1][-1] if factors else None)
        return value

    def _mul(self, a, b, in_tr, paired, span):
        a_lie = isinstance(a, LieValued)
        b_lie = isinstance(b, LieValued)
        if not a_lie and not b_lie:
            return a * b, paired
        if not a_lie:
            return LieValued(b.lie, [a * c for c in b.components]), paired
        if not b_lie:
            return LieValued(a.lie, [c * b for c in a.components]), paired
        if in_tr and paired == 0:
            return trace_pair(a, b), 1
        self.fail("product of two lie-algebra valued expressions; use Tr(...) "
                  "or the bracket [.,.]", span)

    def eval_simple(self, node, env):
        """Recursive evaluation once every index variable is bound."""
        kind = node[0]
        if kind == "num":
            return Poly.scalar(node[1])
        if kind == "neg":
            v = self.eval_simple(node[1], env)
            return Fraction(-1) * v if isinstance(v, Poly) else \
                LieValued(v.lie, [Fraction(-1) * c for c in v.components])
        if kind in ("add", "sub"):
            a = self.eval_simple(node[1], env)
            bb = self.eval_simple(node[2], env)
            if kind == "sub":
                bb = Fraction(-1) * bb if isinstance(bb, Poly) else \
                    LieValued(bb.lie, [Fraction(-1) * c for c in bb.components])
            return self._add(a, bb)
        if kind == "mul":
            a = self.eval_simple(node[1], env)
            bb = self.eval_simple(node[2], env)
            v, _ = self._mul(a, bb, False, 0, node[3])
            return v
        if kind == "div":
            a = self.eval_simple(node[1], env)
            bb = self.eval_simple(node[2], env)
            num = self._as_number(bb)
            if num is None:
                self.fail("division is only defined by numeric constants", node[3])
            if isinstance(a, LieValued):
                return LieValued(a.lie, [c / num for c in a.components])
            return a / num
        return self.eval_factor(node, env)

    @staticmethod
    def _as_number(v) -> Optional[Fraction]:
        if not isinstance(v, Poly):
            return None
        if v.is_zero():
            return Fraction(0)
        if len(v.terms) == 1 and () in v.terms:
            return v.terms[()]
        return None

    def eval_factor(self, node, env):
        kind = node[0]
        if kind == "bracket":
            a = self.eval_simple(node[1], env)
            bb = self.eval_simple(node[2], env)
            if not isinstance(a, LieValued) or not isinstance(bb, LieValued):
                self.fail("the bracket needs lie-algebra valued arguments", node[3])
            return lie_bracket(a, bb)
        if kind == "d":
            v = self.eval_simple(node[1], env)
            if isinstance(v, LieValued):
                return LieValued(v.lie, [de_rham(c) for c in v.components])
            return de_rham(v)
        if kind == "tr":
            total = None
            for coeff, factors in _distribute(node[1]):
                v = self.eval_term(coeff, factors, env, in_tr=True)
                total = v if total is None else total + v
            return total if total is not None else Poly.zero()
        if kind == "theta_basis":
            idx = tuple(self.index_value(a, env) for a in node[1])
            ths = [self.b.theta[a] for a in self.b.base_indices]
            return theta_basis(ths, idx)
        if kind == "ref":
            return self.eval_ref(node, env)
        if kind in ("num", "neg", "add", "sub", "mul", "div"):
            return self.eval_simple(node, env)
        self.fail(f"cannot evaluate {kind}", node[-1])

    def index_value(self, atom, env) -> int:
        if atom[0] == "int":
            a = atom[1]
        else:
            if atom[1] not in env:
                self.fail(f"unbound index variable {atom[1]!r}", atom[2])
            a = env[atom[1]]
        if a not in self.b.base_indices:
            self.fail(f"index {a} outside the base range", atom[2])
        return a

    def eval_ref(self, node, env):
        _, name, args, lie_sel, span = node
        b = self.b
        if name in ("x", "theta"):
            if len(args) != 1 or lie_sel is not None:
                self.fail(f"{name} takes one base index", span)
            a = self.index_value(args[0], env)
            return Poly.gen(b.x[a] if name == "x" else b.theta[a])
        if name in ("eta", "inveta", "eps"):
            if b.tensors is None:
                self.fail(f"{name} requires a metric declaration", span)
            idx = [self.index_value(a, env) for a in args]
            if name == "eps":
                return Poly.scalar(b.tensors.eps(idx))
            if len(idx) != 2:
                self.fail(f"{name} takes two indices", span)
            fn = b.tensors.eta if name == "eta" else b.tensors.inveta
            return Poly.scalar(fn(idx[0], idx[1]))
        fam = b.fibers.get(name)
        if fam is None:
            self.fail(f"undeclared symbol {name!r}", span)
        if len(args) != fam.slots:
            self.fail(f"{name!r} takes {fam.slots} base indices, got {len(args)}", span)
        idx = tuple(self.index_value(a, env) for a in args)
        if lie_sel is not None:
            if fam.lie is None:
                self.fail(f"{name!r} carries no lie algebra", span)
            if not 1 <= lie_sel <= fam.lie.dim:
                self.fail(f"lie component {lie_sel} outside 1..{fam.lie.dim}", span)
            sign, g = fam.resolve(idx, lie_sel - 1)
            return Poly.zero() if sign == 0 else Fraction(sign) * Poly.gen(g)
        if fam.lie is None:
            sign, g = fam.resolve(idx, None)
            return Poly.zero() if sign == 0 else Fraction(sign) * Poly.gen(g)
        comps = []
        for li in range(fam.lie.dim):
            sign, g = fam.resolve(idx, li)
            comps.append(Poly.zero() if sign == 0 else Fraction(sign) * Poly.gen(g))
        return LieValued(fam.lie, comps)


class ModelParser:
    """Statement-level parser driving a ModelBuilder."""

    def __init__(self, text: str, source: str, name: str):
        self.toks = tokenize(text, source)
        self.pos = 0
        self.name = name
        self.builder: Optional[ModelBuilder] = None
        self.diags: List[Diagnostic] = []
        self.evaluator: Optional[Evaluator] = None
        self._chi_seen = False
        self._weak = False
        self._q_values: Dict[Generator, Tuple[Poly, Span]] = {}

    # token helpers --------------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what=None) -> Token:
        t = self.next()
        if t.kind != kind:
            raise DslError([Diagnostic(
                "error", f"expected {what or kind!r}, found "
                f"{t.value if t.value is not None else 'end of file'!r}", t.span)])
        return t

    def expect_name(self, word) -> Token:
        t = self.next()
        if t.kind != "name" or t.value != word:
            raise DslError([Diagnostic(
                "error", f"expected {word!r}, found {t.value!r}", t.span)])
        return t

    def expect_int(self) -> int:
        neg = False
        if self.peek().kind == "-":
            self.next()
            neg = True
        t = self.expect("int")
        return -t.value if neg else t.value

    def expect_rational(self) -> Fraction:
        v = Fraction(self.expect_int())
        if self.peek().kind == "/":
            self.next()
            denom = self.expect_int()
            v /= denom
        return v

    # statements -----------------------------------------------------------

    def need_builder(self, span) -> ModelBuilder:
        if self.builder is None:
            raise DslError([Diagnostic(
                "error", "the base dimension must be declared first", span,
                hint="start with: base dim = <n>;")])
        return self.builder

    def parse(self) -> Model:
        while self.peek().kind != "eof":
            try:
                self.statement()
            except DslError as e:
                self.diags.extend(e.diagnostics)
                self.skip_statement()
        errors = [d for d in self.diags if d.severity == "error"]
        if errors:
            raise DslError(self.diags)
        b = self.builder
        if b is None:
            raise DslError([Diagnostic(
                "error", "empty model: no base dimension declared", None)])
        for g, (value, span) in self._q_values.items():
            try:
                b.q_rule(g, value)
            except (DegreeError, GradedAlgebraError) as e:
                self.diags.append(Diagnostic("error", str(e), span))
        if self._chi_seen is not False:
            b.chi(self._chi_seen)
        b.weak(self._weak)
        try:
            model = b.build()
        except (DegreeError, GradedAlgebraError) as e:
            self.diags.append(Diagnostic("error", str(e), None))
            raise DslError(self.diags)
        errors = [d for d in self.diags if d.severity == "error"]
        if errors:
            raise DslError(self.diags)
        return model

    def skip_statement(self):
        depth = 0
        while True:
            t = self.peek()
            if t.kind == "eof":
                return
            self.next()
            if t.kind == "{":
                depth += 1
            elif t.kind == "}":
                if depth == 0:
                    return
                depth -= 1
            elif t.kind == ";" and depth == 0:
                return

    def statement(self):
        t = self.peek()
        if t.kind != "name":
            raise DslError([Diagnostic(
                "error", f"expected a declaration, found {t.value!r}", t.span)])
        kw = t.value
        if kw == "base":
            self.stmt_base()
        elif kw == "metric":
            self.stmt_metric()
        elif kw == "lie":
            self.stmt_lie()
        elif kw == "coord":
            self.stmt_coord()
        elif kw == "Q":
            self.stmt_q()
        elif kw == "chi":
            self.stmt_chi()
        elif kw == "weak":
            self.stmt_weak()
        elif kw == "model":
            self.next()
            self.name = self.expect("name").value
            self.expect(";")
        else:
            raise DslError([Diagnostic(
                "error", f"unknown declaration {kw!r}", t.span)])

    def stmt_base(self):
        t = self.next()
        self.expect_name("dim")
        self.expect("=")
        n = self.expect_int()
        self.expect(";")
        if self.builder is not None:
            raise DslError([Diagnostic("error", "base dimension declared twice", t.span)])
        if n < 0:
            raise DslError([Diagnostic("error", "base dimension must be >= 0", t.span)])
        self.builder = ModelBuilder(self.name, n)
        self.evaluator = Evaluator(self.builder, self.diags)

    def parse_diag(self) -> List[Fraction]:
        self.expect_name("diag")
        self.expect("(")
        vals = [self.expect_rational()]
        while self.peek().kind == ",":
            self.next()
            vals.append(self.expect_rational())
        self.expect(")")
        return vals

    def stmt_metric(self):
        t = self.next()
        b = self.need_builder(t.span)
        self.expect("=")
        vals = self.parse_diag()
        self.expect(";")
        try:
            b.metric(vals)
        except GradedAlgebraError as e:
            raise DslError([Diagnostic("error", str(e), t.span)])

    def stmt_lie(self):
        t = self.next()
        b = self.need_builder(t.span)
        name_tok = self.expect("name")
        self.expect("{")
        dim = None
        entries: List[Tuple[int, int, int, Fraction, Span]] = []
        kappa_diag: Optional[List[Fraction]] = None
        antisymmetrize = False
        while self.peek().kind != "}":
            st = self.expect("name")
            if st.value == "dim":
                self.expect("=")
                dim = self.expect_int()
                self.expect(";")
            elif st.value == "f":
                idx = []
                for _ in range(3):
                    self.expect("[")
                    idx.append(self.expect_int())
                    self.expect("]")
                self.expect("=")
                val = self.expect_rational()
                self.expect(";")
                entries.append((idx[0], idx[1], idx[2], val, st.span))
            elif st.value == "kappa":
                self.expect("=")
                kappa_diag = self.parse_diag()
                self.expect(";")
            elif st.value == "antisymmetrize":
                antisymmetrize = True
                self.expect(";")
            else:
                raise DslError([Diagnostic(
                    "error", f"unknown lie-block entry {st.value!r}", st.span)])
        self.expect("}")
        if dim is None:
            raise DslError([Diagnostic(
                "error", f"lie {name_tok.value!r} does not declare its dimension",
                name_tok.span)])
        f = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for a, bb, c, val, span in entries:
            for k in (a, bb, c):
                if not 1 <= k <= dim:
                    raise DslError([Diagnostic(
                        "error", f"lie index {k} outside 1..{dim}", span)])
            if antisymmetrize:
                import itertools as _it

                base = (a - 1, bb - 1, c - 1)
                if len(set(base)) != 3:
                    raise DslError([Diagnostic(
                        "error", "antisymmetrize needs distinct indices", span)])
                for perm in _it.permutations(range(3)):
                    sgn = 1
                    p = [base[k] for k in perm]
                    for i in range(3):
                        for j in range(i + 1, 3):
                            if perm[i] > perm[j]:
                                sgn = -sgn
                    if f[p[0]][p[1]][p[2]] not in (Fraction(0), sgn * val):
                        raise DslError([Diagnostic(
                            "error", "conflicting structure constants", span)])
                    f[p[0]][p[1]][p[2]] = sgn * val
            else:
                f[a - 1][bb - 1][c - 1] = val
        if kappa_diag is None:
            kappa_diag = [Fraction(1)] * dim
        if len(kappa_diag) != dim:
            raise DslError([Diagnostic(
                "error", "kappa diagonal length does not match dim", name_tok.span)])
        kappa = [[kappa_diag[i] if i == j else Fraction(0) for j in range(dim)]
                 for i in range(dim)]
        try:
            data = LieAlgebraData(name_tok.value, dim, f, kappa)
            b.lie(data)
        except GradedAlgebraError as e:
            hint = None
            if "antisymmetric" in str(e) and not antisymmetrize:
                hint = "add 'antisymmetrize;' to complete the given entries"
            raise DslError([Diagnostic("error", str(e), name_tok.span, hint)])

    def stmt_coord(self):
        t = self.next()
        b = self.need_builder(t.span)
        name_tok = self.expect("name")
        name = name_tok.value
        if name in RESERVED:
            raise DslError([Diagnostic(
                "error", f"{name!r} is reserved and cannot name a coordinate",
                name_tok.span)])
        slots = []
        if self.peek().kind == "[":
            self.next()
            if self.peek().kind != "]":
                slots.append(self.expect("name").value)
                while self.peek().kind == ",":
                    self.next()
                    slots.append(self.expect("name").value)
            self.expect("]")
            if len(set(slots)) != len(slots):
                raise DslError([Diagnostic(
                    "error", "index slots must use distinct variables",
                    name_tok.span)])
        self.expect(":")
        self.expect_name("gh")
        self.expect("=")
        gh = self.expect_int()
        antisym = False
        lie = None
        while self.peek().kind == "name":
            attr = self.next()
            if attr.value == "antisym":
                antisym = True
            elif attr.value == "in":
                lname = self.expect("name")
                lie = b.lies.get(lname.value)
                if lie is None:
                    raise DslError([Diagnostic(
                        "error", f"undeclared lie algebra {lname.value!r}",
                        lname.span)])
            else:
                raise DslError([Diagnostic(
                    "error", f"unknown coordinate attribute {attr.value!r}",
                    attr.span)])
        self.expect(";")
        try:
            b.fiber(name, gh, slots=len(slots), antisym=antisym, lie=lie)
        except GradedAlgebraError as e:
            raise DslError([Diagnostic("error", str(e), name_tok.span)])

    def parse_target(self):
        name_tok = self.expect("name")
        args = []
        lie_sel = None
        if self.peek().kind == "[":
            self.next()
            if self.peek().kind != "]":
                args.append(self.target_index())
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.target_index())
            self.expect("]")
        if self.peek().kind == "{":
            self.next()
            lie_sel = self.expect("int").value
            self.expect("}")
        return name_tok, args, lie_sel

    def target_index(self):
        t = self.next()
        if t.kind == "int":
            return ("int", t.value, t.span)
        if t.kind == "name":
            return ("var", t.value, t.span)
        raise DslError([Diagnostic("error", "expected an index", t.span)])

    def stmt_q(self):
        t = self.next()
        b = self.need_builder(t.span)
        name_tok, args, lie_sel = self.parse_target()
        self.expect("=")
        ep = ExprParser(self.toks, self.pos)
        rhs = ep.parse(0)
        self.pos = ep.pos
        self.expect(";")
        ev = self.evaluator
        name = name_tok.value
        free = [a[1] for a in args if a[0] == "var"]
        if len(set(free)) != len(free):
            raise DslError([Diagnostic(
                "error", "left-hand index variables must be distinct",
                name_tok.span)])

        assignments = [{}]
        for v in free:
            assignments = [dict(env, **{v: a}) for env in assignments
                           for a in b.base_indices]
        for env in assignments:
            if name in ("x", "theta"):
                if len(args) != 1 or lie_sel is not None:
                    raise DslError([Diagnostic(
                        "error", f"{name} takes one base index", name_tok.span)])
                a = ev.index_value(args[0], env)
                g = b.x[a] if name == "x" else b.theta[a]
                value = ev.statement_value(rhs, env)
                if isinstance(value, LieValued):
                    raise DslError([Diagnostic(
                        "error", "base coordinates take scalar Q-rules",
                        name_tok.span)])
                canonical = Poly.gen(b.theta[a]) if name == "x" else Poly.zero()
                if value == canonical:
                    continue
                self.diags.append(Diagnostic(
                    "warning", f"Q-rule for {name}[{a}] overrides the canonical "
                    f"base differential", name_tok.span))
                self.store_q(g, value, name_tok.span)
                continue
            fam = b.fibers.get(name)
            if fam is None:
                raise DslError([Diagnostic(
                    "error", f"undeclared coordinate {name!r}", name_tok.span)])
            if len(args) != fam.slots:
                raise DslError([Diagnostic(
                    "error", f"{name!r} takes {fam.slots} base indices",
                    name_tok.span)])
            idx = tuple(ev.index_value(a, env) for a in args)
            value = ev.statement_value(rhs, env)
            if lie_sel is not None:
                if fam.lie is None:
                    raise DslError([Diagnostic(
                        "error", f"{name!r} carries no lie algebra", name_tok.span)])
                sign, g = fam.resolve(idx, lie_sel - 1)
                if isinstance(value, LieValued):
                    raise DslError([Diagnostic(
                        "error", "a single lie component takes a scalar rule",
                        name_tok.span)])
                self.assign_component(sign, g, value, name_tok.span)
                continue
            if fam.lie is not None:
                if isinstance(value, Poly):
                    if not value.is_zero():
                        raise DslError([Diagnostic(
                            "error", f"Q-rule for {name!r} must be "
                            f"{fam.lie.name}-valued", name_tok.span)])
                    value = LieValued(fam.lie, [Poly.zero()] * fam.lie.dim)
                for li in range(fam.lie.dim):
                    sign, g = fam.resolve(idx, li)
                    self.assign_component(sign, g, value.components[li],
                                          name_tok.span)
            else:
                if isinstance(value, LieValued):
                    raise DslError([Diagnostic(
                        "error", f"{name!r} carries no lie algebra", name_tok.span)])
                sign, g = fam.resolve(idx, None)
                self.assign_component(sign, g, value, name_tok.span)

    def assign_component(self, sign, g, value: Poly, span):
        if sign == 0:
            if not value.is_zero():
                raise DslError([Diagnostic(
                    "error", "nonzero Q-rule on a vanishing antisymmetric "
                    "component", span)])
            return
        self.store_q(g, Fraction(sign) * value, span)

    def store_q(self, g: Generator, value: Poly, span):
        prev = self._q_values.get(g)
        if prev is not None:
            if prev[0] == value:
                return
            raise DslError([Diagnostic(
                "error", f"conflicting Q-rules for the same coordinate", span)])
        self._q_values[g] = (value, span)

    def stmt_chi(self):
        t = self.next()
        self.need_builder(t.span)
        self.expect("=")
        ep = ExprParser(self.toks, self.pos)
        rhs = ep.parse(0)
        self.pos = ep.pos
        self.expect(";")
        value = self.evaluator.statement_value(rhs, {})
        if isinstance(value, LieValued):
            raise DslError([Diagnostic(
                "error", "chi must be a scalar expression; wrap lie factors "
                "in Tr(...)", t.span)])
        if self._chi_seen is not False:
            raise DslError([Diagnostic("error", "chi declared twice", t.span)])
        self._chi_seen = value

    def stmt_weak(self):
        t = self.next()
        self.expect("=")
        v = self.expect("name")
        if v.value not in ("true", "false"):
            raise DslError([Diagnostic("error", "weak takes true or false", v.span)])
        self.expect(";")
        self._weak = v.value == "true"


def parse_with_diagnostics(text: str, name: str = "model",
                           source: str = "<string>"):
    """Returns (model_or_None, diagnostics)."""
    p = ModelParser(text, source, name)
    try:
        model = p.parse()
        return model, p.diags
    except DslError as e:
        diags = p.diags if e.diagnostics is p.diags else p.diags + [
            d for d in e.diagnostics if d not in p.diags]
        return None, diags


def parse_model(text: str, name: str = "model", source: str = "<string>") -> Model:
    model, diags = parse_with_diagnostics(text, name, source)
    if model is None:
        raise DslError(diags)
    return model


def load_model(path) -> Model:
    import os

    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stem = os.path.splitext(os.path.basename(path))[0]
    return parse_model(text, name=stem, source=str(path))


def load_builtin(name: str) -> Model:
    """Load one of the packaged model files by stem name."""
    from importlib import resources

    ref = resources.files(__package__).joinpath("models").joinpath(f"{name}.gpde")
    text = ref.read_text(encoding="utf-8")
    return parse_model(text, name=name, source=f"models/{name}.gpde")


def builtin_names() -> List[str]:
    from importlib import resources

    out = []
    for entry in resources.files(__package__).joinpath("models").iterdir():
        if entry.name.endswith(".gpde"):
            out.append(entry.name[:-5])
    return sorted(out)


# canonical printing ---------------------------------------------------------


def model_to_source(m: Model) -> str:
    """Canonical text for a model; parsing it back gives an equal model."""
    from .printing import poly_dsl

    if m.base_indices != tuple(range(m.n)):
        raise GradedAlgebraError(
            "only models over the full base have a surface-syntax form")
    lines = [f"model {m.name};" if m.name.isidentifier() else "model m;",
             f"base dim = {m.n};"]
    if m.tensors is not None:
        vals = ", ".join(str(v) for v in m.tensors.diag)
        lines.append(f"metric = diag({vals});")
    for lie in m.lies.values():
        lines.append(f"lie {lie.name} {{")
        lines.append(f"  dim = {lie.dim};")
        for a in range(lie.dim):
            for bb in range(lie.dim):
                for c in range(lie.dim):
                    if lie.f[a][bb][c]:
                        lines.append(
                            f"  f[{a + 1}][{bb + 1}][{c + 1}] = {lie.f[a][bb][c]};")
        kd = ", ".join(str(lie.kappa[i][i]) for i in range(lie.dim))
        lines.append(f"  kappa = diag({kd});")
        lines.append("}")
    letters = "abcdefgh"
    for fam in m.fibers.values():
        head = fam.name
        if fam.slots:
            head += "[" + ", ".join(letters[:fam.slots]) + "]"
        attrs = f"gh = {fam.gh}"
        if fam.antisym:
            attrs += " antisym"
        if fam.lie is not None:
            attrs += f" in {fam.lie.name}"
        lines.append(f"coord {head} : {attrs};")
    for fam in m.fibers.values():
        for g in fam.coords():
            value = m.q.coefficient(g)
            if value.is_zero():
                continue
            head = g.name
            if g.base_index:
                head += "[" + ", ".join(str(i) for i in g.base_index) + "]"
            if g.lie_index is not None and g.lie_index >= 0:
                head += f"{{{g.lie_index + 1}}}"
            lines.append(f"Q {head} = {poly_dsl(value)};")
    if m.chi is not None:
        lines.append(f"chi = {poly_dsl(m.chi)};")
    if m.weak:
        lines.append("weak = true;")
    return "\n".join(lines) + "\n"
