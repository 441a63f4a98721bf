"""Exact arithmetic over Q: sparse polynomials, reduced rational functions,
fraction-free linear algebra and resultants.

Polynomial storage and the low-level multiplication/gcd kernels come from
python-flint (``fmpq_mpoly``).  Everything visible from here on (canonical
normalisation, display order, total derivatives on jet variables, Bareiss
elimination) is implemented in this module.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd as igcd, lcm as ilcm
from typing import Iterable, Mapping, Sequence

import flint


class ContextError(ValueError):
    """Operands live in different variable contexts, or a name is unknown."""


class JetOrderError(ContextError):
    """A total derivative needs a jet variable the context does not carry."""


class PoleError(ZeroDivisionError):
    """A denominator vanishes at the requested point."""


class DegenerateInputError(ValueError):
    pass


class NonUniqueSolutionError(ValueError):
    pass


class NoSolutionError(ValueError):
    pass


# flag for the M*x == rhs self-check after every solve
DEBUG_CHECKS = False


def to_fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, int):
        return flint.fmpq(c)
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, flint.fmpz):
        return flint.fmpq(c)
    raise TypeError(f"not an exact rational: {c!r}")


def to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    c = to_fmpq(c)
    return Fraction(int(c.p), int(c.q))


def format_rational(c) -> str:
    c = to_fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def jet_name(func: str, alpha: Sequence[int]) -> str:
    if not any(alpha):
        return func
    return func + "_" + "_".join(str(a) for a in alpha)


class Ring:
    """A variable context.

    ``coords`` are the base coordinates that total derivatives act along;
    ``jets`` maps extra variable names to ``(function, multi-index)`` so that
    a symbolic coefficient a(x) and its derivatives can live in the same
    polynomial ring.
    """

    _cache: dict = {}

    def __new__(cls, names, coords=None, jets=None):
        names = tuple(names)
        coords = tuple(names if coords is None else coords)
        jets = tuple(sorted((jets or {}).items()))
        key = (names, coords, jets)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        if len(set(names)) != len(names):
            raise ContextError(f"repeated variable names in {names}")
        for c in coords:
            if c not in names:
                raise ContextError(f"coordinate {c} not among variables")
        self = super().__new__(cls)
        self.names = names
        self.coords = coords
        self.jets = dict(jets)
        self._index = {v: i for i, v in enumerate(names)}
        self._jet_lookup = {(f, a): v for v, (f, a) in self.jets.items()}
        self._ctx = flint.fmpq_mpoly_ctx.get(names, "deglex") if names else None
        cls._cache[key] = self
        return self

    def __getnewargs__(self):
        return (self.names, self.coords, self.jets)

    def __repr__(self):
        return f"Ring({', '.join(self.names)})"

    @property
    def nvars(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ContextError(f"unknown variable {name!r} in {self}") from None

    def _raw_zero(self):
        return self._ctx.from_dict({}) if self._ctx else flint.fmpq(0)

    def var(self, name: str) -> "MultiPoly":
        self.index(name)
        return MultiPoly(self, self._ctx.gen(self._index[name]))

    def gens(self):
        return tuple(self.var(v) for v in self.names)

    def coord_vars(self):
        return tuple(self.var(v) for v in self.coords)

    def const(self, c) -> "MultiPoly":
        return MultiPoly(self, self._ctx.constant(to_fmpq(c)))

    def zero(self):
        return self.const(0)

    def one(self):
        return self.const(1)

    def from_terms(self, terms: Mapping[tuple, object]) -> "MultiPoly":
        data = {}
        for e, c in terms.items():
            if len(e) != self.nvars:
                raise ContextError(f"exponent {e} has wrong length for {self}")
            c = to_fmpq(c)
            if c != 0:
                data[tuple(e)] = c
        return MultiPoly(self, self._ctx.from_dict(data))

    def jet(self, func: str, alpha: Sequence[int]) -> "MultiPoly":
        name = self._jet_lookup.get((func, tuple(alpha)))
        if name is None:
            raise JetOrderError(f"jet {func}{tuple(alpha)} not in {self}")
        return self.var(name)

    def embed(self, p):
        """Move a MultiPoly/RatFunc from a smaller context into this one by name."""
        if isinstance(p, RatFunc):
            return RatFunc(self.embed(p.num), self.embed(p.den), _reduced=True)._fix_sign()
        if p.ring is self:
            return p
        if p.ring.names == self.names:
            return MultiPoly(self, p._p)
        pos = [self._index.get(v) for v in p.ring.names]
        data = {}
        for e, c in p._p.to_dict().items():
            ne = [0] * self.nvars
            for v, i, k in zip(p.ring.names, pos, e):
                if k == 0:
                    continue
                if i is None:
                    raise ContextError(f"variable {v} is not in {self}")
                ne[i] = k
            data[tuple(ne)] = c
        return MultiPoly(self, self._ctx.from_dict(data))


def function_ring(coords: Sequence[str], functions: Mapping[str, int] = None,
                  extra: Sequence[str] = ()) -> Ring:
    """Ring of coordinates plus jets of named functions up to the given order."""
    n = len(coords)
    jets = {}
    names = list(coords) + list(extra)
    for f, order in (functions or {}).items():
        for alpha in multi_indices_upto(n, order):
            v = jet_name(f, alpha)
            jets[v] = (f, alpha)
            names.append(v)
    return Ring(names, coords, jets)


def multi_indices(n: int, d: int):
    """All exponent vectors of length n and total degree d, graded-lex descending."""
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in multi_indices(n - 1, d - first):
            out.append((first,) + rest)
    return out


def multi_indices_upto(n: int, d: int):
    out = []
    for k in range(d + 1):
        out.extend(multi_indices(n, k))
    return out


def _coerce_raw(ring: Ring, x):
    if isinstance(x, MultiPoly):
        if x.ring is not ring:
            raise ContextError(f"context mismatch: {x.ring} vs {ring}")
        return x._p
    return ring._ctx.constant(to_fmpq(x))


def _term_key(e):
    return (sum(e), e)


class MultiPoly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ring", "_p", "_hash")

    def __init__(self, ring: Ring, raw):
        self.ring = ring
        self._p = raw
        self._hash = None

    # arithmetic
    def __add__(self, o):
        if isinstance(o, RatFunc):
            return NotImplemented
        return MultiPoly(self.ring, self._p + _coerce_raw(self.ring, o))

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, RatFunc):
            return NotImplemented
        return MultiPoly(self.ring, self._p - _coerce_raw(self.ring, o))

    def __rsub__(self, o):
        return MultiPoly(self.ring, _coerce_raw(self.ring, o) - self._p)

    def __mul__(self, o):
        if isinstance(o, RatFunc):
            return NotImplemented
        return MultiPoly(self.ring, self._p * _coerce_raw(self.ring, o))

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(self.ring, -self._p)

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc(self) ** k
        return MultiPoly(self.ring, self._p ** k)

    def __truediv__(self, o):
        return RatFunc(self) / o

    def __rtruediv__(self, o):
        return RatFunc(self.ring.const(o)) / self

    def exact_div(self, o: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self.ring, self._p / _coerce_raw(self.ring, o))

    def divides(self, o: "MultiPoly") -> bool:
        q, r = divmod(o._p, self._p)
        return r.is_zero()

    def __eq__(self, o):
        if isinstance(o, RatFunc):
            return o == self
        if isinstance(o, MultiPoly):
            return self.ring is o.ring and self._p == o._p
        try:
            return self._p == self.ring._ctx.constant(to_fmpq(o))
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring.names, tuple(self.terms())))
        return self._hash

    # queries
    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return to_fraction(self._p.coefficient(0)) if not self.is_zero() else Fraction(0)

    def terms(self):
        """(exponent, coefficient) pairs, graded-lex descending."""
        items = [(tuple(int(k) for k in e), to_fraction(c)) for e, c in self._p.to_dict().items()]
        items.sort(key=lambda t: _term_key(t[0]), reverse=True)
        return items

    def nterms(self) -> int:
        return len(self._p)

    def leading_term(self):
        ts = self.terms()
        if not ts:
            raise ValueError("zero polynomial has no leading term")
        return ts[0]

    def lc(self) -> Fraction:
        return self.leading_term()[1]

    def degree(self, var: str) -> int:
        if self.is_zero():
            return -1
        return int(self._p.degrees()[self.ring.index(var)])

    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        return int(max(sum(e) for e, _ in self._p.to_dict().items()))

    def variables(self):
        if self.is_zero():
            return ()
        d = self._p.degrees()
        return tuple(v for v, k in zip(self.ring.names, d) if k > 0)

    def is_homogeneous(self, degree: int = None) -> bool:
        degs = {sum(e) for e in self._p.to_dict()}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    # calculus
    def diff(self, var: str) -> "MultiPoly":
        self.ring.index(var)
        return MultiPoly(self.ring, self._p.derivative(var))

    def total_diff(self, i: int) -> "MultiPoly":
        """d/dx_i acting on coordinates and on jet variables."""
        ring = self.ring
        c = ring.coords[i]
        out = self._p.derivative(c)
        if ring.jets:
            used = self.variables()
            for v in used:
                spec = ring.jets.get(v)
                if spec is None:
                    continue
                f, alpha = spec
                a2 = list(alpha)
                a2[i] += 1
                nxt = ring._jet_lookup.get((f, tuple(a2)))
                if nxt is None:
                    raise JetOrderError(f"need jet {f}{tuple(a2)} beyond the context order")
                out = out + self._p.derivative(v) * ring._ctx.gen(ring._index[nxt])
        return MultiPoly(ring, out)

    # evaluation and substitution
    def eval(self, point: Mapping[str, object]) -> Fraction:
        d = self._p.degrees() if not self.is_zero() else ()
        args = []
        for v, k in zip(self.ring.names, d or [0] * self.ring.nvars):
            if v in point:
                args.append(to_fmpq(point[v]))
            elif k == 0:
                args.append(flint.fmpq(0))
            else:
                raise ContextError(f"point does not assign {v}")
        if self.is_zero():
            return Fraction(0)
        return to_fraction(self._p(*args))

    def subs_values(self, values: Mapping[str, object]) -> "MultiPoly":
        vals = {v: to_fmpq(c) for v, c in values.items()}
        for v in vals:
            self.ring.index(v)
        return MultiPoly(self.ring, self._p.subs(vals))

    def compose(self, images: Mapping[str, "MultiPoly"], target: Ring = None) -> "MultiPoly":
        """Substitute polynomials for variables (unlisted variables map to themselves)."""
        target = target or self.ring
        gens = []
        for v in self.ring.names:
            g = images.get(v)
            if g is None:
                g = target.var(v)
            elif not isinstance(g, MultiPoly):
                g = target.const(g)
            if g.ring is not target:
                raise ContextError("composition images must share the target context")
            gens.append(g._p)
        if self.is_zero():
            return target.zero()
        return MultiPoly(target, self._p.compose(*gens, ctx=target._ctx))

    # normalisation
    def content(self) -> Fraction:
        """Positive rational c with self/c integral and primitive."""
        cs = [c for _, c in self.terms()]
        if not cs:
            return Fraction(0)
        den = 1
        for c in cs:
            den = ilcm(den, c.denominator)
        num = 0
        for c in cs:
            num = igcd(num, int(c * den))
        return Fraction(num, den)

    def primitive(self) -> "MultiPoly":
        """Integer-coefficient primitive associate with positive leading coefficient."""
        if self.is_zero():
            return self
        c = self.content()
        if self.lc() < 0:
            c = -c
        return self * (1 / c)

    def monic(self) -> "MultiPoly":
        return self * (1 / self.lc())

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MultiPoly({self})"


def format_monomial(names, e) -> str:
    parts = []
    for v, k in zip(names, e):
        if k == 1:
            parts.append(v)
        elif k > 1:
            parts.append(f"{v}^{k}")
    return "*".join(parts)


def format_poly(p: MultiPoly) -> str:
    ts = p.terms()
    if not ts:
        return "0"
    out = []
    for idx, (e, c) in enumerate(ts):
        neg = c < 0
        a = -c if neg else c
        m = format_monomial(p.ring.names, e)
        if not m:
            body = format_rational(a)
        elif a == 1:
            body = m
        else:
            body = f"{format_rational(a)}*{m}"
        if idx == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def poly_arith(p: MultiPoly, q: MultiPoly, op: str) -> MultiPoly:
    if p.ring is not q.ring:
        raise ContextError(f"context mismatch: {p.ring} vs {q.ring}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op}")


def poly_diff(p: MultiPoly, var: str) -> MultiPoly:
    return p.diff(var)


def poly_gcd(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    if p.ring is not q.ring:
        raise ContextError(f"context mismatch: {p.ring} vs {q.ring}")
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    return MultiPoly(p.ring, p._p.gcd(q._p)).primitive()


class RatFunc:
    """Reduced quotient num/den.

    Canonical form: gcd(num, den) = 1 and den is an integer-coefficient
    primitive polynomial with positive graded-lex leading coefficient, so two
    equal functions have identical (num, den).
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _reduced=False):
        if not isinstance(num, MultiPoly):
            if den is None or not isinstance(den, MultiPoly):
                raise TypeError("RatFunc needs a MultiPoly to know its context")
            num = den.ring.const(num)
        ring = num.ring
        if den is None:
            den = ring.one()
        elif not isinstance(den, MultiPoly):
            den = ring.const(den)
        if den.ring is not ring:
            raise ContextError(f"context mismatch: {num.ring} vs {den.ring}")
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @property
    def ring(self) -> Ring:
        return self.num.ring

    @staticmethod
    def const(ring: Ring, c) -> "RatFunc":
        return RatFunc(ring.const(c), ring.one(), _reduced=True)

    def _lift(self, o) -> "RatFunc":
        if isinstance(o, RatFunc):
            if o.ring is not self.ring:
                raise ContextError(f"context mismatch: {self.ring} vs {o.ring}")
            return o
        if isinstance(o, MultiPoly):
            if o.ring is not self.ring:
                raise ContextError(f"context mismatch: {self.ring} vs {o.ring}")
            return RatFunc(o, self.ring.one(), _reduced=True)
        return RatFunc(self.ring.const(to_fmpq(o)), self.ring.one(), _reduced=True)

    def __add__(self, o):
        o = self._lift(o)
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            n = self.num + o.num
            return RatFunc(n, self.den)
        g = poly_gcd(self.den, o.den)
        if g.is_constant():
            n = self.num * o.den + o.num * self.den
            if n.is_zero():
                return RatFunc(n)
            return RatFunc(n, self.den * o.den, _reduced=True)._fix_sign()
        d1 = self.den.exact_div(g)
        d2 = o.den.exact_div(g)
        n = self.num * d2 + o.num * d1
        if n.is_zero():
            return RatFunc(n)
        g2 = poly_gcd(n, g)
        return RatFunc(n.exact_div(g2), (d1 * o.den).exact_div(g2), _reduced=True)._fix_sign()

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        if self.num.is_zero() or o.num.is_zero():
            return RatFunc(self.ring.zero(), self.ring.one(), _reduced=True)
        if self.den.is_constant() and o.den.is_constant():
            return RatFunc(self.num * o.num, self.ring.one(), _reduced=True)
        g1 = poly_gcd(self.num, o.den)
        g2 = poly_gcd(o.num, self.den)
        n = self.num.exact_div(g1) * o.num.exact_div(g2)
        d = self.den.exact_div(g2) * o.den.exact_div(g1)
        return RatFunc(n, d, _reduced=True)._fix_sign()

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num, _reduced=True)._fix_sign()

    def __truediv__(self, o):
        return self * self._lift(o).inverse()

    def __rtruediv__(self, o):
        return self._lift(o) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.num ** k, self.den ** k, _reduced=True)

    def _fix_sign(self) -> "RatFunc":
        # restore the canonical scalar on the denominator
        d = self.den
        c = d.content()
        if d.lc() < 0:
            c = -c
        if c == 1:
            return self
        inv = 1 / c
        return RatFunc(self.num * inv, d * inv, _reduced=True)

    def __eq__(self, o):
        if isinstance(o, RatFunc):
            return self.ring is o.ring and self.num == o.num and self.den == o.den
        if isinstance(o, MultiPoly):
            return self.den.is_constant() and self.num == o
        try:
            return self.den.is_constant() and self.num == o
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((hash(self.num), hash(self.den)))
        return self._hash

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def diff(self, var: str) -> "RatFunc":
        if self.den.is_constant():
            return RatFunc(self.num.diff(var), self.den, _reduced=True)
        n = self.num.diff(var) * self.den - self.num * self.den.diff(var)
        return RatFunc(n, self.den * self.den)

    def total_diff(self, i: int) -> "RatFunc":
        if self.den.is_constant():
            return RatFunc(self.num.total_diff(i), self.den, _reduced=True)
        n = self.num.total_diff(i) * self.den - self.num * self.den.total_diff(i)
        return RatFunc(n, self.den * self.den)

    def eval(self, point: Mapping[str, object]) -> Fraction:
        d = self.den.eval(point)
        if d == 0:
            raise PoleError(f"denominator {self.den} vanishes at {dict(point)}")
        return self.num.eval(point) / d

    def compose(self, images: Mapping[str, "RatFunc"], target: Ring = None) -> "RatFunc":
        """Substitute rational functions for variables."""
        target = target or self.ring
        imgs = {}
        for v, g in images.items():
            if isinstance(g, MultiPoly):
                g = RatFunc(g)
            elif not isinstance(g, RatFunc):
                g = RatFunc.const(target, g)
            imgs[v] = g
        n = _compose_poly(self.num, imgs, target)
        d = _compose_poly(self.den, imgs, target)
        if d.is_zero():
            raise PoleError("composition lands on a pole of the denominator")
        return n / d

    def embed(self, ring: Ring) -> "RatFunc":
        return ring.embed(self)

    def __str__(self):
        if self.den.is_constant():
            return format_poly(self.num * (1 / self.den.constant_value()))
        return f"({format_poly(self.num)})/({format_poly(self.den)})"

    def __repr__(self):
        return f"RatFunc({self})"


def _reduce(num: MultiPoly, den: MultiPoly):
    if num.is_zero():
        return num, den.ring.one()
    if not den.is_constant():
        g = MultiPoly(num.ring, num._p.gcd(den._p))
        if not g.is_constant():
            num = num.exact_div(g)
            den = den.exact_div(g)
    c = den.content()
    if den.lc() < 0:
        c = -c
    if c != 1:
        inv = 1 / c
        num = num * inv
        den = den * inv
    return num, den


def _compose_poly(p: MultiPoly, images: Mapping[str, RatFunc], target: Ring) -> RatFunc:
    # Horner-free expansion with cached powers; images default to identity.
    if all(isinstance(g, RatFunc) and g.den.is_constant() for g in images.values()):
        polys = {v: g.num * (1 / g.den.constant_value()) for v, g in images.items()}
        return RatFunc(p.compose(polys, target))
    gens = []
    for v in p.ring.names:
        g = images.get(v)
        gens.append(g if g is not None else RatFunc(target.var(v)))
    # common denominator per variable: g = n_v/d_v, p(g) = P / prod d_v^{deg_v}
    degs = p._p.degrees() if not p.is_zero() else [0] * p.ring.nvars
    nums = [g.num for g in gens]
    dens = [g.den for g in gens]
    total = target.zero()
    pow_cache = {}

    def pw(kind, i, e):
        key = (kind, i, e)
        if key not in pow_cache:
            base = nums[i] if kind == 0 else dens[i]
            pow_cache[key] = base ** e
        return pow_cache[key]

    for e, c in p.terms():
        t = target.const(c)
        for i, k in enumerate(e):
            if degs[i] == 0:
                continue
            if k:
                t = t * pw(0, i, k)
            if degs[i] - k:
                t = t * pw(1, i, degs[i] - k)
        total = total + t
    den = target.one()
    for i, dv in enumerate(dens):
        if degs[i]:
            den = den * pw(1, i, degs[i])
    return RatFunc(total, den)


def as_ratfunc(x, ring: Ring) -> RatFunc:
    if isinstance(x, RatFunc):
        if x.ring is not ring:
            return ring.embed(x)
        return x
    if isinstance(x, MultiPoly):
        return RatFunc(ring.embed(x) if x.ring is not ring else x)
    return RatFunc.const(ring, x)


def rf_eval(f, point: Mapping[str, object]) -> Fraction:
    return f.eval(point)


# linear algebra -------------------------------------------------------------

class RFMatrix:
    """Immutable rectangular matrix of RatFuncs sharing one context."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], ring: Ring = None):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("matrix must be non-empty")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        if ring is None:
            for r in rows:
                for e in r:
                    if isinstance(e, (RatFunc, MultiPoly)):
                        ring = e.ring
                        break
                if ring is not None:
                    break
        if ring is None:
            raise ValueError("cannot infer the variable context")
        self.ring = ring
        self.entries = tuple(tuple(as_ratfunc(e, ring) for e in r) for r in rows)
        self.rows = len(rows)
        self.cols = cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def col(self, j):
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "RFMatrix":
        return RFMatrix([self.col(j) for j in range(self.cols)], self.ring)

    def __matmul__(self, o: "RFMatrix") -> "RFMatrix":
        if self.cols != o.rows:
            raise ValueError("shape mismatch")
        zero = RatFunc.const(self.ring, 0)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(o.cols):
                s = zero
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.is_zero():
                        continue
                    b = o.entries[k][j]
                    if not b.is_zero():
                        s = s + a * b
                row.append(s)
            out.append(row)
        return RFMatrix(out, self.ring)

    def __eq__(self, o):
        return isinstance(o, RFMatrix) and self.entries == o.entries

    def __hash__(self):
        return hash(self.entries)

    def map(self, fn) -> "RFMatrix":
        return RFMatrix([[fn(e) for e in r] for r in self.entries], self.ring)

    def eval(self, point):
        return [[e.eval(point) for e in r] for r in self.entries]

    def det(self):
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        polys, scale = _clear_rows(self.entries, self.ring)
        d = bareiss_det_raw(polys, self.ring)
        return RatFunc(MultiPoly(self.ring, d)) / scale

    def solve(self, rhs) -> "RFMatrix":
        return rf_linear_solve(self, rhs)

    def inverse(self) -> "RFMatrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        cols = []
        for j in range(n):
            e = [[1 if i == j else 0] for i in range(n)]
            cols.append(rf_linear_solve(self, RFMatrix(e, self.ring)).col(0))
        return RFMatrix([[cols[j][i] for j in range(n)] for i in range(n)], self.ring)

    @staticmethod
    def identity(n: int, ring: Ring) -> "RFMatrix":
        return RFMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)], ring)

    def __repr__(self):
        return "RFMatrix(" + "; ".join(", ".join(str(e) for e in r) for r in self.entries) + ")"


def _clear_rows(rows, ring):
    """Scale each row to polynomial entries; returns (raw polys, product of scales)."""
    out = []
    scale = RatFunc.const(ring, 1)
    for r in rows:
        L = ring.one()
        for e in r:
            if not e.den.is_constant():
                g = poly_gcd(L, e.den)
                L = L * e.den.exact_div(g)
        row = []
        for e in r:
            if e.is_zero():
                row.append(ring._raw_zero())
            else:
                row.append((e.num * L.exact_div(e.den))._p)
        out.append(row)
        scale = scale * L
    return out, scale


def bareiss_det_raw(A, ring):
    n = len(A)
    A = [list(r) for r in A]
    sign = 1
    prev = ring._ctx.constant(1)
    for c in range(n):
        p = next((i for i in range(c, n) if not A[i][c].is_zero()), None)
        if p is None:
            return ring._raw_zero()
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        piv = A[c][c]
        for i in range(c + 1, n):
            aic = A[i][c]
            row_i = A[i]
            row_c = A[c]
            for j in range(c + 1, n):
                v = piv * row_i[j] - aic * row_c[j]
                row_i[j] = v / prev if not v.is_zero() else v
            row_i[c] = ring._raw_zero()
        prev = piv
    return prev if sign > 0 else -prev


def rf_linear_solve(M: RFMatrix, rhs) -> RFMatrix:
    """Unique solution of M s = rhs by fraction-free elimination.

    M may be overdetermined; the rows that do not carry pivots are checked for
    consistency.  Raises NonUniqueSolutionError / NoSolutionError.
    """
    ring = M.ring
    if isinstance(rhs, RFMatrix):
        if rhs.cols != 1 or rhs.rows != M.rows:
            raise ValueError("rhs must be a column of matching height")
        b = rhs.col(0)
    else:
        b = tuple(as_ratfunc(x, ring) for x in rhs)
        if len(b) != M.rows:
            raise ValueError("rhs must be a column of matching height")
    m, n = M.rows, M.cols
    if m < n:
        raise NonUniqueSolutionError(f"{m} equations for {n} unknowns")
    aug = [list(M.entries[i]) + [b[i]] for i in range(m)]
    A, _ = _clear_rows(aug, ring)
    zero = ring._raw_zero()
    prev = ring._ctx.constant(1)
    for c in range(n):
        p = next((i for i in range(c, m) if not A[i][c].is_zero()), None)
        if p is None:
            raise NonUniqueSolutionError(f"rank deficient at column {c}")
        if p != c:
            A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        row_c = A[c]
        for i in range(c + 1, m):
            row_i = A[i]
            aic = row_i[c]
            if aic.is_zero():
                # row_i[j] * piv / prev keeps the fraction-free invariant
                for j in range(c + 1, n + 1):
                    if not row_i[j].is_zero():
                        row_i[j] = (piv * row_i[j]) / prev
                continue
            for j in range(c + 1, n + 1):
                v = piv * row_i[j] - aic * row_c[j]
                row_i[j] = v / prev if not v.is_zero() else zero
            row_i[c] = zero
        prev = piv
    for i in range(n, m):
        if not A[i][n].is_zero():
            raise NoSolutionError(f"inconsistent equation at row {i}")
    # back substitution over the function field
    sol = [None] * n
    for i in range(n - 1, -1, -1):
        acc = RatFunc(MultiPoly(ring, A[i][n]))
        for j in range(i + 1, n):
            if not A[i][j].is_zero():
                acc = acc - RatFunc(MultiPoly(ring, A[i][j])) * sol[j]
        sol[i] = acc / RatFunc(MultiPoly(ring, A[i][i]))
    out = RFMatrix([[s] for s in sol], ring)
    if DEBUG_CHECKS:
        check = M @ out
        for i in range(m):
            if check.entries[i][0] != b[i]:
                raise AssertionError("linear solve self-check failed")
    return out


def rational_solve(M: Sequence[Sequence], rhs: Sequence):
    """Exact solve over Q (pointwise linear algebra); same error contract."""
    m, n = len(M), len(M[0])
    A = [[to_fraction(x) for x in M[i]] + [to_fraction(rhs[i])] for i in range(m)]
    r = 0
    piv_cols = []
    for c in range(n):
        p = next((i for i in range(r, m) if A[i][c] != 0), None)
        if p is None:
            raise NonUniqueSolutionError(f"rank deficient at column {c}")
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, m):
        if A[i][n] != 0:
            raise NoSolutionError(f"inconsistent equation at row {i}")
    return [A[i][n] for i in range(n)]


def rational_det(M: Sequence[Sequence]) -> Fraction:
    A = [[to_fraction(x) for x in r] for r in M]
    n = len(A)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] * inv
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return d


# resultants -----------------------------------------------------------------

def univariate_coeffs(p: MultiPoly, var: str):
    """Coefficients of p in var (as MultiPolys free of var), lowest degree first."""
    i = p.ring.index(var)
    deg = p.degree(var)
    buckets = [dict() for _ in range(max(deg, 0) + 1)]
    for e, c in p._p.to_dict().items():
        e = list(e)
        k = e[i]
        e[i] = 0
        buckets[k][tuple(e)] = c
    return [MultiPoly(p.ring, p.ring._ctx.from_dict(b)) for b in buckets]


def sylvester_matrix(p: MultiPoly, q: MultiPoly, var: str) -> RFMatrix:
    """Sylvester matrix with the deg(q) rows of p on top."""
    cp = univariate_coeffs(p, var)[::-1]
    cq = univariate_coeffs(q, var)[::-1]
    m, n = len(cp) - 1, len(cq) - 1
    size = m + n
    zero = p.ring.zero()
    rows = []
    for i in range(n):
        rows.append([zero] * i + cp + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + cq + [zero] * (size - n - 1 - i))
    return RFMatrix(rows, p.ring)


def resultant(p: MultiPoly, q: MultiPoly, var: str, method: str = "subresultant") -> MultiPoly:
    """Res_var(p, q) as the Sylvester determinant (p rows first).

    ``method="subresultant"`` uses flint's subresultant kernel, ``"sylvester"``
    expands the Sylvester matrix with Bareiss elimination.  Both give the
    same polynomial; the second is kept as an independent route.
    """
    if p.ring is not q.ring:
        raise ContextError(f"context mismatch: {p.ring} vs {q.ring}")
    dp, dq = p.degree(var), q.degree(var)
    if dp < 1 and dq < 1:
        raise DegenerateInputError(f"both polynomials are constant in {var}")
    if p.is_zero() or q.is_zero():
        return p.ring.zero()
    if method == "sylvester":
        if dp == 0:
            return p ** dq
        if dq == 0:
            return q ** dp
        S = sylvester_matrix(p, q, var)
        d = bareiss_det_raw([[e.num._p for e in r] for r in S.entries], p.ring)
        return MultiPoly(p.ring, d)
    return MultiPoly(p.ring, p._p.resultant(q._p, var))
