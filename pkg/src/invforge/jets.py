"""Homogeneous forms, their jets u_a, the universal tensors Theta_l and the
splitting of forms along ker Theta_1.

Symmetric tensors are stored as polynomials in formal basis symbols: a
covariant tensor of degree d is sum c_a dx^a, a contravariant one is
sum c_a d^a.  With that convention T(X,...,X) is polynomial evaluation, and
hooking a vector into a covariant tensor (or a covector into a
contravariant one) is the derivation sum_i v_i d/d(basis_i).
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import factorial
from typing import Mapping, Sequence

from .algebra import (ContextError, RatFunc, Ring, MultiPoly, RFMatrix, as_ratfunc,
                      multi_indices, multi_indices_upto)


class SingularFormError(ValueError):
    pass


class BasisError(ValueError):
    pass


class OrderError(ValueError):
    pass


COVARIANT = "covariant"
CONTRAVARIANT = "contravariant"


def coordinate_ring(n: int) -> Ring:
    if n == 1:
        return Ring(("x",))
    return Ring(tuple(f"x{i + 1}" for i in range(n)))


def alpha_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


def unit(n: int, i: int):
    return tuple(1 if j == i else 0 for j in range(n))


def add_idx(a, b):
    return tuple(x + y for x, y in zip(a, b))


def sub_idx(a, b):
    return tuple(x - y for x, y in zip(a, b))


class SymTensor:
    """Symmetric tensor with RatFunc components indexed by exponent vectors."""

    __slots__ = ("n", "degree", "variance", "ring", "comps")

    def __init__(self, n: int, degree: int, variance: str, comps: Mapping, ring: Ring):
        if variance not in (COVARIANT, CONTRAVARIANT):
            raise ValueError(f"bad variance {variance}")
        self.n = n
        self.degree = degree
        self.variance = variance
        self.ring = ring
        clean = {}
        for a, c in comps.items():
            a = tuple(a)
            if len(a) != n or sum(a) != degree or min(a, default=0) < 0:
                raise ValueError(f"multi-index {a} does not fit n={n}, degree={degree}")
            c = as_ratfunc(c, ring)
            if not c.is_zero():
                clean[a] = c
        self.comps = clean

    # constructors
    @classmethod
    def zero(cls, n, degree, variance, ring):
        return cls(n, degree, variance, {}, ring)

    @classmethod
    def scalar(cls, value, ring, n, variance=CONTRAVARIANT):
        return cls(n, 0, variance, {(0,) * n: value}, ring)

    @classmethod
    def vector(cls, comps: Sequence, ring: Ring, variance=CONTRAVARIANT):
        n = len(comps)
        return cls(n, 1, variance, {unit(n, i): c for i, c in enumerate(comps)}, ring)

    def like(self, comps, degree=None, n=None, variance=None):
        return SymTensor(self.n if n is None else n, self.degree if degree is None else degree,
                         variance or self.variance, comps, self.ring)

    def __getitem__(self, alpha):
        c = self.comps.get(tuple(alpha))
        return c if c is not None else RatFunc.const(self.ring, 0)

    def as_vector(self):
        if self.degree != 1:
            raise ValueError("not a degree-1 tensor")
        return [self[unit(self.n, i)] for i in range(self.n)]

    def scalar_value(self) -> RatFunc:
        if self.degree != 0:
            raise ValueError("not a scalar")
        return self[(0,) * self.n]

    def is_zero(self):
        return not self.comps

    def _check(self, o):
        if (self.n, self.degree, self.variance) != (o.n, o.degree, o.variance) or self.ring is not o.ring:
            raise ContextError("tensor shapes or contexts differ")

    def __add__(self, o):
        self._check(o)
        out = dict(self.comps)
        for a, c in o.comps.items():
            out[a] = out[a] + c if a in out else c
        return self.like(out)

    def __neg__(self):
        return self.like({a: -c for a, c in self.comps.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f) -> "SymTensor":
        f = as_ratfunc(f, self.ring)
        return self.like({a: c * f for a, c in self.comps.items()})

    __mul__ = scale
    __rmul__ = scale

    def __eq__(self, o):
        if not isinstance(o, SymTensor):
            return NotImplemented
        return (self.n, self.degree, self.variance) == (o.n, o.degree, o.variance) and self.comps == o.comps

    def __hash__(self):
        return hash((self.n, self.degree, self.variance, tuple(sorted(self.comps.items()))))

    def hook(self, v: Sequence) -> "SymTensor":
        """Contract a dual-variance degree-1 argument: sum_i v_i d/d(basis_i)."""
        v = [as_ratfunc(x, self.ring) for x in (v.as_vector() if isinstance(v, SymTensor) else v)]
        out = {}
        for a, c in self.comps.items():
            for i in range(self.n):
                if a[i] == 0 or v[i].is_zero():
                    continue
                b = sub_idx(a, unit(self.n, i))
                t = c * v[i] * a[i]
                out[b] = out[b] + t if b in out else t
        return self.like(out, degree=self.degree - 1)

    def evaluate(self, v: Sequence) -> RatFunc:
        """T(v, ..., v) as polynomial evaluation."""
        v = [as_ratfunc(x, self.ring) for x in (v.as_vector() if isinstance(v, SymTensor) else v)]
        total = RatFunc.const(self.ring, 0)
        for a, c in self.comps.items():
            t = c
            for i, k in enumerate(a):
                if k:
                    t = t * v[i] ** k
            total = total + t
        return total

    def full_component(self, idx: Sequence[int]) -> RatFunc:
        """Component T_{i1...id} of the symmetric multilinear form."""
        a = [0] * self.n
        for i in idx:
            a[i] += 1
        a = tuple(a)
        return self[a] * Fraction(alpha_factorial(a), factorial(self.degree))

    def polarize(self, vectors: Sequence[Sequence]) -> RatFunc:
        """Symmetric multilinear value T(v1, ..., vd)."""
        if len(vectors) != self.degree:
            raise ValueError("need one vector per slot")
        vs = [[as_ratfunc(x, self.ring) for x in (v.as_vector() if isinstance(v, SymTensor) else v)]
              for v in vectors]
        total = RatFunc.const(self.ring, 0)
        for idx in product(range(self.n), repeat=self.degree):
            c = self.full_component(idx)
            if c.is_zero():
                continue
            t = c
            for v, i in zip(vs, idx):
                if v[i].is_zero():
                    t = None
                    break
                t = t * v[i]
            if t is not None:
                total = total + t
        return total

    def substitute(self, columns: Sequence[Sequence]) -> "SymTensor":
        """Linear change of basis symbols: basis_i -> sum_a columns[a][i] * new_a.

        For a covariant tensor and kernel vectors v_a this is the restriction
        T(sum y_a v_a); for a contravariant symbol and covectors it is the
        expansion in the dual frame.
        """
        m = len(columns)
        cols = [[as_ratfunc(x, self.ring) for x in (c.as_vector() if isinstance(c, SymTensor) else c)]
                for c in columns]
        # images of the old basis symbols as linear polys in the new ones
        images = []
        for i in range(self.n):
            images.append({unit(m, a): cols[a][i] for a in range(m) if not cols[a][i].is_zero()})
        cache = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                if k == 0:
                    cache[key] = {(0,) * m: RatFunc.const(self.ring, 1)}
                else:
                    cache[key] = poly_mul(power(i, k - 1), images[i])
            return cache[key]

        out = {}
        for a, c in self.comps.items():
            term = {(0,) * m: c}
            for i, k in enumerate(a):
                if k:
                    term = poly_mul(term, power(i, k))
            for b, v in term.items():
                out[b] = out[b] + v if b in out else v
        return SymTensor(m, self.degree, self.variance, out, self.ring)

    def map_components(self, fn) -> "SymTensor":
        return self.like({a: fn(c) for a, c in self.comps.items()})

    def to_json(self):
        return {",".join(map(str, a)): str(c) for a, c in sorted(self.comps.items(), reverse=True)}

    def __repr__(self):
        terms = ", ".join(f"{a}: {c}" for a, c in sorted(self.comps.items(), reverse=True))
        return f"SymTensor({self.variance}, n={self.n}, d={self.degree}, {{{terms}}})"


def poly_mul(p: Mapping, q: Mapping) -> dict:
    out = {}
    for a, c in p.items():
        for b, d in q.items():
            e = add_idx(a, b)
            t = c * d
            out[e] = out[e] + t if e in out else t
    return {e: c for e, c in out.items() if not c.is_zero()}


def frame_symbol(frame: Sequence[Sequence], coeffs: Mapping, ring: Ring) -> SymTensor:
    """sum_a c_a E_1^a1 ... E_n^an for vector fields E_i (rows of ``frame``) and constants c_a.

    Constant c_a make the result parallel for the flat connection of the frame,
    so it has constant type by construction.
    """
    n = len(frame)
    rows = [{unit(n, m): as_ratfunc(e, ring) for m, e in enumerate(row)} for row in frame]
    rows = [{a: c for a, c in r.items() if not c.is_zero()} for r in rows]
    degrees = {sum(a) for a in coeffs}
    if len(degrees) != 1:
        raise ValueError("frame_symbol needs coefficients of a single degree")
    k = degrees.pop()
    total = {}
    for a, c in coeffs.items():
        comps = {(0,) * n: as_ratfunc(c, ring)}
        for i, e in enumerate(a):
            for _ in range(e):
                comps = poly_mul(comps, rows[i])
        for b, v in comps.items():
            total[b] = total[b] + v if b in total else v
    return SymTensor(n, k, CONTRAVARIANT, total, ring)


def pairing(cov: SymTensor, contra: SymTensor) -> RatFunc:
    """Natural pairing <dx^a, d^b> = a! delta_ab."""
    if cov.degree != contra.degree or cov.n != contra.n:
        raise ValueError("pairing needs equal degree and dimension")
    total = RatFunc.const(cov.ring, 0)
    for a, c in cov.comps.items():
        d = contra.comps.get(a)
        if d is not None:
            total = total + c * d * alpha_factorial(a)
    return total


class HomogeneousForm:
    def __init__(self, poly, k: int = None, n: int = None):
        if isinstance(poly, RatFunc):
            if not poly.is_polynomial():
                raise ValueError("a form must be a polynomial")
            poly = poly.num
        ring = poly.ring
        self.n = len(ring.coords) if n is None else n
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if poly.is_zero():
            raise ValueError("the zero polynomial is not a form")
        degs = {sum(e) for e, _ in poly.terms()}
        if len(degs) != 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(degs)}")
        d = degs.pop()
        if k is not None and d != k:
            raise ValueError(f"form has degree {d}, expected {k}")
        if d < 1:
            raise ValueError("form degree must be at least 1")
        self.k = d
        self.poly = poly
        self.ring = ring

    @classmethod
    def parse_terms(cls, terms: Mapping[tuple, object], n: int):
        ring = coordinate_ring(n)
        return cls(ring.from_terms(terms))

    def compose_linear(self, A) -> "HomogeneousForm":
        """h o A for a matrix A (list of rows of rationals)."""
        xs = self.ring.coord_vars()
        images = {}
        for i, v in enumerate(self.ring.coords):
            images[v] = sum((A[i][j] * xs[j] for j in range(self.n)), self.ring.zero())
        return HomogeneousForm(self.poly.compose(images))

    def __eq__(self, o):
        return isinstance(o, HomogeneousForm) and self.poly == o.poly

    def __hash__(self):
        return hash(self.poly)

    def __str__(self):
        return str(self.poly)

    def __repr__(self):
        return f"HomogeneousForm(n={self.n}, k={self.k}, {self.poly})"


class JetCoordinates:
    def __init__(self, n, k, l, u: Mapping, ring: Ring):
        self.n, self.k, self.l = n, k, l
        self.u = dict(u)
        self.ring = ring

    def __getitem__(self, alpha):
        alpha = tuple(alpha)
        if sum(alpha) > self.l:
            raise OrderError(f"jet {alpha} beyond order {self.l}")
        return self.u[alpha]

    def euler_defects(self):
        """sum_i x_i u_{a+1_i} - (k-|a|) u_a for |a| < l; all zero on jets of a form."""
        xs = [RatFunc(v) for v in self.ring.coord_vars()]
        out = {}
        for a in multi_indices_upto(self.n, self.l - 1):
            s = sum((xs[i] * self.u[add_idx(a, unit(self.n, i))] for i in range(self.n)),
                    RatFunc.const(self.ring, 0))
            out[a] = s - self.u[a] * (self.k - sum(a))
        return out


def jets_of_form(h: HomogeneousForm, l: int) -> JetCoordinates:
    if l < 0:
        raise OrderError("jet order must be non-negative")
    n = h.n
    u = {(0,) * n: RatFunc(h.poly)}
    for d in range(1, l + 1):
        for a in multi_indices(n, d):
            i = next(j for j in range(n) if a[j] > 0)
            prev = u[sub_idx(a, unit(n, i))]
            u[a] = prev.diff(h.ring.coords[i])
    return JetCoordinates(n, h.k, l, u, h.ring)


def theta_tensor(j: JetCoordinates, l: int) -> SymTensor:
    if l > j.l:
        raise OrderError(f"Theta_{l} needs jets of order {l}, have {j.l}")
    comps = {a: j[a] * Fraction(1, alpha_factorial(a)) for a in multi_indices(j.n, l)}
    return SymTensor(j.n, l, COVARIANT, comps, j.ring)


def radial_field(ring: Ring, n: int = None):
    n = n or len(ring.coords)
    return [RatFunc(v) for v in ring.coord_vars()[:n]]


def split_form(omega: SymTensor, j: JetCoordinates):
    """omega = omega0 + (radial/(k Theta_0)) Theta_1 with omega0(delta) = 0."""
    if omega.degree != 1 or omega.variance != COVARIANT:
        raise ValueError("split_form takes a covariant 1-tensor")
    u0 = j[(0,) * j.n]
    if u0.is_zero():
        raise SingularFormError("Theta_0 vanishes identically")
    radial = omega.evaluate(radial_field(j.ring, j.n))
    theta1 = theta_tensor(j, 1)
    omega0 = omega - theta1.scale(radial / (u0 * j.k))
    return omega0, radial


def kernel_basis(j: JetCoordinates):
    """n-1 vectors spanning ker Theta_1: e = u_{1_j} d_pivot - u_{1_pivot} d_j."""
    n = j.n
    grads = [j[unit(n, i)] for i in range(n)]
    pivot = next((i for i in range(n) if not grads[i].is_zero()), None)
    if pivot is None:
        raise SingularFormError("Theta_1 vanishes identically")
    zero = RatFunc.const(j.ring, 0)
    basis = []
    for q in range(n):
        if q == pivot:
            continue
        v = [zero] * n
        v[pivot] = grads[q]
        v[q] = -grads[pivot]
        basis.append(v)
    return basis


def theta_reduced(j: JetCoordinates, l: int, basis=None) -> SymTensor:
    """Theta_l restricted to ker Theta_1, in coordinates of the given kernel basis."""
    if l not in (2, 3):
        raise ValueError("theta_reduced is defined for l = 2, 3")
    if j[(0,) * j.n].is_zero():
        raise SingularFormError("Theta_0 vanishes identically")
    basis = kernel_basis(j) if basis is None else basis
    theta1 = theta_tensor(j, 1)
    for v in basis:
        if not theta1.evaluate(v).is_zero():
            raise BasisError("supplied vector is not in ker Theta_1")
    return theta_tensor(j, l).substitute(basis)
