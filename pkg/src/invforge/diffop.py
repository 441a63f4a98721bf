"""Linear differential operators with rational coefficients."""
from __future__ import annotations

from math import comb
from typing import Mapping, Sequence

from .algebra import ContextError, RatFunc, Ring, as_ratfunc, multi_indices
from .jets import CONTRAVARIANT, SymTensor, add_idx, sub_idx, unit


def multi_binomial(a, b) -> int:
    out = 1
    for x, y in zip(a, b):
        out *= comb(x, y)
    return out


def leq(b, a) -> bool:
    return all(x <= y for x, y in zip(b, a))


class DiffOperator:
    """A = sum_a c_a d^a."""

    __slots__ = ("n", "ring", "coeffs")

    def __init__(self, coeffs: Mapping, ring: Ring, n: int = None):
        self.ring = ring
        self.n = len(ring.coords) if n is None else n
        clean = {}
        for a, c in coeffs.items():
            a = tuple(a)
            if len(a) != self.n or min(a, default=0) < 0:
                raise ValueError(f"bad multi-index {a}")
            c = as_ratfunc(c, ring)
            if not c.is_zero():
                clean[a] = clean[a] + c if a in clean else c
        self.coeffs = {a: c for a, c in clean.items() if not c.is_zero()}

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    k = order

    def coeff(self, alpha) -> RatFunc:
        c = self.coeffs.get(tuple(alpha))
        return c if c is not None else RatFunc.const(self.ring, 0)

    def part(self, degree: int) -> SymTensor:
        comps = {a: c for a, c in self.coeffs.items() if sum(a) == degree}
        return SymTensor(self.n, degree, CONTRAVARIANT, comps, self.ring)

    def principal_symbol(self) -> SymTensor:
        return self.part(self.order)

    @classmethod
    def from_symbol(cls, s: SymTensor) -> "DiffOperator":
        return cls(s.comps, s.ring, s.n)

    def is_zero(self):
        return not self.coeffs

    def __add__(self, o):
        if o.ring is not self.ring:
            raise ContextError("operator contexts differ")
        out = dict(self.coeffs)
        for a, c in o.coeffs.items():
            out[a] = out[a] + c if a in out else c
        return DiffOperator(out, self.ring, self.n)

    def __neg__(self):
        return DiffOperator({a: -c for a, c in self.coeffs.items()}, self.ring, self.n)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, f) -> "DiffOperator":
        """Left multiplication f * A."""
        f = as_ratfunc(f, self.ring)
        return DiffOperator({a: c * f for a, c in self.coeffs.items()}, self.ring, self.n)

    def __eq__(self, o):
        return isinstance(o, DiffOperator) and self.n == o.n and self.coeffs == o.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def first_difference(self, o: "DiffOperator"):
        """First multi-index (graded descending) where the coefficients differ."""
        keys = sorted(set(self.coeffs) | set(o.coeffs), key=lambda a: (sum(a), a), reverse=True)
        for a in keys:
            if self.coeff(a) != o.coeff(a):
                return a, self.coeff(a), o.coeff(a)
        return None

    def apply(self, f) -> RatFunc:
        f = as_ratfunc(f, self.ring)
        cache = {(0,) * self.n: f}
        total = RatFunc.const(self.ring, 0)
        for a in sorted(self.coeffs, key=sum):
            total = total + self.coeffs[a] * derivative(f, a, cache)
        return total

    def conjugate(self, g) -> "DiffOperator":
        """g^{-1} o A o g."""
        g = as_ratfunc(g, self.ring)
        ginv = g.inverse()
        cache = {(0,) * self.n: g}
        out = {}
        for a, c in self.coeffs.items():
            for b in _below(a):
                t = c * derivative(g, sub_idx(a, b), cache) * multi_binomial(a, b)
                out[b] = out[b] + t if b in out else t
        return DiffOperator({b: v * ginv for b, v in out.items()}, self.ring, self.n)

    def __str__(self):
        return format_operator(self)

    def __repr__(self):
        return f"DiffOperator(n={self.n}, {self})"


def _below(a):
    out = [()]
    for x in a:
        out = [p + (y,) for p in out for y in range(x + 1)]
    return out


def derivative(f: RatFunc, alpha, cache=None) -> RatFunc:
    """d^alpha f, memoised over sub-multi-indices."""
    alpha = tuple(alpha)
    if cache is None:
        cache = {(0,) * len(alpha): f}
    if alpha in cache:
        return cache[alpha]
    i = next(j for j in range(len(alpha)) if alpha[j] > 0)
    prev = derivative(f, sub_idx(alpha, unit(len(alpha), i)), cache)
    out = prev.total_diff(i)
    cache[alpha] = out
    return out


def apply(A: DiffOperator, f) -> RatFunc:
    return A.apply(f)


def format_operator(A: DiffOperator) -> str:
    if not A.coeffs:
        return "0"
    parts = []
    for a in sorted(A.coeffs, key=lambda a: (sum(a), a), reverse=True):
        c = A.coeffs[a]
        if sum(a) == 0:
            parts.append(f"({c})")
        else:
            d = "d[" + ",".join(map(str, a)) + "]"
            parts.append(d if c == 1 else f"({c})*{d}")
    return " + ".join(parts)


def operator_from_symbols(parts: Sequence[SymTensor], ring: Ring) -> DiffOperator:
    out = {}
    n = None
    for s in parts:
        n = s.n
        for a, c in s.comps.items():
            out[a] = out[a] + c if a in out else c
    return DiffOperator(out, ring, n)
