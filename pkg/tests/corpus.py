"""Seeded test corpora shared by the suites."""
import random
from fractions import Fraction

from invforge.algebra import RatFunc
from invforge.connections import AffineConnection, LineConnection, TotalSymbol
from invforge.diffop import DiffOperator
from invforge.jets import CONTRAVARIANT, HomogeneousForm, SymTensor, coordinate_ring, frame_symbol
from invforge.algebra import multi_indices, multi_indices_upto
from invforge.operators import DiffeoWithInverse


def coords(n):
    R = coordinate_ring(n)
    return R, [RatFunc(v) for v in R.coord_vars()]


def random_form(rng, n, k, spread=5):
    R, _ = coords(n)
    while True:
        terms = {a: rng.randint(-spread, spread) for a in multi_indices(n, k)}
        for i in range(n):
            e = [0] * n
            e[i] = k
            terms[tuple(e)] = rng.randint(1, spread)
        poly = R.from_terms({a: c for a, c in terms.items() if c})
        if not poly.is_zero():
            return HomogeneousForm(poly)


def random_matrix(rng, n, spread=4):
    from invforge.algebra import rational_det
    while True:
        A = [[Fraction(rng.randint(-spread, spread)) for _ in range(n)] for _ in range(n)]
        if rational_det(A) != 0:
            return A


def random_poly(rng, R, degree, spread=3, density=0.6):
    n = len(R.coords)
    xs = [RatFunc(v) for v in R.coord_vars()]
    total = RatFunc.const(R, 0)
    for a in multi_indices_upto(n, degree):
        if rng.random() < density:
            m = RatFunc.const(R, rng.randint(-spread, spread))
            for x, e in zip(xs, a):
                m = m * x ** e
            total = total + m
    return total


def random_connection(rng, R, degree=1):
    n = len(R.coords)
    g = [[[None] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                g[i][j][k] = g[j][i][k] = random_poly(rng, R, degree)
    return AffineConnection(g, R, n)


def random_line(rng, R, degree=1):
    return LineConnection([random_poly(rng, R, degree) for _ in R.coords], R)


def random_total_symbol(rng, R, k, degree=1):
    n = len(R.coords)
    parts = []
    for d in range(k, -1, -1):
        comps = {a: random_poly(rng, R, degree) for a in multi_indices(n, d)}
        if d == k:
            top = (k,) + (0,) * (n - 1)
            comps[top] = comps[top] + rng.randint(1, 3)
            if comps[top].is_zero():
                comps[top] = RatFunc.const(R, 1)
        parts.append(SymTensor(n, d, CONTRAVARIANT, comps, R))
    return TotalSymbol(parts)


def random_ode(rng, k, degree=2):
    """a_k d^k + ... + a_0 with a_k = 1 + x^2 times a unit so it never vanishes identically."""
    R, (x,) = coords(1)
    coeffs = {(i,): random_poly(rng, R, degree) for i in range(k)}
    coeffs[(k,)] = x * x + rng.randint(1, 4)
    return DiffOperator(coeffs, R, 1)


def mobius(rng, R):
    x = RatFunc(R.var(R.coords[0]))
    while True:
        a, b, c, d = (rng.randint(-4, 4) for _ in range(4))
        if a * d - b * c != 0 and c != 0:
            return DiffeoWithInverse([(x * a + b) / (x * c + d)], [(x * d - b) / (x * (-c) + a)], R)


def triangular_map(rng, R):
    """(x, y) -> (x + p(y), y + q) with polynomial inverse."""
    x, y = (RatFunc(v) for v in R.coord_vars())
    p = random_poly(rng, coordinate_ring(1), 2).compose({"x": y}, R)
    q = rng.randint(-3, 3)
    return DiffeoWithInverse([x + p, y + q], [x - p.compose({"x1": x, "x2": y - q}), y - q], R)


# frames E (rows are vector fields) whose constant-coefficient powers give regular
# constant-type symbols in the plane
PLANE_FRAMES = {
    "shear": lambda x, y: [[1, 0], [x * x, 1]],
    "twist": lambda x, y: [[1, y], [x * x, 1]],
}


def plane_symbol(frame_name, coeffs):
    R, (x, y) = coords(2)
    return frame_symbol(PLANE_FRAMES[frame_name](x, y), coeffs, R)
