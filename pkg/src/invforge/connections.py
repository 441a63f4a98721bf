"""Affine and line connections, symmetric covariant differentials,
quantization and peeling, and the Wagner / Chern / operator connections.

Index conventions (0-based in code):
    gamma[i][j][k]  nabla_{d_i} d_j = sum_k gamma[i][j][k] d_k
    theta[i]        connection form of the line bundle, d(e) = e (x) theta
    R[(l, k, i, j)] R(d_i, d_j) d_k = sum_l R[(l, k, i, j)] d_l
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .algebra import (NoSolutionError, NonUniqueSolutionError, PoleError, RatFunc, RFMatrix, Ring,
                      as_ratfunc, multi_indices, rational_solve, rf_linear_solve)
from .diffop import DiffOperator, operator_from_symbols
from .jets import (CONTRAVARIANT, COVARIANT, SymTensor, add_idx, alpha_factorial, pairing,
                   sub_idx, unit)


class NotConstantTypeError(ValueError):
    pass


class NotWagnerRegularError(ValueError):
    pass


def _zero(ring):
    return RatFunc.const(ring, 0)


class AffineConnection:
    def __init__(self, gamma, ring: Ring, n: int = None):
        self.ring = ring
        self.n = len(ring.coords) if n is None else n
        n = self.n
        self.gamma = [[[as_ratfunc(gamma[i][j][k], ring) for k in range(n)] for j in range(n)]
                      for i in range(n)]
        self.mode = "symbolic"
        self.flat = None

    @classmethod
    def flat_zero(cls, ring, n=None):
        n = len(ring.coords) if n is None else n
        return cls([[[0] * n for _ in range(n)] for _ in range(n)], ring, n)

    @classmethod
    def from_dict(cls, d: Mapping, ring, n=None):
        n = len(ring.coords) if n is None else n
        g = [[[d.get((i, j, k), 0) for k in range(n)] for j in range(n)] for i in range(n)]
        return cls(g, ring, n)

    def __getitem__(self, ijk):
        i, j, k = ijk
        return self.gamma[i][j][k]

    def __eq__(self, o):
        return isinstance(o, AffineConnection) and self.gamma == o.gamma

    def is_zero(self):
        return all(c.is_zero() for a in self.gamma for b in a for c in b)

    def items(self):
        n = self.n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    yield (i, j, k), self.gamma[i][j][k]

    def eval(self, point):
        return {key: v.eval(point) for key, v in self.items()}

    def to_json(self):
        return {f"{i + 1},{j + 1},{k + 1}": str(v) for (i, j, k), v in self.items() if not v.is_zero()}

    def __repr__(self):
        return f"AffineConnection({self.to_json()})"


class LineConnection:
    def __init__(self, theta: Sequence, ring: Ring):
        self.ring = ring
        self.theta = [as_ratfunc(t, ring) for t in theta]
        self.n = len(self.theta)

    @classmethod
    def trivial(cls, ring, n=None):
        n = len(ring.coords) if n is None else n
        return cls([0] * n, ring)

    def __getitem__(self, i):
        return self.theta[i]

    def __eq__(self, o):
        return isinstance(o, LineConnection) and self.theta == o.theta

    def __sub__(self, o):
        return LineConnection([a - b for a, b in zip(self.theta, o.theta)], self.ring)

    def __add__(self, o):
        return LineConnection([a + b for a, b in zip(self.theta, o.theta)], self.ring)

    def form(self) -> SymTensor:
        return SymTensor.vector(self.theta, self.ring, COVARIANT)

    def curvature(self):
        return exterior_derivative(self.theta, self.ring)

    def to_json(self):
        return [str(t) for t in self.theta]

    def __repr__(self):
        return f"LineConnection({self.to_json()})"


def exterior_derivative(theta: Sequence[RatFunc], ring: Ring) -> dict:
    """(d theta)_{ij} = d_i theta_j - d_j theta_i for i < j."""
    n = len(theta)
    return {(i, j): theta[j].total_diff(i) - theta[i].total_diff(j)
            for i in range(n) for j in range(i + 1, n)}


@dataclass
class TotalSymbol:
    parts: list      # sigma_k, ..., sigma_0 as contravariant SymTensors

    @property
    def k(self):
        return self.parts[0].degree

    def sigma(self, i: int) -> SymTensor:
        return self.parts[self.k - i]

    def __eq__(self, o):
        return isinstance(o, TotalSymbol) and self.parts == o.parts

    def to_json(self):
        return {str(s.degree): s.to_json() for s in self.parts}


# symmetric covariant differential ------------------------------------------

def _d_on_w(poly: dict, gamma: AffineConnection, theta, n, ring):
    """One application of sum w_i (d_i + theta_i) - sum Gamma_ij^k w_i w_j d/dw_k.

    ``poly`` maps (w exponent, payload) -> RatFunc where payload is any
    hashable attached to the coefficient (a jet index of h, or None).
    Coefficient derivatives shift payload via ``_payload_step``.
    """
    out = {}

    def add(key, c):
        if c.is_zero():
            return
        out[key] = out[key] + c if key in out else c

    for (w, beta), c in poly.items():
        for i in range(n):
            wi = add_idx(w, unit(n, i))
            add((wi, beta), c.total_diff(i))
            if beta is not None:
                add((wi, add_idx(beta, unit(n, i))), c)
            if theta is not None and not theta[i].is_zero():
                add((wi, beta), c * theta[i])
        if gamma is not None:
            for k in range(n):
                if w[k] == 0:
                    continue
                wk = sub_idx(w, unit(n, k))
                for i in range(n):
                    for j in range(n):
                        g = gamma.gamma[i][j][k]
                        if g.is_zero():
                            continue
                        key = (add_idx(add_idx(wk, unit(n, i)), unit(n, j)), beta)
                        add(key, -(c * g * w[k]))
    return out


def sym_cov_diff(omega: SymTensor, nabla: AffineConnection = None, theta: LineConnection = None) -> SymTensor:
    if omega.variance != COVARIANT:
        raise ValueError("sym_cov_diff acts on covariant tensors")
    n, ring = omega.n, omega.ring
    poly = {(a, None): c for a, c in omega.comps.items()}
    res = _d_on_w(poly, nabla, theta.theta if theta is not None else None, n, ring)
    return SymTensor(n, omega.degree + 1, COVARIANT, {w: c for (w, _), c in res.items()}, ring)


# quantization --------------------------------------------------------------

class QuantizationTable:
    """Operators Q(d^a) for a fixed connection pair, built lazily by degree."""

    def __init__(self, nabla: AffineConnection, theta: LineConnection, ring: Ring, n: int):
        self.nabla = nabla
        self.theta = theta
        self.ring = ring
        self.n = n
        zero = (0,) * n
        self._levels = [{(zero, zero): RatFunc.const(ring, 1)}]
        self._ops = {}

    def _level(self, i):
        while len(self._levels) <= i:
            prev = self._levels[-1]
            th = self.theta.theta if self.theta is not None else None
            self._levels.append(_d_on_w(prev, self.nabla, th, self.n, self.ring))
        return self._levels[i]

    def basis_operator(self, alpha) -> dict:
        """Q(d^alpha) as a dict beta -> RatFunc."""
        alpha = tuple(alpha)
        if alpha in self._ops:
            return self._ops[alpha]
        i = sum(alpha)
        lev = self._level(i)
        scale = Fraction(alpha_factorial(alpha), factorial(i))
        out = {}
        for (w, beta), c in lev.items():
            if w == alpha:
                out[beta] = c * scale
        self._ops[alpha] = out
        return out

    def quantize_part(self, s: SymTensor) -> DiffOperator:
        out = {}
        for a, c in s.comps.items():
            for beta, q in self.basis_operator(a).items():
                t = c * q
                out[beta] = out[beta] + t if beta in out else t
        return DiffOperator(out, self.ring, self.n)


def _table(nabla, theta, ring, n):
    return QuantizationTable(nabla, theta, ring, n)


def quantize(stot, nabla: AffineConnection = None, theta: LineConnection = None) -> DiffOperator:
    parts = stot.parts if isinstance(stot, TotalSymbol) else [stot]
    ring, n = parts[0].ring, parts[0].n
    tab = _table(nabla, theta, ring, n)
    total = DiffOperator({}, ring, n)
    for s in parts:
        total = total + tab.quantize_part(s)
    return total


def peel(A: DiffOperator, nabla: AffineConnection = None, theta: LineConnection = None) -> TotalSymbol:
    k = A.order
    if k < 0:
        raise ValueError("cannot peel the zero operator")
    tab = _table(nabla, theta, A.ring, A.n)
    rem = A
    parts = []
    for i in range(k, -1, -1):
        s = rem.part(i)
        if rem.order > i:
            raise AssertionError("peeling left a higher-order remainder")
        parts.append(s)
        rem = rem - tab.quantize_part(s)
    if not rem.is_zero():
        raise AssertionError("peeling did not terminate at zero")
    return TotalSymbol(parts)


# Wagner connection ----------------------------------------------------------

class PointwiseConnection:
    """Christoffel values at sample points when the symbolic solve is over budget."""

    mode = "pointwise"

    def __init__(self, n, samples: dict):
        self.n = n
        self.samples = samples   # frozen point tuple -> {(i,j,k): Fraction}
        self.flat = None

    def at(self, point):
        key = tuple(sorted(point.items()))
        return self.samples[key]


def budget_limit():
    v = os.environ.get("INVFORGE_BUDGET")
    return int(v) if v else None


def _wagner_system(sigma: SymTensor):
    n, k = sigma.n, sigma.degree
    rows = multi_indices(n, k)
    cols = [(j, m) for j in range(n) for m in range(n)]
    # coefficient of xi^alpha in Gamma_ij^m xi_m d sigma/d xi_j
    M = [[_zero(sigma.ring) for _ in cols] for _ in rows]
    ridx = {a: r for r, a in enumerate(rows)}
    for a, c in sigma.comps.items():
        for j in range(n):
            if a[j] == 0:
                continue
            base = sub_idx(a, unit(n, j))
            for m in range(n):
                tgt = add_idx(base, unit(n, m))
                M[ridx[tgt]][cols.index((j, m))] += c * a[j]
    return rows, cols, M


def _system_size(M):
    return sum(e.num.nterms() + e.den.nterms() for row in M for e in row)


def wagner_solve(sigma: SymTensor, pointwise: bool = False, points=None, seed: int = 0):
    """Unique affine connection with nabla sigma = 0; flatness is checked on the way out."""
    n, k, ring = sigma.n, sigma.degree, sigma.ring
    if n == 1:
        ak = sigma[(k,)]
        if ak.is_zero():
            raise NotConstantTypeError("leading coefficient vanishes")
        g = -ak.total_diff(0) / (ak * k)
        conn = AffineConnection([[[g]]], ring, 1)
        conn.flat = True
        return conn
    if k < 1:
        raise NotConstantTypeError("symbol degree must be positive")
    rows, cols, M = _wagner_system(sigma)
    limit = budget_limit()
    if pointwise or (limit is not None and _system_size(M) > limit):
        return _wagner_pointwise(sigma, rows, cols, M, points, seed)
    Mat = RFMatrix(M, ring)
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        rhs = [-(sigma[a].total_diff(i)) for a in rows]
        try:
            sol = rf_linear_solve(Mat, rhs).col(0)
        except NonUniqueSolutionError as e:
            raise NotConstantTypeError(f"Wagner system is rank deficient: {e}") from None
        except NoSolutionError as e:
            raise NotConstantTypeError(f"Wagner system is inconsistent: {e}") from None
        for (j, m), v in zip(cols, sol):
            gamma[i][j][m] = v
    conn = AffineConnection(gamma, ring, n)
    conn.flat = is_flat(conn)
    return conn


def _wagner_pointwise(sigma, rows, cols, M, points, seed):
    from .glinv import sample_points
    n = sigma.n
    pts = points or sample_points(sigma.ring, 3, seed + 104729)
    dsig = {(i, a): sigma[a].total_diff(i) for i in range(n) for a in rows}
    samples = {}
    for p in pts:
        try:
            Mp = [[e.eval(p) for e in row] for row in M]
            vals = {}
            for i in range(n):
                rhs = [-dsig[(i, a)].eval(p) for a in rows]
                sol = rational_solve(Mp, rhs)
                for (j, m), v in zip(cols, sol):
                    vals[(i, j, m)] = v
        except PoleError:
            continue
        except NonUniqueSolutionError as e:
            raise NotConstantTypeError(f"Wagner system is rank deficient at {p}: {e}") from None
        except NoSolutionError as e:
            raise NotConstantTypeError(f"Wagner system is inconsistent at {p}: {e}") from None
        samples[tuple(sorted(p.items()))] = vals
    return PointwiseConnection(n, samples)


def cov_derivative_symbol(sigma: SymTensor, nabla: AffineConnection, i: int) -> SymTensor:
    """nabla_{d_i} of a contravariant symmetric tensor."""
    n = sigma.n
    out = {a: c.total_diff(i) for a, c in sigma.comps.items()}
    for a, c in sigma.comps.items():
        for j in range(n):
            if a[j] == 0:
                continue
            base = sub_idx(a, unit(n, j))
            for m in range(n):
                g = nabla.gamma[i][j][m]
                if g.is_zero():
                    continue
                tgt = add_idx(base, unit(n, m))
                t = c * g * a[j]
                out[tgt] = out[tgt] + t if tgt in out else t
    return sigma.like(out)


def torsion(nabla: AffineConnection):
    n = nabla.n
    T = [[[nabla.gamma[i][j][k] - nabla.gamma[j][i][k] for k in range(n)] for j in range(n)]
         for i in range(n)]
    zero = _zero(nabla.ring)
    form = [sum((T[i][j][j] for j in range(n)), zero) for i in range(n)]
    return T, LineConnection(form, nabla.ring)


def curvature(nabla: AffineConnection) -> dict:
    n = nabla.n
    G = nabla.gamma
    zero = _zero(nabla.ring)
    R = {}
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    v = G[j][k][l].total_diff(i) - G[i][k][l].total_diff(j)
                    for m in range(n):
                        v = v + G[j][k][m] * G[i][m][l] - G[i][k][m] * G[j][m][l]
                    R[(l, k, i, j)] = v
    return R


def is_flat(nabla: AffineConnection) -> bool:
    return all(v.is_zero() for v in curvature(nabla).values())


def chern_connection(sigma: SymTensor, wagner: AffineConnection = None) -> AffineConnection:
    n = sigma.n
    if n < 2:
        raise ValueError("the Chern connection needs n >= 2")
    W = wagner or wagner_solve(sigma)
    _, th = torsion(W)
    g = [[[W.gamma[i][j][k] - (th[i] * Fraction(1, n - 1) if j == k else 0) for k in range(n)]
          for j in range(n)] for i in range(n)]
    out = AffineConnection(g, sigma.ring, n)
    out.flat = None
    return out


def hook_power(cov: SymTensor, s: SymTensor, times: int) -> SymTensor:
    out = s
    v = cov.as_vector()
    for _ in range(times):
        out = out.hook(v)
    return out


def wagner_quadric(sigma: SymTensor, wagner: AffineConnection = None) -> SymTensor:
    """g_W = (theta^sigma)^{k-2} hooked into sigma."""
    W = wagner or wagner_solve(sigma)
    _, th = torsion(W)
    return hook_power(th.form(), sigma, sigma.degree - 2)


HALF = "half"
GAUGE = "gauge"


def operator_connection(A: DiffOperator, wagner: AffineConnection = None, rule: str = HALF) -> LineConnection:
    """The line connection nabla^A fixed by the subsymbol condition.

    For n = 1 ``rule`` picks the normalization: HALF imposes
    theta hook sigma_k = sigma_{k-1}, GAUGE imposes sigma_{k-1} = 0.  Only the
    second transforms as a connection form under g^{-1} A g.
    """
    n, k, ring = A.n, A.order, A.ring
    sigma = A.principal_symbol()
    W = wagner or wagner_solve(sigma)
    s_prev = peel(A, W, None).sigma(k - 1)
    if n == 1:
        ak = sigma[(k,)]
        if rule not in (HALF, GAUGE):
            raise ValueError(f"unknown rule {rule}")
        scale = 2 * k if rule == HALF else k
        return LineConnection([s_prev[(k - 1,)] / (ak * scale)], ring)
    _, th = torsion(W)
    gw = hook_power(th.form(), sigma, k - 2)
    rhs_vec = hook_power(th.form(), s_prev, k - 2).as_vector()
    # theta hooked into g_W is linear in theta: column i is d g_W / d xi_i
    cols = [gw.hook([1 if m == i else 0 for m in range(n)]).as_vector() for i in range(n)]
    M = RFMatrix([[cols[i][m] for i in range(n)] for m in range(n)], ring)
    if M.det().is_zero():
        raise NotWagnerRegularError("g_W is degenerate")
    sol = rf_linear_solve(M, rhs_vec).col(0)
    return LineConnection(sol, ring)


def operator_connection_check(A: DiffOperator, theta: LineConnection, wagner: AffineConnection = None,
                              rule: str = HALF) -> bool:
    sigma = A.principal_symbol()
    W = wagner or wagner_solve(sigma)
    k = A.order
    s = peel(A, W, theta).sigma(k - 1)
    if A.n == 1:
        return s.is_zero() if rule == GAUGE else sigma.hook(theta.theta) == s
    _, th = torsion(W)
    return hook_power(th.form(), s, k - 2).is_zero()


# Chern-regular data -----------------------------------------------------------

@dataclass
class ChernRegularData:
    omegaC: dict
    omegahat: RFMatrix
    char_bivector: RFMatrix
    dimcond: bool
    transversecond: bool
    subsymbol0: SymTensor
    theta: LineConnection
    mode: str
    point: dict = None
    chern: AffineConnection = field(default=None, repr=False)
    parity_ok: bool = True


def omega_hat_power(omega_rows, s: SymTensor) -> SymTensor:
    """S^l T -> S^l T*: substitute d_i -> sum_j omega_ij dx_j."""
    n = s.n
    columns = [[omega_rows[i][a] for i in range(n)] for a in range(n)]
    out = s.substitute(columns)
    return SymTensor(n, s.degree, COVARIANT, out.comps, s.ring)


def _full_rank_rows(vectors, ring) -> bool:
    n = len(vectors)
    if n == 0:
        return True
    M = RFMatrix(vectors, ring)
    G = M @ M.transpose()
    return not G.det().is_zero()


def _constant_tensor(s: SymTensor, point) -> SymTensor:
    return s.map_components(lambda c: RatFunc.const(s.ring, c.eval(point)))


def chern_regular_data(A: DiffOperator, point=None, wagner: AffineConnection = None) -> ChernRegularData:
    n, k, ring = A.n, A.order, A.ring
    sigma = A.principal_symbol()
    W = wagner or wagner_solve(sigma)
    _, th = torsion(W)
    C = chern_connection(sigma, W)
    dth = exterior_derivative(th.theta, ring)
    zero = _zero(ring)
    om = [[zero] * n for _ in range(n)]
    for (i, j), v in dth.items():
        om[i][j] = v
        om[j][i] = -v
    s_prev = peel(A, C, None).sigma(k - 1)
    sig = sigma
    mode = "symbolic"
    if point is not None:
        mode = "pointwise"
        om = [[RatFunc.const(ring, e.eval(point)) for e in row] for row in om]
        sig = _constant_tensor(sigma, point)
        s_prev = _constant_tensor(s_prev, point)
    L = [sig.hook([1 if m == i else 0 for m in range(n)]) for i in range(n)]
    basis = multi_indices(n, k - 1)
    imgs = [omega_hat_power(om, l) for l in L]
    dimcond = _full_rank_rows([[im[b] for b in basis] for im in imgs], ring) and \
        _full_rank_rows([[l[b] for b in basis] for l in L], ring)
    Cb = RFMatrix([[pairing(imgs[i], L[j]) for j in range(n)] for i in range(n)], ring)
    transverse = dimcond and not Cb.det().is_zero()
    theta = None
    s0 = None
    if dimcond and transverse:
        rhs = [pairing(imgs[i], s_prev) for i in range(n)]
        sol = rf_linear_solve(Cb, rhs).col(0)
        theta = LineConnection(sol, ring)
        s0 = s_prev - sig.hook(sol)
    parity_ok = True
    if dimcond and transverse and k % 2 == 0 and n % 2 == 1:
        parity_ok = False
    return ChernRegularData(dth, RFMatrix(om, ring), Cb, dimcond, transverse, s0, theta, mode,
                            point, C, parity_ok)
