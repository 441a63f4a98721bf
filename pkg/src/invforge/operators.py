"""Invariants and equivalence of linear differential operators.

Diffeomorphisms act by A -> phi_* A = phi_* o A o phi_*^{-1}; automorphisms of
the trivial line bundle add a fiber scaling A -> g o A o g^{-1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import flint

from .algebra import (ContextError, MultiPoly, PoleError, RatFunc, RFMatrix, Ring, as_ratfunc,
                      multi_indices, multi_indices_upto, poly_gcd, rational_det, resultant,
                      to_fraction)
from .connections import (GAUGE, AffineConnection, LineConnection, NotConstantTypeError,
                          TotalSymbol, chern_regular_data, exterior_derivative, omega_hat_power,
                          operator_connection, peel, quantize, torsion, wagner_solve)
from .diffop import DiffOperator, derivative
from .glinv import sample_points
from .jets import COVARIANT, CONTRAVARIANT, SymTensor, add_idx, unit


class NotGeneralTypeError(ValueError):
    pass


class TorsionFreeError(ValueError):
    pass


class DegenerateMetricError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


class GateError(ValueError):
    def __init__(self, gate, message):
        super().__init__(f"{gate}: {message}")
        self.gate = gate


DIFFEO = "diffeo"
AUTO = "automorphism"
SAMPLE_HEIGHT = 12


# maps --------------------------------------------------------------------------

class DiffeoWithInverse:
    """phi: x -> forward(x) with x = inverse(y), both as RatFuncs in the coordinate names."""

    def __init__(self, forward: Sequence, inverse: Sequence, ring: Ring, check: bool = True):
        self.ring = ring
        self.n = len(ring.coords)
        if len(forward) != self.n or len(inverse) != self.n:
            raise ContextError("map length does not match the dimension")
        self.forward = [as_ratfunc(f, ring) for f in forward]
        self.inverse = [as_ratfunc(f, ring) for f in inverse]
        if check:
            self.verify()

    @classmethod
    def identity(cls, ring):
        v = [RatFunc(ring.var(c)) for c in ring.coords]
        return cls(v, v, ring)

    def _images(self, funcs):
        return dict(zip(self.ring.coords, funcs))

    def pull(self, f: RatFunc) -> RatFunc:
        """f o phi."""
        return f.compose(self._images(self.forward))

    def push(self, f: RatFunc) -> RatFunc:
        """f o phi^{-1}."""
        return f.compose(self._images(self.inverse))

    def verify(self):
        for c, f in zip(self.ring.coords, self.forward):
            if f.compose(self._images(self.inverse)) != RatFunc(self.ring.var(c)):
                raise ValueError("forward o inverse is not the identity")
        for c, f in zip(self.ring.coords, self.inverse):
            if f.compose(self._images(self.forward)) != RatFunc(self.ring.var(c)):
                raise ValueError("inverse o forward is not the identity")

    def jacobian(self) -> RFMatrix:
        return RFMatrix([[f.total_diff(j) for j in range(self.n)] for f in self.forward], self.ring)

    def point(self, p: Mapping) -> dict:
        return {c: f.eval(p) for c, f in zip(self.ring.coords, self.forward)}

    def to_json(self):
        return {"forward": [str(f) for f in self.forward], "inverse": [str(f) for f in self.inverse]}


@dataclass
class AutomorphismWitness:
    base: DiffeoWithInverse
    factor: RatFunc

    def __post_init__(self):
        self.factor = as_ratfunc(self.factor, self.base.ring)
        if self.factor.is_zero():
            raise ValueError("fiber factor must be nonzero")


def _chain_jets(phi: DiffeoWithInverse, k: int) -> dict:
    """d^a (f o phi) = sum_b c[a][b](x) (d^b f) o phi for |a| <= k."""
    n = phi.n
    jac = [[f.total_diff(i) for f in phi.forward] for i in range(n)]   # jac[i][j] = d_i phi_j
    zero = (0,) * n
    out = {zero: {zero: RatFunc.const(phi.ring, 1)}}
    for a in multi_indices_upto(n, k):
        if a in out:
            continue
        i = next(m for m in range(n) if a[m] > 0)
        prev = out[tuple(x - (1 if m == i else 0) for m, x in enumerate(a))]
        cur = {}
        for b, c in prev.items():
            dc = c.total_diff(i)
            if not dc.is_zero():
                cur[b] = cur[b] + dc if b in cur else dc
            for j in range(n):
                if jac[i][j].is_zero():
                    continue
                bj = add_idx(b, unit(n, j))
                t = c * jac[i][j]
                cur[bj] = cur[bj] + t if bj in cur else t
        out[a] = {b: c for b, c in cur.items() if not c.is_zero()}
    return out


def pushforward(A: DiffOperator, phi: DiffeoWithInverse) -> DiffOperator:
    """phi_* A, characterised by (phi_* A)(f) = A(f o phi) o phi^{-1}."""
    chain = _chain_jets(phi, max(A.order, 0))
    coeffs = {}
    for a, c in A.coeffs.items():
        for b, e in chain[a].items():
            t = c * e
            coeffs[b] = coeffs[b] + t if b in coeffs else t
    return DiffOperator({b: phi.push(c) for b, c in coeffs.items()}, A.ring, A.n)


def automorphism_action(A: DiffOperator, w: AutomorphismWitness) -> DiffOperator:
    """g o phi_* A o g^{-1} with g = factor o phi^{-1}."""
    B = pushforward(A, w.base)
    g = w.base.push(w.factor)
    return B.conjugate(g.inverse())


def push_connection(nabla: AffineConnection, phi: DiffeoWithInverse) -> AffineConnection:
    """Classical transformation law for Christoffel symbols under y = phi(x)."""
    n, ring = phi.n, phi.ring
    J = phi.jacobian()                 # J[c, l] = d y_c / d x_l
    Jinv = J.inverse()                 # Jinv[i, a] = d x_i / d y_a
    zero = RatFunc.const(ring, 0)
    dJinv = [[[Jinv[j, b].total_diff(i) for i in range(n)] for b in range(n)] for j in range(n)]
    gamma = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            # nabla_{d/dy_a} d/dy_b written in the x frame
            vec = [zero] * n
            for i in range(n):
                if Jinv[i, a].is_zero():
                    continue
                for j in range(n):
                    vec[j] = vec[j] + Jinv[i, a] * dJinv[j][b][i]
                    t = Jinv[i, a] * Jinv[j, b]
                    if t.is_zero():
                        continue
                    for l in range(n):
                        g = nabla.gamma[i][j][l]
                        if not g.is_zero():
                            vec[l] = vec[l] + t * g
            for c in range(n):
                v = sum((J[c, l] * vec[l] for l in range(n)), zero)
                gamma[a][b][c] = phi.push(v)
    return AffineConnection(gamma, ring, n)


def push_tensor(s: SymTensor, phi: DiffeoWithInverse) -> SymTensor:
    """Pushforward of a contravariant symmetric tensor: xi_i -> sum_a J[a][i] eta_a, then x = phi^{-1}(y)."""
    if s.variance != CONTRAVARIANT:
        raise ValueError("push_tensor acts on contravariant tensors")
    J = phi.jacobian()
    cols = [[J[a, i] for i in range(phi.n)] for a in range(phi.n)]
    t = s.substitute(cols)
    return t.map_components(phi.push)


# ordinary operators --------------------------------------------------------------

@dataclass
class OdeInvariants:
    mode: str
    gamma: RatFunc
    theta: RatFunc
    sigmas: dict          # i -> coefficient of d^i in sigma_i
    sigma0: RatFunc
    lam: dict             # i -> lambda_i, empty when sigma_1 vanishes
    lambda_defined: bool

    def catalog(self):
        out = []
        if self.lambda_defined:
            out += [(f"lambda_{i}", v) for i, v in sorted(self.lam.items())]
        out.append(("sigma_0", self.sigma0))
        return out

    def to_json(self):
        return {"mode": self.mode, "Gamma": str(self.gamma),
                "theta": None if self.theta is None else str(self.theta),
                "sigma": {str(i): str(v) for i, v in sorted(self.sigmas.items(), reverse=True)},
                "sigma0": str(self.sigma0),
                "lambda": {str(i): str(v) for i, v in sorted(self.lam.items())} if self.lambda_defined else None,
                "lambda_defined": self.lambda_defined}


def ode_invariants(A: DiffOperator, mode: str = DIFFEO) -> OdeInvariants:
    if A.n != 1:
        raise ValueError("ode_invariants needs n = 1")
    k = A.order
    if k < 1:
        raise NotConstantTypeError("order must be positive")
    sigma = A.principal_symbol()
    W = wagner_solve(sigma)
    th = None
    if mode == AUTO:
        th = operator_connection(A, W, rule=GAUGE)
    elif mode != DIFFEO:
        raise ValueError(f"unknown mode {mode}")
    tot = peel(A, W, th)
    sig = {i: tot.sigma(i)[(i,)] for i in range(k, -1, -1)}
    s1 = sig[1]
    lam = {}
    if not s1.is_zero():
        for i in range(2, k + 1):
            lam[i] = sig[i] / s1 ** i
    return OdeInvariants(mode, W.gamma[0][0][0], None if th is None else th.theta[0], sig, sig[0],
                         lam, not s1.is_zero())


def scalar_shadow(A: DiffOperator, theta: LineConnection = None, wagner: AffineConnection = None) -> DiffOperator:
    """Re-quantize the (Wagner, nabla^A) total symbol with the Wagner connection only."""
    W = wagner or wagner_solve(A.principal_symbol())
    if theta is None:
        theta = operator_connection(A, W, rule=GAUGE)
    return quantize(peel(A, W, theta), W, None)


# constant-type coframes ----------------------------------------------------------

@dataclass
class Coframe:
    wagner: AffineConnection
    torsion_form: LineConnection
    g: SymTensor
    a: RFMatrix
    Aop: RFMatrix
    coframe: list
    frame: list
    regular: bool

    def to_json(self):
        return {"g": self.g.to_json(),
                "a": [[str(e) for e in r] for r in self.a.entries],
                "coframe": [[str(e) for e in c] for c in self.coframe],
                "frame": [[str(e) for e in c] for c in self.frame],
                "regular": self.regular}


def dual_cov_diff(theta: Sequence[RatFunc], nabla: AffineConnection):
    """(nabla theta)_ij = d_i theta_j - Gamma_ij^k theta_k."""
    n = nabla.n
    return [[theta[j].total_diff(i) - sum((nabla.gamma[i][j][k] * theta[k] for k in range(n)),
                                          RatFunc.const(nabla.ring, 0))
             for j in range(n)] for i in range(n)]


def constant_type_coframe(sigma: SymTensor, wagner: AffineConnection = None) -> Coframe:
    n, ring = sigma.n, sigma.ring
    if n < 2:
        raise ValueError("the invariant coframe needs n >= 2")
    W = wagner or wagner_solve(sigma)
    _, th = torsion(W)
    if all(t.is_zero() for t in th.theta):
        raise TorsionFreeError("torsion form vanishes; no invariant coframe")
    D = dual_cov_diff(th.theta, W)
    half = Fraction(1, 2)
    gm = [[(D[i][j] + D[j][i]) * half for j in range(n)] for i in range(n)]
    am = [[(D[i][j] - D[j][i]) * half for j in range(n)] for i in range(n)]
    G = RFMatrix(gm, ring)
    if G.det().is_zero():
        raise DegenerateMetricError("symmetric part of the torsion-form differential is degenerate")
    Ginv = G.inverse()
    Am = RFMatrix(am, ring)
    Aop = Ginv @ Am
    zero = RatFunc.const(ring, 0)
    cof = [list(th.theta)]
    for _ in range(n - 1):
        prev = cof[-1]
        v = [sum((Ginv[i, m] * prev[m] for m in range(n)), zero) for i in range(n)]
        cof.append([sum((v[i] * am[i][j] for i in range(n)), zero) for j in range(n)])
    M = RFMatrix(cof, ring)
    regular = not M.det().is_zero()
    frame = []
    if regular:
        Minv = M.inverse()
        frame = [list(Minv.col(a)) for a in range(n)]
    g = SymTensor(n, 2, COVARIANT, {}, ring)
    comps = {}
    for i in range(n):
        for j in range(i, n):
            e = add_idx(unit(n, i), unit(n, j))
            comps[e] = gm[i][j] * (1 if i == j else 2)
    g = SymTensor(n, 2, COVARIANT, comps, ring)
    return Coframe(W, th, g, Am, Aop, cof, frame, regular)


def symbol_invariants(sigma: SymTensor, cf: Coframe) -> dict:
    """Components J_alpha of sigma in the invariant frame: sigma = sum J_alpha e^alpha."""
    if not cf.regular:
        raise GateError("coframe-regular", "invariant coframe is degenerate")
    t = sigma.substitute(cf.coframe)
    return {a: t[a] for a in multi_indices(sigma.n, sigma.degree)}


@dataclass
class TotalSymbolInvariants:
    mode: str
    J: dict                 # (i, alpha) -> RatFunc
    K: dict                 # (a, b) -> RatFunc curvature components in the frame
    coframe: Coframe
    theta: LineConnection = None

    def catalog(self):
        out = [(f"J{i}[{','.join(map(str, a))}]", v) for (i, a), v in sorted(self.J.items(), reverse=True)]
        out += [(f"K[{a + 1},{b + 1}]", v) for (a, b), v in sorted(self.K.items())]
        return out


def total_symbol_invariants(A: DiffOperator, mode: str = "scalar") -> TotalSymbolInvariants:
    sigma = A.principal_symbol()
    W = wagner_solve(sigma)
    cf = constant_type_coframe(sigma, W)
    if not cf.regular:
        raise GateError("coframe-regular", "invariant coframe is degenerate")
    th = None
    if mode in ("line-bundle", AUTO):
        th = operator_connection(A, W)
    elif mode not in ("scalar", DIFFEO):
        raise ValueError(f"unknown mode {mode}")
    tot = peel(A, W, th)
    J = {}
    for s in tot.parts:
        t = s.substitute(cf.coframe)
        for a in multi_indices(A.n, s.degree):
            J[(s.degree, a)] = t[a]
    K = {}
    if th is not None:
        kap = exterior_derivative(th.theta, A.ring)
        n = A.n
        for a in range(n):
            for b in range(a + 1, n):
                v = RatFunc.const(A.ring, 0)
                for (i, j), c in kap.items():
                    v = v + c * (cf.frame[a][i] * cf.frame[b][j] - cf.frame[a][j] * cf.frame[b][i])
                K[(a, b)] = v
    return TotalSymbolInvariants(mode, J, K, cf, th)


# natural models -------------------------------------------------------------------

@dataclass
class NaturalModel:
    chart: list                       # names of the chart invariants
    values: list                      # per sample: dict name -> Fraction (chart and graph values)
    points: list
    functions: dict = field(repr=False, default_factory=dict)   # name -> RatFunc
    seed: int = 0
    mode: str = DIFFEO
    height: int = SAMPLE_HEIGHT

    def graph(self):
        """Set of (chart tuple, sorted F values) pairs, order free."""
        out = set()
        for v in self.values:
            key = tuple(v[c] for c in self.chart)
            rest = tuple(sorted((k, x) for k, x in v.items() if k not in self.chart))
            out.add((key, rest))
        return out

    def to_json(self):
        return {"chart": self.chart, "seed": self.seed, "mode": self.mode, "height": self.height,
                "samples": [{k: _q(x) for k, x in sorted(v.items())} for v in self.values]}


def _q(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def invariant_catalog(A: DiffOperator, mode: str = DIFFEO):
    """(name, RatFunc) candidates, in fixed order, for the operator's natural chart."""
    if A.n == 1:
        return ode_invariants(A, mode).catalog()
    tsi = total_symbol_invariants(A, "line-bundle" if mode == AUTO else "scalar")
    return tsi.catalog()


def _jac_rank(funcs, ring, p):
    M = [[f.total_diff(i).eval(p) for i in range(len(ring.coords))] for f in funcs]
    return _rank(M)


def _rank(M):
    M = [[Fraction(x) for x in r] for r in M]
    r = 0
    rows, cols = len(M), len(M[0]) if M else 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(r + 1, rows):
            f = M[i][c] / M[r][c]
            for j in range(c, cols):
                M[i][j] -= f * M[r][j]
        r += 1
    return r


def choose_chart(catalog, ring, points):
    n = len(ring.coords)
    chosen = []
    for name, f in catalog:
        if f.is_constant():
            continue
        trial = [g for _, g in chosen] + [f]
        for p in points:
            try:
                if _jac_rank(trial, ring, p) == len(trial):
                    chosen.append((name, f))
                    break
            except PoleError:
                continue
        if len(chosen) == n:
            return chosen
    raise NotGeneralTypeError("no independent chart invariants in the catalog")


def natural_model(A: DiffOperator, invariants=None, sample_count: int = 5, seed: int = 0,
                  mode: str = DIFFEO, height: int = SAMPLE_HEIGHT) -> NaturalModel:
    ring, n, k = A.ring, A.n, A.order
    catalog = invariant_catalog(A, mode)
    funcs = dict(catalog)
    probe = sample_points(ring, 8, seed + 7919)
    if invariants:
        chart = [(c, funcs[c]) for c in invariants]
    else:
        chart = choose_chart(catalog, ring, probe)
    base = A if mode == DIFFEO else scalar_shadow(A) if n == 1 else A
    # J_alpha = A(I^alpha) realizes the universal operator on the chart invariants
    for a in multi_indices_upto(n, k):
        if sum(a) == 0:
            continue
        mono = RatFunc.const(ring, 1)
        for (_, f), e in zip(chart, a):
            if e:
                mono = mono * f ** e
        funcs[f"J[{','.join(map(str, a))}]"] = base.apply(mono)
    names = [c for c, _ in chart]
    values, pts = [], []
    rng_seed = seed
    attempts = 0
    while len(values) < sample_count:
        attempts += 1
        if attempts > 50 * sample_count:
            if not values:
                raise NotGeneralTypeError("general-position certificate failed at every sample")
            break
        p = sample_points(ring, 1, rng_seed, height)[0]
        rng_seed += 1
        try:
            if _jac_rank([f for _, f in chart], ring, p) < n:
                continue
            v = {name: f.eval(p) for name, f in funcs.items()}
        except PoleError:
            continue
        values.append(v)
        pts.append(p)
    return NaturalModel(names, values, pts, funcs, seed, mode, height)


# exact sample matching ----------------------------------------------------------------

def _numerator(f: RatFunc, v) -> MultiPoly:
    return (f - RatFunc.const(f.ring, v)).num


def _rational_roots(p: MultiPoly, var: str):
    coeffs = [Fraction(0)] * (p.degree(var) + 1)
    for e, c in p.terms():
        coeffs[e[p.ring.index(var)]] += Fraction(c)
    fp = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in coeffs])
    out = []
    if fp.degree() < 1:
        return out
    for fac, _ in fp.factor()[1]:
        if fac.degree() == 1:
            c = fac.coeffs()
            r = -Fraction(int(c[0].p), int(c[0].q)) / Fraction(int(c[1].p), int(c[1].q))
            out.append(r)
    return sorted(out)


def match_sample(model_b: NaturalModel, sample: dict, names: Sequence[str]):
    """Look for a point q with I_B(q) = chart values and F_B(q) = graph values.

    Returns ("matched", q or None), ("mismatch", name) or ("inconclusive", reason).
    """
    ring = next(iter(model_b.functions.values())).ring
    n = len(ring.coords)
    chart_b = model_b.chart
    eqs = []
    for c, name in zip(chart_b, names[:n]):
        eqs.append((name, _numerator(model_b.functions[c], sample[name])))
    extra = []
    for name in names[n:]:
        if name in model_b.functions and name in sample:
            extra.append((name, _numerator(model_b.functions[name], sample[name])))
    if n == 1:
        var = ring.coords[0]
        g = None
        for name, p in eqs + extra:
            if p.is_zero():
                continue
            g = p if g is None else poly_gcd(g, p)
            if g.is_constant():
                return "mismatch", name
        if g is None:
            return "matched", None
        roots = _rational_roots(g, var)
        return "matched", ({var: roots[0]} if roots else None)
    if n == 2:
        funcs = [model_b.functions[c] - sample[name] for c, name in zip(chart_b, names[:n])]
        funcs += [model_b.functions[name] - sample[name] for name in names[n:]
                  if name in model_b.functions and name in sample]
        return _match_plane(eqs, extra, ring, funcs)
    return "inconclusive", "matching without a witness is limited to n <= 2"


def _float_poly(p: MultiPoly):
    import numpy as np
    idx = [p.ring.index(c) for c in p.ring.coords]
    terms = p.terms()
    coef = np.array([float(c) for _, c in terms])
    expo = np.array([[e[i] for i in idx] for e, _ in terms], dtype=float).reshape(len(terms), len(idx))

    def f(v):
        return float(coef @ np.prod(np.power(np.asarray(v, dtype=float), expo), axis=1))
    return f


def _float_ratfunc(f: RatFunc):
    num, den = _float_poly(f.num), _float_poly(f.den)
    return lambda v: num(v) / den(v)


def _newton_roots(funcs, starts, iters=60):
    """Damped Gauss-Newton on the (possibly overdetermined) system funcs = 0."""
    import numpy as np
    n = len(funcs[0].ring.coords)
    fs = [_float_ratfunc(f) for f in funcs]
    dfs = [[_float_ratfunc(f.total_diff(i)) for i in range(n)] for f in funcs]

    def resid(v):
        return np.array([f(v) for f in fs])

    found = []
    with np.errstate(all="ignore"):
        for s in starts:
            v = np.array(s, dtype=float)
            last = np.inf
            for _ in range(iters):
                try:
                    F = resid(v)
                    Jm = np.array([[d(v) for d in row] for row in dfs])
                    step = np.linalg.lstsq(Jm, -F, rcond=None)[0]
                except (ZeroDivisionError, OverflowError, np.linalg.LinAlgError, ValueError):
                    break
                if not (np.all(np.isfinite(step)) and np.all(np.isfinite(F))):
                    break
                lam, r0 = 1.0, np.linalg.norm(F)
                while lam > 1e-3:
                    try:
                        if np.linalg.norm(resid(v + lam * step)) < r0:
                            break
                    except ZeroDivisionError:
                        pass
                    lam /= 2
                v = v + lam * step
                last = np.max(np.abs(lam * step)) / (1 + np.max(np.abs(v)))
                if last < 1e-12:
                    break
            # float precision may stall near large roots; the high-precision polish decides
            if last < 1e-3 and np.all(np.isfinite(v)):
                found.append(tuple(v))
    return found


NEWTON_STARTS = 80


def _mp_refine(funcs, v, steps=12, dps=60):
    """High-precision Newton polish of an approximate root."""
    import mpmath
    ring = funcs[0].ring
    coords = ring.coords
    n = len(coords)
    with mpmath.workdps(dps):
        def ev(p, pt):
            total = mpmath.mpf(0)
            idx = [ring.index(c) for c in coords]
            for e, c in p.terms():
                t = mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator
                for i, x in zip(idx, pt):
                    if e[i]:
                        t *= x ** e[i]
                total += t
            return total

        nums = [f.num for f in funcs]
        dnums = [[p.diff(c) for c in coords] for p in nums]
        x = [mpmath.mpf(t) for t in v]
        for _ in range(steps):
            F = mpmath.matrix([ev(p, x) for p in nums])
            Jm = mpmath.matrix([[ev(d, x) for d in row] for row in dnums])
            try:
                step = mpmath.lu_solve(Jm, -F)
            except ZeroDivisionError:
                return None
            x = [x[i] + step[i] for i in range(n)]
        return [Fraction(mpmath.nstr(t, dps - 10, strip_zeros=False)) for t in x]


def _match_plane(eqs, extra, ring, funcs, seed=0):
    """Exact a-posteriori verification of numerically located common points.

    Chart equations are solved by damped Newton from seeded starts, polished
    at high precision, rounded to small-height rationals and then checked
    exactly against every equation.  No certificate of mismatch is attempted
    in two variables.
    """
    import random
    polys = [p for _, p in eqs]
    if any(p.is_zero() for p in polys):
        return "inconclusive", "chart equation vanishes identically"
    for name, p in eqs + extra:
        if not p.is_zero() and p.is_constant():
            return "mismatch", name
    rng = random.Random(seed)
    starts = [(rng.uniform(-w, w), rng.uniform(-w, w)) for w in (2, 8, 40, 200) for _ in range(NEWTON_STARTS // 4)]
    allp = [p for _, p in eqs + extra if not p.is_zero()]
    seen = []
    for root in _newton_roots(funcs[:2], starts):
        if any(max(abs(a - b) for a, b in zip(root, s)) < 1e-6 for s in seen):
            continue
        seen.append(root)
        fine = _mp_refine(funcs[:2], root)
        if fine is None:
            continue
        for bound in (10 ** 4, 10 ** 8, 10 ** 12):
            pt = {c: v.limit_denominator(bound) for c, v in zip(ring.coords, fine)}
            try:
                if all(p.eval(pt) == 0 for p in allp):
                    return "matched", pt
            except PoleError:
                continue
    return "inconclusive", "no rational common point certified"


@dataclass
class Verdict:
    verdict: str
    report: dict

    def to_json(self):
        return {"verdict": self.verdict, **self.report}


def _first_mismatch(A, B):
    d = A.first_difference(B)
    if d is None:
        return None
    a, x, y = d
    return {"multi_index": list(a), "expected": str(x), "found": str(y)}


def _signature(A, mode):
    if A.n == 1:
        inv = ode_invariants(A, mode)
        sig = {"lambda_defined": inv.lambda_defined}
        consts = {name: f.constant_value() for name, f in inv.catalog() if f.is_constant()}
        return sig, consts
    return {}, {}


def equivalence_verdict(A: DiffOperator, B: DiffOperator, mode: str = DIFFEO, witness=None,
                        sample_count: int = 5, seed: int = 0) -> Verdict:
    if A.n != B.n:
        raise ContextError("operators live in different dimensions")
    report = {"mode": mode, "seed": seed}
    if mode == AUTO:
        report["topology"] = {"w1": "trivially satisfied", "H1": "trivially satisfied"}
    if witness is not None:
        if mode == AUTO:
            w = witness if isinstance(witness, AutomorphismWitness) else AutomorphismWitness(witness, 1)
            image = automorphism_action(A, w)
        else:
            phi = witness.base if isinstance(witness, AutomorphismWitness) else witness
            image = pushforward(A, phi)
        mism = _first_mismatch(image, B)
        if mism is None:
            report["check"] = "pushforward equality verified symbolically"
            return Verdict("equivalent-witnessed", report)
        report["witness_failed"] = mism
    if A == B:
        report["check"] = "identical operators, identity witness"
        return Verdict("equivalent-witnessed", report)
    if A.order != B.order:
        report["mismatch"] = {"invariant": "order", "A": A.order, "B": B.order}
        return Verdict("fingerprints-differ", report)
    try:
        sa, ca = _signature(A, mode)
        sb, cb = _signature(B, mode)
    except NotConstantTypeError as e:
        raise GateError("constant-type", str(e)) from None
    for key in sa:
        if sa[key] != sb[key]:
            report["mismatch"] = {"invariant": "sigma_1" if key == "lambda_defined" else key,
                                  "A": "nonzero" if sa[key] else "zero", "B": "nonzero" if sb[key] else "zero"}
            return Verdict("fingerprints-differ", report)
    for name in sorted(set(ca) | set(cb)):
        if name not in ca or name not in cb:
            report["mismatch"] = {"invariant": name,
                                  "A": _q(ca[name]) if name in ca else "nonconstant",
                                  "B": _q(cb[name]) if name in cb else "nonconstant"}
            return Verdict("fingerprints-differ", report)
        if ca[name] != cb[name]:
            report["mismatch"] = {"invariant": name, "A": _q(ca[name]), "B": _q(cb[name])}
            return Verdict("fingerprints-differ", report)
    try:
        ma = natural_model(A, None, sample_count, seed, mode)
    except NotGeneralTypeError as e:
        report["reason"] = f"A: {e}"
        return Verdict("inconclusive", report)
    try:
        mb = natural_model(B, ma.chart, sample_count, seed + 1, mode)
    except (NotGeneralTypeError, KeyError) as e:
        report["reason"] = f"B: {e}"
        return Verdict("inconclusive", report)
    names = list(ma.chart) + sorted(k for k in ma.values[0] if k not in ma.chart)
    report["chart"] = ma.chart
    results = []
    for s in ma.values:
        status, info = match_sample(mb, s, names)
        results.append(status)
        if status == "mismatch":
            report["mismatch"] = {"invariant": info, "sample": {c: _q(s[c]) for c in ma.chart}}
            return Verdict("fingerprints-differ", report)
    report["samples"] = len(results)
    if all(r == "matched" for r in results):
        return Verdict("fingerprints-match", report)
    report["reason"] = "some samples could not be matched exactly"
    return Verdict("inconclusive", report)


# normalizations ------------------------------------------------------------------------

def relative_invariants(A: DiffOperator, data=None) -> dict:
    """H_i = alpha^i hook sigma_i with alpha = omega-hat(sigma_1)."""
    data = data or chern_regular_data(A)
    if not (data.dimcond and data.transversecond):
        raise GateError("chern-regular", "DimCond or TransverseCond fails")
    n = A.n
    tot = peel(A, data.chern, data.theta)
    s1 = tot.sigma(1).as_vector()
    om = data.omegahat
    zero = RatFunc.const(A.ring, 0)
    alpha = [sum((s1[i] * om[i, j] for i in range(n)), zero) for j in range(n)]
    H = {}
    for i in range(A.order + 1):
        s = tot.sigma(i)
        for _ in range(i):
            s = s.hook(alpha)
        H[i] = s.scalar_value()
    return H


def normalize_equation(A: DiffOperator, i: int, data=None) -> DiffOperator:
    H = relative_invariants(A, data)
    if i + 1 not in H:
        raise NormalizationError(f"index {i} out of range for order {A.order}")
    if H[i + 1].is_zero():
        raise NormalizationError(f"H_{i + 1} vanishes identically")
    if H[i].is_zero():
        raise NormalizationError(f"H_{i} vanishes identically")
    return A.scale(H[i] / H[i + 1])
