"""GL-invariant frame, invariant data (J, U, Gamma), fingerprints and the
characteristic curve of binary forms."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .algebra import (MultiPoly, PoleError, RatFunc, RFMatrix, Ring, DegenerateInputError,
                      as_ratfunc, multi_indices, poly_gcd, resultant, rational_det)
from .jets import (HomogeneousForm, JetCoordinates, SingularFormError, OrderError, SymTensor,
                   jets_of_form, kernel_basis, radial_field, theta_tensor, unit)


class GeneralPositionError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


class DegenerateCurveError(ValueError):
    pass


def apply_field(v: Sequence[RatFunc], f: RatFunc) -> RatFunc:
    """Derivative of f along the vector field v (coordinates of f's ring)."""
    ring = f.ring
    total = RatFunc.const(ring, 0)
    for vi, c in zip(v, ring.coords):
        if not vi.is_zero():
            total = total + vi * f.diff(c)
    return total


# binary closed forms -------------------------------------------------------

@dataclass
class BinaryInvariants:
    k: int
    K2: RatFunc
    K3: RatFunc
    J0: RatFunc
    J3: RatFunc
    J4: RatFunc
    I: dict
    lam_hat: list
    eta: list


def _binary_K(j: JetCoordinates):
    u = j.u
    u10, u01 = u[(1, 0)], u[(0, 1)]
    K2 = (u[(2, 0)] * u01 ** 2 - u[(1, 1)] * u10 * u01 * 2 + u[(0, 2)] * u10 ** 2) * Fraction(1, 2)
    K3 = (u[(3, 0)] * u01 ** 3 - u[(2, 1)] * u01 ** 2 * u10 * 3 + u[(1, 2)] * u01 * u10 ** 2 * 3
          - u[(0, 3)] * u10 ** 3) * Fraction(1, 6)
    return K2, K3


def binary_invariants(h: HomogeneousForm) -> BinaryInvariants:
    if h.n != 2:
        raise ValueError("binary_invariants needs n = 2")
    if h.k < 3:
        raise OrderError("binary invariants need degree k >= 3")
    j = jets_of_form(h, h.k)
    K2, K3 = _binary_K(j)
    if K2.is_zero():
        raise SingularFormError("K2 vanishes identically (singular 2-jet)")
    J0 = j[(0, 0)]
    eta = [j[(0, 1)], -j[(1, 0)]]
    if K3.is_zero():
        raise SingularFormError("K3 vanishes identically (singular 3-jet)")
    J3 = K3 ** 2 / K2 ** 3
    coef = K3 * Fraction(3, 2) / K2 ** 2
    lam = [coef * eta[0], coef * eta[1]]
    J4 = apply_field(lam, J3)
    I = {}
    ratio = K2 * 3 / K3
    for l in range(4, h.k + 1):
        I[l] = ratio ** l * theta_tensor(j, l).evaluate(eta)
    return BinaryInvariants(h.k, K2, K3, J0, J3, J4, I, lam, eta)


def j4_relation_residual(b: BinaryInvariants) -> RatFunc:
    """J4 - (2 J0 J3^2 I4 - 3 J3^2 - (3 - 6/k) J3), the relation as commonly stated."""
    k = b.k
    rhs = b.J0 * b.J3 ** 2 * b.I[4] * 2 - b.J3 ** 2 * 3 - b.J3 * (3 - Fraction(6, k))
    return b.J4 - rhs


def j4_relation_holding_residual(b: BinaryInvariants) -> RatFunc:
    """J4 - ((4/27) J3^3 I4 - (27/2) J3^2 - 2 (3 - 6/k) J3/J0).

    The weight-consistent relation that the definitions of J3, J4, I4 satisfy.
    """
    k = b.k
    rhs = (b.J3 ** 3 * b.I[4] * Fraction(4, 27) - b.J3 ** 2 * Fraction(27, 2)
           - b.J3 / b.J0 * (3 - Fraction(6, k)) * 2)
    return b.J4 - rhs


# general frame ---------------------------------------------------------------

@dataclass
class InvariantFrame:
    n: int
    vectors: list          # e_1..e_n, each a list of n RatFunc (V coordinates)
    regular: bool
    determinant: RatFunc
    kernel: list           # canonical kernel basis used
    gram: RFMatrix         # Theta_2 on the kernel basis
    lam: list              # lambda in kernel coordinates (covector)
    lam_hat_kernel: list   # lambda-hat in kernel coordinates
    phi: RFMatrix          # Phi on kernel coordinates
    kernel_coords: list    # e_1..e_{n-1} in kernel coordinates
    jets: JetCoordinates = field(repr=False)

    def matrix(self) -> RFMatrix:
        """Columns are the frame vectors."""
        n = self.n
        return RFMatrix([[self.vectors[a][i] for a in range(n)] for i in range(n)], self.jets.ring)

    def tensors(self):
        return [SymTensor.vector(v, self.jets.ring) for v in self.vectors]


def general_frame(j: JetCoordinates) -> InvariantFrame:
    n, k = j.n, j.k
    if n < 2 or k < 3:
        raise ValueError("the invariant frame needs n >= 2 and k >= 3")
    if j.l < 3:
        raise OrderError("the invariant frame needs 3-jets")
    if j[(0,) * n].is_zero():
        raise SingularFormError("Theta_0 vanishes identically")
    ring = j.ring
    basis = kernel_basis(j)
    m = n - 1
    th2 = theta_tensor(j, 2)
    th3 = theta_tensor(j, 3)
    G = RFMatrix([[th2.polarize([basis[a], basis[b]]) for b in range(m)] for a in range(m)], ring)
    if G.det().is_zero():
        raise SingularFormError("Theta_2^0 is degenerate on ker Theta_1 (singular 2-jet)")
    Ginv = G.inverse()
    T = {}
    for a in range(m):
        for b in range(a, m):
            for c in range(b, m):
                t = th3.polarize([basis[a], basis[b], basis[c]])
                for p in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                    T[p] = t
    zero = RatFunc.const(ring, 0)
    lam = [sum((Ginv[a, b] * T[(a, b, c)] for a in range(m) for b in range(m)), zero) for c in range(m)]
    lam_hat = [sum((Ginv[d, c] * lam[c] for c in range(m)), zero) * Fraction(3, 2) for d in range(m)]
    # Theta3(lam_hat, X, Y) = Theta2(Phi X, Y)
    L = [[sum((lam_hat[d] * T[(d, b, c)] for d in range(m)), zero) for c in range(m)] for b in range(m)]
    phi = RFMatrix([[sum((Ginv[a, c] * L[b][c] for c in range(m)), zero) for b in range(m)]
                    for a in range(m)], ring)
    kc = [lam_hat]
    for _ in range(m - 1):
        prev = kc[-1]
        kc.append([sum((phi[a, b] * prev[b] for b in range(m)), zero) for a in range(m)])

    def to_v(y):
        return [sum((y[a] * basis[a][i] for a in range(m)), zero) for i in range(n)]

    vectors = [to_v(y) for y in kc] + [radial_field(ring, n)]
    F = RFMatrix([[vectors[a][i] for a in range(n)] for i in range(n)], ring)
    det = F.det()
    return InvariantFrame(n, vectors, not det.is_zero(), det, basis, G, lam, lam_hat, phi, kc, j)


def frame_christoffels(frame: InvariantFrame) -> dict:
    """Gamma[(a, b, c)] (1-based) with nabla_{e_b} e_a = sum_c Gamma_ab^c e_c for the flat connection."""
    if not frame.regular:
        raise SingularFormError("frame is singular (3-jet singular)")
    n = frame.n
    Finv = frame.matrix().inverse()
    out = {}
    zero = RatFunc.const(frame.jets.ring, 0)
    for a in range(n):
        for b in range(n):
            D = [apply_field(frame.vectors[b], frame.vectors[a][i]) for i in range(n)]
            for c in range(n):
                out[(a + 1, b + 1, c + 1)] = sum((Finv[c, i] * D[i] for i in range(n)), zero)
    return out


def binary_frame_christoffels(h: HomogeneousForm) -> dict:
    if h.n != 2:
        raise ValueError("binary_frame_christoffels needs n = 2")
    frame = general_frame(jets_of_form(h, 3))
    return frame_christoffels(frame)


def binary_christoffels_stated(b: BinaryInvariants) -> dict:
    """The six frame Christoffel symbols in their commonly stated closed form."""
    k = b.k
    return {
        (1, 1, 1): b.J3 - b.J4 / (b.J3 * 2),
        (1, 1, 2): b.J3 / k,
        (1, 2, 1): RatFunc.const(b.J3.ring, 1 - k),
        (1, 2, 2): RatFunc.const(b.J3.ring, 0),
        (2, 2, 2): RatFunc.const(b.J3.ring, 1),
        (2, 2, 1): RatFunc.const(b.J3.ring, 0),
    }


def binary_christoffels_closed(b: BinaryInvariants) -> dict:
    """Closed forms of the same six symbols as produced by the frame pipeline."""
    k = b.k
    ring = b.J3.ring
    return {
        (1, 1, 1): b.J4 / (b.J3 * 2) - b.J3 * Fraction(9, 4),
        (1, 1, 2): -b.J3 / b.J0 * Fraction(9, 2 * k),
        (1, 2, 1): RatFunc.const(ring, 1 - k),
        (1, 2, 2): RatFunc.const(ring, 0),
        (2, 2, 2): RatFunc.const(ring, 1),
        (2, 2, 1): RatFunc.const(ring, 0),
    }


# invariant data ----------------------------------------------------------

@dataclass
class InvariantData:
    names: list
    J: list
    U: RFMatrix
    gamma: dict
    frame: InvariantFrame
    choice: str


def invariant_catalog(h: HomogeneousForm, frame: InvariantFrame):
    """Enumerated candidate invariants (name, RatFunc) in the fixed default order."""
    n = h.n
    if n == 2:
        b = binary_invariants(h)
        return [("J3", b.J3)]
    j = frame.jets
    out = []
    kvec = frame.vectors[: n - 1]
    for l in (2, 3):
        t = theta_tensor(j, l).substitute(kvec)
        for beta in multi_indices(n - 1, l):
            out.append((f"theta{l}[{','.join(map(str, beta))}]", t[beta]))
    return out


def jacobian_nonzero(funcs: Sequence[RatFunc], ring: Ring, points) -> bool:
    coords = ring.coords
    grads = [[f.diff(c) for c in coords] for f in funcs]
    for p in points:
        try:
            M = [[g.eval(p) for g in row] for row in grads]
        except PoleError:
            continue
        if rational_det(M) != 0:
            return True
    return False


def sample_points(ring: Ring, count: int, seed: int, height: int = 100):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        p = {}
        for c in ring.coords:
            num = rng.randint(-height, height)
            den = rng.randint(1, height)
            p[c] = Fraction(num, den)
        out.append(p)
    return out


def default_invariants(h: HomogeneousForm, frame: InvariantFrame, seed: int = 0):
    n = h.n
    u0 = frame.jets[(0,) * n]
    cands = invariant_catalog(h, frame)
    pts = sample_points(h.ring, 3, seed + 7919)
    chosen = []
    for name, f in cands:
        if f.is_constant():
            continue
        trial = [g for _, g in chosen] + [f]
        if jacobian_rank_full(trial + [u0], h.ring, pts, len(trial) + 1):
            chosen.append((name, f))
        if len(chosen) == n - 1:
            break
    if len(chosen) < n - 1:
        raise GeneralPositionError("default invariant enumeration has no independent choice")
    return [c[0] for c in chosen] + ["Theta0"], [c[1] for c in chosen] + [u0]


def jacobian_rank_full(funcs, ring, points, r) -> bool:
    """Rank of d(funcs) equals r at some sample point (exact certificate)."""
    grads = [[f.diff(c) for c in ring.coords] for f in funcs]
    for p in points:
        try:
            M = [[g.eval(p) for g in row] for row in grads]
        except PoleError:
            continue
        if _rank(M) == r:
            return True
    return False


def _rank(M):
    A = [list(r) for r in M]
    rows, cols = len(A), len(A[0])
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        for i in range(r + 1, rows):
            f = A[i][c] / A[r][c]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
    return r


def invariant_data(h: HomogeneousForm, J=None, seed: int = 0) -> InvariantData:
    frame = general_frame(jets_of_form(h, 3))
    if not frame.regular:
        raise SingularFormError("frame is singular (3-jet singular)")
    if J is None:
        names, funcs = default_invariants(h, frame, seed)
        choice = "default"
    else:
        names, funcs = [], []
        for item in J:
            if isinstance(item, tuple):
                names.append(item[0])
                funcs.append(as_ratfunc(item[1], h.ring))
            else:
                names.append(str(item))
                funcs.append(as_ratfunc(item, h.ring))
        if len(funcs) != h.n:
            raise ValueError(f"need {h.n} invariants")
        pts = sample_points(h.ring, 3, seed + 7919)
        if not jacobian_nonzero(funcs, h.ring, pts):
            raise GeneralPositionError(f"Jacobian of {names} vanishes at all checked points")
        choice = "custom"
    n = h.n
    U = RFMatrix([[apply_field(frame.vectors[a], funcs[b]) for b in range(n)] for a in range(n)], h.ring)
    gamma = frame_christoffels(frame)
    return InvariantData(names, funcs, U, gamma, frame, choice)


# fingerprints ---------------------------------------------------------------

@dataclass
class FormFingerprint:
    names: list
    points: list
    samples: list          # (R, Q, S) exact tuples
    charpoly: MultiPoly = None
    seed: int = 0
    choice: str = "default"


def _eval_data(data: InvariantData, p):
    R = tuple(f.eval(p) for f in data.J)
    Q = tuple(tuple(e.eval(p) for e in row) for row in data.U.entries)
    S = tuple(data.gamma[key].eval(p) for key in sorted(data.gamma))
    return R, Q, S


def form_fingerprint(h: HomogeneousForm, sample_count: int = 5, seed: int = 0,
                     with_curve: bool = True) -> FormFingerprint:
    data = invariant_data(h, seed=seed)
    rng_seed = seed
    pts, samples = [], []
    budget = 50 * sample_count
    tries = 0
    while len(samples) < sample_count:
        if tries >= budget:
            raise SamplingError(f"only {len(samples)} valid points after {tries} tries")
        p = sample_points(h.ring, 1, rng_seed * 1000003 + tries)[0]
        tries += 1
        try:
            s = _eval_data(data, p)
            if data.frame.determinant.eval(p) == 0:
                continue
        except PoleError:
            continue
        pts.append(p)
        samples.append(s)
    curve = characteristic_curve(h).poly if (h.n == 2 and with_curve) else None
    return FormFingerprint(data.names, pts, samples, curve, seed, data.choice)


# characteristic curve -----------------------------------------------------

T_RING = Ring(("t",))
TAB_RING = Ring(("t", "a", "b"))
AB_RING = Ring(("a", "b"))


@dataclass
class CharacteristicCurve:
    poly: MultiPoly
    chart: str
    hJ3: RatFunc
    h2J4: RatFunc


def lex_normalize(p: MultiPoly) -> MultiPoly:
    """Primitive with positive leading coefficient under lex order."""
    if p.is_zero():
        return p
    prim = p.primitive()
    lead = max(prim.terms(), key=lambda t: t[0])
    return prim if lead[1] > 0 else -prim


def dehomogenize(f: RatFunc, chart: str) -> RatFunc:
    x1, x2 = f.ring.coords
    t = RatFunc(T_RING.var("t"))
    one = RatFunc.const(T_RING, 1)
    images = {x1: one, x2: t} if chart == "t=y/x" else {x1: t, x2: one}
    return f.compose(images, target=T_RING)


def characteristic_curve(h: HomogeneousForm) -> CharacteristicCurve:
    if h.n != 2:
        raise ValueError("characteristic curve needs n = 2")
    b = binary_invariants(h)
    x1 = h.ring.var(h.ring.coords[0])
    chart = "t=x/y" if x1.divides(h.poly) else "t=y/x"
    f1 = dehomogenize(b.J3 * b.J0, chart)
    f2 = dehomogenize(b.J4 * b.J0 ** 2, chart)
    a, bb = TAB_RING.var("a"), TAB_RING.var("b")
    P1, Q1 = TAB_RING.embed(f1.num), TAB_RING.embed(f1.den)
    P2, Q2 = TAB_RING.embed(f2.num), TAB_RING.embed(f2.den)
    F1 = P1 - a * Q1
    F2 = P2 - bb * Q2
    try:
        res = resultant(F1, F2, "t")
    except DegenerateInputError as e:
        raise DegenerateCurveError(f"both degree-zero invariants are constant: {e}") from None
    if res.is_zero():
        g = poly_gcd(F1, F2)
        raise DegenerateCurveError(f"resultant vanishes identically; common factor {g}")
    poly = lex_normalize(AB_RING.embed(res))
    return CharacteristicCurve(poly, chart, f1, f2)


def squarefree_part(p: MultiPoly) -> MultiPoly:
    g = p
    for v in p.ring.names:
        g = poly_gcd(g, p.diff(v))
    if g.is_constant():
        return lex_normalize(p)
    return lex_normalize(p.exact_div(g))


def compare_curves(L1: MultiPoly, L2: MultiPoly) -> str:
    if L1 == L2:
        return "equivalent"
    if squarefree_part(L1) == squarefree_part(L2):
        return "inconclusive"
    return "distinct"


def compare_forms(h1: HomogeneousForm, h2: HomogeneousForm, witness=None):
    """Form equivalence verdict plus report dict."""
    if h1.n != h2.n:
        return "distinct", {"reason": "dimension mismatch"}
    if witness is not None:
        ok = h1.compose_linear(witness).poly == h2.poly
        if ok:
            return "equivalent", {"witness": "h2 = h1 o A verified"}
    if h1.k != h2.k:
        return "distinct", {"reason": "degree mismatch"}
    if h1.n == 2:
        c1, c2 = characteristic_curve(h1), characteristic_curve(h2)
        verdict = compare_curves(c1.poly, c2.poly)
        return verdict, {"charpoly": [str(c1.poly), str(c2.poly)]}
    return "inconclusive", {"reason": "n >= 3 without a verified witness: fingerprints are necessary data only"}


def orbit_codimension(n: int, k: int):
    if n < 2 or k < 3:
        raise ValueError("orbit_codimension needs n >= 2 and k >= 3")
    c = comb(n + k - 1, k) - n * n
    return c, c < n
