"""The twelve acceptance criteria, each checked at exact (zero) tolerance.

Every test records a PASS/FAIL line that the terminal summary prints.  Where a
stated formula disagrees with what the definitions produce, the literal check
is kept and fails; the corrected identity is checked beside it.
"""
import random
from fractions import Fraction

import pytest

from corpus import (coords, mobius, plane_symbol, random_connection, random_form, random_line,
                    random_matrix, random_ode, random_poly, random_total_symbol, triangular_map)
from invforge import connections as cn
from invforge import glinv
from invforge import operators as ops
from invforge.algebra import RatFunc, function_ring
from invforge.diffop import DiffOperator, operator_from_symbols
from invforge.jets import CONTRAVARIANT, HomogeneousForm, SymTensor, jets_of_form, radial_field, theta_tensor


def report(criterion, number, checks, corrected=None):
    """Record the literal criterion; ``corrected`` holds the identities that replace failing stated ones."""
    failed = [name for name, ok in checks.items() if not ok]
    detail = f"{len(checks) - len(failed)}/{len(checks)} checks"
    if failed:
        shown = failed if len(failed) <= 4 else failed[:3] + [f"... {len(failed) - 3} more"]
        detail += "; failing: " + ", ".join(shown)
    bad = [name for name, ok in (corrected or {}).items() if not ok]
    if corrected:
        detail += f" | corrected identities {len(corrected) - len(bad)}/{len(corrected)} hold"
    criterion(number, not failed, detail)
    assert not bad, f"corrected identities fail: {bad}"
    assert not failed, detail


# 1. stated ordinary-operator formulas ------------------------------------------------

def _ode_ring():
    R = function_ring(("x",), {"G": 3, "t": 3, "a0": 3, "a1": 3, "a2": 3, "a3": 3, "a4": 3})
    return R, (lambda s: RatFunc(R.var(s)))


def _d(f, m=1):
    for _ in range(m):
        f = f.total_diff(0)
    return f


def test_criterion_1_stated_formulas(criterion):
    R, v = _ode_ring()
    G, t = v("G"), v("t")
    a0, a1, a2, a3 = (v(f"a{i}") for i in range(4))

    def op(c):
        return DiffOperator({(i,): e for i, e in c.items()}, R, 1)

    def mono(k, c=1):
        return SymTensor(1, k, CONTRAVARIANT, {(k,): c}, R)

    nab = cn.AffineConnection([[[G]]], R, 1)
    th = cn.LineConnection([t], R)
    G1, t1, t2 = _d(G), _d(t), _d(t, 2)
    checks = {
        "scalar Q(d^2)": cn.quantize(mono(2), nab) == op({2: 1, 1: -G}),
        "scalar Q(d^3)": cn.quantize(mono(3), nab) == op({3: 1, 2: -G * 3, 1: G ** 2 - G1}),
        "line Q(d)": cn.quantize(mono(1), nab, th) == op({1: 1, 0: t}),
        "line Q(d^2)": cn.quantize(mono(2), nab, th) == op({2: 1, 1: t * 2 - G, 0: t1 - t * G + t ** 2}),
        "line Q(d^3)": cn.quantize(mono(3), nab, th) == op({
            3: 1, 2: (t - G) * 3,
            1: G ** 2 * 2 - t * G * 6 + t ** 2 * 3 - G1 + t1 * 3,
            0: t2 + (t - G) * t1 * 3 + ((G - t) * (G * 2 - t) - G1) * t}),
    }
    for k in (2, 3, 4):
        ak = v(f"a{k}")
        W = cn.wagner_solve(mono(k, ak))
        checks[f"Wagner Gamma k={k}"] = W.gamma[0][0][0] == -_d(ak) / (ak * k)

    A2 = op({2: a2, 1: a1, 0: a0})
    W2 = cn.wagner_solve(A2.principal_symbol())
    s = cn.peel(A2, W2)
    checks["diffeo total symbol k=2"] = (s.sigma(2)[(2,)] == a2 and s.sigma(1)[(1,)] == a1 - _d(a2) / 2
                             and s.sigma(0)[(0,)] == a0)

    A3 = op({3: a3, 2: a2, 1: a1, 0: a0})
    s3 = cn.peel(A3, cn.wagner_solve(A3.principal_symbol()))
    a3p = _d(a3)
    checks["diffeo total symbol k=3 sigma_3, sigma_2, sigma_0"] = (s3.sigma(3)[(3,)] == a3 and s3.sigma(2)[(2,)] == a2 - a3p
                                                         and s3.sigma(0)[(0,)] == a0)
    checks["diffeo total symbol k=3 sigma_1"] = s3.sigma(1)[(1,)] == (a3p ** 2 * Fraction(4, 9) / a3 - a2 * a3p / (a3 * 3)
                                                          - _d(a3, 2) / 3)

    thA = cn.operator_connection(A2, W2)
    a2p, a2pp, a1p = _d(a2), _d(a2, 2), _d(a1)
    theta = (a1 * 2 - a2p) / (a2 * 8)
    checks["theta = (2a1 - a2')/(8a2)"] = thA.theta[0] == theta
    checks["invariant Q(d)"] = cn.quantize(mono(1), W2, thA) == op({1: 1, 0: theta})
    checks["invariant Q(d^2)"] = cn.quantize(mono(2), W2, thA) == op({
        2: 1, 1: (a1 * 2 + a2p) / (a2 * 4),
        0: -(a2pp + a1p * 2) / (a2 * 8) + (a2p / a2) ** 2 * Fraction(5, 64) + (a1 ** 2 - a1 * a2p * 3) / (a2 ** 2 * 16)})
    s = cn.peel(A2, W2, thA)
    checks["auto total symbol k=2 sigma_2, sigma_1"] = (s.sigma(2)[(2,)] == a2
                                             and s.sigma(1)[(1,)] == a1 / 2 - a2p / 4)
    checks["auto total symbol k=2 sigma_0"] = s.sigma(0)[(0,)] == (a0 + (a2 * a2pp + a1 * a2p) / (a2 * 8)
                                                        - (a1 ** 2 + a2 * a1p) / (a2 * 4)
                                                        - a2p ** 2 * Fraction(7, 64) / a2)
    corrected = {
        "scalar Q(d^3) with 2 Gamma^2": cn.quantize(mono(3), nab) == op({3: 1, 2: -G * 3, 1: G ** 2 * 2 - G1}),
        "scalar Q(d^3) = line Q(d^3) at theta = 0": (
            cn.quantize(mono(3), nab) == cn.quantize(mono(3), nab, cn.LineConnection([0], R))),
        "diffeo total symbol k=3 sigma_1 with a1": s3.sigma(1)[(1,)] == (a1 + a3p ** 2 * Fraction(4, 9) / a3
                                                               - a2 * a3p / (a3 * 3) - _d(a3, 2) / 3),
        "invariant Q(d^2) from line Q(d^2)": cn.quantize(mono(2), W2, thA) == op({
            2: 1, 1: (a1 * 2 + a2p) / (a2 * 4),
            0: (a1p * 2 - a2pp) / (a2 * 8) + (a2p / a2) ** 2 * Fraction(5, 64)
            + (a1 ** 2 - a1 * a2p * 3) / (a2 ** 2 * 16)}),
        "auto total symbol k=2 sigma_0 recomputed": s.sigma(0)[(0,)] == (a0 - a1 ** 2 * Fraction(3, 16) / a2
                                                              + a1 * a2p * Fraction(5, 16) / a2 - a1p / 4
                                                              + a2pp / 8 - a2p ** 2 * Fraction(7, 64) / a2),
    }
    report(criterion, 1, checks, corrected)


# 2. Euler identity for the universal tensors -----------------------------------------

FORM_SEEDS = range(24)


def _form_corpus():
    rng = random.Random(2024)
    out = []
    for i in FORM_SEEDS:
        n = 2 + i % 2
        k = 3 + (i // 2) % 3
        out.append(random_form(rng, n, k))
    return out


def test_criterion_2_euler_identity(criterion):
    checks = {}
    for idx, h in enumerate(_form_corpus()):
        j = jets_of_form(h, h.k)
        delta = radial_field(h.ring)
        ok = all(theta_tensor(j, l).hook(delta) == theta_tensor(j, l - 1).scale(h.k - l + 1)
                 for l in range(1, h.k + 1))
        checks[f"form {idx} (n={h.n}, k={h.k})"] = ok
    assert len(checks) >= 20
    report(criterion, 2, checks)


# 3. binary J4 relation -----------------------------------------------------------------

def _binary_battery(degrees=(4, 5, 6), per=10, seed=77):
    rng = random.Random(seed)
    out = []
    for k in degrees:
        count = 0
        while count < per:
            h = random_form(rng, 2, k)
            try:
                b = glinv.binary_invariants(h)
            except ValueError:
                continue
            out.append((h, b))
            count += 1
    return out


def test_criterion_3_j4_relation(criterion):
    checks, corrected = {}, {}
    for idx, (h, b) in enumerate(_binary_battery()):
        checks[f"form {idx} (k={h.k})"] = glinv.j4_relation_residual(b).is_zero()
        corrected[f"form {idx} weight-consistent relation"] = glinv.j4_relation_holding_residual(b).is_zero()
    report(criterion, 3, checks, corrected)


# 4 and 5. invariant frame ---------------------------------------------------------------

def test_criterion_4_tresse_frame_identities(criterion):
    checks = {}
    for idx, (h, b) in enumerate(_binary_battery(per=4, seed=78)):
        frame = glinv.general_frame(jets_of_form(h, 3))
        lam, delta = frame.vectors[0], frame.vectors[1]
        checks[f"form {idx} (k={h.k})"] = (
            glinv.apply_field(lam, b.J3) == b.J4
            and glinv.apply_field(lam, b.J0).is_zero()
            and glinv.apply_field(delta, b.J0) == b.J0 * h.k
            and glinv.apply_field(delta, b.J3) == -b.J3 * h.k)
    report(criterion, 4, checks)


def test_criterion_5_general_frame_matches_binary(criterion):
    checks, corrected = {}, {}
    for idx, (h, b) in enumerate(_binary_battery(per=3, seed=79)):
        data = glinv.invariant_data(h)
        checks[f"form {idx} lambda-hat"] = data.frame.vectors[0] == b.lam_hat
        stated = glinv.binary_christoffels_stated(b)
        for key, value in stated.items():
            checks[f"form {idx} Gamma{key}"] = data.gamma[key] == value
        closed = glinv.binary_christoffels_closed(b)
        corrected[f"form {idx} closed Christoffels"] = all(data.gamma[key] == value for key, value in closed.items())
    report(criterion, 5, checks, corrected)


# 6 and 7. GL naturality and characteristic curves ---------------------------------------

def _gl_battery():
    rng = random.Random(606)
    forms = []
    while len(forms) < 5:
        h = random_form(rng, 2, 3 + len(forms) % 2)
        try:
            glinv.invariant_data(h)
        except ValueError:
            continue
        forms.append(h)
    mats = [random_matrix(rng, 2) for _ in range(5)]
    return forms, mats


def _apply_matrix(A, p, ring):
    xs = [p[c] for c in ring.coords]
    return {c: sum(A[i][j] * xs[j] for j in range(len(xs))) for i, c in enumerate(ring.coords)}


def test_criterion_6_gl_naturality(criterion):
    forms, mats = _gl_battery()
    checks = {}
    for fi, h in enumerate(forms):
        dh = glinv.invariant_data(h)
        for mi, A in enumerate(mats):
            dA = glinv.invariant_data(h.compose_linear(A))
            pts = glinv.sample_points(h.ring, 10, 1000 * fi + mi)
            ok = True
            for p in pts:
                q = _apply_matrix(A, p, h.ring)
                try:
                    ok &= all(f.eval(p) == g.eval(q) for f, g in zip(dA.J, dh.J))
                except ZeroDivisionError:
                    continue
            checks[f"form {fi} x matrix {mi}"] = ok
    report(criterion, 6, checks)


def test_criterion_7_characteristic_curve(criterion):
    forms, mats = _gl_battery()
    checks = {}
    for fi, h in enumerate(forms):
        L = glinv.characteristic_curve(h).poly
        for mi, A in enumerate(mats):
            checks[f"form {fi} x matrix {mi}"] = glinv.characteristic_curve(h.compose_linear(A)).poly == L
    R, (x, y) = coords(2)
    h0 = HomogeneousForm(x ** 3 + y ** 3)
    h1 = HomogeneousForm(x ** 3 + y ** 3 + x * y * y * Fraction(1, 7))
    checks["x^3+y^3 vs 1/7 variant distinguished"] = (
        glinv.characteristic_curve(h0).poly != glinv.characteristic_curve(h1).poly)
    # both cubics have one real linear factor, hence lie in one GL(2, R) orbit; a quartic
    # perturbation moves the cross-ratio and must be separated
    q0 = HomogeneousForm(x ** 4 + y ** 4)
    q1 = HomogeneousForm(x ** 4 + y ** 4 + x * y ** 3 * Fraction(1, 7))
    corrected = {"x^4+y^4 vs 1/7 variant distinguished":
                 glinv.characteristic_curve(q0).poly != glinv.characteristic_curve(q1).poly}
    report(criterion, 7, checks, corrected)


# 8. quantization round trip and connection change ---------------------------------------

def _round_trip_cases(count=24, seed=808):
    rng = random.Random(seed)
    cases = []
    for i in range(count):
        n = 1 + i % 2
        k = 1 + (i // 2) % 4
        R, _ = coords(n)
        th = random_line(rng, R)
        step = random_line(rng, R)
        step.theta[0] = step.theta[0] + 1 if not (step.theta[0] + 1).is_zero() else step.theta[0] + 2
        cases.append((R, k, random_connection(rng, R), th, th + step, random_total_symbol(rng, R, k)))
    return cases


def test_criterion_8_round_trip_and_shift(criterion):
    checks, corrected = {}, {}
    for idx, (R, k, nab, th, th2, tot) in enumerate(_round_trip_cases()):
        n = len(R.coords)
        A = cn.quantize(tot, nab, th)
        checks[f"case {idx} peel o quantize"] = cn.peel(A, nab, th) == tot
        B = operator_from_symbols(tot.parts, R)
        checks[f"case {idx} quantize o peel"] = cn.quantize(cn.peel(B, nab, th), nab, th) == B
        s1 = cn.peel(B, nab, th).sigma(k - 1)
        s2 = cn.peel(B, nab, th2).sigma(k - 1)
        hook = B.principal_symbol().hook((th2 - th).theta)
        checks[f"case {idx} shift = (theta'-theta) hook sigma"] = s2 - s1 == hook
        corrected[f"case {idx} shift = -(theta'-theta) hook sigma"] = s1 - s2 == hook
        assert n <= 2 and k <= 4
    report(criterion, 8, checks, corrected)


# 9. Wagner solver -----------------------------------------------------------------------

def _regular_cubics(count, seed=909):
    rng = random.Random(seed)
    R, _ = coords(2)
    out = []
    while len(out) < count:
        c = {(3, 0): rng.randint(1, 4), (2, 1): rng.randint(-3, 3), (1, 2): rng.randint(-3, 3),
             (0, 3): rng.randint(1, 4)}
        c = {a: e for a, e in c.items() if e}
        s = SymTensor(2, 3, CONTRAVARIANT, c, R)
        try:
            cn.wagner_solve(s)
        except cn.NotConstantTypeError:
            continue
        out.append(s)
    return out


def _parallel(sigma, W):
    return all(cn.cov_derivative_symbol(sigma, W, i).is_zero() for i in range(sigma.n))


def test_criterion_9_wagner(criterion):
    rng = random.Random(99)
    checks = {}
    for idx, s in enumerate(_regular_cubics(10)):
        W = cn.wagner_solve(s)
        checks[f"constant {idx}: Gamma = 0"] = W.is_zero() and _parallel(s, W)
        checks[f"constant {idx}: R = 0"] = cn.is_flat(W)
        phi = triangular_map(rng, s.ring)
        ps = ops.push_tensor(s, phi)
        Wp = cn.wagner_solve(ps)
        checks[f"pushed {idx}: law"] = Wp == ops.push_connection(W, phi) and _parallel(ps, Wp)
        checks[f"pushed {idx}: R = 0"] = cn.is_flat(Wp)
    for name, coeffs in (("shear", {(3, 0): 1, (0, 3): 1, (1, 2): 2}), ("twist", {(3, 0): 1, (0, 3): 1, (1, 2): 2})):
        s = plane_symbol(name, coeffs)
        W = cn.wagner_solve(s)
        checks[f"frame {name}: parallel and flat"] = _parallel(s, W) and cn.is_flat(W)
    report(criterion, 9, checks)


# 10. Chern connection -------------------------------------------------------------------

def _chern_cases():
    R, (x, y) = coords(2)
    symbols = [plane_symbol("shear", {(3, 0): 1, (0, 3): 1, (1, 2): 2}),
               plane_symbol("twist", {(3, 0): 1, (0, 3): 1, (1, 2): 2}),
               plane_symbol("shear", {(3, 0): 2, (0, 3): -1, (2, 1): 1})]
    factors = [x + y * 2 + 3, x * x + 1, x * y - 5, y ** 2 + x + 7]
    return [(s, f) for s in symbols for f in factors]


def test_criterion_10_chern(criterion):
    checks = {}
    cases = _chern_cases()
    assert len(cases) >= 10
    for idx, (s, f) in enumerate(cases):
        C = cn.chern_connection(s)
        Cf = cn.chern_connection(s.scale(f ** 2))
        checks[f"case {idx}: conformal invariance"] = Cf == C
        checks[f"case {idx}: torsion form zero"] = all(t.is_zero() for t in cn.torsion(C)[1].theta)
    report(criterion, 10, checks)


# 11. ODE invariants ---------------------------------------------------------------------

def _ode_battery(count=12, seed=1111):
    rng = random.Random(seed)
    return [random_ode(rng, 3 + i % 2) for i in range(count)]


def test_criterion_11_ode_invariants(criterion):
    rng = random.Random(11)
    checks = {}
    for idx, A in enumerate(_ode_battery()):
        R = A.ring
        x = RatFunc(R.var("x"))
        phi = mobius(rng, R)
        ia = ops.ode_invariants(A)
        ib = ops.ode_invariants(ops.pushforward(A, phi))
        ca, cb = dict(ia.catalog()), dict(ib.catalog())
        checks[f"op {idx} (k={A.order}) Mobius"] = (ca.keys() == cb.keys()
                                                    and all(phi.pull(cb[nm]) == ca[nm] for nm in ca))
        g = random_poly(rng, R, 2) + x ** 3 + 1
        ja = ops.ode_invariants(A, ops.AUTO)
        jc = ops.ode_invariants(A.conjugate(g), ops.AUTO)
        checks[f"op {idx} (k={A.order}) gauge"] = dict(ja.catalog()) == dict(jc.catalog())
    report(criterion, 11, checks)


# 12. equivalence verdicts and normalization ---------------------------------------------

def _normalizable(count=10):
    R, (x, y) = coords(2)
    s = plane_symbol("shear", {(3, 0): 1, (0, 3): 1, (1, 2): 2})
    rng = random.Random(1212)
    out = []
    while len(out) < count:
        lower = DiffOperator({(2, 0): random_poly(rng, R, 1), (0, 1): random_poly(rng, R, 2),
                              (1, 0): random_poly(rng, R, 1), (0, 0): random_poly(rng, R, 2) + 3}, R)
        A = DiffOperator.from_symbol(s) + lower
        try:
            d = cn.chern_regular_data(A)
        except ValueError:
            continue
        if d.dimcond and d.transversecond:
            out.append((A, d))
    return out


def test_criterion_12_verdicts_and_normalization(criterion):
    rng = random.Random(12)
    checks = {}
    for idx, A in enumerate(_ode_battery(10, seed=1313)):
        phi = mobius(rng, A.ring)
        v = ops.equivalence_verdict(A, ops.pushforward(A, phi), witness=phi)
        checks[f"witnessed {idx}"] = v.verdict == "equivalent-witnessed"
    for idx, A in enumerate(_ode_battery(10, seed=1414)):
        x = RatFunc(A.ring.var("x"))
        B = A + DiffOperator({(0,): x * (idx + 1)}, A.ring, 1)
        v = ops.equivalence_verdict(A, B, sample_count=3, seed=idx)
        named = v.report.get("mismatch", {}).get("invariant")
        checks[f"perturbed {idx}"] = v.verdict == "fingerprints-differ" and bool(named)
    R, (x, y) = coords(2)
    for idx, (A, d) in enumerate(_normalizable()):
        f = x * x + y + 2 + idx
        N = ops.normalize_equation(A, 2, d)
        checks[f"normalization {idx}: idempotent"] = ops.normalize_equation(N, 2) == N
        checks[f"normalization {idx}: conformal"] = ops.normalize_equation(A.scale(f), 2) == N
    report(criterion, 12, checks)
