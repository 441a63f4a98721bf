import random
from fractions import Fraction

import pytest

from corpus import coords, mobius, plane_symbol, random_ode, random_poly, triangular_map
from invforge import connections as cn
from invforge import operators as ops
from invforge.algebra import RatFunc
from invforge.diffop import DiffOperator
from invforge.jets import CONTRAVARIANT, SymTensor

R1, (X,) = coords(1)
R2, (X1, X2) = coords(2)
SHEAR = {(3, 0): 1, (0, 3): 1, (1, 2): 2}


def ode(*coeffs):
    return DiffOperator({(i,): c for i, c in enumerate(coeffs)}, R1)


# application and transport ---------------------------------------------------------------

def test_apply():
    assert ode(0, 0, 1).apply(X ** 3) == X * 6
    assert ode(-1, X).apply(X).is_zero()
    A = DiffOperator({(1, 1): 1, (0, 0): X2}, R2)
    assert A.apply(X1 ** 2 * X2) == X1 * 2 + X1 ** 2 * X2 ** 2


def test_pushforward_examples():
    phi = ops.DiffeoWithInverse([X / (1 - X)], [X / (X + 1)], R1)
    assert ops.pushforward(ode(0, 1), phi) == ode(0, (X + 1) ** 2)
    A = random_ode(random.Random(1), 3)
    assert ops.pushforward(A, ops.DiffeoWithInverse.identity(R1)) == A


def test_pushforward_is_defined_by_composition():
    rng = random.Random(2)
    A = random_ode(rng, 3)
    phi = mobius(rng, R1)
    f = X ** 4 + X + 2
    assert ops.pushforward(A, phi).apply(phi.push(f)) == phi.push(A.apply(f))
    B = DiffOperator({(2, 0): X2, (1, 1): X1, (0, 1): 1}, R2)
    psi = triangular_map(rng, R2)
    g = X1 ** 2 * X2 + X2 ** 3
    assert ops.pushforward(B, psi).apply(psi.push(g)) == psi.push(B.apply(g))


def test_bad_map_is_rejected():
    with pytest.raises(ValueError):
        ops.DiffeoWithInverse([X + 1], [X + 2], R1)


def test_automorphism_action_conjugates():
    A = random_ode(random.Random(3), 2)
    phi = ops.DiffeoWithInverse.identity(R1)
    g = X ** 2 + 1
    w = ops.AutomorphismWitness(phi, g)
    assert ops.automorphism_action(A, w) == A.conjugate(g.inverse())
    with pytest.raises(ValueError):
        ops.AutomorphismWitness(phi, 0)


# ordinary operators -------------------------------------------------------------------

def test_ode_invariants_mobius_naturality():
    rng = random.Random(4)
    for k in (2, 3, 4):
        A = random_ode(rng, k)
        phi = mobius(rng, R1)
        ia, ib = ops.ode_invariants(A), ops.ode_invariants(ops.pushforward(A, phi))
        ca, cb = dict(ia.catalog()), dict(ib.catalog())
        assert ca.keys() == cb.keys() and all(phi.pull(cb[nm]) == ca[nm] for nm in ca)


def test_ode_auto_invariants_are_gauge_invariant():
    rng = random.Random(5)
    A = random_ode(rng, 3)
    g = X ** 3 + X + 5
    a, b = ops.ode_invariants(A, ops.AUTO), ops.ode_invariants(A.conjugate(g), ops.AUTO)
    assert dict(a.catalog()) == dict(b.catalog())
    # the diffeo-mode sigma_0 does change under conjugation
    assert ops.ode_invariants(A).sigma0 != ops.ode_invariants(A.conjugate(g)).sigma0


def test_ode_lambda_needs_sigma1():
    inv = ops.ode_invariants(ode(1, X, X ** 2))
    assert not inv.lambda_defined and inv.lam == {}
    assert [n for n, _ in inv.catalog()] == ["sigma_0"]
    with pytest.raises(ValueError):
        ops.ode_invariants(DiffOperator({(1, 0): 1}, R2))


def test_scalar_shadow_is_gauge_invariant():
    A = random_ode(random.Random(6), 3)
    g = X ** 2 - X + 3
    assert ops.scalar_shadow(A) == ops.scalar_shadow(A.conjugate(g))
    assert ops.scalar_shadow(A).principal_symbol() == A.principal_symbol()


# symbols of constant type in the plane ----------------------------------------------------

def test_coframe_of_flat_symbol_is_torsion_free():
    with pytest.raises(ops.TorsionFreeError):
        ops.constant_type_coframe(SymTensor(2, 3, CONTRAVARIANT, SHEAR, R2))


def test_irregular_and_regular_coframes():
    assert not ops.constant_type_coframe(plane_symbol("shear", SHEAR)).regular
    cf = ops.constant_type_coframe(plane_symbol("twist", SHEAR))
    assert cf.regular
    with pytest.raises(ops.GateError):
        ops.symbol_invariants(plane_symbol("shear", SHEAR), ops.constant_type_coframe(plane_symbol("shear", SHEAR)))


def test_symbol_invariants_reconstruct_symbol():
    s = plane_symbol("twist", SHEAR)
    cf = ops.constant_type_coframe(s)
    J = ops.symbol_invariants(s, cf)
    back = [[cf.frame[a][i] for a in range(2)] for i in range(2)]
    assert SymTensor(2, 3, CONTRAVARIANT, J, R2).substitute(back) == s


def test_symbol_invariants_are_natural():
    s = plane_symbol("twist", SHEAR)
    phi = triangular_map(random.Random(7), R2)
    J = ops.symbol_invariants(s, ops.constant_type_coframe(s))
    ps = ops.push_tensor(s, phi)
    Jp = ops.symbol_invariants(ps, ops.constant_type_coframe(ps))
    assert all(phi.pull(Jp[a]) == J[a] for a in J)


def test_constant_coefficients_are_not_general_type():
    A = ode(1, 2, 3)
    with pytest.raises(ops.NotGeneralTypeError):
        ops.natural_model(A, sample_count=2)


def test_natural_model_is_deterministic():
    A = random_ode(random.Random(8), 3)
    a, b = ops.natural_model(A, sample_count=3, seed=2), ops.natural_model(A, sample_count=3, seed=2)
    assert a.to_json() == b.to_json() and len(a.values) == 3


# verdicts ------------------------------------------------------------------------------

def test_identical_operators_are_witnessed():
    A = random_ode(random.Random(9), 3)
    assert ops.equivalence_verdict(A, A).verdict == "equivalent-witnessed"


def test_order_mismatch():
    v = ops.equivalence_verdict(ode(1, X, 1), ode(1, X, 1, 1))
    assert v.verdict == "fingerprints-differ" and v.report["mismatch"]["invariant"] == "order"


def test_sigma1_mismatch_is_named():
    v = ops.equivalence_verdict(ode(X, 0, 1), ode(X, 1, 1))
    assert v.verdict == "fingerprints-differ" and v.report["mismatch"]["invariant"] == "sigma_1"


def test_failed_witness_does_not_decide():
    rng = random.Random(10)
    A = random_ode(rng, 3)
    phi = mobius(rng, R1)
    B = ops.pushforward(A, phi)
    v = ops.equivalence_verdict(A, B, witness=ops.DiffeoWithInverse.identity(R1), sample_count=3)
    assert "witness_failed" in v.report and v.verdict != "fingerprints-differ"


def test_auto_witness():
    rng = random.Random(11)
    A = random_ode(rng, 2)
    w = ops.AutomorphismWitness(mobius(rng, R1), X ** 2 + 1)
    v = ops.equivalence_verdict(A, ops.automorphism_action(A, w), mode=ops.AUTO, witness=w)
    assert v.verdict == "equivalent-witnessed" and "topology" in v.report


# relative invariants and normalization -------------------------------------------------------

def _normal_operator():
    s = plane_symbol("shear", SHEAR)
    rng = random.Random(1212)
    while True:
        lower = DiffOperator({(2, 0): random_poly(rng, R2, 1), (0, 1): random_poly(rng, R2, 2),
                              (1, 0): random_poly(rng, R2, 1), (0, 0): random_poly(rng, R2, 2) + 3}, R2)
        A = DiffOperator.from_symbol(s) + lower
        try:
            d = cn.chern_regular_data(A)
        except ValueError:
            continue
        if d.dimcond and d.transversecond:
            return A, d


def test_relative_invariants_scale():
    A, d = _normal_operator()
    f = X1 - X2 * 2 + 5
    H, Hf = ops.relative_invariants(A, d), ops.relative_invariants(A.scale(f))
    assert H[1].is_zero()
    for i in H:
        assert Hf[i] == H[i] * f ** (i + 1)


def test_normalization_low_indices_fail():
    A, d = _normal_operator()
    for i in (0, 1):
        with pytest.raises(ops.NormalizationError):
            ops.normalize_equation(A, i, d)
    with pytest.raises(ops.NormalizationError):
        ops.normalize_equation(A, A.order, d)
    N = ops.normalize_equation(A, 2, d)
    assert ops.normalize_equation(N, 2) == N
