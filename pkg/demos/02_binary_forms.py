# GL(2) invariants of binary forms and their characteristic curves

# %%
from fractions import Fraction

from invforge import glinv
from invforge.jets import HomogeneousForm, coordinate_ring

R = coordinate_ring(2)
x, y = R.gens()
cubic = HomogeneousForm(x ** 3 + y ** 3)

# %% the absolute invariants of the cubic
b = glinv.binary_invariants(cubic)
print("K2 =", b.K2)
print("K3 =", b.K3)
print("J3 =", b.J3)
print("J3(1, 2) =", b.J3.eval({"x1": 1, "x2": 2}))

# %% the invariant frame: its Christoffel symbols are constant or invariant
for key, v in sorted(glinv.binary_frame_christoffels(cubic).items()):
    print("Gamma", key, "=", v)

# %% the characteristic curve does not see linear changes of variable
A = [[Fraction(2), Fraction(1)], [Fraction(-1), Fraction(3)]]
moved = cubic.compose_linear(A)
print("moved form:", moved.poly)
print("verdict:", glinv.compare_forms(cubic, moved)[0])

# %% a quartic and a perturbation of it are told apart
q = HomogeneousForm(x ** 4 + y ** 4)
q2 = HomogeneousForm(x ** 4 + y ** 4 + x * y ** 3 * Fraction(1, 7))
print("quartic vs perturbed:", glinv.compare_forms(q, q2)[0])

# %% generic orbit codimensions
for n, k in [(2, 3), (2, 4), (2, 5), (3, 3)]:
    c, exc = glinv.orbit_codimension(n, k)
    print(f"n={n} k={k}: codimension {c}{' (exceptional)' if exc else ''}")
