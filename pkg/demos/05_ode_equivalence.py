# Invariants and equivalence of ordinary differential operators

# %%
from invforge import operators as ops
from invforge.algebra import RatFunc
from invforge.diffop import DiffOperator
from invforge.jets import coordinate_ring

R = coordinate_ring(1)
x = RatFunc(R.var("x"))
A = DiffOperator({(3,): x ** 2 + 1, (1,): x, (0,): x * 2}, R)

# %% invariants under changes of variable
inv = ops.ode_invariants(A)
for name, f in inv.catalog():
    print(name, "=", f)

# %% a Mobius change of variable carries the invariants along
phi = ops.DiffeoWithInverse([(x * 2 + 1) / (x + 3)], [(x * 3 - 1) / (2 - x)], R)
B = ops.pushforward(A, phi)
print("pushed operator:", B)
inb = dict(ops.ode_invariants(B).catalog())
print("natural:", all(phi.pull(inb[n]) == f for n, f in inv.catalog()))

# %% verdicts
print(ops.equivalence_verdict(A, B, witness=phi).verdict)
C = A + DiffOperator({(0,): x}, R)
v = ops.equivalence_verdict(A, C, sample_count=3)
print(v.verdict, v.report.get("mismatch"))
