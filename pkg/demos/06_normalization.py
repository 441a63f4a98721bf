# Relative invariants and a canonical normalization in the plane

# %%
from invforge import connections as cn
from invforge import operators as ops
from invforge.algebra import RatFunc
from invforge.diffop import DiffOperator
from invforge.jets import coordinate_ring, frame_symbol

R = coordinate_ring(2)
x1, x2 = (RatFunc(v) for v in R.coord_vars())
s = frame_symbol([[1, 0], [x1 * x1, 1]], {(3, 0): 1, (0, 3): 1, (1, 2): 2}, R)
A = DiffOperator.from_symbol(s) + DiffOperator({(2, 0): x2 + 1, (0, 1): x1 * x2 - 2, (1, 0): x1,
                                                (0, 0): x2 * x2 + 3}, R)

# %% the Chern-regular gate
d = cn.chern_regular_data(A)
print("DimCond:", d.dimcond, "TransverseCond:", d.transversecond)

# %% relative invariants H_i pick up f^(i+1) when A is replaced by f A
H = ops.relative_invariants(A, d)
f = x1 + x2 + 4
Hf = ops.relative_invariants(A.scale(f))
for i, h in H.items():
    print(f"H_{i}: {'zero' if h.is_zero() else 'numerator degree ' + str(h.num.total_degree())}",
          "| scales by f^%d:" % (i + 1), Hf[i] == h * f ** (i + 1))

# %% normalizing on H_2 / H_3 is idempotent and forgets the conformal factor
N = ops.normalize_equation(A, 2, d)
print("idempotent:", ops.normalize_equation(N, 2) == N)
print("conformal:", ops.normalize_equation(A.scale(f), 2) == N)
