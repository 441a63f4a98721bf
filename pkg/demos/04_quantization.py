# Quantization: operators as total symbols and back

# %%
from invforge import connections as cn
from invforge.algebra import RatFunc
from invforge.diffop import DiffOperator
from invforge.jets import coordinate_ring

R = coordinate_ring(1)
x = RatFunc(R.var("x"))

# %% the Euler operator x^2 d^2 + x d + 1
A = DiffOperator({(2,): x ** 2, (1,): x, (0,): 1}, R)
W = cn.wagner_solve(A.principal_symbol())
tot = cn.peel(A, W)
for i in (2, 1, 0):
    print(f"sigma_{i} =", tot.sigma(i))

# %% quantizing the total symbol recovers the operator exactly
print("round trip:", cn.quantize(tot, W) == A)

# %% changing the line-bundle connection shifts the subprincipal part
theta = cn.LineConnection([1 / x], R)
shifted = cn.peel(A, W, theta)
print("sigma_1 with theta = 1/x:", shifted.sigma(1))
print("difference equals the contraction of sigma_2:",
      tot.sigma(1) - shifted.sigma(1) == A.principal_symbol().hook(theta.theta))
