# Affine connections attached to a symbol of constant type

# %%
from invforge import connections as cn
from invforge.jets import CONTRAVARIANT, SymTensor, coordinate_ring, frame_symbol
from invforge.algebra import RatFunc

R1 = coordinate_ring(1)
x = RatFunc(R1.var("x"))

# %% for an ordinary operator a(x) d^k the Wagner connection is -a'/(k a)
W = cn.wagner_solve(SymTensor(1, 3, CONTRAVARIANT, {(3,): x}, R1))
print("Gamma =", W.gamma[0][0][0])

# %% a plane symbol built from a non-holonomic frame
R2 = coordinate_ring(2)
x1, x2 = (RatFunc(v) for v in R2.coord_vars())
frame = [[1, x2], [x1 * x1, 1]]
s = frame_symbol(frame, {(3, 0): 1, (0, 3): 1, (1, 2): 2}, R2)
print("symbol:", s)
W = cn.wagner_solve(s)
print("symbol is parallel:", all(cn.cov_derivative_symbol(s, W, i).is_zero() for i in range(2)))
print("flat:", cn.is_flat(W))

# %% torsion form, and the Chern connection which removes it
T, theta = cn.torsion(W)
print("torsion form:", theta)
C = cn.chern_connection(s)
print("Chern torsion form:", cn.torsion(C)[1])
print("unchanged by conformal rescaling:", cn.chern_connection(s.scale((x1 + 3) ** 2)) == C)
