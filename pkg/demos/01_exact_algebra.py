# Exact rational functions, linear solves and resultants
#
# Everything in invforge is exact: coefficients are rationals and every
# rational function is stored in one canonical reduced form.

# %%
from fractions import Fraction

from invforge.algebra import RatFunc, RFMatrix, Ring, resultant, rf_linear_solve

R = Ring(("x", "y"))
x, y = (RatFunc(v) for v in R.gens())

# %% canonical form: equal functions print identically
f = (x ** 2 - y ** 2) / (x * 2 - y * 2)
print("f =", f)
print("f == (x + y)/2:", f == (x + y) / 2)
print("df/dx =", f.diff("x"))

# %% evaluation stays rational
print("f(1/3, 5/7) =", f.eval({"x": Fraction(1, 3), "y": Fraction(5, 7)}))

# %% solving a linear system over the function field
M = RFMatrix([[x, y], [RatFunc.const(R, 1), x + 1]], R)
sol = rf_linear_solve(M, [x * y, y]).col(0)
print("solution:", [str(s) for s in sol])
print("det M =", M.det())

# %% resultants, two independent routes
T = Ring(("t", "a", "b"))
t, a, b = T.gens()
p, q = t ** 2 - a, t - b
print("Res_t(t^2 - a, t - b) =", resultant(p, q, "t"))
print("Sylvester route agrees:", resultant(p, q, "t") == resultant(p, q, "t", method="sylvester"))
