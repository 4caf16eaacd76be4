# %% [markdown]
# On [0, 1] the Robin gaps tend to 2 sigma, while a potential sigma/eps on
# (0, eps) gives gaps tending to sigma, even though it converges to the
# Robin problem mode by mode.

# %%
import math

from hemirobin.sl1d import robin_eigenvalue, step_eigenvalue

sigma = 1.0
for n in [10, 50, 200]:
    lam = robin_eigenvalue(sigma, n) - (math.pi * (n - 1)) ** 2
    mu = step_eigenvalue(sigma, 0.1, n) - (math.pi * (n - 1)) ** 2
    print(f"n={n:4d}  robin gap={lam:.4f}  step gap={mu:.4f}")

# %%
# fixed mode, shrinking step: mu -> lambda
lam10 = robin_eigenvalue(sigma, 10)
for eps in [0.1, 0.05, 0.025, 0.0125]:
    print(eps, step_eigenvalue(sigma, eps, 10) - lam10)
