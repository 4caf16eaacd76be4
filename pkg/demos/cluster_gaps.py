# %% [markdown]
# Robin-Neumann gaps of a single cluster, and how their distribution
# settles as the degree grows.

# %%
import numpy as np

from hemirobin.boundary import constant, from_terms
from hemirobin.cluster import cluster_trace, gap_spectrum
from hemirobin.density import empirical_vs_limit, parse_test_function, rho_density

sigma = from_terms({0: 1.0, 2: 0.5})  # 1 + cos 2phi

# %%
# the gaps of cluster l are the eigenvalues of an (l+1)-dimensional matrix
for ell in [4, 16, 64]:
    g = gap_spectrum(sigma, ell).gaps
    print(f"l={ell:3d}  min={g.min():.4f}  max={g.max():.4f}  mean={g.mean():.4f}")

# %%
# the trace is c_0 * sum A^2, so the mean gap tends to 2 c_0 for constant sigma
for ell in [50, 100, 400]:
    print(ell, cluster_trace(constant(1.0), ell) / (ell + 1))

# %%
# empirical averages of f(gap) against the limit functional
f = parse_test_function("x^2*bump(6)")
rep = empirical_vs_limit(sigma, f, [50, 100, 200, 400])
print("limit", rep.limit)
for ell, e, d in zip(rep.ells, rep.empirical, rep.deviations):
    print(f"l={ell:3d}  empirical={e:.6f}  |deviation|={d:.2e}")

# %%
# the limiting gap density; it has a log peak at the extrema of 4 sigma / pi
ys = np.linspace(0.2, 3.0, 15)
for y in ys:
    print(f"y={y:.2f}  rho={rho_density(sigma, y):.5f}")
