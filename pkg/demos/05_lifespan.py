# # Blow-up lifespan
#
# With a non-Dini modulus small data blow up, and the lifespan follows
# Psi(T_eps) ~ eps^(-2/n).  For the pure power (constant modulus) Psi is
# log, so log T_eps is linear in eps^(-2/n).

# %%
import numpy as np

from dampedwave import (DataSpec, Grid, ModulusSpec, SolverConfig, detect_lifespan,
                        lifespan_sweep, run, test_functional)

grid = Grid(1, 2048, 512.0)
data = DataSpec("gaussian", 0.6, 1.0)
cfg = SolverConfig(dt=0.1, T_max=4000.0, u0=data, u1=data)
spec = ModulusSpec.constant(1.0)

tab = lifespan_sweep(cfg, spec, grid, [0.5, 0.7, 0.9, 1.1, 1.3])
for r in tab.rows:
    print(f"eps={r.eps:.1f}  T={r.T:10.3f}  log T={r.PsiT:7.3f}  eps^-2={r.eps ** -2:6.3f}")
print(f"fit slope {tab.fit.slope:.3f}, R2 {tab.fit.r2:.4f}")

# %% [markdown]
# The detection is insensitive to the threshold: the time for sup|u| to go
# from 1e3 to 1e4 is tiny near a blow-up.

# %%
for U in (1e3, 1e4):
    res = detect_lifespan(SolverConfig(dt=0.1, T_max=100.0, u0=data, u1=data,
                                       blowup_threshold=U), spec, grid, eps=1.1)
    print(f"U*={U:.0e}: T={res.T:.4f} (levels {np.round(res.T_levels, 4)})")

# %% [markdown]
# Test-function functionals on a stored trajectory: the data side exceeds
# half the data mass once the cutoff covers the bump, and Y(R) grows.

# %%
eps = 0.5
res = run(SolverConfig(dt=0.1, T_max=32.0, eps=eps, u0=data, u1=data), spec, grid,
          trajectory_every=5)
u0 = eps * data.sample(grid)
for R in (4.0, 8.0, 16.0, 32.0):
    fv = test_functional(res.trajectory, grid, spec, R, u0, u0)
    print(f"R={R:4.0f}  I_R={fv.I_R:.4e}  Y(R)={fv.Y_R:.4e}  data side {fv.data_side:.4f}"
          f" / {fv.data_total:.4f}")
