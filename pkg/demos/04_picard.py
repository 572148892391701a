# # Picard iteration
#
# The mild solution is the fixed point of
#     Phi[u](t) = u_lin(t) + int_0^t K(t - s) * N(u(s)) ds.
# Starting from u = 0, the iterates contract quickly for small data and the
# limit coincides with the time-stepping solver.

# %%
import numpy as np

from dampedwave import (DataSpec, Grid, ModulusSpec, SolverConfig, inverse_transform,
                        lq_norm, picard_solve, run)

grid = Grid(1, 1024, 64.0)
data = DataSpec("gaussian", 1.0, 1.0)
spec = ModulusSpec.power(1.0)
for eps in (0.02, 0.2, 0.5):
    cfg = SolverConfig(dt=0.05, T_max=10.0, eps=eps, u0=data, u1=data)
    rep = picard_solve(cfg, spec, grid, 5)
    ref = inverse_transform(run(cfg, spec, grid).state.u_hat, grid)
    gap = lq_norm(inverse_transform(rep.final_u_hat, grid) - ref, grid, 2) / lq_norm(ref, grid, 2)
    print(f"eps={eps:4.2f} ratios", np.array2string(np.array(rep.ratios), precision=2),
          f" gap to stepper {gap:.1e}")

# %% [markdown]
# The contraction ratio grows with the amplitude, as the fixed-point bound
# suggests; it stays far below 1/2 in the small-data regime.
