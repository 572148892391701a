# # The damped wave kernel
#
# Per Fourier mode the linear equation is B'' + B' + |xi|^2 B = 0.  With
# B(0) = 0, B'(0) = 1 its solution K(t, |xi|) is over-damped for |xi| < 1/2
# and oscillating for |xi| > 1/2.  The seam at 1/2 is a removable
# singularity, handled by a short Taylor series.

# %%
import math

import numpy as np

from dampedwave import (Grid, kernel_symbol, linear_propagate, propagator_matrix,
                        state_from_physical)

xi = np.linspace(0.0, 2.0, 9)
for t in (0.5, 2.0, 8.0):
    print(f"t={t:4.1f}", np.array2string(kernel_symbol(t, xi), precision=5))

# %% [markdown]
# At the seam the symbol equals t e^{-t/2}; nearby it moves smoothly.

# %%
for t in (0.1, 1.0, 10.0):
    near = [kernel_symbol(t, 0.5 + d) for d in (-1e-3, -1e-5, 0.0, 1e-5, 1e-3)]
    print(f"t={t:5.1f} seam value {t * math.exp(-t / 2):.8f}", np.round(near, 8))

# %% [markdown]
# The low modes dominate at large times: they decay like e^{-|xi|^2 t}, which is
# the diffusion phenomenon in one line.

# %%
for t in (10.0, 40.0):
    for x in (0.05, 0.1, 0.2):
        print(f"t={t:4.0f} |xi|={x:.2f}  K={kernel_symbol(t, x):.5f}  e^(-xi^2 t)={math.exp(-x * x * t):.5f}")

# %% [markdown]
# The 2x2 propagator is a semigroup.

# %%
def mat(t, x):
    return np.array(propagator_matrix(t, x), dtype=float).reshape(2, 2)


print(np.abs(mat(0.7, 1.3) @ mat(1.1, 1.3) - mat(1.8, 1.3)).max())

grid = Grid(1, 256, 32.0)
u = np.exp(-grid.x**2)
s = state_from_physical(grid, u, np.zeros(grid.shape))
print("mass after t=5:", linear_propagate(s, 5.0, grid).u_hat[0].real * grid.dx)
