# # Decay rates and the Gauss-kernel profile
#
# For a Dini modulus and small data the solution decays like the heat
# semigroup: ||u||_inf ~ t^(-n/2), ||u||_2 ~ t^(-n/4), and u approaches
# M G(t, x) where M is the data mass plus the total nonlinear mass.

# %%
import numpy as np

from dampedwave import (DataSpec, Grid, ModulusSpec, SolverConfig, data_mass,
                        fill_deviations, fit_series, mass_functional, run)

grid = Grid(1, 4096, 256.0)
data = DataSpec("gaussian", 1.0, 1.0)
times = tuple(np.unique(np.round(np.geomspace(1, 100, 50) / 0.05) * 0.05))
cfg = SolverConfig(dt=0.05, T_max=100.0, eps=0.05, u0=data, u1=data, sample_times=times)
res = run(cfg, ModulusSpec.power(1.0), grid, keep_states=True)
print(res.status, len(res.series), "samples")

# %% [markdown]
# Log-log slopes over the last decade.

# %%
for which, target in (("Linf", -0.5), ("L2", -0.25), ("H2dot", -1.25)):
    fit = fit_series(res.series, which, (10.0, 100.0))
    print(f"{which:6s} slope {fit.slope:+.3f}  (heat rate {target:+.2f}, R2 {fit.r2:.5f})")

# %% [markdown]
# The mass functional converges, and the scaled deviations from M G shrink.

# %%
mass = mass_functional(res.series, data_mass(cfg, grid))
print(f"M = {mass.M:.6f}, data part {data_mass(cfg, grid):.6f}, tail {mass.tail_increment:.2e}")
fill_deviations(res.series, res.states, grid, mass.M)
for smp in res.series.samples[::10]:
    print(f"t={smp.t:7.2f}  devLinf={smp.devLinf:.3e}  devH2={smp.devH2:.3e}")
