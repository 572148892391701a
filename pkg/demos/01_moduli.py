# # Moduli of continuity
#
# The nonlinearity is |u|^(1 + 2/n) mu(|u|).  Whether small data give global
# solutions depends on the Dini integral of mu near zero; when it diverges,
# the lifespan is governed by Psi(R) = int_1^R mu(C r^(-n/2)) dr / r.

# %%
import math

import numpy as np

from dampedwave import (ModulusSpec, derivative_ratio, dini_integral, eval_mu,
                        is_dini, psi, psi_inverse)

specs = {
    "power k=1": ModulusSpec.power(1.0),
    "logpower g=2": ModulusSpec.logpower(2.0),
    "logpower g=1": ModulusSpec.logpower(1.0),
    "iterlog g=1": ModulusSpec.iterlog(1.0),
    "constant m=1": ModulusSpec.constant(1.0),
}

# %% [markdown]
# Each profile is continued by a constant past its cap point s0, so it stays
# non-decreasing and concave on the whole half line.

# %%
s = np.array([1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0])
for name, spec in specs.items():
    print(f"{name:14s} s0={spec.s0:.4f}  mu(s) =", np.array2string(eval_mu(spec, s), precision=4))

# %% [markdown]
# Dini classification and the integral itself where it converges.

# %%
for name, spec in specs.items():
    if is_dini(spec):
        print(f"{name:14s} Dini, int_0^0.1 mu(s)/s ds = {dini_integral(spec, 0.1):.6f}")
    else:
        print(f"{name:14s} not Dini")

# %% [markdown]
# The derivative condition s|mu'(s)| <~ mu(s) holds with a small constant.

# %%
grid = np.geomspace(1e-12, 0.01, 200)
for name, spec in specs.items():
    print(f"{name:14s} max s|mu'|/mu = {derivative_ratio(spec, grid):.4f}")

# %% [markdown]
# Psi grows like log R for the pure power and like 2 log log R for the
# logarithmic modulus; it stays bounded for Dini moduli.

# %%
for R in (10.0, 1e3, 1e6, 1e12):
    row = "  ".join(f"{psi(spec, R, 1.0, 2):8.4f}" for spec in specs.values())
    print(f"R = {R:7.0e}  {row}")

# %%
for y in (0.5, 2.0, 5.0):
    R = psi_inverse(specs["logpower g=1"], y, 1.0, 2)
    print(f"Psi^-1({y}) for logpower g=1: R = {R:.6g} (log R = {math.log(R):.3f})")
