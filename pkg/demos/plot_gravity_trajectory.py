"""
A trapped particle falling in a second-order gravity field
==========================================================

Gravity enters the trap equation twice: as the constant forcing g and as
the shift -2g/R of the static coefficient. The forcing displaces the orbit,
so the motion is no longer a pure Floquet solution about the origin.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from paultrap import SCALED, TrapInput, derive_coefficients, simulate

# %%
# Scaled units (hbar = G = 1). The source is close enough for 2g/R to matter.
trap = TrapInput(charge=1.0, mass=1.0, half_distance=1.0, dc_amplitude=0.5, ac_amplitude=0.6,
                 omega=2.0, source_mass=0.2, source_distance=4.0)
with_g = derive_coefficients(trap, SCALED)
no_g = derive_coefficients(TrapInput(**{**trap.to_dict(), "source_mass": 0.0}), SCALED)
print("U, V, g with source:", with_g.U, with_g.V, with_g.g)

# %%
t = np.linspace(0, 40, 4000)
fig, ax = plt.subplots(figsize=(7, 3.5))
for coeffs, label in [(no_g, "g = 0"), (with_g, "with gravity")]:
    tr = simulate(coeffs, 0.2, 0.0, 0.0, 40.0)
    ax.plot(t, tr(t).real, label=label)
ax.axhline(0, color="0.6", lw=0.5)
ax.set_xlabel("t")
ax.set_ylabel("x")
ax.legend()
fig.savefig("gravity_trajectory.png", dpi=120)
