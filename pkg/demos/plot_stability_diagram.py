"""
Stability diagram of the trap
=============================

Each point of the (a, q) plane is classified from the eigenvalues of the
one-period monodromy matrix. The lowest tongue boundary is compared with
the small-q series a0(q) = -q^2/2 + 7 q^4/128.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from paultrap import stability_scan

# %%
# A coarse scan; ``jobs`` fans the grid out over processes.
a = np.linspace(-0.6, 1.6, 45)
q = np.linspace(0.0, 1.2, 41)
rows = stability_scan(a, q, jobs=1)
growth = np.log(np.array([r[2] for r in rows])).reshape(len(a), len(q))

# %%
# Stable points have both multipliers on the unit circle (log modulus 0).
fig, ax = plt.subplots(figsize=(6, 4.5))
mesh = ax.pcolormesh(q, a, growth, shading="auto", cmap="magma")
qq = np.linspace(0, 1.2, 200)
ax.plot(qq, -qq**2 / 2 + 7 * qq**4 / 128, "c--", label="small-q series")
ax.set_xlabel("q")
ax.set_ylabel("a")
ax.legend(loc="upper left")
fig.colorbar(mesh, label="log max |multiplier|")
fig.savefig("stability_diagram.png", dpi=120)
print("stable fraction:", np.mean(growth < 1e-9))
