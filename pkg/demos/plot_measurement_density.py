"""
Which record is most probable?
==============================

For constant records a(t) = c the probability density of the record peaks
near the time average of the unmonitored classical path. A coarser device
(larger delta_a) flattens the profile.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from paultrap import SCALED, MeasurementRecord, complex_classical_path, from_mathieu_parameters, record_sweep

coeffs = from_mathieu_parameters(1.0, 0.3, g=0.2)
T, xa, xb = 2.0, 0.3, -0.1

# %%
free = complex_classical_path(coeffs, MeasurementRecord.unmonitored(0.0, T), xa, xb, SCALED)
t = np.linspace(0, T, 2001)
mean = np.trapezoid(free.path(t).real, t) / T

levels = np.linspace(-1.0, 1.5, 101)
fig, ax = plt.subplots(figsize=(6, 4))
for da in (0.5, 1.0, 2.0):
    rows = record_sweep(coeffs, [MeasurementRecord.constant(0.0, T, da, c) for c in levels], xa, xb, SCALED)
    ld = np.array([r.log_density for r in rows])
    ax.plot(levels, ld - ld.max(), label=f"delta_a = {da}")
ax.axvline(mean, color="k", ls=":", label="mean of free path")
ax.set_xlabel("record level c")
ax.set_ylabel("log density (peak = 0)")
ax.set_ylim(-6, 0.5)
ax.legend()
fig.savefig("measurement_density.png", dpi=120)
