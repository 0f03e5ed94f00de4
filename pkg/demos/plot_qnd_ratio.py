"""
The nondemolition ratio and its poles
=====================================

F(t) = -m X'/X diverges wherever the trap solution X crosses zero. Between
poles it satisfies the Riccati condition to integration accuracy.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from paultrap import CoefficientFunction, canonical_ratio, from_mathieu_parameters, integrate, qnd_residual

coeffs = from_mathieu_parameters(0.5, 0.3, g=0.5)
X = integrate(CoefficientFunction.from_coefficients(coeffs), 0.0, 12.0, 1.0, 0.0)
ratio = canonical_ratio(X, coeffs.mass, times=np.linspace(0, 12, 3000))
rep = qnd_residual(ratio, coeffs, report=True)
print(f"residual {rep.residual_max:.2e}, poles at {np.round(rep.pole_times, 4)}")

# %%
fig, ax = plt.subplots(figsize=(7, 3.5))
r = np.where(np.abs(ratio.ratio) < 20, ratio.ratio, np.nan)
ax.plot(ratio.times, r)
for p in rep.pole_times:
    ax.axvline(p, color="r", lw=0.5)
ax.set_xlabel("t")
ax.set_ylabel("F(t)")
fig.savefig("qnd_ratio.png", dpi=120)
