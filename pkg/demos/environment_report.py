"""
Order-of-magnitude environment check
====================================

Compares the third-order Earth-field term g x^3 / R^2 with the Newtonian
potential of a 1 g neighbour at 0.1 mm, both per unit particle mass. The
two numbers are reported side by side; no claim is made about which wins.
"""
from paultrap import SI, TrapInput, environment_report

trap = TrapInput(charge=1.602e-19, mass=6.6e-26, half_distance=1e-3, dc_amplitude=2.0,
                 ac_amplitude=300.0, omega=6.283e6, source_mass=5.972e24, source_distance=6.371e6)
for x in (1e-6, 1e-3, 1e-1):
    rep = environment_report(trap, x, 1e-3, 1e-4, SI)
    print(f"x = {x:7.0e} m  third order {rep.third_order:.3e}  neighbour {rep.neighbor:.3e}  "
          f"decades apart {rep.orders_of_magnitude_apart:.1f}")
