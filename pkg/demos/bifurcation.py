"""Pitchfork at mu = 1 and the separatrix extent that decides stability at mu = 3."""

import numpy as np

from chiralwell import bifurcation_scan, chirality_criterion

table = bifurcation_scan((0.5, 6.0), 0.2, 12)
print("   mu     z3     theta3   origin")
for mu, z3, th3, st in zip(table.mu, table.z3, table.theta3, table.even_stability):
    print(f"{mu:5.2f}  {z3:6.4f}  {th3:7.4f}  {st.value}")

print("\n   mu   z3(zeta=0)  z*     margin")
for mu in np.arange(1.5, 6.01, 0.5):
    r = chirality_criterion(float(mu), 0.0)
    print(f"{mu:5.2f}  {r.z3:9.4f}  {r.z_star:6.4f}  {r.margin:+.4f}")
