"""Below and above the stability threshold mu = 3: kick the chiral attractor and watch.

Run with ``python demos/regimes.py``.
"""

import numpy as np

from chiralwell import IntegrationConfig, ModelParams, PhaseState, apply_kick, asymmetric_fixed_point
from chiralwell import chirality_criterion, integrate_phase

KICKS = np.linspace(-np.pi, np.pi, 65)[1:]

for mu in (1.5, 4.5):
    p = ModelParams(mu=mu, zeta=0.2)
    z3, th3 = asymmetric_fixed_point(mu, 0.2)
    crit = chirality_criterion(mu, 0.0)
    flipped = 0
    for dth in KICKS:
        tr = integrate_phase(apply_kick(PhaseState(z3, th3), dth), p, IntegrationConfig(t_end=100 * p.tau))
        flipped += tr.final.z < 0
    print(f"mu = {mu}: attractor z3 = {z3:.6f}, theta3 = {th3:.6f}")
    print(f"  margin z3 - z* = {crit.margin:+.4f}; {flipped}/{len(KICKS)} kicks end in the mirror well")
