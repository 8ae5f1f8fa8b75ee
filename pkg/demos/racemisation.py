"""Collision ensembles started on the chiral attractor.

Mean time between collisions is ten relaxation times. Below mu = 3 the
ensemble loses its handedness; above it nearly every molecule keeps it.
"""

from chiralwell import CollisionProcess, ModelParams, PhaseState, asymmetric_fixed_point, ensemble_run
from chiralwell import relaxation_time

N, HORIZON_TAU = 200, 500

for mu in (1.5, 4.5):
    p = ModelParams(mu=mu, zeta=0.2)
    rt = relaxation_time(p)
    start = PhaseState(*asymmetric_fixed_point(mu, 0.2))
    res = ensemble_run(N, start, p, CollisionProcess(rate=0.1 / rt, seed=7), HORIZON_TAU * p.tau,
                       sample_interval=50 * p.tau)
    print(f"mu = {mu}: relaxation time {rt / p.tau:.2f} tau, {res.total_events} collisions")
    for t, m, se in zip(res.t / p.tau, res.mean_chirality, res.mean_chirality_se):
        print(f"  t = {t:5.0f} tau   <z> = {m:+.3f} +/- {se:.3f}")
    print(f"  survival fraction {res.survival_fraction:.3f}")
