"""Plant shared and local components, run the solver, watch exact recovery.

Run: python demos/02_planted_recovery.py
"""

import numpy as np

from perpca import metrics, model, solver, synth

# Five clients in fifteen dimensions: two shared directions, three local
# directions each, noiseless scores.
spec = synth.GenerativeSpec(
    d=15, N=5, r1=2, r2=3, n_per_client=100,
    global_score_std=1.0, local_score_std=1.0, noise_std=0.0, seed=42,
)
truth = synth.generate_components(spec)
print(f"planted heterogeneity theta = {truth.theta_actual:.3f}")

datasets = synth.generate_observations(truth, spec)
covs = [model.covariance(Y) for Y in datasets]

# The optimal explained variance of a noiseless identifiable instance is
# half the summed covariance traces: everything retained, nothing left.
f_star = 0.5 * sum(np.trace(S) for S in covs)

config = solver.SolverConfig(r1=2, r2=3, rounds=500, seed=0,
                             stop_subspace_tol=1e-10, stepsize_scale=0.25)
state, trace = solver.run_perpca(covs, config, truth=truth)

print(f"{'round':>6s} {'optimality gap':>15s} {'subspace error':>15s} {'kkt':>10s}")
for rec in trace[:: max(1, len(trace) // 12)] + [trace[-1]]:
    gap = max(f_star - rec.objective, 0.0)
    print(f"{rec.round:6d} {gap:15.3e} {rec.subspace_error:15.3e} "
          f"{rec.kkt_global + rec.kkt_local:10.2e}")

print(f"\nstopped after {len(trace)} rounds")
print(f"final subspace error: {metrics.subspace_error(state, truth):.2e}")
print("the optimality gap decays geometrically: linear convergence to the")
print("planted components, and the rate improves with theta.")
