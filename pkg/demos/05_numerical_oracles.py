"""The verification suites behind `perpca check`, narrated.

Run: python demos/05_numerical_oracles.py
"""

import numpy as np

from perpca import checks, metrics

# The closed-form eigenvalue floor for the conjugated block-arrowhead
# quadratic form: zero at theta=0, one at theta=1, always below theta.
print("eigenvalue floor ell(theta):")
for theta in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  theta={theta:4.2f} -> {metrics.arrowhead_min_eig_bound(theta):.6f}")

# In the scalar configuration the floor is attained exactly.
print("\nscalar tight case (m=1, N=1, b^2 = 1-theta):")
for theta in (0.2, 0.5, 0.8):
    b = np.array([[np.sqrt(1.0 - theta)]])
    lam, floor = metrics.arrowhead_min_eig(b, 1)
    print(f"  theta={theta}: lambda_min={lam:.12f}, floor={floor:.12f}, "
          f"gap={lam - floor:.2e}")

# A random instance: the floor holds with slack.
rng = np.random.default_rng(3)
B = rng.standard_normal((4, 12))
B *= np.sqrt(0.6 / np.linalg.eigvalsh(3 * B @ B.T)[-1])  # theta = 0.4
lam, floor = metrics.arrowhead_min_eig(B, 3)
print(f"\nrandom 4x12 block, N=3: lambda_min={lam:.6f} >= floor={floor:.6f}")

# The full randomized suites, as the command line runs them.
print("\nfull suites:")
for report in checks.run_suites(seed=0):
    print(" ", report.line())
