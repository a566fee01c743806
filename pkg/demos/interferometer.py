"""Which-path information in a two-path interferometer.

A photon's path qubit has coherence v/2 between the two arms.  Whatever the
environment learned about the path is exactly the coherence that is gone, and
the same number shows up as the average certainty of a random
phase-sensitive (mutually unbiased) measurement.

Run: python demos/interferometer.py
"""

import numpy as np

from decolab import theorems as th

print(f"{'v':>5} {'|rho01|^2':>10} {'H_Q(Z|E)/2':>11} {'<C_Q(W)>/2':>11} {'+/- 3 SE':>9}")
for v in np.linspace(0.0, 1.0, 5):
    prof = th.interferometer_profile(v, samples=20_000, seed=1)
    print(f"{v:5.2f} {prof['coherence_sq']:10.5f} {prof['missing_quad'] / 2:11.5f} "
          f"{round(prof['mu_certainty'] / 2, 5) + 0.0:11.5f} {1.5 * prof['std_error']:9.5f}")

# full visibility: no path information leaked, fringes fully visible
# zero visibility: the environment knows the path, the fringes are gone
