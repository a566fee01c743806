"""Secret bits from quantum correlations.

Compares the fixed-basis, adversarial one-way and adversarial two-way
asymptotic rates, the single-shot key length at several failure
probabilities, and the three-task triangle for n copies.

Run: python demos/key_rates.py
"""

import numpy as np

from decolab import security as sec, states as st
from decolab.discord import BasisOptimizerConfig
from decolab.infotypes import standard_basis

cfg = BasisOptimizerConfig(restarts=4, seed=0)
rng = np.random.default_rng(7)
z = standard_basis(2)
bell = st.bell_state().matrix

for t in (1.0, 0.8, 0.5):
    rho = st.DensityOperator(t * bell + (1 - t) * np.eye(4) / 4, (2, 2))
    rates = [sec.secure_rate(rho, m, z if m == sec.FIXED_BASIS else None, cfg).asymptotic_rate for m in sec.MODES]
    print(f"visibility {t:.1f}: " + ", ".join(f"{m}={r:.4f}" for m, r in zip(sec.MODES, rates)))

print("\nsingle-shot key length for one Bell pair")
for delta in (0.5, 0.25, 0.1):
    r = sec.single_shot_length(st.bell_state(), delta, cfg=cfg)
    print(f"  delta={delta:<5} length={r.single_shot_length}  exact={r.diagnostics['length_exact']:.4f}")

print("\nthree tasks on 10 copies of a random state, standard basis")
tri = sec.task_triangle(st.random_state(dims=(2, 2), seed=rng), z, 10)
print(f"  exponents {tuple(round(e, 6) for e in tri.exponents)}, success probability {tri.probability:.3e}")
