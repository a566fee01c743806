"""Discord measures along a family of Werner-like states.

rho(t) = t |Phi+><Phi+| + (1 - t) I/4 interpolates between a Bell state and
the maximally mixed state.  Every measure vanishes at t = 0 and the
one-way, two-way and geometric variants keep their ordering throughout.

Run: python demos/discord_tour.py
"""

import numpy as np

from decolab import discord as dc, states as st

cfg = dc.BasisOptimizerConfig(restarts=4, seed=0)
bell = st.bell_state().matrix
names = ("two_way_vn", "deficit", "delta_arrow", "geometric", "min_entropy")

print(f"{'t':>5} " + " ".join(f"{n:>12}" for n in names))
for t in np.linspace(0.0, 1.0, 6):
    rho = st.DensityOperator(t * bell + (1 - t) * np.eye(4) / 4, (2, 2))
    prof = dc.discord_profile(rho, cfg, names=names)
    print(f"{t:5.2f} " + " ".join(f"{round(prof[n].value, 6) + 0.0:12.6f}" for n in names))

print("\nclassification of a few states")
rng = np.random.default_rng(0)
for label, rho in [("bell", st.bell_state()), ("product", st.product(st.random_state(dims=(2,), seed=rng),
                                                                     st.random_state(dims=(2,), seed=rng))),
                   ("random", st.random_state(dims=(2, 2), seed=rng))]:
    print(f"  {label:8s} {st.classify(rho):18s} deficit={round(dc.deficit(rho, cfg).value, 6) + 0.0:.6f}")
