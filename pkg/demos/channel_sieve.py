"""How much of each basis does a channel leak to its environment?

The leaked information about Z is H(Z|E) evaluated on the Choi state of the
channel with Z measured on the reference.  A phase-flip channel leaks the
computational basis but keeps every mutually unbiased basis intact.

Run: python demos/channel_sieve.py
"""

import numpy as np

from decolab import channels as ch
from decolab.infotypes import fourier_mu_basis, sample_equivalence_class, standard_basis

z = standard_basis(2)
x = fourier_mu_basis(z)
rng = np.random.default_rng(3)

print("phase flip: information about Z and X left in the environment (bits)")
print(f"{'p':>4} {'Z':>8} {'X':>8} {'1-Hbin(p)':>10}")
for p in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
    c = ch.phase_flip(p)
    hb = 0.0 if p == 0 else -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    print(f"{p:4.1f} {ch.channel_info(c, z):8.5f} {ch.channel_info(c, x):8.5f} {1 - hb:10.5f}")

print("\ndepolarizing qutrit channel, random basis and its MU partners")
zq = sample_equivalence_class(standard_basis(3), rng).basis()
for p in (0.0, 0.5, 1.0):
    c = ch.depolarizing(3, p)
    leaked = ch.channel_info(c, zq)
    kept = min(ch.channel_certainty(c, sample_equivalence_class(zq, rng).basis()) for _ in range(20))
    leaked, kept = round(leaked, 4) + 0.0, round(kept, 4) + 0.0
    print(f"p={p:.1f}  H(Z|E)={leaked:.4f}  min C(W|B) over 20 MU W={kept:.4f}  (leaked >= kept)")

print("\ndecoherence profile of a random channel")
prof = ch.decoherence_profile(ch.random_channel(2, 2, 3, rng), z, samples=5000, seed=4)
for key, val in prof.to_dict().items():
    print(f"  {key}: {val}")
