"""
Packing lines on the complex Grassmannian
=========================================

A noncoherent receiver cannot tell x from e^(j*theta) x, so the real
alphabet is a set of one-dimensional subspaces (lines) in C^T. Good
alphabets keep the lines far apart in chordal distance

    d(x, y) = sqrt(1 - |x^H y|^2),

which directly controls pairwise error probability under unknown
phase and fade. This walkthrough designs a 64-line packing in C^4 by
smoothed coherence descent and compares it against random packings.
"""

import numpy as np

from grasslink import design_codebook, min_distance, random_codebook, save_codebook

T, K = 4, 64

# Baseline: the best of 20 random unit-vector packings.
best_random = max(
    min_distance(random_codebook(T, K, np.random.default_rng(seed)))
    for seed in range(20)
)
print(f"best of 20 random packings: min distance {best_random:.4f}")

# The descent minimizes a soft maximum of pairwise coherences. The
# sharpness parameter beta grows on a schedule, so early iterations see
# a smooth landscape and late ones approach the true worst pair.
cb = design_codebook(T, K, iterations=1000, seed=42)
print(f"designed packing:           min distance {cb.min_distance():.4f}")

# The objective trace records every accepted step. Within one beta
# stage the surrogate decreases monotonically; jumps can only happen
# when beta changes.
trace = cb.meta["objective_trace"]
stages = {}
for iteration, beta, value in trace:
    stages.setdefault(beta, []).append(value)
print(f"accepted steps: {len(trace)} across {len(stages)} beta stages")
for beta, values in stages.items():
    drop = values[0] - values[-1]
    print(f"  beta {beta:6.0f}: {len(values):4d} steps, objective fell {drop:.3e}")

# Rate bookkeeping: K = 64 codewords in T = 4 slots carry
# log2(64) / 4 = 1.5 bits per channel use without any pilot overhead.
print(f"spectral efficiency: {cb.bits_per_codeword / cb.T:.2f} bits/symbol")

# The text format round-trips through save/load at 1e-12 precision.
save_codebook("codebook_T4K64.txt", cb)
print("saved to codebook_T4K64.txt")
