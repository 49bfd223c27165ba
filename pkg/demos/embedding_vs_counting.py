"""Does a spectral embedding recover the threshold that exact error analysis picks?

Same two-community model. For each threshold we observe the graph through
the errorful channel, embed it with the adjacency spectral embedding, train
Fisher's discriminant on the labeled vertices and score one held-out vertex.
The Monte Carlo curve is compared with the exact error of the counting rule.

Run:  python demos/embedding_vs_counting.py [trials]
"""

import sys

import numpy as np

from egl.embed import ase, mc_embedding_error
from egl.exact_error import balanced_two_block_error
from egl.model import beta_feature_model, demo_block_model, errorful_block_matrix, rates_along_tau
from egl.sim import sample_sbm

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
bm = demo_block_model()
fm = beta_feature_model()
kappa = 3.45

# One clean draw first: the top two eigenvectors separate the blocks.
g = sample_sbm(bm, seed=5, counts=[25, 26])
Z = ase(g.adjacency, 2).Z_hat
print("block centroids of the clean embedding:")
for k in (0, 1):
    print(f"  block {k}: {np.round(Z[g.labels == k].mean(axis=0), 3)}")

taus = np.round(np.arange(0.40, 0.801, 0.05), 2)
curve = mc_embedding_error(bm, fm, kappa, taus, trials=trials, seed=0)

print(f"\nkappa={kappa}, {trials} trials per threshold")
print("  tau   exact(count)  embedding  (se)")
for t, L, s in zip(taus, curve.L_hat, curve.se):
    Bt = errorful_block_matrix(bm, rates_along_tau(fm, kappa, t))
    exact = balanced_two_block_error(25, Bt[0, 0], Bt[0, 1])
    print(f"  {t:.2f}  {exact:.4f}        {L:.4f}     ({s:.4f})")
print(f"embedding argmin tau = {curve.argmin_tau:.2f}")
print("The embedding curve is flat near its minimum, so a few thousand trials")
print("only locate it to within a couple of grid steps.")
