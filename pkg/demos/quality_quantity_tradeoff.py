"""Where should a fixed labeling budget go: fewer, careful edge calls or many sloppy ones?

Two equal communities of 51 vertices (within-block 0.9, between 0.1). Each
edge feature comes from a Beta(2, kappa) or Beta(kappa, 2) distribution, and
its cost pushes the fraction of pairs we can afford to assess down like
(2 / kappa)^3. We threshold features at tau, then classify a held-out vertex
by counting its edges to each labeled block.

Run:  python demos/quality_quantity_tradeoff.py
"""

import numpy as np

from egl.model import Design, beta_feature_model, demo_block_model
from egl.optimize import (
    bayes_threshold,
    build_surface,
    normal_approx_optimum,
    projection_optimum,
)
from egl.sim import monte_carlo_vertex_error

bm = demo_block_model()
fm = beta_feature_model()

surface = build_surface(bm, fm)
kappa_star, tau_star, L_star = surface.argmin
print(f"exact error surface: {surface.L.shape[0]} kappa values x {surface.L.shape[1]} thresholds")
print(f"best design kappa*={kappa_star:.2f}, tau*={tau_star:.3f}, error {L_star:.4f}")
print(f"  assessed fraction at kappa*: {surface.argmin_dict()['h_kappa_star']:.3f}")

# A cheap classifier (kappa = 2) yields features carrying no information at all.
print(f"error at kappa=2 for every tau: {set(surface.row(2.0).tolist())}")

# Fix the threshold at 0.5 and see how much tuning it buys us.
print(f"best error with tau pinned at 0.5: {surface.column(0.5).min():.4f}")

print("\nthresholds picked by each criterion at kappa*:")
print(f"  exact error          tau = {tau_star:.3f}")
print(f"  normal approximation tau = {normal_approx_optimum(bm, fm, [kappa_star]).tau:.3f}")
print(f"  projection score     tau = {projection_optimum(bm, fm, [kappa_star]).tau:.3f}")
print(f"  Bayes edge rule      tau = {bayes_threshold(bm, fm, kappa_star):.4f}")

# The exact number is a promise about a random experiment; check it.
report = monte_carlo_vertex_error(bm, fm, Design(kappa_star, tau_star), trials=50_000, seed=11)
lo, hi = report.ci95
print(f"\nsimulated error at the optimum: {report.error_rate:.4f}  (95% CI {lo:.4f} to {hi:.4f})")
