"""
h-probabilities: Pr[theta > 0 | Z = z] under the fitted prior
=============================================================

Once g(theta) is estimated, Bayes' rule turns any observed statistic
into the probability that the underlying effect is genuinely positive:

    h(z) = Pr[theta > 0 | Z = z] = 1 - local false discovery rate.

h is monotone in z, so "h at the critical value" summarizes how
trustworthy a just-significant result is under the population prior.
"""

import tempfile
from pathlib import Path

import numpy as np

from enfp import (
    FitConfig,
    extract_observations,
    fit_g_path,
    h_curve,
    h_probability,
    render_svg,
    synthesize_corpus,
    z_for_h,
)

# ---------------------------------------------------------------------
# Fit the prior on the synthetic registry corpus
# ---------------------------------------------------------------------
obs = extract_observations(synthesize_corpus(seed=7))
cfg = FitConfig(grid_low=-6.0, grid_high=10.0, basis_df=20,
                penalty_c0=0.01, max_iterations=1500)
model = fit_g_path(obs, cfg, penalty_path=(1.0, 0.25, 0.05))

# ---------------------------------------------------------------------
# Point evaluations at conventional critical values
# ---------------------------------------------------------------------
for z in (1.645, 1.96, 2.576, 0.0, -1.0):
    print(f"h({z:6.3f}) = {h_probability(model, z):.4f}")

# The inverse question: how large must z be before the posterior
# positivity probability clears a floor?
for floor in (0.95, 0.975, 0.99):
    print(f"z needed for h >= {floor}: {z_for_h(model, floor):.4f}")

# ---------------------------------------------------------------------
# The full curve, exported for reports
# ---------------------------------------------------------------------
z_grid = -1.0 + 0.05 * np.arange(101)  # z in [-1, 4]
curve = h_curve(model, z_grid)
outdir = Path(tempfile.mkdtemp(prefix="enfp-demo-"))
curve.to_csv(outdir / "h_curve.csv")
(outdir / "h_curve.svg").write_text(render_svg(curve))
print(f"curve with {curve.z_grid.size} points written under {outdir}")
print(f"h rises from {curve.h_values[0]:.4f} at z={curve.z_grid[0]:.1f} "
      f"to {curve.h_values[-1]:.4f} at z={curve.z_grid[-1]:.1f}")

# CLI equivalent (after `enfp fit ... --out corpus.model.json`):
#   enfp hcurve corpus.model.json --at 1.96
#   enfp hcurve corpus.model.json --z-low -1 --z-high 4 --step 0.05 \
#       --out h_curve.csv --svg h_curve.svg
