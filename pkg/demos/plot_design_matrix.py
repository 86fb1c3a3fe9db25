"""
Spatial design matrices
=======================

The design matrix stacks a linear trend, observed covariates and
thin-plate spline columns centred on space-filling knots. The recipe that
built it can be replayed at any other set of locations.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spatialmc import build_design_matrix, evaluate_design, gen_dataset, load_preset

ds = gen_dataset(load_preset("toy-C"))
z = build_design_matrix(ds.monitor_coords, ds.r_o_monitor, ["ro1", "ro2"])
print(f"design: {z.shape[0]} sites x {z.shape[1]} columns")
print("columns:", ", ".join(z.columns[:6]), "...")

knots = z.recipe.knots
fig, ax = plt.subplots(figsize=(4.5, 4.5))
ax.plot(*ds.monitor_coords.T, ".", color="0.7", label="monitors")
ax.plot(*ds.new_coords.T, "b+", label="new sites")
ax.plot(*knots.T, "r^", label="knots")
ax.set_aspect("equal")
ax.legend(loc="upper right", fontsize=8)
fig.tight_layout()
fig.savefig("knots.png", dpi=100)

###############################################################################
# Evaluating at new sites
# -----------------------
# The recipe keeps the knots and the centring and scaling of every column,
# so new rows are on exactly the same footing as the training rows.

z_new = evaluate_design(z.recipe, ds.new_coords, ds.r_o_new, ["ro1", "ro2"])
print("new-site design:", z_new.shape)
print("training rows reproduced exactly:",
      np.array_equal(evaluate_design(z.recipe, ds.monitor_coords, ds.r_o_monitor).values, z.values))
