"""
Filling in a low-rank matrix
============================

A small matrix with two latent factors loses a quarter of its entries.
Nuclear-norm completion fills them back in; the penalty controls how much
the singular values are shrunk and therefore the rank of the estimate.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spatialmc import apply_mcar, lrmc_solve, select_lambda_for_rank

rng = np.random.default_rng(7)

# Two factors plus a little noise, 60 rows by 8 columns.
truth = rng.standard_normal((60, 2)) @ rng.standard_normal((2, 8))
x = truth + 0.1 * rng.standard_normal(truth.shape)
x_masked, mask = apply_mcar(x, 0.25, rng)
print(f"{(~mask).sum()} of {mask.size} entries hidden")

###############################################################################
# Sweep the penalty
# -----------------
# Large penalties shrink everything to the column means; small ones keep
# noise directions too. Warm starts make the path cheap.

lams = np.geomspace(30, 0.05, 30)
errors, ranks, w = [], [], None
for lam in lams:
    fit = lrmc_solve(x_masked, mask, lam=lam, w0=w)
    w = fit.w_hat
    errors.append(np.mean((fit.x_hat - truth)[~mask] ** 2))
    ranks.append(fit.attained_rank)

fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].semilogx(lams, errors, "k.-")
ax[0].set_xlabel("penalty")
ax[0].set_ylabel("MSE on hidden entries")
ax[1].semilogx(lams, ranks, "k.-")
ax[1].set_xlabel("penalty")
ax[1].set_ylabel("rank of estimate")
fig.tight_layout()
fig.savefig("soft_impute_path.png", dpi=100)

###############################################################################
# Asking for a rank instead
# -------------------------
# Usually we know roughly how many factors we want. The grid search returns
# the least shrunk estimate with exactly that rank.

lam, fit = select_lambda_for_rank(x_masked, mask, q=2)
print(f"rank 2 at penalty {lam:.3f}: hidden-entry MSE "
      f"{np.mean((fit.x_hat - truth)[~mask] ** 2):.4f} after {fit.iters} iterations")
