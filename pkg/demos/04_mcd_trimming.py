"""Choosing the MCD trimming level by depth.

For a sample with 20% symmetric outliers, the depth of the MCD shape against
its own subsample drops once the subsample has to absorb outliers.  The kink
sits near gamma = 0.8, which is also where the principal axis is estimated best.
"""

import numpy as np

from shapedepth import gamma_depth_curve, make_rng, sample_mixture
from shapedepth.mcd import contamination_spec, principal_direction_mse

X, is_outlier = sample_mixture(contamination_spec(delta=5.0, eta=0.2), 400, make_rng(0))
gammas = np.round(np.arange(0.6, 1.0001, 0.05), 2)
curve = gamma_depth_curve(X, gammas, n_starts=50)
print("gamma  depth")
for g, d in zip(curve.gammas, curve.depths):
    print(f"{g:5.2f}  {float(d):.3f}")

mse = principal_direction_mse(5.0, 0.2, 400, replications=20, gammas=gammas, n_starts=30)
print("\nmean squared angle of the first eigenvector (20 replications)")
print(mse.to_csv())
print("minimizer:", mse.argmin())
