"""How deep is a shape matrix?

A shape matrix is a scatter matrix scaled to trace k.  Its depth with respect
to a sample measures how well it describes the directions of the centered
observations: the true shape reaches 1/2 in the plane, and any other shape
scores less.
"""

import numpy as np

from shapedepth import (
    DirectionBudget,
    EllipticalModel,
    elliptical_depth_k2,
    make_rng,
    max_depth_value,
    normalize_to_shape,
    sample_elliptical,
    shape_depth_fixed_theta,
)

V_true = np.diag([1.6, 0.4])
X = sample_elliptical(EllipticalModel(V_true), 2000, make_rng(1))

print("Depths in the plane are exact fractions of n:")
for name, V in [("true shape", V_true), ("identity", np.eye(2)),
                ("rotated", np.array([[1.0, 0.6], [0.6, 1.0]]))]:
    d = shape_depth_fixed_theta(X, [0, 0], V)
    pop = elliptical_depth_k2(V, V_true)
    print(f"  {name:10s}  sample {str(d):>10s} = {float(d):.4f}   population {pop:.4f}")

# The depth sees only directions, so heavy tails change nothing.
Y = sample_elliptical(EllipticalModel(V_true, generator="cauchy"), 2000, make_rng(1))
print("\nCauchy sample, true shape:", shape_depth_fixed_theta(Y, [0, 0], V_true))

# In three dimensions the depth is approximated over a finite direction set,
# which can only overestimate it.
V3 = normalize_to_shape(np.diag([3.0, 1.0, 0.5])).entries
Z = sample_elliptical(EllipticalModel(V3), 1500, make_rng(2))
for m in (200, 5000):
    d = shape_depth_fixed_theta(Z, np.zeros(3), V3, DirectionBudget(m, seed=1))
    print(f"k=3 with {m:5d} random directions: {float(d):.4f}")
print(f"population maximum for k=3: {max_depth_value(3):.4f}")
