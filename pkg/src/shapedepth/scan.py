"""Per-group shape-outlier scan.

A global shape is estimated on the pooled data by the MCD shape whose
trimming level maximizes depth, each group is scored by the depth of that
shape with respect to its own empirical distribution, and groups falling
below the lower boxplot fence are flagged.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .halfspace import DEFAULT_BUDGET, tukey_median
from .mcd import select_gamma_max_depth
from .special import boxplot_lower_fence
from .tyler import shape_depth_fixed_theta


@dataclass
class ScanResult:
    labels: list
    sizes: list
    depths: list
    flagged: list
    fence: float
    selection: object
    skipped: list

    def flagged_labels(self):
        return [g for g, f in zip(self.labels, self.flagged) if f]

    def to_csv(self):
        lines = ["group,n,depth,depth_count,flagged"]
        for g, m, d, f in zip(self.labels, self.sizes, self.depths, self.flagged):
            lines.append(f"{g},{m},{float(d)!r},{d.count},{int(f)}")
        return "\n".join(lines) + "\n"


def shape_outlier_scan(groups, gammas, n_starts=100, seed=0, budget=DEFAULT_BUDGET,
                       location_budget=DEFAULT_BUDGET):
    """Flag groups whose shape disagrees with the global shape.

    Parameters
    ----------
    groups : sequence of (label, array of shape (n_d, k))
    gammas : sequence of float
        Trimming grid for the global MCD shape.
    n_starts, seed : int
        MCD search settings.
    budget, location_budget : DirectionBudget
        Direction sets of the shape depth (``k >= 3``) and of the Tukey medians.

    Returns
    -------
    ScanResult
        Groups with fewer than ``k + 1`` observations are skipped with a
        warning.  With fewer than four groups no fence exists and nothing
        is flagged.
    """
    groups = [(g, np.asarray(r, dtype=float)) for g, r in groups]
    k = groups[0][1].shape[1]
    kept = [(g, r) for g, r in groups if len(r) >= k + 1]
    skipped = [g for g, r in groups if len(r) < k + 1]
    if skipped:
        warnings.warn(f"skipping groups with fewer than {k + 1} observations: "
                      + ", ".join(map(str, skipped)))
    if len(kept) < 2:
        raise DimensionError(f"scan needs at least 2 usable groups, found {len(kept)}")
    pooled = np.vstack([r for _, r in kept])
    sel = select_gamma_max_depth(pooled, gammas, n_starts=n_starts, seed=seed, budget=budget)
    V = sel.mcd.shape
    depths = [shape_depth_fixed_theta(r, tukey_median(r, location_budget), V, budget)
              for _, r in kept]
    values = [float(d) for d in depths]
    if len(values) >= 4:
        fence = boxplot_lower_fence(values)
        flagged = [v < fence for v in values]
    else:
        warnings.warn("fewer than 4 groups: no boxplot fence, nothing flagged")
        fence, flagged = None, [False] * len(values)
    return ScanResult([g for g, _ in kept], [len(r) for _, r in kept], depths, flagged,
                      fence, sel, skipped)
