"""Defaults used by the library entry points and the command line.

Every output manifest records the effective values.
"""

DEFAULTS = {
    "seed": 0,
    "ndirs": 100_000,  # random directions for the approximate depth, k >= 3
    "n_data_directions": 2000,
    "location_ndirs": 1000,  # random directions for the Tukey median
    "starts": 8,  # deepest-shape multistarts
    "calibration_replicates": 100_000,
    "alpha": 0.05,
    "mcd_starts": 100,
    "tyler_tol": 1e-9,
    "tyler_max_iter": 500,
    "power_xi": {"normal": 0.035, "cauchy": 0.045},
    "simulation_replications": 3000,
}
