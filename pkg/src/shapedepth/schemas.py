"""JSON schemas for the files read by the command line.

``shapedepth schema NAME`` prints any of them.
"""

import jsonschema

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_seed = {"type": "integer", "minimum": 0}
_n = {"type": "integer", "minimum": 2}
_reps = {"type": "integer", "minimum": 1}
_prob = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_gammas = {"type": "array", "minItems": 1,
           "items": {"type": "number", "minimum": 0.5, "maximum": 1}}
_generator = {"enum": ["normal", "cauchy"]}

SCHEMAS = {
    "shape": {
        "type": "object",
        "required": ["k", "entries"],
        "properties": {"k": {"type": "integer", "minimum": 1}, "entries": _matrix,
                       "normalize": {"type": "boolean"}},
    },
    "calibration": {
        "type": "object",
        "required": ["k", "n", "alpha", "t_crit", "gamma_rand", "replicates", "seed"],
        "properties": {
            "k": {"type": "integer", "minimum": 2}, "n": {"type": "integer", "minimum": 1},
            "alpha": _prob, "t_count": {"type": "integer", "minimum": 0},
            "t_crit": {"type": "number", "minimum": 0, "maximum": 1},
            "gamma_rand": {"type": "number", "minimum": 0, "maximum": 1},
            "replicates": _reps, "seed": _seed, "generator": _generator,
            "degenerate": {"type": "boolean"}, "rng": {"type": "string"},
        },
    },
    "power": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n": _n, "alpha": _prob, "xi": {"type": "number", "minimum": 0},
            "ells": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
            "generator": _generator, "replications": _reps, "seed": _seed,
            "calibration": {"type": ["string", "null"]}, "calibration_replicates": _reps,
        },
    },
    "robustness": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n": _n, "alpha": _prob,
            "etas": {"type": "array", "minItems": 1,
                     "items": {"type": "number", "minimum": 0, "maximum": 1}},
            "pattern": {"enum": ["a", "b", "c"]},
            "generator": _generator, "replications": _reps, "seed": _seed,
            "calibration": {"type": ["string", "null"]}, "calibration_replicates": _reps,
        },
    },
    "figure1": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n": _n, "shape": _matrix, "generator": _generator, "seed": _seed,
            "resolution": {"type": "array", "minItems": 2, "maxItems": 2,
                           "items": {"type": "integer", "minimum": 2}},
        },
    },
    "figure2": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "delta": {"type": "number"}, "eta": {"type": "number", "minimum": 0, "maximum": 1},
            "n": _n, "replications": _reps, "gammas": _gammas, "seed": _seed,
            "mcd_starts": _reps,
        },
    },
}

SIMULATION_DEFAULTS = {
    "power": {"n": 200, "alpha": 0.05, "xi": 0.035, "ells": [0, 1, 2, 3, 4, 5, 6],
              "generator": "normal", "replications": 3000, "seed": 0, "calibration": None,
              "calibration_replicates": 100_000},
    "robustness": {"n": 200, "alpha": 0.05, "etas": [0.0, 0.025, 0.05, 0.1, 0.2, 0.25, 0.3],
                   "pattern": "a", "generator": "normal", "replications": 3000, "seed": 0,
                   "calibration": None, "calibration_replicates": 100_000},
    "figure1": {"n": 800, "shape": [[1.0, 0.0], [0.0, 1.0]], "generator": "normal", "seed": 0,
                "resolution": [21, 21]},
    "figure2": {"delta": 5.0, "eta": 0.2, "n": 400, "replications": 100,
                "gammas": [round(0.5 + 0.01 * i, 2) for i in range(51)], "seed": 0,
                "mcd_starts": 100},
}


class SchemaError(ValueError):
    """Document does not match its schema; ``path`` locates the offending field."""

    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path


def validate(obj, name):
    """Validate ``obj`` against schema ``name``; raise :class:`SchemaError` on the first error."""
    validator = jsonschema.Draft202012Validator(SCHEMAS[name])
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}"
                             for p in e.absolute_path)
        raise SchemaError(e.message, path)
    return obj
