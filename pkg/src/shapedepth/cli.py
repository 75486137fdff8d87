"""Command line interface: ``shapedepth SUBCOMMAND ...``.

Every run writes its output (to ``--out`` or stdout) and a JSON manifest with
the subcommand, the resolved flags, the seed, the library version, SHA-256
digests of the inputs, the effective defaults and the wall time.  The
manifest goes next to the output as ``OUT.manifest.json``, to ``--manifest``
if given, and to stderr otherwise.  ``shapedepth rerun MANIFEST`` repeats a
run and reproduces its output byte for byte.

Exit codes: 0 ok, 2 parse or schema error, 3 shape or dimension error,
4 invalid parameter, 5 convergence failure.
"""

import argparse
import json
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .deepest import DeepestShapeOptions, deepest_shape_fixed_theta
from .defaults import DEFAULTS
from .depthvalue import DepthValue
from .exceptions import (
    ConvergenceError,
    DegeneracyError,
    DimensionError,
    DomainError,
    UnsupportedDimensionError,
)
from .halfspace import DirectionBudget, tukey_median
from .inference import (
    Calibration,
    calibrate_critical_values,
    power_simulation,
    robustness_simulation,
    shape_test,
)
from .io import ParseError, file_digest, read_dataset
from .mcd import gamma_depth_curve, principal_direction_mse
from .samplers import GENERATOR, EllipticalModel, sample_elliptical
from .scan import shape_outlier_scan
from .schemas import SCHEMAS, SIMULATION_DEFAULTS, SchemaError, validate
from .spd import ShapeMatrix
from .tyler import (
    depth_contour_grid,
    grid_axes,
    population_contour_grid,
    shape_depth_fixed_theta,
)

EXIT_OK, EXIT_PARSE, EXIT_DIMENSION, EXIT_PARAMETER, EXIT_CONVERGENCE = 0, 2, 3, 4, 5
SEED_ENV = "SHAPEDEPTH_SEED"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_PARSE)


class Run:
    """Collects manifest fields while a subcommand executes."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs = {}
        self.notes = {}
        self.start = time.perf_counter()

    def read_data(self, path, has_group=None):
        self.inputs[path] = file_digest(path)
        return read_dataset(path, has_group)

    def read_json(self, path, schema):
        self.inputs[path] = file_digest(path)
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from exc
        validate(obj, schema)
        return obj

    def manifest(self):
        flags = {k: v for k, v in vars(self.args).items() if k != "func"}
        return {
            "subcommand": self.args.command if not getattr(self.args, "mode", None)
            else f"{self.args.command} {self.args.mode}",
            "argv": self.argv,
            "flags": flags,
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "rng": GENERATOR,
            "inputs": self.inputs,
            "defaults": DEFAULTS,
            "notes": self.notes,
            "wall_time_s": round(time.perf_counter() - self.start, 6),
        }


# -- argument helpers --------------------------------------------------------

def _floats(text, name):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise CliError(f"{name}: expected comma-separated numbers, got {text!r}", EXIT_PARSE)


def _gamma_grid(text):
    """``a:b:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            a, b, step = (float(t) for t in text.split(":"))
        except ValueError:
            raise CliError(f"--gamma-grid: expected a:b:step, got {text!r}", EXIT_PARSE)
        if step <= 0 or b < a:
            raise CliError("--gamma-grid: need a <= b and step > 0", EXIT_PARAMETER)
        m = int(np.floor((b - a) / step + 1e-9))
        return np.round(a + step * np.arange(m + 1), 12)
    return _floats(text, "--gamma-grid")


def _resolution(text):
    try:
        r, c = (int(t) for t in text.split(","))
    except ValueError:
        raise CliError(f"--resolution: expected R,C, got {text!r}", EXIT_PARSE)
    if r < 2 or c < 2:
        raise CliError("--resolution: need at least 2 cells per axis", EXIT_PARAMETER)
    return r, c


def _budget(args, k):
    """Direction budget of the shape depth (only used when ``k >= 3``)."""
    ndirs = args.ndirs if args.ndirs is not None else DEFAULTS["ndirs"]
    if ndirs < 0:
        raise CliError("--ndirs must be nonnegative", EXIT_PARAMETER)
    return DirectionBudget(n_random=ndirs, seed=args.seed,
                           n_data_directions=DEFAULTS["n_data_directions"])


def _location_budget(args):
    return DirectionBudget(n_random=DEFAULTS["location_ndirs"], seed=args.seed,
                           n_data_directions=DEFAULTS["n_data_directions"])


def _theta(run, X):
    args = run.args
    if args.theta is None:
        theta = tukey_median(X, _location_budget(args))
        run.notes["location"] = "plug-in Tukey median"
    else:
        theta = _floats(args.theta, "--theta")
        if theta.shape != (X.shape[1],):
            raise DimensionError(f"--theta has {theta.size} entries, data has {X.shape[1]} columns")
        run.notes["location"] = "fixed"
    run.notes["theta"] = theta.tolist()
    return theta


def _load_shape(run, path, k, normalize):
    obj = run.read_json(path, "shape")
    if normalize:
        obj = dict(obj, normalize=True)
    V = ShapeMatrix.from_dict(obj)
    if V.k != k:
        raise DimensionError(f"shape is {V.k}x{V.k}, data has {k} columns")
    return V


def _announce(run, k):
    method = "exact planar sweep" if k == 2 else "approximate (finite direction set)"
    run.notes["depth_method"] = method
    print(f"method: {method}", file=sys.stderr)


def _degenerate(X):
    n, k = X.shape
    if n <= k or np.linalg.matrix_rank(X - X.mean(axis=0)) < k:
        warnings.warn(f"degenerate input: {n} observations in dimension {k}")
        return True
    return False


def _load_calibration(run, path):
    return Calibration.from_dict(run.read_json(path, "calibration"))


# -- subcommands -------------------------------------------------------------

def cmd_depth(run):
    a = run.args
    ds = run.read_data(a.data)
    V = _load_shape(run, a.shape, ds.k, a.normalize)
    budget = _budget(a, ds.k)
    theta = _theta(run, ds.X)
    _announce(run, ds.k)
    d = shape_depth_fixed_theta(ds.X, theta, V, budget)
    return f"depth {d} (= {float(d):.6g})\n"


def cmd_deepest(run):
    a = run.args
    ds = run.read_data(a.data)
    if _degenerate(ds.X):
        run.notes["degenerate"] = True
    budget = _budget(a, ds.k)
    theta = _theta(run, ds.X)
    _announce(run, ds.k)
    opts = DeepestShapeOptions(n_starts=a.starts, seed=a.seed, budget=budget)
    res = deepest_shape_fixed_theta(ds.X, theta, opts)
    out = res.to_dict()
    out["theta"] = theta.tolist()
    return json.dumps(out, indent=2) + "\n"


def cmd_scan(run):
    a = run.args
    ds = run.read_data(a.data, has_group=True)
    res = shape_outlier_scan(ds.group_items(), _gamma_grid(a.gamma_grid),
                             n_starts=a.mcd_starts, seed=a.seed, budget=_budget(a, ds.k),
                             location_budget=_location_budget(a))
    sel = res.selection
    if res.skipped:
        run.notes["skipped_groups"] = res.skipped
    run.notes.update(gamma_hat=sel.gamma, gamma_hat_depth=str(sel.depth),
                     shape=sel.mcd.shape.entries.tolist(), lower_fence=res.fence,
                     gamma_depths={repr(g): str(d) for g, d in sel.depths.items()})
    return res.to_csv()


def cmd_calibrate(run):
    a = run.args
    cal = calibrate_critical_values(a.k, a.n, a.alpha, a.replicates, a.seed,
                                    generator=a.generator, threads=a.threads)
    return cal.to_json() + "\n"


def cmd_test(run):
    a = run.args
    ds = run.read_data(a.data)
    V0 = _load_shape(run, a.shape, ds.k, a.normalize)
    cal = _load_calibration(run, a.calibration)
    if cal.k != ds.k or cal.n != ds.n:
        raise DimensionError(f"calibration is for k={cal.k}, n={cal.n}; "
                             f"data has k={ds.k}, n={ds.n}")
    budget = _budget(a, ds.k)
    theta = _theta(run, ds.X)
    out = shape_test(ds.X, theta, V0, cal, seed=a.seed, budget=budget)
    return json.dumps({
        "statistic": str(out.statistic), "statistic_value": float(out.statistic),
        "t_crit": cal.t_crit, "gamma_rand": cal.gamma_rand, "decision": out.decision,
        "rejected": out.rejected, "rand_draw": out.rand_draw, "theta": theta.tolist(),
    }, indent=2) + "\n"


def cmd_contour(run):
    a = run.args
    res = _resolution(a.resolution)
    ratios, corrs = grid_axes(res, tuple(_floats(a.ratio_range, "--ratio-range")),
                              tuple(_floats(a.corr_range, "--corr-range")))
    if a.data is None:
        if a.shape is None:
            raise CliError("contour needs --data or a population --shape", EXIT_PARSE)
        V0 = _load_shape(run, a.shape, 2, a.normalize)
        grid = population_contour_grid(V0.entries, ratios, corrs)
        run.notes["grid"] = "population closed form"
    else:
        ds = run.read_data(a.data)
        if ds.k != 2:
            raise UnsupportedDimensionError("contour grids are bivariate")
        theta = _theta(run, ds.X)
        grid = depth_contour_grid(ds.X, theta, ratios, corrs)
    run.notes["argmax"] = [float(v) for v in grid.argmax()]
    return grid.to_csv()


def cmd_mcd_curve(run):
    a = run.args
    ds = run.read_data(a.data)
    budget = _budget(a, ds.k)
    curve = gamma_depth_curve(ds.X, _gamma_grid(a.gamma_grid), n_starts=a.mcd_starts,
                              seed=a.seed, budget=budget)
    return curve.to_csv()


def _simulation_config(run, mode):
    a = run.args
    cfg = dict(SIMULATION_DEFAULTS[mode])
    if a.config is not None:
        cfg.update(run.read_json(a.config, mode))
    if a.seed_given:
        cfg["seed"] = a.seed
    else:
        a.seed = cfg["seed"]
    validate(cfg, mode)
    run.notes["config"] = cfg
    return cfg


def _simulation_calibration(run, cfg):
    if cfg["calibration"] is not None:
        cal = _load_calibration(run, cfg["calibration"])
        if cal.k != 2 or cal.n != cfg["n"]:
            raise DimensionError(f"calibration is for k={cal.k}, n={cal.n}; "
                                 f"simulation needs k=2, n={cfg['n']}")
        return cal
    cal = calibrate_critical_values(2, cfg["n"], cfg["alpha"], cfg["calibration_replicates"],
                                    cfg["seed"], generator=cfg["generator"],
                                    threads=run.args.threads)
    run.notes["calibration"] = cal.to_dict()
    return cal


def cmd_simulate(run):
    mode = run.args.mode
    cfg = _simulation_config(run, mode)
    if mode == "power":
        cal = _simulation_calibration(run, cfg)
        table = power_simulation(cal, cfg["ells"], cfg["xi"], cfg["generator"],
                                 cfg["replications"], cfg["seed"])
        return table.to_csv()
    if mode == "robustness":
        cal = _simulation_calibration(run, cfg)
        table = robustness_simulation(cal, cfg["etas"], cfg["pattern"], cfg["generator"],
                                      cfg["replications"], cfg["seed"])
        return table.to_csv()
    if mode == "figure1":
        V0 = np.array(cfg["shape"], dtype=float)
        if V0.shape != (2, 2):
            raise SchemaError("expected a 2x2 matrix", "$.shape")
        model = EllipticalModel(ShapeMatrix(2 * V0 / np.trace(V0)).entries,
                                generator=cfg["generator"])
        X = sample_elliptical(model, cfg["n"], cfg["seed"])
        ratios, corrs = grid_axes(tuple(cfg["resolution"]))
        emp = depth_contour_grid(X, model.theta, ratios, corrs)
        pop = population_contour_grid(model, ratios, corrs)
        run.notes["argmax_empirical"] = [float(v) for v in emp.argmax()]
        run.notes["argmax_population"] = [float(v) for v in pop.argmax()]
        lines = ["ratio,corr,empirical,population"]
        for i, r in enumerate(ratios):
            for j, c in enumerate(corrs):
                lines.append(f"{float(r)!r},{float(c)!r},{float(emp.depth[i, j])!r},"
                             f"{pop.depth[i, j]:.12f}")
        return "\n".join(lines) + "\n"
    curve = principal_direction_mse(cfg["delta"], cfg["eta"], cfg["n"], cfg["replications"],
                                    cfg["gammas"], cfg["mcd_starts"], cfg["seed"])
    run.notes["gamma_0"] = curve.argmin()
    return curve.to_csv()


def cmd_schema(run):
    return json.dumps(SCHEMAS[run.args.name], indent=2) + "\n"


# -- parser ------------------------------------------------------------------

def _default_seed():
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULTS["seed"]
    try:
        seed = int(env)
    except ValueError:
        raise CliError(f"{SEED_ENV}={env!r} is not an integer", EXIT_PARSE)
    if seed < 0:
        raise CliError(f"{SEED_ENV} must be nonnegative", EXIT_PARAMETER)
    return seed


def _common(p, seed=True, threads=False):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--manifest", help="manifest path (default: OUT.manifest.json or stderr)")
    if seed:
        p.add_argument("--seed", type=int, default=None,
                       help=f"random seed (default: ${SEED_ENV} or {DEFAULTS['seed']})")
    if threads:
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes; does not change the output")


def _data_args(p, theta=True, shape=False):
    p.add_argument("--data", required=True, help="CSV with k numeric columns")
    if theta:
        p.add_argument("--theta", help="location c1,...,ck (default: Tukey median)")
    if shape:
        p.add_argument("--shape", required=True, help="shape matrix JSON")
        p.add_argument("--normalize", action="store_true",
                       help="rescale the shape to trace k instead of rejecting it")
    p.add_argument("--ndirs", type=int, default=None,
                   help=f"random directions for k >= 3 (default {DEFAULTS['ndirs']})")


def build_parser():
    parser = _Parser(prog="shapedepth", description="Tyler shape depth tools.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("depth", help="shape depth of a given shape matrix")
    _data_args(p, shape=True)
    _common(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("deepest", help="deepest shape matrix")
    _data_args(p)
    p.add_argument("--starts", type=int, default=DEFAULTS["starts"])
    _common(p)
    p.set_defaults(func=cmd_deepest)

    p = sub.add_parser("scan", help="flag groups whose shape is atypical")
    p.add_argument("--data", required=True, help="CSV with a leading group column")
    p.add_argument("--gamma-grid", default="0.5:1:0.05", help="a:b:step or a list")
    p.add_argument("--mcd-starts", type=int, default=DEFAULTS["mcd_starts"])
    p.add_argument("--ndirs", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("calibrate", help="Monte Carlo critical values")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=DEFAULTS["alpha"])
    p.add_argument("--replicates", type=int, default=DEFAULTS["calibration_replicates"])
    p.add_argument("--generator", choices=["normal", "cauchy"], default="normal")
    _common(p, threads=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("test", help="randomized depth test of H0: V = V0")
    _data_args(p, shape=True)
    p.add_argument("--calibration", required=True, help="calibration JSON")
    _common(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("contour", help="depth over a (ratio, correlation) grid")
    p.add_argument("--data", help="bivariate CSV; omit for a population grid")
    p.add_argument("--shape", help="population shape JSON (without --data)")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--theta")
    p.add_argument("--ndirs", type=int, default=None)
    p.add_argument("--resolution", default="21,21")
    p.add_argument("--ratio-range", default="0.1,10")
    p.add_argument("--corr-range", default="-0.9,0.9")
    _common(p)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("mcd-curve", help="depth curve of the MCD shapes")
    _data_args(p, theta=False)
    p.add_argument("--gamma-grid", default="0.5:1:0.05")
    p.add_argument("--mcd-starts", type=int, default=DEFAULTS["mcd_starts"])
    _common(p)
    p.set_defaults(func=cmd_mcd_curve)

    p = sub.add_parser("simulate", help="simulation studies")
    p.add_argument("mode", choices=["power", "robustness", "figure1", "figure2"])
    p.add_argument("--config", help="JSON config (see `shapedepth schema MODE`)")
    _common(p, threads=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("schema", help="print a published JSON schema")
    p.add_argument("name", choices=sorted(SCHEMAS))
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    p.add_argument("manifest_path")
    p.add_argument("--out", help="output file (default: stdout)")
    return parser


def _resolve_argv(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed"):
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = _default_seed()
        elif args.seed < 0:
            raise CliError("--seed must be nonnegative", EXIT_PARAMETER)
    if getattr(args, "threads", 1) < 1:
        raise CliError("--threads must be at least 1", EXIT_PARAMETER)
    return args


def _rerun_argv(args):
    with open(args.manifest_path) as fh:
        try:
            man = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid manifest: {exc}") from exc
    for path, digest in man.get("inputs", {}).items():
        if not os.path.exists(path) or file_digest(path) != digest:
            raise CliError(f"input {path} is missing or has changed", EXIT_PARSE)
    argv = [a for a in man["argv"]]
    # drop the original destinations; the replay writes where asked
    for flag in ("--out", "--manifest"):
        while flag in argv:
            i = argv.index(flag)
            del argv[i:i + 2]
    if args.out:
        argv += ["--out", args.out]
    return argv


def _execute(argv):
    args = _resolve_argv(argv)
    if args.command == "rerun":
        return _execute(_rerun_argv(args))
    run = Run(args, argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        text = args.func(run)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if hasattr(args, "seed") and not args.seed_given:
        # record the resolved seed so that the manifest replays without the environment
        run.argv += ["--seed", str(args.seed)]
    if caught:
        run.notes["warnings"] = [str(w.message) for w in caught]
    if args.command == "schema":
        sys.stdout.write(text)
        return EXIT_OK
    man = json.dumps(run.manifest(), indent=2, default=_json_default) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    man_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if man_path:
        with open(man_path, "w") as fh:
            fh.write(man)
    else:
        sys.stderr.write(man)
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, DepthValue):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None):
    """Entry point; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return _execute(argv)
    except CliError as exc:
        code, message = exc.code, str(exc)
    except (ParseError, SchemaError) as exc:
        code, message = EXIT_PARSE, str(exc)
    except (DimensionError, UnsupportedDimensionError) as exc:
        code, message = EXIT_DIMENSION, str(exc)
    except (ConvergenceError, DegeneracyError) as exc:
        code, message = EXIT_CONVERGENCE, str(exc)
    except (DomainError, ValueError) as exc:
        code, message = EXIT_PARAMETER, str(exc)
    except OSError as exc:
        code, message = EXIT_PARSE, str(exc)
    print(f"shapedepth: error: {message}", file=sys.stderr)
    return code


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
