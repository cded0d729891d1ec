"""Command-line interface: dataset generation, model fit/predict, leaf-size
tuning, and scripted experiments.

Exit codes: 0 success, 2 configuration error, 3 data or fit error, 4 missing
external data.
"""

import argparse
import os
import sys

from .data import (CsvSchema, GeneratorConfig, NoiseSpec, NOISE_DISTRIBUTIONS,
                   generate, read_csv, write_csv)
from .errors import (ConfigurationError, MissingExternalDataError,
                     SchemaError, SigmalearnError)
from .experiments import EXPERIMENT_NAMES, run_experiment
from .forest import ForestHyperparams, fit_forest, predict_forest_batch
from .multilayer import (FeatureFlags, MultilayerModel, fit_multilayer,
                         predict_multilayer_batch, tune_leaf_size, tune_theta)
from .serialize import load_model, save_forest, save_multilayer
from .validation import tune_min_samples_leaf

KIND_ALIASES = {
    "white-noise": "white_noise",
    "linear": "linear_plus_noise",
    "cos2-mediated": "cos2_mediated",
    "cos2-sigma": "cos2_sigma_encoded",
    "cos2-combined": "cos2_combined",
}

OUT_DIR_ENV = "SIGMALEARN_OUT_DIR"


def _schema(args):
    return CsvSchema(x=tuple(args.x_col), y=args.y_col, z=args.z_col,
                     z_mask=args.z_mask_col)


def _add_schema_flags(parser, need_y=True, need_z=True):
    parser.add_argument("--x-col", action="append", default=None,
                        help="feature column name (repeatable; default 'x')")
    if need_y:
        parser.add_argument("--y-col", default=None,
                            help="intermediate target column (default 'y')")
    if need_z:
        parser.add_argument("--z-col", default=None,
                            help="final target column (default 'z')")
        parser.add_argument("--z-mask-col", default=None,
                            help="mask column (default 'z_mask')")


def _normalize_schema_args(args, need_y=True, need_z=True):
    args.x_col = args.x_col or ["x"]
    if need_y and args.y_col is None:
        args.y_col = "y"
    if need_z:
        if args.z_col is None:
            args.z_col = "z"
        if args.z_mask_col is None:
            args.z_mask_col = "z_mask"
    else:
        args.z_col = None
        args.z_mask_col = None
    if not need_y:
        args.y_col = None


def _flags(args):
    return FeatureFlags(use_x=not args.no_x, use_y=args.use_y,
                        use_sigma_y=args.use_sigma)


def _add_flag_args(parser):
    parser.add_argument("--no-x", action="store_true",
                        help="exclude the raw X channel from the final layer")
    parser.add_argument("--use-y", action="store_true",
                        help="feed the layer-1 Y prediction to the final layer")
    parser.add_argument("--use-sigma", action="store_true",
                        help="feed the layer-1 uncertainty to the final layer")


def cmd_generate(args):
    kind = KIND_ALIASES.get(args.kind, args.kind)
    config = GeneratorConfig(
        n_points=args.n, target_kind=kind, x_min=args.x_min, x_max=args.x_max,
        b=args.b, periods=args.periods, seed=args.seed,
        noise=NoiseSpec(distribution=args.noise, location=args.location,
                        scale=args.scale))
    write_csv(generate(config), args.out)
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def cmd_fit(args):
    ds = read_csv(args.data, schema=_schema(args))
    hp = ForestHyperparams(n_trees=args.n_trees,
                           min_samples_leaf=args.min_samples_leaf,
                           seed=args.seed)
    if ds.z is None:
        raise SchemaError("fit requires a final target column (--z-col)")
    model = fit_multilayer(ds, _flags(args), hp, theta=args.theta,
                           oob_mode=args.oob)
    save_multilayer(model, args.out)
    print(f"saved model to {args.out}")
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    ds = read_csv(args.data, schema=CsvSchema(x=tuple(args.x_col), y=None,
                                              z=None, z_mask=None))
    if isinstance(model, MultilayerModel):
        mean, std = predict_multilayer_batch(model, ds.x)
    else:
        mean, std = predict_forest_batch(model, ds.x)
    import csv as _csv
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        header = (args.x_col if len(args.x_col) > 1 or args.x_col[0] != "x"
                  else ["x"])
        writer.writerow(list(header) + ["z_pred", "z_std"])
        for i in range(len(mean)):
            writer.writerow(["%.17g" % v for v in ds.x[i]]
                            + ["%.17g" % mean[i], "%.17g" % std[i]])
    print(f"wrote {len(mean)} predictions to {args.out}")
    return 0


def cmd_tune(args):
    ds = read_csv(args.data, schema=_schema(args))
    candidates = ([int(c) for c in args.candidates.split(",")]
                  if args.candidates else None)
    if ds.z is not None and (args.use_y or args.use_sigma):
        result = tune_leaf_size(ds, _flags(args), candidates=candidates,
                                n_trees=args.n_trees, seed=args.seed,
                                oob_mode=args.oob)
        hp = ForestHyperparams(n_trees=args.n_trees,
                               min_samples_leaf=result.best_min_samples_leaf,
                               seed=args.seed)
        theta = None
        if args.tune_theta:
            theta, _, _ = tune_theta(ds, _flags(args), hp, oob_mode=args.oob)
    else:
        targets = ds.z[ds.z_mask] if ds.z is not None else ds.y
        x = ds.x[ds.z_mask] if ds.z is not None else ds.x
        result = tune_min_samples_leaf(x, targets, candidates=candidates,
                                       scheme=args.scheme, k=args.k,
                                       objective=args.objective,
                                       seed=args.seed, n_trees=args.n_trees)
        theta = None
    print(f"best min_samples_leaf: {result.best_min_samples_leaf}"
          f" (cv score {result.cv_score:.6g})")
    if theta is not None:
        print(f"best theta: {theta:g} degrees")
    if args.out:
        import csv as _csv
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["min_samples_leaf", "score"])
            writer.writerows(result.score_table)
        print(f"wrote score table to {args.out}")
    return 0


def cmd_experiment(args):
    kwargs = {"out_dir": args.out_dir}
    if args.seeds is not None:
        kwargs["seeds"] = tuple(range(args.seeds))
    if args.name == "fig10" and args.b is not None:
        kwargs["b_list"] = (args.b,)
    if args.name in ("dielectric", "diffraction"):
        kwargs["csv_path"] = args.data
        kwargs["standin"] = args.standin
        if args.name == "dielectric" and args.cutoff is not None:
            kwargs["cutoff"] = args.cutoff
        if args.name == "diffraction" and args.split_angle is not None:
            kwargs["split_angle"] = args.split_angle
    report = run_experiment(args.name, **kwargs)
    print(report.to_json())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sigmalearn",
        description="Forest regression with uncertainty-driven extrapolation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--kind", required=True,
                   help="one of " + ", ".join(sorted(KIND_ALIASES)))
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--periods", type=float, default=1.0)
    p.add_argument("--noise", choices=NOISE_DISTRIBUTIONS, default="gaussian")
    p.add_argument("--location", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a model on a CSV dataset")
    p.add_argument("--data", required=True)
    _add_schema_flags(p)
    _add_flag_args(p)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--n-trees", type=int, default=125)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--oob", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit, _needs_schema=True)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--x-col", action="append", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict, _x_only_schema=True)

    p = sub.add_parser("tune", help="grid-search min_samples_leaf")
    p.add_argument("--data", required=True)
    _add_schema_flags(p)
    _add_flag_args(p)
    p.add_argument("--scheme", choices=("kfold", "blocking"), default="kfold")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--objective", choices=("r2", "mse"), default="r2")
    p.add_argument("--candidates", default=None,
                   help="comma-separated leaf sizes (default: automatic grid)")
    p.add_argument("--n-trees", type=int, default=125)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oob", action="store_true")
    p.add_argument("--tune-theta", action="store_true")
    p.add_argument("--out", default=None, help="score-table CSV path")
    p.set_defaults(func=cmd_tune, _needs_schema=True)

    p = sub.add_parser("experiment", help="run a scripted experiment")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("--seeds", type=int, default=None,
                   help="number of seeds (0..n-1)")
    p.add_argument("--b", type=float, default=None, help="fig10 noise scale")
    p.add_argument("--data", default=None, help="digitized data CSV")
    p.add_argument("--standin", action="store_true",
                   help="use the bundled synthetic stand-in fixture")
    p.add_argument("--cutoff", type=float, default=None)
    p.add_argument("--split-angle", type=float, default=None)
    p.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV),
                   help=f"artifact directory (default ${OUT_DIR_ENV})")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "_needs_schema", False):
        _normalize_schema_args(args)
    if getattr(args, "_x_only_schema", False):
        args.x_col = args.x_col or ["x"]
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingExternalDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SigmalearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
