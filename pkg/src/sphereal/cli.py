"""Command-line experiment runner.

Usage: ``sphereal [CONFIG] [flags]`` where CONFIG is a key = value file and
flags override its values.  Exit codes: 0 success, 2 configuration error,
3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import sys

from .config import PROJECTIONS, parse_config_file, resolve_config
from .errors import SpherealError
from .experiment import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereal",
        description="Active-learning classification on the hypersphere with "
        "localized polynomial kernels.",
    )
    parser.add_argument("config", nargs="?", help="key = value configuration file")
    parser.add_argument("--n", type=int, help="kernel degree")
    parser.add_argument("--theta", type=float, help="relative support threshold in (0,1]")
    parser.add_argument("--eta-start", dest="eta_start", type=float,
                        help="first adjacency threshold (radians)")
    parser.add_argument("--eta-step", dest="eta_step", type=float,
                        help="sweep step (radians)")
    parser.add_argument("--eta-max", dest="eta_max", type=float,
                        help="last adjacency threshold (radians)")
    parser.add_argument("--pca-dim", dest="pca_dim", type=int,
                        help="PCA output dimension (0 skips PCA)")
    parser.add_argument("--pca-var", dest="pca_var", type=float,
                        help="PCA cumulative variance fraction target")
    parser.add_argument("--decay-s", dest="decay_s", type=int,
                        help="decay exponent used by the localization checks")
    parser.add_argument("--seed", type=int, help="RNG seed for every sampled choice")
    parser.add_argument("--query-budget", dest="query_budget", type=int,
                        help="maximum oracle queries")
    parser.add_argument("--witness-n", dest="witness_n", type=int,
                        help="witness kernel degree (defaults to --n)")
    parser.add_argument("--dataset", choices=("synthetic", "salinas",
                                              "indian_pines_subset", "file"))
    parser.add_argument("--features", help="feature file (CSV or SCL1 binary)")
    parser.add_argument("--labels", help="label file (one integer per line)")
    parser.add_argument("--out-dir", dest="out_dir", help="artifact directory")
    parser.add_argument("--projection", choices=PROJECTIONS,
                        help="sphere projection (normalize or stereographic)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = None
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {k: v for k, v in vars(args).items() if k != "config"}
        config = resolve_config(file_values, overrides)
        outcome = run_experiment(config)
    except SpherealError as exc:
        stage = getattr(exc, "stage", "config")
        print(f"error in {stage}: {exc}", file=sys.stderr)
        if config is not None:
            print("resolved config:", file=sys.stderr)
            for key, value in config.echo().items():
                print(f"  {key} = {value}", file=sys.stderr)
        return exc.exit_code

    report = outcome.report
    print(f"accuracy = {report.accuracy:.12g}")
    print(f"queried_count = {report.queried_count} "
          f"(fraction {report.queried_fraction:.12g})")
    print(f"uncertain_count = {report.uncertain_count}, "
          f"pruned_count = {report.pruned_count}")
    for name in sorted(outcome.artifacts):
        print(f"{name}: {outcome.artifacts[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
