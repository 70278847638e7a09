"""Command-line entry point: ``wwbridge <experiment> [--config FILE] [flags]``."""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import EXPERIMENTS, FULL_SCALE, ConfigError, ExperimentConfig, run

_DEFAULTS = {
    "histogram-v": {"hurst": 0.7, "K": 0.5},
    "regime-b": {"hurst": 0.5, "alpha": 0.5},
    "critical": {"hurst": 0.5, "alpha": 2**-0.5, "depth": 16, "replications": 100, "t_caps": [0.5, 1.0]},
    "covariance": {"hurst": 0.5, "alpha": 0.5, "depth": 12},
    "martingale-bridge": {"hurst": 0.5, "K": 0.3, "density": [2.0, 0.0]},
    "deterministic-eval": {"alpha": 0.5, "points": ["1/3", "1/2", "1/4"]},
    "z-moment": {"alpha": 0.75, "replications": 100_000},
    "roughness": {"hurst": 0.7, "K": 0.5, "replications": 50},
}


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wwbridge", description="Wiener-Weierstrass bridge experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--hurst", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("-K", "--K", dest="K", type=float)
        p.add_argument("-b", "--base", dest="b", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--reps", dest="replications", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--method", choices=["cholesky", "circulant"])
        p.add_argument("--t-caps", dest="t_caps", type=float, nargs="+")
        p.add_argument("--out", dest="output_dir")
        p.add_argument("--workers", type=int)
        p.add_argument("--full-scale", action="store_true",
                       help=f"depth {FULL_SCALE['depth']}, {FULL_SCALE['replications']} replications")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config field; VALUE is parsed as JSON when possible")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if data.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config file is for {data['experiment']!r}, not {args.experiment!r}")
    else:
        data = dict(_DEFAULTS[args.experiment])
    data["experiment"] = args.experiment
    if args.full_scale:
        data.update(FULL_SCALE)
    flags = ("hurst", "alpha", "K", "b", "depth", "replications", "seed", "method", "t_caps",
             "output_dir", "workers")
    for key in flags:
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.alpha is not None and args.K is None:
        data.pop("K", None)
    if args.K is not None and args.alpha is None:
        data.pop("alpha", None)
    for item in args.set:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        data[key] = _value(text)
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, ok in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    for f in result.files:
        print(f"wrote {f}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
