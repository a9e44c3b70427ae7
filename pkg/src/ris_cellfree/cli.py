"""Command line front end.

Subcommands:
    fig1      NMSE vs pilot power sweep
    fig2      sum spectral efficiency vs number of APs
    fig3      sum spectral efficiency vs number of panels
    validate  run every closed-form-vs-simulation check
    run       evaluate a single configured scenario

Exit status is 0 on success and 2 when validation checks fail.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments, scenario


def _add_common(parser, trials: int, drops: int) -> None:
    parser.add_argument("--config", help="YAML scenario file")
    parser.add_argument("--trials", type=int, default=trials,
                        help="Monte Carlo trials per drop")
    parser.add_argument("--drops", type=int, default=drops,
                        help="independent network drops per sweep point")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--scheme", action="append", default=None,
                        metavar="NAME", choices=scenario.SCHEMES,
                        help="scheme to evaluate (repeatable); default "
                             "depends on the subcommand")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-cellfree",
        description="RIS-aided cell-free massive MIMO downlink under EMI: "
                    "closed-form analysis with Monte Carlo cross checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("fig1", "NMSE vs pilot power"),
                       ("fig2", "sum SE vs number of APs"),
                       ("fig3", "sum SE vs number of panels")):
        p = sub.add_parser(name, help=text)
        _add_common(p, trials=500, drops=20)

    p = sub.add_parser("validate",
                       help="closed forms vs Monte Carlo oracles")
    p.add_argument("--trials", type=int, default=40000)
    p.add_argument("--seed", type=int, default=2)

    p = sub.add_parser("run", help="single scenario, both metrics")
    _add_common(p, trials=500, drops=20)

    return parser


def _config(args) -> scenario.ScenarioConfig:
    if getattr(args, "config", None):
        config = scenario.load_config(args.config)
    else:
        config = scenario.ScenarioConfig()
    return config


def _emit(points, args) -> None:
    if args.out:
        experiments.write_csv(points, args.out)
        print(f"wrote {len(points)} rows to {args.out}")
        return None
    print(",".join(experiments.CSV_HEADER))
    for p in points:
        print(f"{p.sweep_param},{p.value!r},{p.scheme},{p.metric_name},"
              f"{p.closed_form!r},{p.monte_carlo!r},{p.mc_stderr!r},"
              f"{p.trials},{p.drops},{p.seed}")
    return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        report = experiments.validate(trials=args.trials, seed=args.seed)
        for line in report.lines():
            print(line)
        return 0 if report.passed else 2

    config = _config(args)
    kwargs = dict(trials=args.trials, drops=args.drops, seed=args.seed)
    if args.scheme:
        kwargs["schemes"] = tuple(args.scheme)

    if args.command == "fig1":
        points = experiments.run_fig1(config, **kwargs)
    elif args.command == "fig2":
        points = experiments.run_fig2(config, **kwargs)
    elif args.command == "fig3":
        points = experiments.run_fig3(config, **kwargs)
    elif args.command == "run":
        points = experiments.run_single(config, **kwargs)
    else:  # pragma: no cover - argparse enforces the choices
        raise AssertionError(args.command)

    _emit(points, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
