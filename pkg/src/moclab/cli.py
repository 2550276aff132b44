"""Command-line entry point ``moclab``.

Exit codes: 0 all metrics pass, 2 a metric failed, 3 configuration error,
4 numerical error.
"""

import argparse
import sys
from pathlib import Path

from .config import ScenarioConfig, parse_configs
from .errors import ConfigError, NumericError
from .scenarios import SCENARIOS, run_many, run_scenario

EXIT_OK, EXIT_METRIC, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _report(summary, stream):
    status = "PASS" if summary.passed else "FAIL"
    print(f"{summary.name} [{summary.scenario}, {summary.figure}] {status} "
          f"({summary.wall_time:.1f} s)", file=stream)
    for m in summary.metrics:
        flag = {True: "ok  ", False: "FAIL", None: "info"}[m.passed]
        band = ""
        if m.lo is not None or m.hi is not None:
            lo = "-inf" if m.lo is None else f"{m.lo:g}"
            hi = "inf" if m.hi is None else f"{m.hi:g}"
            band = f" in [{lo}, {hi}]"
        value = m.value if isinstance(m.value, (list, bool)) else f"{m.value:.6g}"
        note = f"  ({m.note})" if m.note else ""
        print(f"  {flag} {m.name} = {value}{band}{note}", file=stream)


def build_parser():
    p = _Parser(prog="moclab", description="Method-of-characteristics stability laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reproduce", help="run a registered scenario")
    r.add_argument("scenario", choices=sorted(SCENARIOS))
    r.add_argument("--out", type=Path)

    c = sub.add_parser("run", help="run the scenarios of a config file")
    c.add_argument("config", type=Path)
    c.add_argument("--out", type=Path)
    c.add_argument("--jobs", type=int, default=1)

    v = sub.add_parser("vn", help="von Neumann amplification factors")
    v.add_argument("--scheme", choices=("se", "me", "lf"), required=True)
    v.add_argument("--h", type=float, required=True)
    v.add_argument("--out", type=Path)

    e = sub.add_parser("eigs", help="dense amplification-matrix spectrum")
    e.add_argument("--scheme", choices=("se", "me", "lf"), default="se")
    e.add_argument("--L", type=float, required=True)
    e.add_argument("--h", type=float, required=True)
    e.add_argument("--bc", choices=("periodic", "nonreflecting"), default="nonreflecting")
    e.add_argument("--out", type=Path)

    s = sub.add_parser("scan-lf", help="leapfrog det Phi scan over alpha")
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--n-points", type=int, default=20001)
    s.add_argument("--out", type=Path)
    return p


def _configs(args):
    if args.command == "reproduce":
        return [ScenarioConfig(name=args.scenario, scenario=args.scenario)]
    if args.command == "run":
        try:
            text = args.config.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
        return parse_configs(text)
    if args.command == "vn":
        return [ScenarioConfig(name="vn", scenario="vn-curves", scheme=args.scheme, h=args.h)]
    if args.command == "eigs":
        return [ScenarioConfig(name="eigs", scenario="eigs", scheme=args.scheme, L=args.L,
                               h=args.h, bc=args.bc)]
    return [ScenarioConfig(name="scan-lf", scenario="fig9", L=args.L, h=args.h,
                           n_points=args.n_points)]


def main(argv=None):
    stream = sys.stdout
    try:
        args = build_parser().parse_args(argv)
        configs = _configs(args)
        if len(configs) == 1:
            summaries = [run_scenario(configs[0], args.out)]
        else:
            summaries = run_many(configs, args.out, getattr(args, "jobs", 1))
    except ConfigError as exc:
        print(f"moclab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"moclab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for s in summaries:
        _report(s, stream)
    return EXIT_OK if all(s.passed for s in summaries) else EXIT_METRIC


if __name__ == "__main__":
    sys.exit(main())
