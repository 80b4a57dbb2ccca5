"""Command-line front end: ``run``, ``compare``, ``analyze``, ``gen``, ``convert``.

Exit status is 0 on success, 1 for bad input (missing files, malformed
traces or configs) and 2 when the simulator trips an internal invariant.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import engine, oracle, trace
from .config import ConfigError, RunConfig, describe_keys
from .hierarchy import InvariantViolation

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


def _load_config(path) -> RunConfig:
    return RunConfig.load(path) if path else RunConfig.defaults()


def _load_trace(path) -> list:
    with open(path) as f:
        return list(trace.parse(f))


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def cmd_run(args) -> int:
    cfg = _load_config(args.config).to_sim_config()
    records = _load_trace(args.trace)
    report = engine.run(records, cfg, check=args.check)
    problem = engine.reconcile(report)
    if problem:
        raise InvariantViolation(problem)
    with _output(args.out) as out:
        out.write(engine.report_csv(report))
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.config) < 2:
        print("compare: need at least two --config files", file=sys.stderr)
        return EXIT_INPUT
    configs = []
    for path in args.config:
        name = Path(path).stem
        configs.append((name, _load_config(path).to_sim_config()))
    records = _load_trace(args.trace)
    table = engine.compare(records, configs)
    with _output(args.out) as out:
        out.write(table.to_csv())
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _load_config(args.config).to_sim_config()
    records = _load_trace(args.trace)
    profile = oracle.miss_based_reuse(records, cfg, args.cache)
    if len(profile) == 0:
        print(f"analyze: no {args.cache} accesses in {args.trace}", file=sys.stderr)
        return EXIT_INPUT
    breakdown = oracle.dead_breakdown(profile, args.dead_threshold, per_block=args.per_block)
    with _output(args.out) as out:
        out.write(breakdown.to_csv())
    if args.hist_out:
        with _output(args.hist_out) as out:
            out.write(oracle.histogram_csv(oracle.distance_histogram(profile)))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = _load_config(args.config)
    for item in args.model or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--model expects key=value, got {item!r}")
        key = key.strip()
        if not key.startswith("gen.") and key != "seed" and key != "block_bytes":
            key = "gen." + key
        cfg.set(key, value, "--model")
    if args.seed is not None:
        cfg["seed"] = args.seed
    model = cfg.to_generator_model()
    with _output(args.out) as out:
        trace.write_trace(trace.generate(model, args.len), out)
    return EXIT_OK


def cmd_convert(args) -> int:
    with open(args.lackey) as src, _output(args.out) as out:
        trace.write_trace(trace.from_lackey(src), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbpsim",
        description="Trace-driven simulator for clean-line copy-back policies in exclusive caches.",
        epilog=describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("run", help="simulate one config", epilog=describe_keys(), formatter_class=fmt)
    p.add_argument("--config", help="key = value config file (defaults if omitted)")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", help="CSV output (stdout if omitted)")
    p.add_argument("--check", action="store_true", help="assert exclusiveness after every access")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="simulate several configs on one trace",
                       epilog=describe_keys(), formatter_class=fmt)
    p.add_argument("--config", nargs="+", required=True, help="config files; the first is the baseline")
    p.add_argument("--trace", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze", help="miss-based reuse distance and dead-line breakdown",
                       epilog=describe_keys(), formatter_class=fmt)
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--dead-threshold", type=int, default=oracle.DEFAULT_DEAD_THRESHOLD)
    p.add_argument("--cache", choices=("l1d", "l1i"), default="l1d")
    p.add_argument("--per-block", action="store_true", help="classify blocks instead of visits")
    p.add_argument("--hist-out", help="also write the distance histogram here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="write a synthetic trace", epilog=describe_keys(), formatter_class=fmt)
    p.add_argument("--config", help="config file supplying gen.* keys")
    p.add_argument("--model", nargs="*", metavar="KEY=VALUE", help="gen.* overrides, prefix optional")
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("convert", help="convert a Lackey trace to the native format")
    p.add_argument("--lackey", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"cbpsim: internal invariant failed: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as e:
        name = e.filename if e.filename is not None else ""
        print(f"cbpsim: {name}: {e.strerror or e}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, trace.TraceParseError, ValueError) as e:
        print(f"cbpsim: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
