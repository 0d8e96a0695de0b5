"""Command-line front end.

Subcommands:
  sweep        Monte Carlo FER sweep over decoder arms and an Eb/N0 grid
  cost         static per-attempt operation counts for the configured arms
  ida-analyze  analytic small-list probability and expected average list
  mem-table    decoder memory usage in bits

Configuration is a plain INI file; see README for the keys.  Exit status
is nonzero on configuration errors, before any simulation starts.
"""

import argparse
import configparser
import os
import sys

from .channel import ChannelConfig
from .cost_models import ida_cycles
from .fixedpoint import profile_for
from .gpscl import memory_bits
from .ida import expected_average_list, small_list_probability, table_params
from .presets import preset
from .sim import SimConfig, build_runner, emit_results, run_sweep


def _parse_grid(text):
    text = text.strip()
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        return tuple(round(lo + i * step, 6) for i in range(count))
    return tuple(float(v) for v in text.split(","))


def load_config(path, overrides):
    ini = configparser.ConfigParser()
    if path:
        if not ini.read(path):
            raise ValueError("cannot read config file %r" % (path,))
    code = ini["code"] if ini.has_section("code") else {}
    sweep = ini["sweep"] if ini.has_section("sweep") else {}
    arms_text = (ini["arms"].get("presets", "")
                 if ini.has_section("arms") else "")
    names = [a.strip() for a in arms_text.split(",") if a.strip()]
    if overrides.preset:
        names = list(overrides.preset)
    if not names:
        raise ValueError("no decoder arms given (config [arms] or --preset)")
    arms = tuple(preset(name) for name in names)
    grid = _parse_grid(sweep.get("ebn0", "2.0"))
    return SimConfig(
        n=int(code.get("n", 1024)),
        rate=float(code.get("rate", 0.5)),
        arms=arms,
        ebn0_grid=grid,
        seed=overrides.seed if overrides.seed is not None
        else int(sweep.get("seed", 1)),
        workers=overrides.workers if overrides.workers is not None
        else int(sweep.get("workers", 1)),
        min_frame_errors=int(sweep.get("min_frame_errors", 100)),
        max_frames=int(sweep.get("max_frames", 10_000_000)),
        batch_size=int(sweep.get("batch_size", 128)),
        check_interval=int(sweep.get("check_interval", 2048)))


def cmd_sweep(args):
    cfg = load_config(args.config, args)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "sweep.csv")

    def progress(rec):
        print("%-24s %6.3f dB  frames=%-9d fer=%.3e  attempts=%.4f"
              % (rec.arm, rec.ebn0_db, rec.frames, rec.fer,
                 rec.avg_attempts))

    records = run_sweep(cfg, csv_path=csv_path, progress=progress)
    if records:
        emit_results(records, "json", os.path.join(out_dir, "sweep.json"),
                     config=cfg)
    print("wrote", csv_path)
    return 0


def cmd_cost(args):
    cfg = load_config(args.config, args)
    print("%-24s %12s %12s %12s %12s" % ("arm", "additions", "comparisons",
                                         "selections", "total"))
    for arm in cfg.arms:
        _, decoder = build_runner(cfg, arm)
        ops = decoder.first.attempt_ops if hasattr(decoder.first,
                                                   "attempt_ops") else None
        if ops is None:  # IDA wrapper: report the large-list path
            ops = decoder.first.large.attempt_ops
        print("%-24s %12d %12d %12d %12d"
              % (arm.name, ops.additions, ops.comparisons, ops.selections,
                 ops.total))
    return 0


def cmd_ida_analyze(args):
    cfg = load_config(args.config, args)
    params = table_params(cfg.n, cfg.rate, quantized=args.quantized)
    print("n=%d rate=%.2f gamma=%.3f phi=%d (latency %d cycles)"
          % (cfg.n, cfg.rate, params.gamma, params.phi, ida_cycles(cfg.n)))
    print("%8s %12s %12s" % ("ebn0_db", "delta", "avg_list"))
    for ebn0 in cfg.ebn0_grid:
        sigma = ChannelConfig(ebn0, cfg.rate).sigma
        delta = small_list_probability(cfg.n, params.gamma, sigma, params.phi)
        avg = expected_average_list(delta, params.small_list,
                                    params.large_list, 0.0, 0)
        print("%8.3f %12.6f %12.4f" % (ebn0, delta, avg))
    return 0


def cmd_mem_table(args):
    cfg = load_config(args.config, args)
    profile = profile_for(cfg.n, cfg.rate)
    rows = [
        ("scl L=16", memory_bits("scl", cfg.n, 16, profile=profile)),
        ("scl L=8", memory_bits("scl", cfg.n, 8, profile=profile)),
        ("gpscl L=8 P=2 S=2", memory_bits("gpscl", cfg.n, 8, P=2, S=2,
                                          profile=profile)),
    ]
    print("%-20s %14s" % ("decoder", "memory [bits]"))
    for name, bits in rows:
        print("%-20s %14d  (%.3g)" % (name, bits, bits))
    return 0


def main(argv=None):
    top = argparse.ArgumentParser(prog="polarsim", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)
    for name, fn in (("sweep", cmd_sweep), ("cost", cmd_cost),
                     ("ida-analyze", cmd_ida_analyze),
                     ("mem-table", cmd_mem_table)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--preset", action="append", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None)
        if name == "ida-analyze":
            p.add_argument("--quantized", action="store_true")
        p.set_defaults(fn=fn)
    args = top.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, OSError, KeyboardInterrupt) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
