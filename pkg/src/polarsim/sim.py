"""Batch Monte Carlo harness: Eb/N0 sweeps over decoder arms.

Frames are simulated in fixed-size checkpoint intervals; workers split an
interval and partial tallies merge in frame order, so the aggregate is
bit-identical for any worker count.  All arms at one Eb/N0 point replay
the same per-frame message and noise streams for paired comparison.
"""

import csv
import json
import multiprocessing
import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelConfig, frame_rng, modulate
from .code_spec import encode, spec_for_rate
from .enhance import EnhanceConfig, EnhancedDecoder
from .fixedpoint import profile_for
from .gpscl import GpsclEngine, PartitionPlan
from .ida import IdaDecoder, table_params
from .presets import resolve_arm
from .scl_core import DecodeOptions, ListEngine

CSV_COLUMNS = ["arm", "ebn0_db", "frames", "frame_errors", "fer", "ber",
               "avg_attempts", "avg_list", "adds", "compares", "selects",
               "total_ops"]


@dataclass(frozen=True)
class SimConfig:
    n: int
    rate: float
    arms: tuple
    ebn0_grid: tuple
    seed: int = 1
    workers: int = 1
    min_frame_errors: int = 100
    max_frames: int = 10_000_000
    batch_size: int = 128
    check_interval: int = 2048

    def __post_init__(self):
        if self.min_frame_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rules must be positive")
        if not self.arms:
            raise ValueError("no decoder arms configured")
        if not self.ebn0_grid:
            raise ValueError("empty Eb/N0 grid")


@dataclass
class SimRecord:
    arm: str
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    avg_attempts: float
    avg_list_size: float
    avg_ops: dict
    wall_time: float


@dataclass
class _Tally:
    frames: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    attempts: int = 0
    list_size: int = 0
    adds: int = 0
    compares: int = 0
    selects: int = 0

    def merge(self, other):
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


def build_runner(cfg, arm):
    """Instantiate the decoder stack for one arm of the sweep."""
    arm = resolve_arm(arm, cfg.rate)
    spec = spec_for_rate(cfg.n, cfg.rate, split_crc=arm.split_crc)
    profile = profile_for(cfg.n, cfg.rate) if arm.quantized else None
    opts = DecodeOptions(pm_mode=arm.pm_mode, spc_variant=arm.spc_variant,
                         profile=profile)

    def engine(L):
        if arm.kind == "gpscl":
            return GpsclEngine(spec, PartitionPlan(2, arm.S), L, opts)
        return ListEngine(spec, L, opts)

    def with_ida(eng):
        from dataclasses import replace
        params = table_params(cfg.n, cfg.rate, quantized=arm.quantized)
        params = replace(params, large_list=arm.L)
        return IdaDecoder(engine(params.small_list), eng, params,
                          profile=profile)

    first = engine(arm.L)
    if arm.ida:
        first = with_ida(first)
    if arm.second == "sc":
        second = ListEngine(spec, 1, opts)
    elif arm.ida == "both":
        second = with_ida(engine(arm.L))
    else:
        second = engine(arm.L)

    if arm.scheme is None:
        enh = EnhanceConfig(scheme="be", attempts=1, sigma_p=0.0)
    else:
        enh = EnhanceConfig(scheme=arm.scheme, attempts=arm.attempts,
                            sigma_p=arm.sigma_p)
    return spec, EnhancedDecoder(spec, enh, first, second)


def simulate_frames(cfg, arm, ebn0_db, lo, hi, runner=None):
    """Simulate frames [lo, hi); returns a _Tally."""
    spec, decoder = runner if runner is not None else build_runner(cfg, arm)
    cc = ChannelConfig(ebn0_db, spec.effective_rate, cfg.seed)
    decoder.sigma = cc.sigma
    msg_len = spec.message_bits
    tally = _Tally()
    for start in range(lo, hi, cfg.batch_size):
        stop = min(start + cfg.batch_size, hi)
        frames = np.arange(start, stop)
        msgs = np.empty((len(frames), msg_len), dtype=np.uint8)
        noise = np.empty((len(frames), cfg.n))
        for j, f in enumerate(frames):
            rng = frame_rng(cfg.seed, ebn0_db, int(f))
            msgs[j] = rng.integers(0, 2, msg_len, dtype=np.uint8)
            noise[j] = rng.standard_normal(cfg.n)
        y = modulate(encode(spec, msgs)) + cc.sigma * noise
        out = decoder.decode_frames(y, seed=cfg.seed, ebn0_db=ebn0_db,
                                    frames=frames)
        bad = (out.message != msgs).sum(axis=1)
        tally.frames += len(frames)
        tally.frame_errors += int((bad > 0).sum())
        tally.bit_errors += int(bad.sum())
        tally.attempts += int(out.attempts.sum())
        tally.list_size += int(out.list_sum.sum())
        tally.adds += int(out.ops[:, 0].sum())
        tally.compares += int(out.ops[:, 1].sum())
        tally.selects += int(out.ops[:, 2].sum())
    return tally


_WORKER_CACHE = {}


def _chunk_task(args):
    cfg, arm, ebn0_db, lo, hi = args
    key = (arm.name, cfg.n, cfg.rate, cfg.seed)
    if key not in _WORKER_CACHE:
        _WORKER_CACHE[key] = build_runner(cfg, arm)
    return lo, simulate_frames(cfg, arm, ebn0_db, lo, hi,
                               runner=_WORKER_CACHE[key])


def _run_point(cfg, arm, ebn0_db, pool):
    tally = _Tally()
    start = time.time()
    frame = 0
    runner = build_runner(cfg, arm) if pool is None else None
    while (tally.frame_errors < cfg.min_frame_errors
           and tally.frames < cfg.max_frames):
        hi = min(frame + cfg.check_interval, cfg.max_frames)
        if pool is None:
            parts = [(frame, simulate_frames(cfg, arm, ebn0_db, frame, hi,
                                             runner=runner))]
        else:
            step = max(cfg.batch_size,
                       -(-(hi - frame) // (cfg.workers * cfg.batch_size))
                       * cfg.batch_size)
            chunks = [(cfg, arm, ebn0_db, lo, min(lo + step, hi))
                      for lo in range(frame, hi, step)]
            parts = pool.map(_chunk_task, chunks)
        for _, part in sorted(parts, key=lambda kv: kv[0]):
            tally.merge(part)
        frame = hi
    n_msg = (round(cfg.n * cfg.rate))
    return SimRecord(
        arm=arm.name, ebn0_db=ebn0_db, frames=tally.frames,
        frame_errors=tally.frame_errors, bit_errors=tally.bit_errors,
        fer=tally.frame_errors / tally.frames,
        ber=tally.bit_errors / (tally.frames * n_msg),
        avg_attempts=tally.attempts / tally.frames,
        avg_list_size=tally.list_size / tally.frames,
        avg_ops={"additions": tally.adds / tally.frames,
                 "comparisons": tally.compares / tally.frames,
                 "selections": tally.selects / tally.frames},
        wall_time=time.time() - start)


def _record_row(rec):
    total = (rec.avg_ops["additions"] + rec.avg_ops["comparisons"]
             + rec.avg_ops["selections"])
    return [rec.arm, repr(float(rec.ebn0_db)), str(rec.frames),
            str(rec.frame_errors), repr(rec.fer), repr(rec.ber),
            repr(rec.avg_attempts), repr(rec.avg_list_size),
            repr(rec.avg_ops["additions"]), repr(rec.avg_ops["comparisons"]),
            repr(rec.avg_ops["selections"]), repr(total)]


def completed_points(csv_path):
    """(arm, ebn0) pairs already present, so a resumed sweep skips them."""
    done = set()
    if csv_path and os.path.exists(csv_path):
        with open(csv_path, newline="") as fh:
            for row in csv.DictReader(fh):
                done.add((row["arm"], float(row["ebn0_db"])))
    return done


def run_sweep(cfg, csv_path=None, progress=None):
    """Run every (arm, Eb/N0) point; appends rows as points complete."""
    done = completed_points(csv_path)
    if csv_path and not os.path.exists(csv_path):
        with open(csv_path, "w", newline="") as fh:
            csv.writer(fh).writerow(CSV_COLUMNS)
    pool = None
    if cfg.workers > 1:
        pool = multiprocessing.get_context("fork").Pool(cfg.workers)
    records = []
    try:
        for ebn0 in cfg.ebn0_grid:
            for arm in cfg.arms:
                if (arm.name, float(ebn0)) in done:
                    continue
                rec = _run_point(cfg, arm, float(ebn0), pool)
                records.append(rec)
                if csv_path:
                    with open(csv_path, "a", newline="") as fh:
                        csv.writer(fh).writerow(_record_row(rec))
                if progress:
                    progress(rec)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return records


def emit_results(records, fmt, path, config=None):
    """Write records as CSV or JSON; JSON carries the config echo."""
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for rec in records:
                w.writerow(_record_row(rec))
    elif fmt == "json":
        payload = {
            "version": "polarsim-0.1.0",
            "config": asdict(config) if config is not None else None,
            "records": [asdict(rec) for rec in records],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)
    else:
        raise ValueError("unknown output format %r" % (fmt,))
    return path


def parse_records(csv_path):
    out = []
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SimRecord(
                arm=row["arm"], ebn0_db=float(row["ebn0_db"]),
                frames=int(row["frames"]),
                frame_errors=int(row["frame_errors"]),
                bit_errors=0, fer=float(row["fer"]), ber=float(row["ber"]),
                avg_attempts=float(row["avg_attempts"]),
                avg_list_size=float(row["avg_list"]),
                avg_ops={"additions": float(row["adds"]),
                         "comparisons": float(row["compares"]),
                         "selections": float(row["selects"])},
                wall_time=0.0))
    return out
