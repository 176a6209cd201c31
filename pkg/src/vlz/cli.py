"""Command-line front end.

Input files are headerless raw little-endian float32 with dimensions given
on the command line (the SDRBench convention), fastest-varying dimension
last.  Four-dimensional inputs are accepted with ``--fold``, which folds all
leading dimensions into the first of three.

Exit codes:
  0  success
  2  usage or configuration error
  3  I/O error
  4  input size disagrees with the dimensions
  5  degenerate value range (relative bound or PSNR on constant data)
  6  malformed or corrupt container
  7  error bound too small for the data magnitude
  8  verification failed (reconstruction exceeds the stored bound)
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .autotune import TUNE_CSV_FIELDS, TuneSpace, apply_chosen, autotune
from .errors import (
    BoundTooSmallError,
    ConfigError,
    ContainerFormatError,
    CorruptStreamError,
    DegenerateRangeError,
    SizeMismatchError,
    VlzError,
)
from .container import deserialize
from .metrics import (
    BENCH_CSV_FIELDS,
    RD_CSV_FIELDS,
    bench_kernel,
    max_abs_error,
    psnr,
    rate,
    rate_distortion_row,
    ratio,
)
from .model import (
    CompressionConfig,
    ErrorBound,
    PaddingPolicy,
    VALID_BLOCK_EDGES,
    VECTOR_LANE_WIDTHS,
)
from .padding import outlier_report
from .pipeline import compress_detailed
from .reconstruct import decompress_parsed

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SIZE = 4
EXIT_RANGE = 5
EXIT_FORMAT = 6
EXIT_BOUND = 7
EXIT_VERIFY = 8

ANALYZE_CSV_FIELDS = (
    "eb",
    "value_kind",
    "granularity",
    "total_outliers",
    "border_outliers",
    "border_outlier_pct",
    "reduction_vs_zero_pct",
    "rate_bits",
    "psnr_db",
)
STUDY_CSV_FIELDS = (
    "fraction",
    "iterations",
    "chosen_block",
    "chosen_lanes",
    "pct_of_peak",
    "pct_runtime_tuning",
)


def _parse_dims(text: str, fold: bool) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse dimensions {text!r}") from None
    if any(d < 1 for d in dims):
        raise ConfigError(f"dimensions must be positive, got {dims}")
    if len(dims) > 3:
        if not fold:
            raise ConfigError(
                f"{len(dims)}-dimensional input needs --fold to collapse "
                "leading dimensions"
            )
        dims = (math.prod(dims[:-2]), dims[-2], dims[-1])
    return dims


def _read_raw(path: str, dims: tuple[int, ...]) -> np.ndarray:
    expected = 4 * math.prod(dims)
    actual = os.path.getsize(path)
    if actual != expected:
        raise SizeMismatchError(
            f"{path}: {actual} bytes on disk but dims {dims} need {expected}"
        )
    return np.fromfile(path, dtype="<f4").reshape(dims)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("VLZ_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"VLZ_THREADS={env!r} is not an integer") from None
        if n < 1:
            raise ConfigError(f"VLZ_THREADS must be >= 1, got {n}")
        return n
    return 1


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config file line without '=': {line!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def _error_bound(args, filecfg: dict[str, str]) -> ErrorBound:
    if args.abs is not None and args.rel is not None:
        raise ConfigError("--abs and --rel are mutually exclusive")
    if args.abs is not None:
        return ErrorBound.absolute(args.abs)
    if args.rel is not None:
        return ErrorBound.relative(args.rel)
    if "abs" in filecfg:
        return ErrorBound.absolute(float(filecfg["abs"]))
    if "rel" in filecfg:
        return ErrorBound.relative(float(filecfg["rel"]))
    raise ConfigError("an error bound is required: --abs X or --rel X")


def _build_config(args, filecfg: dict[str, str]) -> CompressionConfig:
    def pick(flag, key, default, conv):
        if flag is not None:
            return flag
        if key in filecfg:
            return conv(filecfg[key])
        return default

    return CompressionConfig(
        error_bound=_error_bound(args, filecfg),
        block_edge=pick(args.block, "block", 16, int),
        lane_width=pick(args.lanes, "lanes", 8, int),
        padding=PaddingPolicy.parse(pick(args.pad, "pad", "mean:global", str)),
        radius=pick(args.radius, "radius", 32768, int),
        thread_count=_threads(args),
    )


def _write_csv(path: str, fields, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        writer.writerows(rows)


def cmd_compress(args) -> int:
    filecfg = _load_config_file(args.config)
    dims = _parse_dims(args.dims, args.fold)
    data = _read_raw(args.input, dims)
    config = _build_config(args, filecfg)

    tune_rows = None
    if args.autotune:
        parts = args.autotune.split(",")
        if len(parts) not in (2, 3):
            raise ConfigError("--autotune wants FRACTION,ITERATIONS[,SEED]")
        fraction = float(parts[0])
        iterations = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 1
        report = autotune(
            data, TuneSpace.build(), fraction, iterations, seed, base=config
        )
        config = apply_chosen(config, report)
        tune_rows = report.csv_rows()
        print(
            f"autotune: chose block={config.block_edge} lanes={config.lane_width} "
            f"in {report.tuning_seconds * 1e3:.1f} ms"
        )

    t0 = time.perf_counter()
    blob, stream = compress_detailed(data, config)
    elapsed = time.perf_counter() - t0
    with open(args.output, "wb") as fh:
        fh.write(blob)
    n_out = int(stream.outlier_counts.sum())
    print(
        f"compressed {data.nbytes} -> {len(blob)} bytes  "
        f"ratio {ratio(data.nbytes, len(blob)):.2f}  "
        f"rate {rate(blob, stream.grid.descriptor):.3f} bits/elem  "
        f"outliers {n_out} ({100.0 * n_out / data.size:.2f}%)  "
        f"eb {stream.resolved_abs:g}  {elapsed * 1e3:.1f} ms"
    )
    if args.csv and tune_rows is not None:
        _write_csv(args.csv, TUNE_CSV_FIELDS, tune_rows)
    return EXIT_OK


def cmd_decompress(args) -> int:
    with open(args.input, "rb") as fh:
        blob = fh.read()
    parsed = deserialize(blob)
    t0 = time.perf_counter()
    arr, desc = decompress_parsed(parsed, thread_count=_threads(args))
    elapsed = time.perf_counter() - t0
    arr.astype("<f4").tofile(args.output)
    print(
        f"decompressed {len(blob)} -> {arr.nbytes} bytes  dims "
        f"{'x'.join(str(d) for d in desc.dims)}  {elapsed * 1e3:.1f} ms"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    with open(args.container, "rb") as fh:
        blob = fh.read()
    parsed = deserialize(blob)
    data = _read_raw(args.input, parsed.descriptor.dims)
    arr, _ = decompress_parsed(parsed, thread_count=_threads(args))
    err = max_abs_error(data, arr)
    try:
        quality = f"{psnr(data, arr):.2f} dB"
    except DegenerateRangeError:
        quality = "undefined (constant data)"
    ok = err <= parsed.resolved_abs
    print(
        f"eb {parsed.resolved_abs:g}  max_error {err:g}  psnr {quality}  "
        f"{'PASS' if ok else 'FAIL'}"
    )
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_analyze(args) -> int:
    dims = _parse_dims(args.dims, args.fold)
    data = _read_raw(args.input, dims)
    ebs = [float(x) for x in args.ebs.split(",")]
    rows = []
    rd_rows = []
    for eb in ebs:
        config = CompressionConfig(
            error_bound=ErrorBound.absolute(eb),
            block_edge=args.block if args.block else 16,
            lane_width=args.lanes if args.lanes else 8,
            thread_count=_threads(args),
        )
        for stats, reduction in outlier_report(data, config):
            cfg = CompressionConfig(
                error_bound=config.error_bound,
                block_edge=config.block_edge,
                lane_width=config.lane_width,
                padding=stats.policy,
                thread_count=config.thread_count,
            )
            blob, stream = compress_detailed(data, cfg)
            arr, _ = decompress_parsed(deserialize(blob), thread_count=cfg.thread_count)
            try:
                quality = f"{psnr(data, arr):.4f}"
            except DegenerateRangeError:
                quality = "inf"
            rows.append(
                [
                    repr(eb),
                    stats.policy.value_kind.value,
                    stats.policy.granularity.value,
                    stats.total_outliers,
                    stats.border_outliers,
                    f"{stats.border_pct:.2f}",
                    f"{reduction:.2f}",
                    f"{rate(blob, stream.grid.descriptor):.4f}",
                    quality,
                ]
            )
            if str(stats.policy) == "mean:global":
                try:
                    q = psnr(data, arr)
                except DegenerateRangeError:
                    q = math.inf
                rd_rows.append(
                    rate_distortion_row(
                        eb, len(blob), stream.grid.descriptor, q,
                        stats.total_outliers, stats.border_pct,
                    )
                )
    if args.rd_csv:
        _write_csv(args.rd_csv, RD_CSV_FIELDS, rd_rows)
    if args.csv:
        _write_csv(args.csv, ANALYZE_CSV_FIELDS, rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(ANALYZE_CSV_FIELDS)
        writer.writerows(rows)
    return EXIT_OK


def cmd_bench(args) -> int:
    dims = _parse_dims(args.dims, args.fold)
    if args.input:
        data = _read_raw(args.input, dims)
        dataset = os.path.basename(args.input)
    else:
        rng = np.random.default_rng(args.seed)
        mesh = np.add.reduce(
            np.meshgrid(*[np.linspace(0, 4 * math.pi, d) for d in dims], indexing="ij")
        )
        data = (np.sin(mesh) * 50 + rng.normal(0, 0.5, dims)).astype(np.float32)
        dataset = "synthetic"
    eb = args.abs if args.abs is not None else 1e-4
    blocks = [int(b) for b in args.blocks.split(",")]
    lanes_list = [int(l) for l in args.lanes_list.split(",")]
    threads = _threads(args)
    rows = []
    best = None
    for b in blocks:
        for l in lanes_list:
            cfg = CompressionConfig(
                error_bound=ErrorBound.absolute(eb),
                block_edge=b,
                lane_width=l,
                thread_count=threads,
            )
            res = bench_kernel(data, cfg, repetitions=args.reps)
            rows.append(res.csv_row(dataset, dims, eb))
            if best is None or res.time_s < best.time_s:
                best = res
            print(
                f"block {b:2d} lanes {l:2d}: {res.time_s * 1e3:9.2f} ms  "
                f"{res.mb_per_s:8.1f} MB/s"
            )
    print(
        f"best: block={best.config.block_edge} lanes={best.config.lane_width} "
        f"at {best.mb_per_s:.1f} MB/s"
    )
    if args.peak_mbps:
        # ceilings implied by a user-supplied (e.g. stream-measured) peak
        # memory bandwidth: ceiling GFLOP/s = peak bytes/s x flops/byte
        from vlz.metrics import oi_bounds
        from vlz.model import ArrayDescriptor

        oi = oi_bounds(ArrayDescriptor.from_array(data), best.config.block_edge)
        ceil_cons = args.peak_mbps * 1e6 * oi.conservative / 1e9
        ceil_len = args.peak_mbps * 1e6 * oi.lenient / 1e9
        print(
            f"vs peak {args.peak_mbps:.0f} MB/s: conservative "
            f"{best.gflops_conservative:.4f}/{ceil_cons:.4f} GFLOP/s "
            f"({100 * best.gflops_conservative / ceil_cons:.1f}%), lenient "
            f"{best.gflops_lenient:.4f}/{ceil_len:.4f} GFLOP/s "
            f"({100 * best.gflops_lenient / ceil_len:.1f}%)"
        )
    if args.csv:
        _write_csv(args.csv, BENCH_CSV_FIELDS, rows)
    return EXIT_OK


def cmd_autotune_study(args) -> int:
    dims = _parse_dims(args.dims, args.fold)
    data = _read_raw(args.input, dims)
    eb = args.abs if args.abs is not None else 1e-4
    base = CompressionConfig(error_bound=ErrorBound.absolute(eb))
    space = TuneSpace.build()

    # Full-run bandwidth per configuration: the "peak" reference.
    full_times = {}
    for b, l in space.configs:
        cfg = CompressionConfig(
            error_bound=ErrorBound.absolute(eb), block_edge=b, lane_width=l
        )
        res = bench_kernel(data, cfg, repetitions=max(3, args.reps))
        full_times[(b, l)] = res.time_s
    peak_time = min(full_times.values())

    rows = []
    for fraction in [float(f) for f in args.fractions.split(",")]:
        for iterations in [int(i) for i in args.iterations.split(",")]:
            report = autotune(data, space, fraction, iterations, args.seed, base=base)
            chosen_time = full_times[report.chosen]
            pct_peak = 100.0 * peak_time / chosen_time
            pct_tuning = (
                100.0 * report.tuning_seconds / (report.tuning_seconds + chosen_time)
            )
            rows.append(
                [
                    fraction,
                    iterations,
                    report.chosen[0],
                    report.chosen[1],
                    f"{pct_peak:.2f}",
                    f"{pct_tuning:.2f}",
                ]
            )
            print(
                f"fraction {fraction:5.2f} iters {iterations}: chose "
                f"{report.chosen}, {pct_peak:.1f}% of peak, "
                f"{pct_tuning:.1f}% of runtime tuning"
            )
    if args.csv:
        _write_csv(args.csv, STUDY_CSV_FIELDS, rows)
    return EXIT_OK


def _add_common(p, need_dims=True):
    if need_dims:
        p.add_argument("-d", "--dims", required=True, help="comma-separated extents")
        p.add_argument(
            "--fold",
            action="store_true",
            help="fold leading dimensions of a 4D+ input into one",
        )
    p.add_argument("--threads", type=int, default=None, help="worker threads (env VLZ_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vlz",
        description="Error-bounded lossy compressor for raw float32 arrays.",
        epilog="Exit codes: 0 ok, 2 config, 3 io, 4 size mismatch, "
        "5 degenerate range, 6 bad container, 7 bound too small, 8 verify failed.",
    )
    ap.add_argument("--version", action="version", version=f"vlz {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="compress a raw float32 file")
    c.add_argument("-i", "--input", required=True)
    c.add_argument("-o", "--output", required=True)
    _add_common(c)
    c.add_argument("--abs", type=float, help="absolute error bound")
    c.add_argument("--rel", type=float, help="value-range-relative error bound")
    c.add_argument("--block", type=int, choices=VALID_BLOCK_EDGES)
    c.add_argument("--lanes", type=int, choices=(1,) + VECTOR_LANE_WIDTHS)
    c.add_argument("--pad", help="padding policy kind:granularity (default mean:global)")
    c.add_argument("--radius", type=int, help="quantizer radius (default 32768)")
    c.add_argument("--autotune", metavar="FRAC,ITERS[,SEED]")
    c.add_argument("--config", help="key=value config file (flags win)")
    c.add_argument("--csv", help="write the autotune grid to this CSV")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="decompress a container to raw float32")
    d.add_argument("-i", "--input", required=True)
    d.add_argument("-o", "--output", required=True)
    _add_common(d, need_dims=False)
    d.set_defaults(func=cmd_decompress)

    v = sub.add_parser("verify", help="check a container against its original")
    v.add_argument("-i", "--input", required=True, help="original raw file")
    v.add_argument("-c", "--container", required=True)
    _add_common(v, need_dims=False)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="padding/outlier study CSV")
    a.add_argument("-i", "--input", required=True)
    _add_common(a)
    a.add_argument("--ebs", default="1e-4", help="comma list of absolute bounds")
    a.add_argument("--block", type=int, choices=VALID_BLOCK_EDGES)
    a.add_argument("--lanes", type=int, choices=VECTOR_LANE_WIDTHS)
    a.add_argument("--csv", help="output CSV path (default stdout)")
    a.add_argument("--rd-csv", help="also write rate-distortion rows here")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="kernel bandwidth sweep CSV")
    b.add_argument("-i", "--input", help="raw file (omit for synthetic data)")
    _add_common(b)
    b.add_argument("--abs", type=float, help="absolute error bound (default 1e-4)")
    b.add_argument("--blocks", default="8,16,32,64")
    b.add_argument("--lanes-list", default="4,8,16")
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument(
        "--peak-mbps",
        type=float,
        help="user-supplied peak memory bandwidth; reports %% of the implied ceiling",
    )
    b.add_argument("--csv", help="output CSV path")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("autotune-study", help="autotune settings grid CSV")
    s.add_argument("-i", "--input", required=True)
    _add_common(s)
    s.add_argument("--abs", type=float, help="absolute error bound (default 1e-4)")
    s.add_argument("--fractions", default="0.01,0.05,0.1,0.2")
    s.add_argument("--iterations", default="1,2,3")
    s.add_argument("--reps", type=int, default=3)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--csv", help="output CSV path")
    s.set_defaults(func=cmd_autotune_study)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SizeMismatchError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except DegenerateRangeError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (ContainerFormatError, CorruptStreamError) as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except BoundTooSmallError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except ConfigError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_IO
    except VlzError as exc:
        print(f"vlz: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
