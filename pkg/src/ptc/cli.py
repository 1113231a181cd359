"""Command line entry point: ``ptc run``, ``ptc analysis``, ``ptc solvers-selftest``, ``ptc scaling``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .convcode import ConfigError, ConvCodeSpec

log = logging.getLogger("ptc")


def _cmd_run(args) -> int:
    overrides = {"scheme": args.scheme, "snr": args.snr, "seed": args.seed, "out": args.out,
                 "max_bits": args.max_bits, "target_errors": args.target_errors}
    if args.no_timing:
        overrides["record_time"] = "false"
    cfg = harness.load_config(args.config, **overrides)
    records = harness.run_sweep(cfg, workers=args.workers)
    text = harness.records_to_csv(records, cfg.record_time)
    if cfg.out:
        Path(cfg.out).write_text(text)
        log.info("wrote %s", cfg.out)
        figure = args.figure or (None if args.no_figure else str(Path(cfg.out).with_suffix(".png")))
    else:
        sys.stdout.write(text)
        figure = args.figure
    if figure:
        from .plotting import plot_ber

        rows = harness.read_csv(cfg.out) if cfg.out else _rows_from_text(text)
        overlays = _overlays(cfg) if args.overlay else None
        plot_ber(rows, figure, title=Path(str(args.config)).stem, overlays=overlays)
        log.info("wrote %s", figure)
    if args.report:
        for scheme, stats in harness.counters_report(records).items():
            per = ", ".join(f"{k}={v:.1f}" for k, v in stats.items() if k != "blocks")
            print(f"# {scheme}: {stats['blocks']} blocks, per block {per}", file=sys.stderr)
    return 0


def _overlays(cfg) -> dict:
    from .analysis import dfree_bound, hd_ber_prediction

    book = cfg.book()
    xs = list(cfg.ebno_db)
    return {
        "hd-td prediction": (xs, [hd_ber_prediction(x, cfg.code, book).value for x in xs]),
        "dfree bound": (xs, [dfree_bound(x, cfg.code, book).value for x in xs]),
    }


def _rows_from_text(text: str) -> list[dict]:
    import csv
    import io

    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        r["ebno_db"], r["ber"], r["bit_errors"] = float(r["ebno_db"]), float(r["ber"]), int(r["bit_errors"])
    return rows


def _code_from_args(args) -> tuple[ConvCodeSpec, str]:
    if args.code:
        if args.code not in harness.CODES:
            raise ConfigError(f"unknown code preset {args.code!r}; choose from {', '.join(harness.CODES)}")
        k, n, K, gens, book = harness.CODES[args.code]
        return ConvCodeSpec.from_octal(k, n, K, gens), args.codebook or book
    if None in (args.k, args.n, args.K, args.generators, args.codebook):
        raise ConfigError("give --code <preset> or all of --k --n --K --generators --codebook")
    return ConvCodeSpec.from_octal(args.k, args.n, args.K, args.generators), args.codebook


def _cmd_analysis(args) -> int:
    from .analysis import analysis_table
    from .permmap import load_codebook

    spec, book_ref = _code_from_args(args)
    book = load_codebook(book_ref)
    rows = analysis_table(harness.parse_snr(args.snr), spec, book, depth=args.depth, normalize=args.normalize)
    lines = ["EbN0_dB,analytical_pe,dfree_bound"]
    lines += [f"{x:g},{pe:.6e},{b:.6e}" for x, pe, b in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def selftest(trials: int = 200, seed: int = 0, out=None) -> bool:
    """Oracle checks of the assignment solvers against exhaustive enumeration."""
    from .assign import all_assignments, branch_and_bound, hungarian, murty_kbest

    out = out or sys.stdout
    gen = np.random.Generator(np.random.Philox(seed))
    ok_all = True

    def report(name, bad, total):
        nonlocal ok_all
        ok_all &= bad == 0
        print(f"{'PASS' if bad == 0 else 'FAIL'} {name}: {total - bad}/{total}", file=out)

    bad = total = 0
    for M in (3, 4, 5, 6):
        for _ in range(trials):
            C = gen.random((M, M))
            total += 1
            bad += not np.isclose(hungarian(C).cost, all_assignments(C)[1].min())
    report("hungarian equals exhaustive minimum", bad, total)

    bad = total = 0
    for M in (4, 5):
        for _ in range(max(trials // 4, 1)):
            C = gen.integers(-3, 4, (M, M)).astype(float)
            k = 10
            got = [a.cost for a in murty_kbest(C, k)]
            want = np.sort(all_assignments(C)[1])[:k]
            total += 1
            bad += not np.allclose(got, want)
    report("murty ranking equals sorted enumeration", bad, total)

    bad = total = 0
    for M in range(4, 9):
        for _ in range(max(trials // 4, 1)):
            C = gen.random((M, M))
            a = branch_and_bound(C)
            total += 1
            bad += sorted(a.perm) != list(range(M)) or a.cost < hungarian(C).cost - 1e-9
    report("branch and bound valid and bounded by the optimum", bad, total)
    return ok_all


def _cmd_selftest(args) -> int:
    return 0 if selftest(args.trials, args.seed) else 1


def _cmd_scaling(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",")]
    res = harness.solver_scaling(sizes, trials=args.trials, seed=args.seed)
    print("solver," + ",".join(f"M{M}" for M in sizes) + ",exponent")
    for name, counts in res.items():
        slope = harness.fit_exponent(sizes, [counts[M] for M in sizes])
        print(f"{name}," + ",".join(f"{counts[M]:.1f}" for M in sizes) + f",{slope:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptc", description="Permutation trellis code BER simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="Monte Carlo BER sweep to CSV (and a figure)")
    r.add_argument("--config", required=True, help="config file or built-in recipe name")
    r.add_argument("--scheme", help='schemes, e.g. "hd-td s1 s1:1 s3"')
    r.add_argument("--snr", help="Eb/N0 grid a:b:step or list (dB)")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="CSV path (stdout when omitted)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--max-bits", type=int)
    r.add_argument("--target-errors", type=int)
    r.add_argument("--no-timing", action="store_true", help="write wall_s as 0 for byte-stable output")
    r.add_argument("--figure", help="BER figure path (default: next to the CSV)")
    r.add_argument("--no-figure", action="store_true")
    r.add_argument("--overlay", action="store_true", help="draw the analytical HD curves on the figure")
    r.add_argument("--report", action="store_true", help="print per-block operation counts")
    r.set_defaults(func=_cmd_run)

    a = sub.add_parser("analysis", help="analytical HD stage error and event bound as CSV")
    a.add_argument("--code", help=f"preset: {', '.join(harness.CODES)}")
    a.add_argument("--k", type=int)
    a.add_argument("--n", type=int)
    a.add_argument("--K", type=int)
    a.add_argument("--generators")
    a.add_argument("--codebook")
    a.add_argument("--snr", default="0:12:1")
    a.add_argument("--depth", type=int, default=10)
    a.add_argument("--normalize", choices=("printed", "codebook"), default="printed")
    a.add_argument("--out")
    a.set_defaults(func=_cmd_analysis)

    s = sub.add_parser("solvers-selftest", help="check solvers against exhaustive enumeration")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_selftest)

    g = sub.add_parser("scaling", help="solver operation counts and growth exponents")
    g.add_argument("--sizes", default="4,8,16,32")
    g.add_argument("--trials", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_scaling)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"ptc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
