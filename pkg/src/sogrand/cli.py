"""Command-line front end: ``simulate``, ``calibrate``, ``codegen`` and ``decode``."""

import argparse
import sys
from pathlib import Path

from . import codes
from .sim import (ConfigError, ExperimentConfig, build_component, calibrate, codegen,
                  decode_one, read_llr_file, run_sim)


def _add_code_args(p):
    p.add_argument("--config", help="experiment config file (key = value)")
    p.add_argument("--ebch", nargs=2, type=int, metavar=("M", "T"), help="extended BCH code")
    p.add_argument("--crc", nargs=3, metavar=("N", "K", "POLY"), help="CRC code, POLY in hex")
    p.add_argument("--notation", default="koopman", choices=["koopman", "implicit-leading", "full"])
    p.add_argument("--matrix", help="G or H matrix file")


def _code_from_args(args):
    if args.ebch:
        return codes.build_ebch(*args.ebch)
    if args.crc:
        n, k, poly = args.crc
        return codes.build_crc_code(int(n), int(k), poly, args.notation)
    if args.matrix:
        return codes.import_code(args.matrix)
    if args.config:
        return build_component(ExperimentConfig.from_file(args.config))
    raise ConfigError("give --config, --ebch, --crc or --matrix")


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="sogrand", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="BLER/BER/complexity sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("calibrate", help="predicted vs empirical soft-output table")
    p.add_argument("--config", required=True)
    p.add_argument("--estimator", default="sogrand", choices=["sogrand", "forney", "pyndiah"])
    p.add_argument("--mode", default="block", choices=["block", "bit"])
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--out")

    p = sub.add_parser("codegen", help="write G and H matrix files")
    _add_code_args(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--stem")

    p = sub.add_parser("decode", help="decode one LLR vector and report soft output")
    _add_code_args(p)
    p.add_argument("--llr", required=True, help="whitespace-separated LLRs")
    p.add_argument("--list-size", type=int, default=4)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--stop-rule", type=float, default=None)

    args = ap.parse_args(argv)
    try:
        if args.cmd == "simulate":
            cfg = ExperimentConfig.from_file(args.config)
            report = None if args.quiet else (lambda ps: print(
                f"{ps.snr_db:g} dB: frames={ps.frames} bler={ps.bler:.4g} ber={ps.ber:.4g}",
                file=sys.stderr))
            _write(run_sim(cfg, args.workers, progress=report).to_csv(), args.out)
        elif args.cmd == "calibrate":
            cfg = ExperimentConfig.from_file(args.config)
            _write(calibrate(cfg, args.estimator, args.mode, args.frames).to_csv(), args.out)
        elif args.cmd == "codegen":
            for path in codegen(_code_from_args(args), args.out_dir, args.stem):
                print(path)
        else:
            code = _code_from_args(args)
            print(decode_one(code, read_llr_file(args.llr), args.list_size, args.budget, args.stop_rule))
    except (ConfigError, codes.CodeConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
