"""Command-line front end.

    upqi moments --config F [--T t --phiT p]
    upqi sweep   --config F --param {Delta|delta|phiT} --from A --to B --steps N --out F.csv
    upqi image   --config F --object PATH --out DIR [--pgm]
    upqi verify  [--quick]

Exit codes: 0 success, 1 failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import verify as verify_mod
from .errors import UpqiError
from .imaging import scan_object
from .io import fmt, load_config, load_object, write_reconstruction
from .moments import moments
from .optics import make_object


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="upqi", description="Undetected-photon squeezed-light imaging simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="print mean,variance,snr,gamma for one pixel")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, default=1.0, dest="T")
    p.add_argument("--phiT", type=float, default=0.0)

    p = sub.add_parser("sweep", help="tabulate moments against one phase")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=("Delta", "delta", "phiT"))
    p.add_argument("--from", type=float, required=True, dest="start")
    p.add_argument("--to", type=float, required=True, dest="stop")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--T", type=float, default=1.0, dest="T")
    p.add_argument("--phiT", type=float, default=0.0)

    p = sub.add_parser("image", help="scan an object map and reconstruct it")
    p.add_argument("--config", required=True)
    p.add_argument("--object", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", action="store_true", help="also write 16-bit PGM renders")

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true")
    return parser


def _cmd_moments(args, out: TextIO) -> int:
    setup = load_config(args.config).setup()
    m = moments(setup, make_object(args.T, args.phiT))
    print(",".join(fmt(v) for v in (m.mean, m.variance, m.snr, m.gamma)), file=out)
    return 0


def _cmd_sweep(args, out: TextIO) -> int:
    if args.steps < 1:
        raise UpqiError("--steps must be >= 1")
    setup = load_config(args.config).setup()
    rows = ["param,mean,variance,snr"]
    for value in np.linspace(args.start, args.stop, args.steps):
        value = float(value)
        if args.param == "phiT":
            m = moments(setup, make_object(args.T, value))
        else:
            tuned = setup.with_setting(**{args.param: value})
            m = moments(tuned, make_object(args.T, args.phiT))
        rows.append(",".join(fmt(v) for v in (value, m.mean, m.variance, m.snr)))
    Path(args.out).write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {args.steps} rows to {args.out}", file=out)
    return 0


def _cmd_image(args, out: TextIO) -> int:
    cfg = load_config(args.config)
    obj = load_object(args.object)
    recon, metrics = scan_object(cfg.setup(), obj, cfg.protocol, cfg.samples, cfg.seed)
    write_reconstruction(args.out, recon, metrics, pgm=args.pgm)
    print(
        f"{obj.height}x{obj.width} {cfg.protocol}: rmse_T={fmt(metrics.rmse_T)} rmse_phi={fmt(metrics.rmse_phi)}",
        file=out,
    )
    return 0


def _cmd_verify(args, out: TextIO) -> int:
    results = verify_mod.run_all(quick=args.quick, emit=lambda line: print(line, file=out, flush=True))
    failed = [r for r in results if r.passed is False]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return 1 if failed else 0


COMMANDS = {"moments": _cmd_moments, "sweep": _cmd_sweep, "image": _cmd_image, "verify": _cmd_verify}


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (UpqiError, OSError) as exc:
        print(f"upqi {args.command}: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
