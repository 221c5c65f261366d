"""Command line: train a checkpoint, or serve one over stdio.

Exit codes: 0 success, 1 protocol violation while serving, 2 bad
configuration or arguments, 3 training divergence.
"""
from __future__ import annotations

import argparse
import sys
import tempfile

from .corpus import CorpusError
from .serve import serve
from .train import TrainSpec, TrainingDiverged, train


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnn-denoiser",
        description="Residual CNN denoiser speaking the HICUDNZ1 stdio protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fit a checkpoint on phantom images")
    tr.add_argument("--out", required=True, help="checkpoint path to write")
    tr.add_argument("--workdir", default=None,
                    help="corpus scratch directory (default: temporary)")
    tr.add_argument("--train-phantoms", type=int, default=12)
    tr.add_argument("--val-phantoms", type=int, default=4)
    tr.add_argument("--nx", type=int, default=48)
    tr.add_argument("--ny", type=int, default=48)
    tr.add_argument("--nc", type=int, default=4)
    tr.add_argument("--noise-db", type=float, default=15.0)
    tr.add_argument("--epochs", type=int, default=12)
    tr.add_argument("--batch-size", type=int, default=8)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--generator", default="hicu",
                    help="phantom generator command (default: hicu)")

    sv = sub.add_parser("serve", help="answer denoise frames on stdin/stdout")
    sv.add_argument("--checkpoint", required=True)
    return parser


def cmd_train(args) -> int:
    try:
        spec = TrainSpec(
            train_phantoms=args.train_phantoms, val_phantoms=args.val_phantoms,
            nx=args.nx, ny=args.ny, nc=args.nc, noise_db=args.noise_db,
            epochs=args.epochs, batch_size=args.batch_size,
            learning_rate=args.lr, seed=args.seed, generator=args.generator,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    log = lambda msg: print(msg, file=sys.stderr)
    try:
        if args.workdir is not None:
            result = train(spec, args.workdir, args.out, log=log)
        else:
            with tempfile.TemporaryDirectory() as tmp:
                result = train(spec, tmp, args.out, log=log)
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    except CorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.checkpoint}; val loss {result.val_loss:.6f}; "
          f"held-out PSNR gain {result.psnr_gain_db:.2f} dB")
    return 0


def cmd_serve(args) -> int:
    try:
        return serve(args.checkpoint)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "train":
        return cmd_train(args)
    return cmd_serve(args)


if __name__ == "__main__":
    raise SystemExit(main())
