"""Command-line interface.

Three subcommands:

* ``hicu phantom`` — synthesize multi-coil k-space test data.
* ``hicu recon`` — reconstruct undersampled k-space.
* ``hicu eval`` — compare an estimate against a reference, summarize a
  trace, and optionally verify data consistency.

Exit codes: 0 success, 2 configuration or usage error, 3 denoiser
failure, 4 file I/O or format error.  ``eval`` exits 1 when a requested
check fails.

Stage schedules are given as a small one-line language: stages separated
by ``;``, each stage a comma-separated list starting with its region
(``full`` or ``center=<fraction>``) followed by ``p=<int>``, ``g=<int>``,
``iters=<int>`` and optional ``denoise=on|off``, e.g.::

    center=0.25,p=8,g=5,iters=10;full,p=32,g=10,iters=10,denoise=on
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import fileio
from .denoise import ExternalDenoiser, IdentityDenoiser, SwtDenoiser
from .errors import ConfigError, DenoiserError, DimensionError, FileFormatError
from .masks import MaskSpec, make_mask
from .metrics import SnrReport, summarize_trace
from .phantom import PhantomSpec, make_phantom
from .solver import SolverConfig, StageConfig, hicu_run

# Two-stage schedule: warm start on the fully sampled center with a small
# compression budget, then refine over the whole grid with a larger one.
# The denoiser (when one is configured) engages in the second stage; with
# the identity denoiser "denoise=on" is a bitwise no-op.
DEFAULT_STAGES = "center=0.25,p=8,g=5,iters=10,denoise=off;full,p=32,g=10,iters=10,denoise=on"


def parse_stages(text: str):
    """Parse the stage mini-language into a tuple of StageConfig."""
    stages = []
    for idx, chunk in enumerate(text.strip().split(";")):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError(f"stage {idx + 1} is empty")
        tokens = [t.strip() for t in chunk.split(",")]
        head, rest = tokens[0], tokens[1:]
        if head == "full":
            fraction = 1.0
        elif head.startswith("center="):
            try:
                fraction = float(head.split("=", 1)[1])
            except ValueError:
                raise ConfigError(f"bad region fraction in {head!r}") from None
        else:
            raise ConfigError(
                f"stage {idx + 1} must start with 'full' or 'center=<fraction>', "
                f"got {head!r}"
            )
        fields = {"denoise": "off"}
        for token in rest:
            if "=" not in token:
                raise ConfigError(f"bad stage token {token!r} (expected key=value)")
            key, value = token.split("=", 1)
            if key not in ("p", "g", "iters", "denoise"):
                raise ConfigError(f"unknown stage key {key!r}")
            fields[key] = value
        for key in ("p", "g", "iters"):
            if key not in fields:
                raise ConfigError(f"stage {idx + 1} is missing {key}=<int>")
        if fields["denoise"] not in ("on", "off"):
            raise ConfigError(
                f"denoise must be 'on' or 'off', got {fields['denoise']!r}"
            )
        try:
            stages.append(
                StageConfig(
                    fraction=fraction,
                    p=int(fields["p"]),
                    g_steps=int(fields["g"]),
                    denoise=fields["denoise"] == "on",
                    outer_iters=int(fields["iters"]),
                )
            )
        except ValueError:
            raise ConfigError(f"non-integer value in stage {idx + 1}") from None
    return tuple(stages)


def _build_denoiser(args):
    spec = args.denoiser
    if spec == "identity":
        return IdentityDenoiser()
    if spec == "swt":
        return SwtDenoiser(
            wavelet=args.swt_wavelet,
            levels=args.swt_levels,
            threshold_scale=args.swt_scale,
        )
    if spec.startswith("external:"):
        return ExternalDenoiser(
            spec[len("external:"):], timeout=args.denoiser_timeout
        )
    raise ConfigError(
        f"unknown denoiser {spec!r}; use identity, swt, or external:<command>"
    )


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one reconstruction run.

    Serializes to a flat, human-readable key = value file (one field per
    line, '#' comments); `validate` checks that every referenced input
    path exists.
    """

    kspace: str
    mask: str | None
    pattern: str | None
    accel: float | None
    center_fraction: float
    rank: int
    kernel_size: int
    stages: str
    denoiser: str
    denoiser_timeout: float
    swt_wavelet: str
    swt_levels: int
    swt_scale: float
    budget_seconds: float | None
    seed: int
    out: str
    trace: str | None
    mask_out: str | None
    reference: str | None

    @classmethod
    def from_args(cls, args, stages_text: str) -> "RunManifest":
        return cls(
            kspace=args.kspace,
            mask=args.mask,
            pattern=args.pattern,
            accel=args.accel,
            center_fraction=args.center_frac,
            rank=args.rank,
            kernel_size=args.kernel_size,
            stages=stages_text,
            denoiser=args.denoiser,
            denoiser_timeout=args.denoiser_timeout,
            swt_wavelet=args.swt_wavelet,
            swt_levels=args.swt_levels,
            swt_scale=args.swt_scale,
            budget_seconds=args.budget_seconds,
            seed=args.seed,
            out=args.out,
            trace=args.trace,
            mask_out=args.mask_out,
            reference=args.reference,
        )

    def validate(self) -> None:
        for name in ("kspace", "mask", "reference"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"--{name} path does not exist: {path}")

    def to_text(self) -> str:
        lines = ["# reconstruction run manifest"]
        for field in fields(self):
            value = getattr(self, field.name)
            lines.append(f"{field.name} = {'' if value is None else value}")
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def cmd_phantom(args) -> int:
    spec = PhantomSpec(
        nx=args.nx, ny=args.ny, nc=args.nc, noise_db=args.noise_db, seed=args.seed
    )
    kspace, images = make_phantom(spec)
    fileio.write_kspace(args.out, kspace)
    if args.images_out is not None:
        fileio.write_kspace(args.images_out, images)
    print(f"wrote {args.out}: {spec.nx}x{spec.ny}x{spec.nc}"
          + ("" if spec.noise_db is None else f", noise {spec.noise_db:g} dB"))
    return 0


def cmd_recon(args) -> int:
    if (args.mask is None) == (args.pattern is None):
        raise ConfigError("give exactly one of --mask or --pattern")
    if args.mask is not None and args.accel is not None:
        raise ConfigError("--accel only applies with --pattern")
    if args.pattern is not None and args.accel is None:
        raise ConfigError("--pattern requires --accel")
    stages_text = args.stages if args.stages is not None else DEFAULT_STAGES
    manifest = RunManifest.from_args(args, stages_text)
    manifest.validate()
    if args.manifest_out is not None:
        manifest.write(args.manifest_out)
    measured = fileio.read_kspace(args.kspace)
    if args.mask is not None:
        mask = fileio.read_mask(args.mask)
    else:
        mask = make_mask(
            MaskSpec(
                pattern=args.pattern,
                accel=args.accel,
                center_fraction=args.center_frac,
                seed=args.seed,
            ),
            measured.nx,
            measured.ny,
        )
    if mask.shape != (measured.nx, measured.ny):
        raise ConfigError(
            f"mask grid {mask.shape} does not match k-space "
            f"{(measured.nx, measured.ny)}"
        )
    if args.mask_out is not None:
        fileio.write_mask(args.mask_out, mask)
    reference = None
    if args.reference is not None:
        reference = fileio.read_kspace(args.reference)

    if mask.mask.all():
        # Fully sampled: nothing to recover, pass the data through.
        fileio.write_kspace(args.out, measured)
        if args.trace is not None:
            fileio.write_trace(args.trace, [])
        print("fully sampled mask; output equals input")
        return 0

    denoiser = _build_denoiser(args)
    config = SolverConfig(
        rank=args.rank,
        stages=parse_stages(stages_text),
        kernel_size=(args.kernel_size, args.kernel_size),
        seed=args.seed,
        max_wall_clock=args.budget_seconds,
    )
    try:
        result = hicu_run(
            measured, mask, config, reference=reference, denoiser=denoiser
        )
    finally:
        denoiser.close()
    fileio.write_kspace(args.out, result.kspace)
    if args.trace is not None:
        fileio.write_trace(args.trace, result.trace)
    last = result.trace[-1] if result.trace else None
    bits = [f"wrote {args.out}"]
    if last is not None:
        bits.append(f"final cost {last.cost:.6g}")
        if last.snr_db is not None:
            bits.append(f"snr {last.snr_db:.2f} dB")
    if result.truncated:
        bits.append("stopped at wall-clock budget")
    print("; ".join(bits))
    return 0


def cmd_eval(args) -> int:
    estimate = fileio.read_kspace(args.estimate)
    failed = False
    if args.reference is not None:
        reference = fileio.read_kspace(args.reference)
        report = SnrReport.compare(estimate, reference, against=args.reference)
        print(f"snr_db {report.snr_db:.6f}")
        print(f"nmse {report.nmse:.8e}")
    if args.trace is not None:
        records = fileio.read_trace(args.trace)
        if records:
            summary = summarize_trace(records)
            if summary.peak_snr_db is not None:
                print(f"peak_snr_db {summary.peak_snr_db:.6f}")
                print(f"time_to_peak_s {summary.time_to_peak_s:.6f}")
                print(f"final_snr_db {summary.final_snr_db:.6f}")
            if summary.final_cost is not None:
                print(f"final_cost {summary.final_cost:.8e}")
            print(f"trace_records {summary.n_records}")
        else:
            print("trace_records 0")
    if args.check_dc:
        if args.measured is None or args.mask is None:
            raise ConfigError("--check-dc requires --measured and --mask")
        measured = fileio.read_kspace(args.measured)
        mask = fileio.read_mask(args.mask)
        if measured.shape != estimate.shape or mask.shape != estimate.shape[:2]:
            raise ConfigError("estimate, measured, and mask grids differ")
        same = np.array_equal(
            estimate.data[mask.mask], measured.data[mask.mask]
        )
        print(f"data_consistency {'ok' if same else 'FAIL'}")
        failed = failed or not same
    if args.reference is None and args.trace is None and not args.check_dc:
        raise ConfigError("nothing to do: give --reference, --trace, or --check-dc")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hicu",
        description="Calibrationless parallel-MRI k-space reconstruction "
        "by structured low-rank completion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_phantom = sub.add_parser("phantom", help="synthesize multi-coil k-space")
    p_phantom.add_argument("--nx", type=int, required=True)
    p_phantom.add_argument("--ny", type=int, required=True)
    p_phantom.add_argument("--nc", type=int, required=True)
    p_phantom.add_argument("--noise-db", type=float, default=None,
                           help="k-space SNR of added noise (omit for noiseless)")
    p_phantom.add_argument("--seed", type=int, default=0)
    p_phantom.add_argument("--out", required=True)
    p_phantom.add_argument("--images-out", default=None,
                           help="also save the coil images (same container)")
    p_phantom.set_defaults(func=cmd_phantom)

    p_recon = sub.add_parser("recon", help="reconstruct undersampled k-space")
    p_recon.add_argument("--kspace", required=True, help="measured data (HICUKSP1)")
    p_recon.add_argument("--mask", help="sampling mask file (HICUMSK1)")
    p_recon.add_argument("--pattern", choices=["S1", "S2"],
                         help="generate the mask instead of reading one")
    p_recon.add_argument("--accel", type=float, help="acceleration R for --pattern")
    p_recon.add_argument("--center-frac", type=float, default=0.0625,
                         help="fully sampled center fraction for --pattern")
    p_recon.add_argument("--rank", type=int, required=True)
    p_recon.add_argument("--kernel-size", type=int, default=3,
                         help="odd side of the square sliding kernel")
    p_recon.add_argument("--stages", default=None,
                         help="stage schedule (see command help text)")
    p_recon.add_argument("--denoiser", default="identity",
                         help="identity, swt, or external:<command>")
    p_recon.add_argument("--swt-scale", type=float, default=0.2,
                         help="threshold = scale * step size (swt denoiser)")
    p_recon.add_argument("--swt-levels", type=int, default=2)
    p_recon.add_argument("--swt-wavelet", default="haar")
    p_recon.add_argument("--denoiser-timeout", type=float, default=30.0,
                         help="seconds to wait for an external denoiser reply")
    p_recon.add_argument("--budget-seconds", type=float, default=None,
                         help="wall-clock limit for the solve")
    p_recon.add_argument("--seed", type=int, default=0)
    p_recon.add_argument("--out", required=True)
    p_recon.add_argument("--trace", default=None, help="write progress CSV here")
    p_recon.add_argument("--reference", default=None,
                         help="ground-truth k-space; enables SNR in the trace")
    p_recon.add_argument("--mask-out", default=None,
                         help="save the (generated) mask here")
    p_recon.add_argument("--manifest-out", default=None,
                         help="save a reproducibility manifest here")
    p_recon.set_defaults(func=cmd_recon)

    p_eval = sub.add_parser("eval", help="score an estimate / summarize a trace")
    p_eval.add_argument("--estimate", required=True)
    p_eval.add_argument("--reference", default=None)
    p_eval.add_argument("--trace", default=None)
    p_eval.add_argument("--check-dc", action="store_true",
                        help="verify the estimate keeps the measured samples")
    p_eval.add_argument("--measured", default=None)
    p_eval.add_argument("--mask", default=None)
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DenoiserError as exc:
        print(f"denoiser error: {exc}", file=sys.stderr)
        return 3
    except FileFormatError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
