"""Plugging an out-of-process denoiser into the solver.

Any program that speaks the HICUDNZ1 frame protocol on stdin/stdout can
serve as the solver's image-domain denoiser: read one frame (magic,
three u32 dimensions, float32 re/im pairs), answer with one frame of the
same shape, repeat.  The process is started once and kept alive across
calls.

This script writes a small self-contained server — wavelet soft
shrinkage at a fixed threshold, since the wire carries images but not
the solver's step size — to a temp directory, then runs a noisy
reconstruction through it and compares against no denoising at all.

Run:  python3 demos/05_external_denoiser.py
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from hicu import (
    ExternalDenoiser,
    MaskSpec,
    PhantomSpec,
    SolverConfig,
    StageConfig,
    hicu_run,
    make_mask,
    make_phantom,
    snr_db,
)

SERVER = '''\
"""HICUDNZ1 denoise server: undecimated-wavelet soft shrinkage.

The threshold is fixed (the frame protocol carries images, not the
solver's current step size) and deliberately tiny — the call runs
inside every outer iteration, so its effect compounds.
"""
import sys

from hicu.denoise import pack_frame, unpack_frame, swt_soft_threshold, DENOISE_MAGIC

THRESHOLD = 0.005

def read_exact(n):
    buf = sys.stdin.buffer.read(n)
    if len(buf) != n:
        raise SystemExit(0)   # parent closed the pipe: clean shutdown
    return buf

while True:
    header = sys.stdin.buffer.read(20)
    if not header:
        break                 # end of stream
    if len(header) != 20 or header[:8] != DENOISE_MAGIC:
        raise SystemExit(1)
    nx = int.from_bytes(header[8:12], "little")
    ny = int.from_bytes(header[12:16], "little")
    nc = int.from_bytes(header[16:20], "little")
    images = unpack_frame(header + read_exact(nx * ny * nc * 8))

    cleaned = swt_soft_threshold(images, THRESHOLD)
    sys.stdout.buffer.write(pack_frame(cleaned))
    sys.stdout.buffer.flush()
'''

# ----------------------------------------------------------------------
# Problem setup: noisy measurements where smoothing actually helps.
# ----------------------------------------------------------------------
clean, _ = make_phantom(PhantomSpec(64, 64, 4, seed=0))
noisy, _ = make_phantom(PhantomSpec(64, 64, 4, noise_db=15.0, seed=0))
mask = make_mask(MaskSpec("S1", 4.0, center_fraction=0.25, seed=0), 64, 64)

stages = (
    StageConfig(0.25, 8, 5, False, 10),
    StageConfig(1.0, 32, 10, True, 40),   # denoise=True marks this stage
)
config = SolverConfig(rank=20, stages=stages, seed=0)

with tempfile.TemporaryDirectory() as tmp:
    server_path = Path(tmp) / "shrinkage_server.py"
    server_path.write_text(SERVER)

    # The client starts the process lazily, sends one frame per denoise
    # call, and raises DenoiserError on any protocol violation.
    handle = ExternalDenoiser([sys.executable, str(server_path)], timeout=30.0)
    try:
        res = hicu_run(noisy, mask, config, denoiser=handle)
    finally:
        handle.close()

print(f"through external shrinkage server: "
      f"{snr_db(res.kspace.data, clean.data):.2f} dB")

baseline = hicu_run(noisy, mask, config)   # denoise flag with no handle
print(f"same schedule, identity denoiser:  "
      f"{snr_db(baseline.kspace.data, clean.data):.2f} dB")

sampled = mask.mask
print(f"data consistency after external calls: "
      f"{np.array_equal(res.kspace.data[sampled], noisy.data[sampled])}")
