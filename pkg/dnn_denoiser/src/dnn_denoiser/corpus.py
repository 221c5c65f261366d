"""Training corpus built by driving the reconstruction CLI.

Each corpus entry is one synthetic acquisition: the `hicu phantom`
command writes clean coil images (via --images-out) and 15 dB-noisy
k-space for a given seed; the noisy coil images are this package's own
inverse FFT of that k-space.  Different seeds draw independent noise,
so a seed range cleanly partitions into disjoint train and validation
sets.
"""
from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import numpy as np

from .fileio import kspace_to_image, read_kspace


class CorpusError(Exception):
    """Corpus generation failed (generator missing or misbehaving)."""


def _run(cmd: list[str]) -> None:
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True)
    except OSError as exc:
        raise CorpusError(f"could not run {cmd[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise CorpusError(
            f"{' '.join(cmd)} exited {proc.returncode}: {proc.stderr.strip()}"
        )


def build_corpus(workdir, seeds, *, nx: int, ny: int, nc: int,
                 noise_db: float = 15.0, generator: str = "hicu"):
    """Generate (noisy, clean) coil-image pairs for the given seeds.

    Returns two float32 arrays of shape (len(seeds)*nc, 2, nx, ny):
    noisy samples and their clean counterparts, one sample per coil,
    channels = (real, imag).
    """
    if shutil.which(generator) is None:
        raise CorpusError(f"phantom generator {generator!r} not found on PATH")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    size = ["--nx", str(nx), "--ny", str(ny), "--nc", str(nc)]
    clean_img_path = workdir / "clean_images.ksp"
    _run([generator, "phantom", *size, "--seed", "0",
          "--out", str(workdir / "clean.ksp"),
          "--images-out", str(clean_img_path)])
    clean_images = read_kspace(clean_img_path)           # (nx, ny, nc)

    noisy_samples, clean_samples = [], []
    for seed in seeds:
        noisy_path = workdir / f"noisy_{seed}.ksp"
        _run([generator, "phantom", *size, "--noise-db", str(noise_db),
              "--seed", str(seed), "--out", str(noisy_path)])
        noisy_images = kspace_to_image(read_kspace(noisy_path))
        for c in range(nc):
            noisy_samples.append(_channels(noisy_images[:, :, c]))
            clean_samples.append(_channels(clean_images[:, :, c]))
    return (np.stack(noisy_samples).astype(np.float32),
            np.stack(clean_samples).astype(np.float32))


def _channels(image: np.ndarray) -> np.ndarray:
    """Complex (nx, ny) -> float (2, nx, ny) with channels (real, imag)."""
    return np.stack([image.real, image.imag], axis=0)
