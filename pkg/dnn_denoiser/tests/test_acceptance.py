"""Acceptance suite for the denoiser plugin, one test per release criterion."""
import re
import subprocess

import numpy as np

from dnn_denoiser import pack_frame, read_kspace, unpack_frame
from dnn_denoiser.fileio import kspace_to_image

from conftest import require_generator


def run_cli(*cmd, timeout=300):
    return subprocess.run(list(cmd), capture_output=True, text=False,
                          timeout=timeout)


def eval_snr(estimate, reference):
    proc = run_cli("hicu", "eval", "--estimate", str(estimate),
                   "--reference", str(reference))
    assert proc.returncode == 0, proc.stderr
    match = re.search(rb"snr_db ([-\d.infa]+)", proc.stdout)
    return float(match.group(1))


def test_criterion_s1_protocol_conformance(zero_checkpoint):
    """A zero-weight server echoes frames within float32 round-trip, and a
    malformed magic is rejected with a nonzero exit and no output."""
    rng = np.random.default_rng(0)
    images = rng.standard_normal((20, 14, 4)) + 1j * rng.standard_normal((20, 14, 4))
    frame = pack_frame(images)

    proc = subprocess.run(
        ["dnn-denoiser", "serve", "--checkpoint", str(zero_checkpoint)],
        input=frame, capture_output=True, timeout=120,
    )
    assert proc.returncode == 0
    echo = unpack_frame(proc.stdout)
    assert np.array_equal(
        echo, images.astype(np.complex64).astype(np.complex128)
    )

    bad = subprocess.run(
        ["dnn-denoiser", "serve", "--checkpoint", str(zero_checkpoint)],
        input=b"BADMAGIC" + frame[8:], capture_output=True, timeout=120,
    )
    assert bad.returncode != 0
    assert bad.stdout == b""


def test_criterion_s2_trained_plugin(trained, tmp_path):
    """The trained checkpoint gains >= 2 dB PSNR on held-out 15 dB-noisy
    phantoms, denoises a noisy frame toward the clean image, and — plugged
    into the reconstruction CLI — completes end to end with bitwise data
    consistency and SNR at least that of the identity-denoiser run."""
    require_generator()
    assert trained.psnr_gain_db >= 2.0

    # a fresh noisy acquisition, seed far outside the training corpus
    clean_path = tmp_path / "clean.ksp"
    noisy_path = tmp_path / "noisy.ksp"
    size = ["--nx", "48", "--ny", "48", "--nc", "4"]
    assert run_cli("hicu", "phantom", *size, "--seed", "99",
                   "--out", str(clean_path)).returncode == 0
    assert run_cli("hicu", "phantom", *size, "--noise-db", "15",
                   "--seed", "99", "--out", str(noisy_path)).returncode == 0

    # the served model moves a noisy frame closer to the clean image
    clean_images = kspace_to_image(read_kspace(clean_path))
    noisy_images = kspace_to_image(read_kspace(noisy_path))
    proc = subprocess.run(
        ["dnn-denoiser", "serve", "--checkpoint", str(trained.checkpoint)],
        input=pack_frame(noisy_images), capture_output=True, timeout=120,
    )
    assert proc.returncode == 0
    served = unpack_frame(proc.stdout)
    assert served.shape == noisy_images.shape
    assert (np.linalg.norm(served - clean_images)
            < np.linalg.norm(noisy_images - clean_images))

    # end to end through the reconstruction CLI, against the identity run
    stages = ("center=0.25,p=8,g=5,iters=10,denoise=off;"
              "full,p=16,g=10,iters=30,denoise=on")
    dnn_out = tmp_path / "recon_dnn.ksp"
    mask_out = tmp_path / "mask.msk"
    dnn_cmd = f"external:dnn-denoiser serve --checkpoint {trained.checkpoint}"
    assert run_cli(
        "hicu", "recon", "--kspace", str(noisy_path),
        "--pattern", "S1", "--accel", "4", "--center-frac", "0.25",
        "--rank", "20", "--stages", stages, "--denoiser", dnn_cmd,
        "--out", str(dnn_out), "--mask-out", str(mask_out),
        timeout=600,
    ).returncode == 0

    id_out = tmp_path / "recon_id.ksp"
    assert run_cli(
        "hicu", "recon", "--kspace", str(noisy_path),
        "--mask", str(mask_out), "--rank", "20", "--stages", stages,
        "--denoiser", "identity", "--out", str(id_out),
        timeout=600,
    ).returncode == 0

    assert run_cli(
        "hicu", "eval", "--estimate", str(dnn_out), "--check-dc",
        "--measured", str(noisy_path), "--mask", str(mask_out),
    ).returncode == 0

    snr_dnn = eval_snr(dnn_out, clean_path)
    snr_id = eval_snr(id_out, clean_path)
    assert snr_dnn >= snr_id
