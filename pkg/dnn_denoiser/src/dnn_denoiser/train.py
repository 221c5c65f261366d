"""Training loop: residual noise learning on phantom coil images.

The network learns to predict the additive noise (mean squared error
against noisy-minus-clean); denoising is then input minus prediction.
Training is deterministic for a fixed seed: same corpus, same shuffles,
same initialization, same final validation loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .corpus import build_corpus
from .model import DenoiserNet, sample_scales, save_checkpoint


class TrainingDiverged(Exception):
    """The loss became non-finite; training was aborted."""


@dataclass(frozen=True)
class TrainSpec:
    """Everything that determines a training run.

    train_phantoms / val_phantoms count whole synthetic acquisitions
    (each contributes nc coil-image samples); their seed ranges are
    disjoint by construction. noise_db is the corpus noise level.
    """

    train_phantoms: int = 12
    val_phantoms: int = 4
    nx: int = 48
    ny: int = 48
    nc: int = 4
    noise_db: float = 15.0
    epochs: int = 12
    batch_size: int = 8
    learning_rate: float = 1e-3
    seed: int = 0
    generator: str = "hicu"

    def __post_init__(self):
        if self.train_phantoms < 1 or self.val_phantoms < 1:
            raise ValueError("need at least one train and one validation phantom")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"bad learning rate {self.learning_rate}")


@dataclass(frozen=True)
class TrainResult:
    checkpoint: Path
    val_loss: float
    psnr_gain_db: float
    epochs_run: int


def _psnr_db(estimate: torch.Tensor, clean: torch.Tensor, peak: float) -> float:
    """Peak signal-to-noise over 2-channel stacks (complex magnitude MSE)."""
    mse = torch.mean((estimate - clean) ** 2).item() * 2.0  # per complex entry
    return 20.0 * math.log10(peak) - 10.0 * math.log10(mse)


def train(spec: TrainSpec, workdir, checkpoint_path,
          log=lambda msg: None) -> TrainResult:
    """Build the corpus, fit the network, and save a checkpoint.

    Raises TrainingDiverged (with the offending step in the message) if
    the loss ever becomes non-finite.
    """
    torch.manual_seed(spec.seed)
    train_seeds = range(spec.train_phantoms)
    val_seeds = range(spec.train_phantoms,
                      spec.train_phantoms + spec.val_phantoms)
    log(f"corpus: {spec.train_phantoms} train + {spec.val_phantoms} val "
        f"phantoms at {spec.nx}x{spec.ny}x{spec.nc}, {spec.noise_db:g} dB")
    noisy_tr, clean_tr = build_corpus(
        Path(workdir) / "train", train_seeds, nx=spec.nx, ny=spec.ny,
        nc=spec.nc, noise_db=spec.noise_db, generator=spec.generator)
    noisy_va, clean_va = build_corpus(
        Path(workdir) / "val", val_seeds, nx=spec.nx, ny=spec.ny,
        nc=spec.nc, noise_db=spec.noise_db, generator=spec.generator)

    x_tr = torch.from_numpy(noisy_tr)
    x_va = torch.from_numpy(noisy_va)
    y_va = torch.from_numpy(clean_va)

    # the network sees unit-RMS inputs; targets are scaled to match
    s_tr = sample_scales(x_tr)
    s_va = sample_scales(x_va)
    xn_tr = x_tr / s_tr
    nn_tr = (x_tr - torch.from_numpy(clean_tr)) / s_tr   # normalized noise
    xn_va = x_va / s_va
    nn_va = (x_va - y_va) / s_va

    model = DenoiserNet()
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    shuffler = torch.Generator().manual_seed(spec.seed)

    step = 0
    for epoch in range(1, spec.epochs + 1):
        model.train()
        order = torch.randperm(xn_tr.shape[0], generator=shuffler)
        for start in range(0, len(order), spec.batch_size):
            batch = order[start:start + spec.batch_size]
            optimizer.zero_grad()
            loss = torch.mean((model(xn_tr[batch]) - nn_tr[batch]) ** 2)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {epoch}, step {step} "
                    f"(lr {spec.learning_rate:g}); lower the learning rate"
                )
            loss.backward()
            optimizer.step()
            step += 1
        model.eval()
        with torch.no_grad():
            val_loss = torch.mean((model(xn_va) - nn_va) ** 2).item()
        log(f"epoch {epoch}/{spec.epochs}: val loss {val_loss:.6f}")
        if not math.isfinite(val_loss):
            raise TrainingDiverged(
                f"validation loss became non-finite after epoch {epoch}"
            )

    # held-out denoising quality: PSNR of (input - predicted noise) vs clean,
    # compared with the PSNR of the noisy input itself
    model.eval()
    with torch.no_grad():
        denoised = x_va - model(xn_va) * s_va
    peak = torch.sqrt(y_va[:, 0] ** 2 + y_va[:, 1] ** 2).max().item()
    gain = _psnr_db(denoised, y_va, peak) - _psnr_db(x_va, y_va, peak)
    log(f"held-out PSNR gain: {gain:.2f} dB")

    save_checkpoint(checkpoint_path, model,
                    val_loss=val_loss, psnr_gain_db=gain,
                    spec={k: getattr(spec, k) for k in (
                        "train_phantoms", "val_phantoms", "nx", "ny", "nc",
                        "noise_db", "epochs", "batch_size", "learning_rate",
                        "seed")})
    return TrainResult(Path(checkpoint_path), val_loss, gain, spec.epochs)
