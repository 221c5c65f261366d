"""The residual noise-estimating network.

Six 3x3 convolutions (stride 1, zero padding) with channel widths
256, 256, 128, 128, 128, 2 and a ReLU after each of the first five.
Input and output are 2-channel (real, imaginary) images of identical
shape; the network predicts the NOISE, so the denoised image is
input minus output — applied by whoever runs the model, not by the
model itself.
"""
from __future__ import annotations

from pathlib import Path

import torch
from torch import nn

WIDTHS = (256, 256, 128, 128, 128, 2)


class DenoiserNet(nn.Module):
    """2-channel image in, 2-channel noise estimate out."""

    def __init__(self):
        super().__init__()
        layers = []
        in_ch = 2
        for i, out_ch in enumerate(WIDTHS):
            layers.append(nn.Conv2d(in_ch, out_ch, kernel_size=3,
                                    stride=1, padding=1))
            if i < len(WIDTHS) - 1:
                layers.append(nn.ReLU(inplace=True))
            in_ch = out_ch
        self.layers = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.layers(x)

    def zero_(self) -> "DenoiserNet":
        """Zero every parameter: the noise estimate becomes identically 0,
        so subtracting it is the identity denoiser."""
        with torch.no_grad():
            for p in self.parameters():
                p.zero_()
        return self


def save_checkpoint(path, model: DenoiserNet, **metadata) -> None:
    """Persist weights plus free-form metadata (val loss, PSNR gain, ...)."""
    torch.save({"state_dict": model.state_dict(),
                "widths": WIDTHS,
                "metadata": dict(metadata)}, path)


def load_checkpoint(path) -> tuple[DenoiserNet, dict]:
    """Load a checkpoint; returns the model in eval mode and its metadata."""
    path = Path(path)
    blob = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(blob, dict) or "state_dict" not in blob:
        raise ValueError(f"{path}: not a denoiser checkpoint")
    if tuple(blob.get("widths", ())) != WIDTHS:
        raise ValueError(
            f"{path}: checkpoint widths {blob.get('widths')} do not match "
            f"this network ({WIDTHS})"
        )
    model = DenoiserNet()
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, blob.get("metadata", {})


def sample_scales(batch: torch.Tensor) -> torch.Tensor:
    """Per-sample RMS of a (N, 2, H, W) batch, floored away from zero.

    The network is trained on unit-RMS inputs; callers divide by this
    scale before the forward pass and multiply the noise estimate back.
    A zero image gets scale 1 (nothing to normalize).
    """
    rms = torch.sqrt(torch.mean(batch ** 2, dim=(1, 2, 3), keepdim=True))
    return torch.where(rms > 0, rms, torch.ones_like(rms))


def denoise_images(model: DenoiserNet, images) -> "torch.Tensor":
    """Apply input-minus-predicted-noise to a complex (nx, ny, nc) array.

    Returns the denoised stack as a complex128 numpy array of the same
    shape; each coil is one sample of the 2-channel network batch,
    normalized to unit RMS for the forward pass.
    """
    import numpy as np

    arr = np.asarray(images, dtype=np.complex128)
    batch = torch.from_numpy(
        np.stack([arr.real, arr.imag], axis=0)   # (2, nx, ny, nc)
    ).permute(3, 0, 1, 2).to(torch.float32)      # (nc, 2, nx, ny)
    scales = sample_scales(batch)
    with torch.no_grad():
        noise = model(batch / scales) * scales
    cleaned = batch - noise
    out = cleaned[:, 0].numpy() + 1j * cleaned[:, 1].numpy()  # (nc, nx, ny)
    return out.transpose(1, 2, 0)
