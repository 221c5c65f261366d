"""Residual CNN denoiser for multi-coil MRI images.

Trains a small noise-estimating convolutional network on synthetic
phantom images and serves it as an out-of-process denoiser speaking the
HICUDNZ1 frame protocol on stdin/stdout, for use with the `hicu`
reconstruction CLI (`--denoiser external:...`).

This package talks to the reconstruction side only through its public
surfaces: the `hicu phantom` command generates the training corpus, and
the HICUKSP1 / HICUDNZ1 byte formats carry the data.
"""

from .fileio import (
    FRAME_MAGIC,
    KSPACE_MAGIC,
    FormatError,
    kspace_to_image,
    pack_frame,
    read_frame_payload,
    read_kspace,
    unpack_frame,
)
from .model import DenoiserNet, load_checkpoint, save_checkpoint
from .corpus import CorpusError, build_corpus
from .train import TrainResult, TrainSpec, TrainingDiverged, train
from .serve import serve

__version__ = "0.1.0"

__all__ = [
    "CorpusError",
    "DenoiserNet",
    "FRAME_MAGIC",
    "FormatError",
    "KSPACE_MAGIC",
    "TrainResult",
    "TrainSpec",
    "TrainingDiverged",
    "build_corpus",
    "kspace_to_image",
    "load_checkpoint",
    "pack_frame",
    "read_frame_payload",
    "read_kspace",
    "save_checkpoint",
    "serve",
    "train",
    "unpack_frame",
]
