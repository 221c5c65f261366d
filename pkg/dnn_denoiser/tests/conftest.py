import shutil

import pytest

from dnn_denoiser import DenoiserNet, save_checkpoint, train
from dnn_denoiser.train import TrainSpec


def require_generator():
    if shutil.which("hicu") is None:
        pytest.skip("the hicu CLI is not installed")


@pytest.fixture(scope="session")
def zero_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "zero.pt"
    save_checkpoint(path, DenoiserNet().zero_())
    return path


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """One real training run shared by every test that needs a fitted model."""
    require_generator()
    root = tmp_path_factory.mktemp("train")
    result = train(TrainSpec(), root / "corpus", root / "trained.pt")
    return result
