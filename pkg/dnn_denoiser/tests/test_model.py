"""Network structure, checkpoint I/O, and the normalization contract."""
import numpy as np
import pytest
import torch
from torch import nn

from dnn_denoiser import DenoiserNet, load_checkpoint, save_checkpoint
from dnn_denoiser.model import WIDTHS, denoise_images, sample_scales


class TestArchitecture:
    def test_channel_widths(self):
        convs = [m for m in DenoiserNet().layers if isinstance(m, nn.Conv2d)]
        assert [c.out_channels for c in convs] == [256, 256, 128, 128, 128, 2]
        assert convs[0].in_channels == 2
        for prev, cur in zip(convs, convs[1:]):
            assert cur.in_channels == prev.out_channels

    def test_every_conv_is_3x3_stride_1_padded(self):
        for conv in (m for m in DenoiserNet().layers if isinstance(m, nn.Conv2d)):
            assert conv.kernel_size == (3, 3)
            assert conv.stride == (1, 1)
            assert conv.padding == (1, 1)

    def test_relu_after_first_five_only(self):
        kinds = [type(m) for m in DenoiserNet().layers]
        assert kinds.count(nn.ReLU) == 5
        assert kinds[-1] is nn.Conv2d   # no activation on the output

    def test_output_shape_equals_input_shape(self):
        model = DenoiserNet()
        x = torch.randn(3, 2, 17, 23)
        assert model(x).shape == x.shape

    def test_zeroed_network_outputs_zero(self):
        model = DenoiserNet().zero_()
        x = torch.randn(2, 2, 8, 8)
        assert torch.count_nonzero(model(x)) == 0


class TestCheckpointIO:
    def test_roundtrip_preserves_weights_and_metadata(self, tmp_path):
        model = DenoiserNet()
        path = tmp_path / "model.pt"
        save_checkpoint(path, model, val_loss=0.25, psnr_gain_db=3.5)
        loaded, meta = load_checkpoint(path)
        for a, b in zip(model.parameters(), loaded.parameters()):
            assert torch.equal(a, b)
        assert meta == {"val_loss": 0.25, "psnr_gain_db": 3.5}
        assert not loaded.training   # served models are in eval mode

    def test_rejects_foreign_torch_blob(self, tmp_path):
        path = tmp_path / "foreign.pt"
        torch.save({"weights": [1, 2, 3]}, path)
        with pytest.raises(ValueError, match="checkpoint"):
            load_checkpoint(path)

    def test_rejects_mismatched_widths(self, tmp_path):
        path = tmp_path / "odd.pt"
        torch.save({"state_dict": {}, "widths": (8, 2), "metadata": {}}, path)
        with pytest.raises(ValueError, match="widths"):
            load_checkpoint(path)


class TestNormalization:
    def test_sample_scales_are_per_sample_rms(self):
        x = torch.zeros(2, 2, 4, 4)
        x[0] = 3.0
        scales = sample_scales(x)
        assert scales.shape == (2, 1, 1, 1)
        assert scales[0].item() == pytest.approx(3.0)
        assert scales[1].item() == 1.0   # zero sample -> no scaling

    def test_denoise_images_echo_for_zero_network(self):
        rng = np.random.default_rng(0)
        images = rng.standard_normal((6, 5, 3)) + 1j * rng.standard_normal((6, 5, 3))
        out = denoise_images(DenoiserNet().zero_(), images)
        f32 = images.astype(np.complex64).astype(np.complex128)
        assert np.array_equal(out, f32)

    def test_denoising_is_scale_equivariant(self):
        torch.manual_seed(0)
        model = DenoiserNet().eval()
        rng = np.random.default_rng(1)
        images = rng.standard_normal((8, 8, 2)) + 1j * rng.standard_normal((8, 8, 2))
        base = denoise_images(model, images)
        scaled = denoise_images(model, 10.0 * images)
        np.testing.assert_allclose(scaled, 10.0 * base, rtol=2e-5, atol=2e-5)

    def test_denoise_images_preserves_shape(self):
        torch.manual_seed(1)
        model = DenoiserNet().eval()
        images = np.ones((9, 7, 4), dtype=complex)
        assert denoise_images(model, images).shape == (9, 7, 4)
