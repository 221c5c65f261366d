"""Soft thresholding, the stationary wavelet transform, and denoiser plumbing."""
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hicu.denoise import (
    DenoiseContext,
    ExternalDenoiser,
    IdentityDenoiser,
    SwtDenoiser,
    denoise,
    pack_frame,
    soft,
    swt_forward,
    swt_inverse,
    swt_soft_threshold,
    unpack_frame,
)
from hicu.errors import ConfigError, DenoiserError, DimensionError
from hicu.fourier import image_to_kspace, kspace_to_image

from conftest import random_kspace

INV_SQRT2 = 1.0 / np.sqrt(2.0)


class TestSoft:
    def test_hand_values(self):
        assert soft(np.array([3.0]), 1.0)[0] == pytest.approx(2.0)
        assert soft(np.array([-3.0]), 1.0)[0] == pytest.approx(-2.0)
        assert soft(np.array([0.5]), 1.0)[0] == 0.0
        assert soft(np.array([0.0]), 1.0)[0] == 0.0

    def test_phase_is_preserved(self):
        x = 3.0 * np.exp(1j * np.linspace(0.1, 6.0, 7))
        out = soft(x, 1.0)
        np.testing.assert_allclose(np.abs(out), 2.0, atol=1e-12)
        np.testing.assert_allclose(np.angle(out), np.angle(x), atol=1e-12)

    def test_zero_threshold_returns_copy(self, rng):
        x = random_kspace(rng, 4, 4, 1)
        out = soft(x, 0.0)
        np.testing.assert_array_equal(out, x)
        assert out is not x

    def test_is_the_prox_of_the_magnitude_penalty(self, rng):
        """soft(x, t) minimizes t*|z| + 0.5*|z - x|^2 over a dense grid."""
        for trial in range(10):
            gen = np.random.default_rng(trial)
            x = complex(gen.uniform(-2, 2), gen.uniform(-2, 2))
            t = float(gen.uniform(0.05, 1.5))
            got = soft(np.array([x]), t)[0]

            def objective(z):
                return t * abs(z) + 0.5 * abs(z - x) ** 2

            re = np.linspace(-2.5, 2.5, 201)
            grid = re[:, None] + 1j * re[None, :]
            best = grid.ravel()[np.argmin(objective(grid).ravel())]
            assert objective(got) <= objective(best) + 1e-9
            assert abs(got - best) < 0.05  # grid resolution

    @settings(max_examples=60, deadline=None)
    @given(
        xr=st.floats(-5, 5), xi=st.floats(-5, 5),
        yr=st.floats(-5, 5), yi=st.floats(-5, 5),
        t=st.floats(0.0, 3.0),
    )
    def test_non_expansive(self, xr, xi, yr, yi, t):
        x, y = complex(xr, xi), complex(yr, yi)
        dx = soft(np.array([x]), t)[0] - soft(np.array([y]), t)[0]
        assert abs(dx) <= abs(x - y) + 1e-12


class TestSwtTransform:
    @pytest.mark.parametrize("wavelet", ["haar", "db2"])
    @pytest.mark.parametrize("shape", [(5, 7), (8, 8), (6, 9, 3)])
    @pytest.mark.parametrize("levels", [1, 2, 3])
    def test_perfect_reconstruction(self, rng, wavelet, shape, levels):
        x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        back = swt_inverse(swt_forward(x, wavelet, levels))
        np.testing.assert_allclose(back, x, atol=1e-12)

    def test_haar_impulse_hand_oracle(self):
        """Level-1 Haar bands of a unit impulse on a 4x4 periodic grid."""
        x = np.zeros((4, 4), dtype=complex)
        x[0, 0] = 1.0
        coeffs = swt_forward(x, "haar", 1)
        lo = np.array([INV_SQRT2, 0.0, 0.0, INV_SQRT2])  # lowpass of the impulse
        hi = np.array([INV_SQRT2, 0.0, 0.0, -INV_SQRT2])  # highpass of the impulse
        band_gx, band_gy, band_gg = coeffs.details[0]
        np.testing.assert_allclose(coeffs.approx, np.outer(lo, lo), atol=1e-12)
        np.testing.assert_allclose(band_gx, np.outer(hi, lo), atol=1e-12)
        np.testing.assert_allclose(band_gy, np.outer(lo, hi), atol=1e-12)
        np.testing.assert_allclose(band_gg, np.outer(hi, hi), atol=1e-12)

    def test_constant_image_has_no_detail(self):
        x = np.full((6, 6), 2.5, dtype=complex)
        coeffs = swt_forward(x, "haar", 2)
        for level in coeffs.details:
            for band in level:
                np.testing.assert_allclose(band, 0.0, atol=1e-12)
        # each 2-D lowpass level doubles a constant (two sqrt(2) gains)
        np.testing.assert_allclose(coeffs.approx, 4.0 * x, atol=1e-12)

    def test_levels_and_wavelet_validation(self, rng):
        x = rng.standard_normal((4, 4))
        with pytest.raises(ConfigError):
            swt_forward(x, "haar", 0)
        with pytest.raises(ConfigError):
            swt_forward(x, "sym4", 1)


class TestSwtSoftThreshold:
    def test_zero_threshold_is_the_identity(self, rng):
        x = rng.standard_normal((6, 7, 2)) + 1j * rng.standard_normal((6, 7, 2))
        np.testing.assert_allclose(swt_soft_threshold(x, 0.0), x, atol=1e-12)

    def test_constant_image_is_untouched(self):
        x = np.full((8, 8), 1.0 - 2.0j)
        np.testing.assert_allclose(swt_soft_threshold(x, 0.7), x, atol=1e-12)

    def test_large_threshold_keeps_only_the_approximation(self, rng):
        """Huge thresholds zero every detail band before synthesis."""
        from hicu.denoise import SwtCoefficients

        x = rng.standard_normal((16, 16))
        out = swt_soft_threshold(x, 1e6)
        coeffs = swt_forward(x, "haar", 2)
        zeroed = SwtCoefficients(
            coeffs.approx,
            [tuple(np.zeros_like(b) for b in lv) for lv in coeffs.details],
            coeffs.wavelet,
        )
        np.testing.assert_allclose(out, swt_inverse(zeroed), atol=1e-12)

    def test_reduces_detail_energy(self, rng):
        x = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
        before = swt_forward(x, "haar", 2)
        after = swt_forward(swt_soft_threshold(x, 0.3), "haar", 2)
        e_before = sum(np.linalg.norm(b) ** 2 for lv in before.details for b in lv)
        e_after = sum(np.linalg.norm(b) ** 2 for lv in after.details for b in lv)
        assert e_after < e_before


class TestDenoiseContext:
    def test_defaults(self):
        ctx = DenoiseContext()
        assert (ctx.eta, ctx.stage, ctx.outer, ctx.inner) == (0.0, 0, 0, 0)

    @pytest.mark.parametrize("eta", [-1.0, np.nan, np.inf])
    def test_rejects_bad_eta(self, eta):
        with pytest.raises(ConfigError):
            DenoiseContext(eta=eta)


class TestIdentityDenoiser:
    def test_denoise_is_bitwise_and_fresh(self, rng):
        arr = random_kspace(rng, 8, 8, 2)
        out = denoise(arr, DenoiseContext(eta=0.3), IdentityDenoiser())
        np.testing.assert_array_equal(out, arr)
        assert out is not arr


class TestSwtDenoiser:
    def test_threshold_tracks_step_size(self, rng):
        handle = SwtDenoiser(threshold_scale=0.25)
        images = rng.standard_normal((8, 8, 2)) + 0j
        handle.denoise_images(images, DenoiseContext(eta=2.0))
        assert handle.last_threshold == pytest.approx(0.5)
        handle.denoise_images(images, DenoiseContext(eta=0.0))
        assert handle.last_threshold == 0.0

    def test_zero_step_passes_images_through(self, rng):
        handle = SwtDenoiser()
        images = rng.standard_normal((8, 8, 2)) + 0j
        out = handle.denoise_images(images, DenoiseContext(eta=0.0))
        assert out is images

    def test_through_kspace_roundtrip(self, rng):
        """eta=0 end to end: only FFT roundtrip error remains."""
        arr = random_kspace(rng, 8, 8, 2)
        out = denoise(arr, DenoiseContext(eta=0.0), SwtDenoiser())
        np.testing.assert_allclose(out, arr, atol=1e-12)

    def test_positive_step_changes_the_estimate(self, rng):
        arr = random_kspace(rng, 8, 8, 2)
        out = denoise(arr, DenoiseContext(eta=1.0), SwtDenoiser(threshold_scale=0.5))
        assert np.abs(out - arr).max() > 1e-8

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SwtDenoiser(threshold_scale=-0.1)
        with pytest.raises(ConfigError):
            SwtDenoiser(wavelet="sym4")
        with pytest.raises(ConfigError):
            SwtDenoiser(levels=0)


class _ShapeChanger:
    kind = "custom"

    def denoise_images(self, images, ctx):
        return images[:-1]


class _NanProducer:
    kind = "custom"

    def denoise_images(self, images, ctx):
        out = images.copy()
        out[0, 0, 0] = np.nan
        return out


class TestDenoiseGuards:
    def test_shape_change_is_an_error(self, rng):
        with pytest.raises(DenoiserError, match="shape"):
            denoise(random_kspace(rng, 6, 6, 2), DenoiseContext(), _ShapeChanger())

    def test_non_finite_output_is_an_error(self, rng):
        with pytest.raises(DenoiserError, match="non-finite"):
            denoise(random_kspace(rng, 6, 6, 2), DenoiseContext(), _NanProducer())

    def test_custom_handle_roundtrips_through_image_domain(self, rng):
        class Halver:
            kind = "custom"

            def denoise_images(self, images, ctx):
                return 0.5 * images

        arr = random_kspace(rng, 6, 6, 2)
        out = denoise(arr, DenoiseContext(), Halver())
        np.testing.assert_allclose(out, 0.5 * arr, atol=1e-12)


class TestFrameCodec:
    def test_roundtrip_of_float32_values(self, rng):
        base = rng.standard_normal((5, 4, 3)).astype(np.float32).astype(np.float64)
        imag = rng.standard_normal((5, 4, 3)).astype(np.float32).astype(np.float64)
        images = base + 1j * imag
        out = unpack_frame(pack_frame(images))
        np.testing.assert_array_equal(out, images)

    def test_bad_magic_rejected(self, rng):
        blob = pack_frame(random_kspace(rng, 3, 3, 1))
        with pytest.raises(DenoiserError):
            unpack_frame(b"XXXXXXXX" + blob[8:])

    def test_short_blob_rejected(self):
        with pytest.raises(DenoiserError):
            unpack_frame(b"HICUDNZ1")

    def test_non_3d_payload_rejected(self, rng):
        with pytest.raises(DimensionError):
            pack_frame(rng.standard_normal((4, 4)))


_SERVER_TEMPLATE = '''
import os, struct, sys, time

MAGIC = b"HICUDNZ1"
MODE = {mode!r}

def read_exact(n):
    buf = b""
    while len(buf) < n:
        chunk = os.read(0, n - len(buf))
        if not chunk:
            sys.exit(0)
        buf += chunk
    return buf

while True:
    header = read_exact(20)
    nx, ny, nc = struct.unpack("<III", header[8:20])
    payload = read_exact(nx * ny * nc * 8)
    if MODE == "echo":
        os.write(1, header + payload)
    elif MODE == "badmagic":
        os.write(1, b"XXXXXXXX" + header[8:] + payload)
    elif MODE == "reshape":
        os.write(1, MAGIC + struct.pack("<III", nx + 1, ny, nc) + payload)
    elif MODE == "sleep":
        time.sleep(30.0)
'''


def make_server(tmp_path, mode):
    path = tmp_path / f"denoise_server_{mode}.py"
    path.write_text(_SERVER_TEMPLATE.format(mode=mode))
    return [sys.executable, str(path)]


def float32_images(rng, shape):
    re = rng.standard_normal(shape).astype(np.float32).astype(np.float64)
    im = rng.standard_normal(shape).astype(np.float32).astype(np.float64)
    return re + 1j * im


class TestExternalDenoiser:
    def test_echo_roundtrip_and_keepalive(self, rng, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "echo"))
        try:
            images = float32_images(rng, (6, 5, 2))
            out1 = handle.denoise_images(images, DenoiseContext())
            np.testing.assert_array_equal(out1, images)
            pid = handle._proc.pid
            out2 = handle.denoise_images(2.0 * images, DenoiseContext())
            np.testing.assert_array_equal(out2, 2.0 * images)
            assert handle._proc.pid == pid  # one process serves every call
        finally:
            handle.close()

    def test_echo_through_denoise_preserves_kspace(self, rng, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "echo"))
        try:
            arr = random_kspace(rng, 6, 6, 2)
            out = denoise(arr, DenoiseContext(), handle)
            np.testing.assert_allclose(out, arr, atol=1e-5)
        finally:
            handle.close()

    def test_bad_magic_answer(self, rng, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "badmagic"))
        try:
            with pytest.raises(DenoiserError, match="magic"):
                handle.denoise_images(float32_images(rng, (4, 4, 1)), DenoiseContext())
        finally:
            handle.close()

    def test_shape_change_answer(self, rng, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "reshape"))
        try:
            with pytest.raises(DenoiserError, match="shape"):
                handle.denoise_images(float32_images(rng, (4, 4, 1)), DenoiseContext())
        finally:
            handle.close()

    def test_timeout(self, rng, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "sleep"), timeout=0.5)
        try:
            with pytest.raises(DenoiserError, match="within"):
                handle.denoise_images(float32_images(rng, (4, 4, 1)), DenoiseContext())
        finally:
            handle.close()

    def test_server_that_exits_immediately(self, rng, tmp_path):
        script = tmp_path / "dead.py"
        script.write_text("import sys; sys.exit(3)\n")
        handle = ExternalDenoiser([sys.executable, str(script)], timeout=5.0)
        try:
            with pytest.raises(DenoiserError):
                handle.denoise_images(float32_images(rng, (4, 4, 1)), DenoiseContext())
        finally:
            handle.close()

    def test_unresolvable_command(self):
        with pytest.raises(ConfigError, match="not found"):
            ExternalDenoiser(["definitely-not-a-real-denoiser-binary"])

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            ExternalDenoiser([])
        with pytest.raises(ConfigError):
            ExternalDenoiser([sys.executable], timeout=0.0)

    def test_close_is_idempotent(self, tmp_path):
        handle = ExternalDenoiser(make_server(tmp_path, "echo"))
        handle.close()
        handle.close()
