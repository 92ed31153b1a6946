"""Reference transforms and the external-command adapter."""

import sys

import numpy as np
import pytest

from blockshuffle import (
    ExternalCommandError,
    Image,
    Transform,
    TransformError,
    external_command,
    global_normalize,
    identity,
    pointwise_lut,
)
from tests.conftest import random_image


class TestIdentity:
    def test_returns_input_unchanged(self):
        img = random_image(9, 4, seed=1)
        out = identity().apply(img)
        assert out is img

    def test_one_pixel(self):
        img = Image(np.array([[[1, 2, 3]]], np.uint8))
        assert np.array_equal(identity()(img).data, img.data)

    def test_metadata(self):
        t = identity()
        assert t.name == "identity" and t.deterministic


class TestPointwiseLut:
    def test_lookup_on_u8(self):
        curves = [list(range(255, -1, -1))] * 3
        img = random_image(11, 6, seed=2)
        out = pointwise_lut(curves).apply(img)
        assert np.array_equal(out.data, 255 - img.data)

    def test_per_channel_curves(self):
        curves = [[0] * 256, [128] * 256, list(range(256))]
        img = random_image(5, 5, seed=3)
        out = pointwise_lut(curves).apply(img).data
        assert (out[:, :, 0] == 0).all()
        assert (out[:, :, 1] == 128).all()
        assert np.array_equal(out[:, :, 2], img.data[:, :, 2])

    def test_float_input_quantizes_then_maps(self):
        curves = [list(range(256))] * 3
        img = Image(np.full((2, 2, 3), 9.7, np.float32))
        out = pointwise_lut(curves).apply(img)
        assert out.data.dtype == np.float32
        assert np.array_equal(out.data, np.full((2, 2, 3), 10.0, np.float32))

    @pytest.mark.parametrize(
        "curves",
        [
            [[0] * 256] * 2,
            [[0] * 255] * 3,
            [[0.5] * 256] * 3,
            [[-1] + [0] * 255] * 3,
            [[256] + [0] * 255] * 3,
        ],
    )
    def test_rejects_bad_tables(self, curves):
        with pytest.raises(ValueError):
            pointwise_lut(curves)


class TestGlobalNormalize:
    def test_moves_stats_to_targets(self):
        img = random_image(64, 64, seed=4)
        out = global_normalize(100.0, 20.0).apply(img).data
        for ch in range(3):
            assert abs(out[:, :, ch].mean() - 100.0) < 1.5
            assert abs(out[:, :, ch].std() - 20.0) < 1.5

    def test_per_channel_targets(self):
        img = random_image(64, 64, seed=5)
        out = global_normalize([50.0, 100.0, 150.0], [5.0, 10.0, 15.0]).apply(img).data
        assert abs(out[:, :, 0].mean() - 50.0) < 1.0
        assert abs(out[:, :, 2].mean() - 150.0) < 2.0

    def test_output_clipped_and_float(self):
        img = random_image(32, 32, seed=6)
        out = global_normalize(250.0, 80.0).apply(img).data
        assert out.dtype == np.float32
        assert out.min() >= 0.0 and out.max() <= 255.0

    def test_constant_input_no_nan(self):
        img = Image(np.full((8, 8, 3), 42, np.uint8))
        out = global_normalize(128.0, 10.0).apply(img).data
        assert np.isfinite(out).all()

    def test_depends_on_global_stats(self):
        # the same pixel values map differently when the surrounding image changes
        a = np.zeros((4, 8, 3), np.uint8)
        a[:, :4] = 50
        a[:, 4:] = 100
        b = a.copy()
        b[:, 6:] = 200
        t = global_normalize(128.0, 64.0)
        out_a = t.apply(Image(a)).data[:, :4]
        out_b = t.apply(Image(b)).data[:, :4]
        assert not np.allclose(out_a, out_b)

    def test_rejects_non_positive_std(self):
        with pytest.raises(ValueError):
            global_normalize(128.0, 0.0)
        with pytest.raises(ValueError):
            global_normalize(128.0, [-1.0, 1.0, 1.0])


class TestApplyContract:
    def test_size_change_raises(self):
        bad = Transform("bad", True, lambda img: Image(img.data[:1, :1].copy()))
        with pytest.raises(TransformError):
            bad.apply(random_image(4, 4, seed=7))


_INVERT_SCRIPT = (
    "from PIL import Image; import sys; "
    "im = Image.open(sys.argv[1]).convert('RGB'); "
    "Image.eval(im, lambda v: 255 - v).save(sys.argv[2])"
)


class TestExternalCommand:
    def test_round_trips_through_subprocess(self):
        template = f'{sys.executable} -c "{_INVERT_SCRIPT}" {{in}} {{out}}'
        t = external_command(template, deterministic=True)
        img = random_image(20, 14, seed=8)
        out = t.apply(img)
        assert np.array_equal(out.data, 255 - img.data)
        assert t.deterministic

    def test_nonzero_exit_reports_stderr(self):
        template = f"{sys.executable} -c \"import sys; sys.stderr.write('boom'); sys.exit(3)\" {{in}} {{out}}"
        t = external_command(template)
        with pytest.raises(ExternalCommandError) as err:
            t.apply(random_image(4, 4, seed=9))
        assert err.value.returncode == 3
        assert "boom" in err.value.stderr

    def test_missing_output_detected(self):
        template = f"{sys.executable} -c pass {{in}} {{out}}"
        t = external_command(template)
        with pytest.raises(ExternalCommandError):
            t.apply(random_image(4, 4, seed=10))

    def test_template_must_name_both_files(self):
        with pytest.raises(ValueError):
            external_command("convert {in} somewhere.png")
        with pytest.raises(ValueError):
            external_command("convert {out}")

    def test_not_deterministic_by_default(self):
        assert not external_command("x {in} {out}").deterministic
