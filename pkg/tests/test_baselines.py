"""Whole-image oracle and the two classical tiling methods."""

import numpy as np
import pytest

from blockshuffle import (
    Image,
    TileConfig,
    Transform,
    TransformError,
    border_discontinuity,
    feather_tiles,
    global_normalize,
    identity,
    naive_tiles,
    pointwise_lut,
    whole,
)
from tests.conftest import random_image

TC = TileConfig(tile=64, overlap=16)


def _lut(seed):
    rng = np.random.default_rng(seed)
    return pointwise_lut([rng.permutation(256).tolist() for _ in range(3)])


class TestTileConfig:
    def test_defaults(self):
        cfg = TileConfig()
        assert (cfg.tile, cfg.overlap) == (1000, 128)

    @pytest.mark.parametrize("kwargs", [{"tile": 0}, {"overlap": -1}, {"tile": 8, "overlap": 8}])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            TileConfig(**kwargs)


class TestWhole:
    def test_identity(self):
        img = random_image(30, 20, seed=1)
        assert np.array_equal(whole(img, identity()).data, img.data)

    def test_lut(self):
        img = random_image(30, 20, seed=2)
        t = _lut(0)
        assert np.array_equal(whole(img, t).data, t.apply(img).data)


class TestNaive:
    def test_identity_exact(self):
        img = random_image(150, 90, seed=3)
        assert np.array_equal(naive_tiles(img, identity(), TC).data, img.data)

    def test_pointwise_equals_whole(self):
        img = random_image(150, 90, seed=4)
        t = _lut(1)
        assert np.array_equal(naive_tiles(img, t, TC).data, whole(img, t).data)

    def test_single_tile_degenerates_to_whole(self):
        img = random_image(50, 40, seed=5)
        t = _lut(2)
        assert np.array_equal(
            naive_tiles(img, t, TileConfig(tile=64, overlap=16)).data, whole(img, t).data
        )

    def test_global_transform_leaves_border_jump(self):
        # smooth horizontal ramp: each tile normalizes its own statistics,
        # turning the gradient into a sawtooth that jumps where tiles meet
        ramp = np.linspace(40, 200, 128).astype(np.uint8)
        arr = np.broadcast_to(ramp[None, :, None], (64, 128, 3)).copy()
        out = naive_tiles(Image(arr), global_normalize(128.0, 48.0), TC)
        stats = border_discontinuity(out, xs=[64])
        assert stats.max_border_jump > 2 * stats.max_interior_jump

    def test_worker_count_irrelevant(self):
        img = random_image(200, 130, seed=6)
        t = global_normalize(100.0, 30.0)
        a = naive_tiles(img, t, TC, workers=1)
        b = naive_tiles(img, t, TC, workers=4)
        assert np.array_equal(a.data, b.data)


class TestFeather:
    def test_identity_exact(self):
        img = random_image(150, 90, seed=7)
        assert np.array_equal(feather_tiles(img, identity(), TC).data, img.data)

    def test_pointwise_equals_whole(self):
        img = random_image(150, 90, seed=8)
        t = _lut(3)
        assert np.array_equal(feather_tiles(img, t, TC).data, whole(img, t).data)

    def test_single_tile_degenerates_to_whole(self):
        img = random_image(50, 40, seed=9)
        t = _lut(4)
        assert np.array_equal(feather_tiles(img, t, TC).data, whole(img, t).data)

    @pytest.mark.parametrize("width,height", [(65, 64), (95, 70), (129, 129), (64, 111)])
    def test_identity_exact_with_clipped_windows(self, width, height):
        img = random_image(width, height, seed=width)
        assert np.array_equal(feather_tiles(img, identity(), TC).data, img.data)

    def test_constant_coverage_weights(self):
        # constant input must come back exactly: blend weights sum to 1
        img = Image(np.full((150, 150, 3), 201, np.uint8))
        out = feather_tiles(img, identity(), TC)
        assert np.array_equal(out.data, img.data)

    def test_requires_positive_overlap(self):
        img = random_image(40, 40, seed=10)
        with pytest.raises(ValueError):
            feather_tiles(img, identity(), TileConfig(tile=16, overlap=0))

    def test_worker_count_irrelevant(self):
        img = random_image(200, 130, seed=11)
        t = global_normalize(100.0, 30.0)
        a = feather_tiles(img, t, TC, workers=1)
        b = feather_tiles(img, t, TC, workers=4)
        assert np.array_equal(a.data, b.data)

    def test_softens_the_naive_seam(self):
        arr = np.zeros((64, 128, 3), np.uint8)
        rng = np.random.default_rng(1)
        arr[:, :64] = rng.integers(20, 60, (64, 64, 3))
        arr[:, 64:] = rng.integers(180, 220, (64, 64, 3))
        t = global_normalize(128.0, 48.0)
        naive = naive_tiles(Image(arr), t, TC)
        feather = feather_tiles(Image(arr), t, TC)
        jump_naive = border_discontinuity(naive, xs=[64]).max_border_jump
        jump_feather = border_discontinuity(feather, xs=[64]).max_border_jump
        assert jump_feather < jump_naive


def test_transform_failure_propagates():
    bad = Transform("bad", True, lambda img: (_ for _ in ()).throw(TransformError("dead")))
    img = random_image(100, 100, seed=12)
    for fn in (lambda: whole(img, bad), lambda: naive_tiles(img, bad, TC), lambda: feather_tiles(img, bad, TC)):
        with pytest.raises(TransformError):
            fn()
