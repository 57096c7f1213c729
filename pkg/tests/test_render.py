import numpy as np
import pytest

from lcmc import errors
from lcmc.image import ImageBuffer
from lcmc.render import render_edges, render_pose, render_texture
from lcmc.structure import (
    BODY_KEYPOINTS,
    FACE_KEYPOINTS,
    EdgeMap,
    PoseKeypoint,
    PoseMap,
    PosePerson,
)
from lcmc.texture import TextureMap

from conftest import full_person


def one_limb_pose(x0, y0, x1, y1):
    """Keypoints 1 (neck) and 2 (right shoulder): a single drawable limb."""
    kps = [PoseKeypoint.absent()] * (BODY_KEYPOINTS + FACE_KEYPOINTS)
    kps[1] = PoseKeypoint.at(x0, y0)
    kps[2] = PoseKeypoint.at(x1, y1)
    return PoseMap((PosePerson(tuple(kps)),))


class TestRenderPose:
    def test_single_limb_geometry(self):
        img = render_pose(one_limb_pose(0.25, 0.50, 0.75, 0.50), 512, 512)
        px = img.pixels
        assert px[256, 256].any()
        nz_y, nz_x = np.nonzero(px.any(axis=2))
        # stroke bounding box: endpoints +- stroke radius
        assert nz_x.min() >= 128 - 3 and nz_x.max() <= 383 + 3
        assert nz_y.min() >= 256 - 3 and nz_y.max() <= 256 + 3

    def test_deterministic(self):
        p = PoseMap((full_person(),))
        assert render_pose(p, 512, 512) == render_pose(p, 512, 512)

    def test_face_dots_drawn(self):
        kps = [PoseKeypoint.absent()] * (BODY_KEYPOINTS + FACE_KEYPOINTS)
        kps[BODY_KEYPOINTS] = PoseKeypoint.at(0.5, 0.5)
        img = render_pose(PoseMap((PosePerson(tuple(kps)),)), 512, 512)
        assert (img.pixels[256, 256] == (255, 255, 255)).all()

    def test_absent_keypoints_skip_limbs(self):
        kps = [PoseKeypoint.absent()] * (BODY_KEYPOINTS + FACE_KEYPOINTS)
        kps[1] = PoseKeypoint.at(0.5, 0.5)  # lone endpoint, no limb
        img = render_pose(PoseMap((PosePerson(tuple(kps)),)), 512, 512)
        assert not img.pixels.any()


class TestRenderEdges:
    def test_all_zero_grid(self):
        img = render_edges(EdgeMap(np.zeros((64, 64), bool)), 128, 128)
        assert not img.pixels.any()

    def test_single_bit_footprint(self):
        grid = np.zeros((64, 64), bool)
        grid[20, 10] = True  # (row, col) = (y=20, x=10)
        img = render_edges(EdgeMap(grid), 128, 128)
        white = np.argwhere((img.pixels == 255).all(axis=2))
        assert sorted(map(tuple, white)) == [
            (40, 20), (40, 21), (41, 20), (41, 21)
        ]

    def test_dimension_mismatch(self):
        with pytest.raises(errors.InvalidArgument):
            render_edges(EdgeMap(np.zeros((64, 64), bool)), 100, 128)

    def test_inverted_by_binarize_and_maxpool(self, nprng):
        for _ in range(50):
            grid = nprng.random((64, 64)) < 0.2
            img = render_edges(EdgeMap(grid), 128, 128)
            binar = img.pixels.any(axis=2)
            pooled = binar.reshape(64, 2, 64, 2).max(axis=(1, 3))
            assert np.array_equal(pooled.astype(bool), grid)


class TestRenderTexture:
    def test_uniform_both_modes(self):
        t = TextureMap(np.full((8, 8, 3), (10, 200, 77), np.uint8))
        for mode in ("bilinear", "nearest"):
            img = render_texture(t, 512, 512, mode=mode)
            assert (img.pixels == (10, 200, 77)).all()

    def test_nearest_block_centers(self, nprng):
        t = TextureMap(nprng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
        img = render_texture(t, 512, 512, mode="nearest")
        for i in range(8):
            for j in range(8):
                assert (img.pixels[i * 64 + 32, j * 64 + 32] ==
                        t.cells[i, j]).all()

    def test_bilinear_midpoint_closed_form(self):
        # Between adjacent cell centers 0 and 255, the continuous
        # interpolant at the midpoint is 127.5, which the half-away rule
        # commits to 128. Pixel centers straddle the midpoint, so check
        # that the rendered ramp brackets it symmetrically.
        cells = np.zeros((8, 8, 3), np.uint8)
        cells[0, 1] = 255
        img = render_texture(TextureMap(cells), 512, 512)
        row = img.pixels[0, :, 0].astype(int)
        # centers at x=31.5 and x=95.5; midpoint x=63.5 sits between
        # pixels 63 (weight 0.4921875 -> 126) and 64 (0.5078125 -> 129)
        assert row[63] == 126 and row[64] == 129
        assert row[63] + row[64] == 255  # symmetric about 127.5

    def test_bilinear_exact_half_rounds_away(self):
        # Cell values 0 and 2 with block width 2: pixel x=1 has weight
        # 0.25, interpolating to exactly 0.5; half-away rounding gives 1
        # where round-half-even would give 0.
        cells = np.zeros((8, 8, 3), np.uint8)
        cells[0, 1] = 2
        img = render_texture(TextureMap(cells), 16, 16)
        assert img.pixels[0, 1, 0] == 1

    def test_bilinear_matches_brute_force_oracle(self, nprng):
        cells = nprng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        img = render_texture(TextureMap(cells), 64, 64)
        c = cells.astype(float)
        for y in range(64):
            for x in range(0, 64, 7):
                gx = min(max((x + 0.5) / 8 - 0.5, 0.0), 7.0)
                gy = min(max((y + 0.5) / 8 - 0.5, 0.0), 7.0)
                x0, y0 = min(int(gx), 6), min(int(gy), 6)
                fx, fy = gx - x0, gy - y0
                v = (c[y0, x0] * (1 - fx) * (1 - fy)
                     + c[y0, x0 + 1] * fx * (1 - fy)
                     + c[y0 + 1, x0] * (1 - fx) * fy
                     + c[y0 + 1, x0 + 1] * fx * fy)
                expected = np.floor(v + 0.5).astype(np.uint8)
                assert (img.pixels[y, x] == expected).all()

    def test_indivisible_dimensions_rejected(self):
        t = TextureMap(np.zeros((8, 8, 3), np.uint8))
        with pytest.raises(errors.InvalidArgument):
            render_texture(t, 100, 128)

    def test_requested_dimensions(self, nprng):
        t = TextureMap(nprng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
        img = render_texture(t, 256, 128)
        assert (img.width, img.height) == (256, 128)
