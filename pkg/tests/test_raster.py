import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devoc import raster
from devoc.raster import (
    BoundingBox,
    BoxOutOfRangeError,
    DimensionMismatchError,
    EmptyImageError,
    MalformedHeaderError,
    OutOfBoundsError,
)

from conftest import brute_neighbor_count, flood_fill_components, has_full_2x2_block, random_blobs


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_bytes(data if isinstance(data, bytes) else data.encode())
    return str(p)


class TestPbm:
    def test_p1_basic(self, tmp_path):
        img = raster.load_pbm(write(tmp_path, "a.pbm", "P1\n2 2\n1 0\n0 1"))
        assert img.shape == (2, 2)
        assert img[0, 0] and img[1, 1]
        assert not img[0, 1] and not img[1, 0]

    def test_p1_single_background(self, tmp_path):
        img = raster.load_pbm(write(tmp_path, "a.pbm", "P1\n1 1\n0"))
        assert img.shape == (1, 1) and not img.any()

    def test_p1_pixel_count_mismatch(self, tmp_path):
        with pytest.raises(DimensionMismatchError):
            raster.load_pbm(write(tmp_path, "a.pbm", "P1\n3 3\n1 0 1 0 1 0 1 0"))

    def test_p1_comments_and_packed_digits(self, tmp_path):
        img = raster.load_pbm(write(tmp_path, "a.pbm", "P1\n# hi\n2 2 # dims\n1001"))
        assert img[0, 0] and img[1, 1] and not img[0, 1]

    def test_bad_magic(self, tmp_path):
        with pytest.raises(MalformedHeaderError):
            raster.load_pbm(write(tmp_path, "a.pbm", "P7\n1 1\n0"))

    def test_p4_round_trip_via_bits(self, tmp_path):
        # 10 wide so the row padding path is exercised
        rng = np.random.default_rng(7)
        img = rng.random((5, 10)) < 0.4
        packed = np.packbits(img, axis=1)
        data = b"P4\n10 5\n" + packed.tobytes()
        got = raster.load_pbm(write(tmp_path, "a.pbm", data))
        assert np.array_equal(got, img)

    def test_p4_truncated(self, tmp_path):
        with pytest.raises(DimensionMismatchError):
            raster.load_pbm(write(tmp_path, "a.pbm", b"P4\n10 5\n\x00\x01"))

    def test_save_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rng.random((13, 17)) < 0.3
        path = str(tmp_path / "rt.pbm")
        raster.save_pbm(path, img)
        assert np.array_equal(raster.load_pbm(path), img)

    def test_missing_file(self, tmp_path):
        with pytest.raises(raster.RasterError):
            raster.load_pbm(str(tmp_path / "nope.pbm"))


class TestPgm:
    def test_p2_threshold_darker_is_foreground(self, tmp_path):
        img = raster.load_pgm(write(tmp_path, "a.pgm", "P2\n3 1\n255\n0 127 255"))
        assert img.tolist() == [[True, True, False]]

    def test_p5_binary(self, tmp_path):
        data = b"P5\n2 2\n255\n" + bytes([0, 200, 10, 255])
        img = raster.load_pgm(write(tmp_path, "a.pgm", data))
        assert img.tolist() == [[True, False], [True, False]]

    def test_load_image_dispatch(self, tmp_path):
        pbm = write(tmp_path, "a.pbm", "P1\n1 1\n1")
        pgm = write(tmp_path, "a.pgm", "P2\n1 1\n255\n0")
        assert raster.load_image(pbm)[0, 0]
        assert raster.load_image(pgm)[0, 0]
        with pytest.raises(MalformedHeaderError):
            raster.load_image(write(tmp_path, "a.txt", "hello"))


class TestGeometry:
    def test_bbox_single_pixel(self):
        img = np.zeros((10, 10), dtype=bool)
        img[5, 7] = True
        assert raster.bounding_box(img) == BoundingBox(5, 5, 7, 7)

    def test_bbox_two_pixels(self):
        img = np.zeros((12, 25), dtype=bool)
        img[2, 3] = img[10, 20] = True
        assert raster.bounding_box(img) == BoundingBox(2, 10, 3, 20)

    def test_bbox_empty(self):
        with pytest.raises(EmptyImageError):
            raster.bounding_box(np.zeros((4, 4), dtype=bool))

    def test_crop_identity(self):
        img = np.random.default_rng(0).random((6, 8)) < 0.5
        out = raster.crop(img, BoundingBox(0, 5, 0, 7))
        assert np.array_equal(out, img)

    def test_crop_single(self):
        img = np.zeros((3, 3), dtype=bool)
        img[0, 0] = True
        assert raster.crop(img, BoundingBox(0, 0, 0, 0)).tolist() == [[True]]

    def test_crop_out_of_range(self):
        img = np.zeros((3, 3), dtype=bool)
        with pytest.raises(BoxOutOfRangeError):
            raster.crop(img, BoundingBox(0, 3, 0, 2))

    def test_neighbor_count_examples(self):
        img = np.zeros((5, 5), dtype=bool)
        img[2, 2] = True
        assert raster.neighbor_count(img, 2, 2) == 0
        line = np.zeros((3, 9), dtype=bool)
        line[1, :] = True
        assert raster.neighbor_count(line, 1, 4) == 2
        cross = np.zeros((5, 5), dtype=bool)
        cross[2, :] = True
        cross[:, 2] = True
        assert raster.neighbor_count(cross, 2, 2) == 4

    def test_neighbor_count_out_of_bounds(self):
        with pytest.raises(OutOfBoundsError):
            raster.neighbor_count(np.zeros((2, 2), dtype=bool), 2, 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_neighbor_count_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        img = rng.random((7, 9)) < 0.5
        for r in range(7):
            for c in range(9):
                assert raster.neighbor_count(img, r, c) == brute_neighbor_count(img, r, c)
        grid = raster.neighbor_count_grid(img)
        for r in range(7):
            for c in range(9):
                assert grid[r, c] == brute_neighbor_count(img, r, c)


class TestThicken:
    def test_center_pixel(self):
        img = np.zeros((5, 5), dtype=bool)
        img[2, 2] = True
        out = raster.thicken(img)
        assert out.sum() == 9
        assert out[1:4, 1:4].all()

    def test_all_background(self):
        assert not raster.thicken(np.zeros((4, 4), dtype=bool)).any()

    def test_all_foreground_fixed_point(self):
        img = np.ones((4, 4), dtype=bool)
        assert raster.thicken(img).all()

    def test_superset(self):
        img = np.random.default_rng(5).random((9, 9)) < 0.3
        out = raster.thicken(img)
        assert (out | img).sum() == out.sum()


class TestThin:
    def test_thin_line_unchanged(self):
        img = np.zeros((5, 20), dtype=bool)
        img[2, 2:18] = True
        assert np.array_equal(raster.thin_to_convergence(img), img)

    def test_solid_bar(self):
        img = np.zeros((7, 24), dtype=bool)
        img[2:5, 2:22] = True
        out = raster.thin_to_convergence(img)
        assert not has_full_2x2_block(out)
        assert flood_fill_components(out) == flood_fill_components(img) == 1
        assert out.any()

    def test_all_background(self):
        assert not raster.thin_to_convergence(np.zeros((6, 6), dtype=bool)).any()

    def test_isolated_square_survives_as_component(self):
        # parallel Zhang-Suen alone would delete all four pixels at once
        img = np.zeros((6, 6), dtype=bool)
        img[2:4, 2:4] = True
        out = raster.thin_to_convergence(img)
        assert flood_fill_components(out) == 1
        assert not has_full_2x2_block(out)

    def test_random_blobs_invariants(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            img = random_blobs(rng, size=80, n_discs=5, max_radius=10)
            out = raster.thin_to_convergence(img)
            assert not has_full_2x2_block(out)
            assert flood_fill_components(out) == flood_fill_components(img)

    def test_thicken_then_thin_preserves_components(self):
        # two thin strokes well clear of each other
        img = np.zeros((30, 30), dtype=bool)
        img[5, 2:28] = True
        img[20, 2:28] = True
        out = raster.thin_to_convergence(raster.thicken(img))
        assert flood_fill_components(out) == 2


class TestPrune:
    def test_side_spur_removed(self):
        img = np.zeros((6, 20), dtype=bool)
        img[3, 2:18] = True
        img[2, 10] = img[1, 10] = True  # 2-pixel spur off the line
        out = raster.prune(img, max_spur=3)
        assert not out[2, 10] and not out[1, 10]
        assert out[3, 2:18].all()

    def test_isolated_short_line_kept(self):
        img = np.zeros((5, 5), dtype=bool)
        img[2, 1:4] = True  # no junction anchor anywhere
        assert np.array_equal(raster.prune(img, max_spur=3), img)

    def test_max_spur_zero_is_identity(self):
        img = np.zeros((6, 20), dtype=bool)
        img[3, 2:18] = True
        img[2, 10] = True
        assert np.array_equal(raster.prune(img, max_spur=0), img)

    def test_long_spur_kept(self):
        img = np.zeros((10, 20), dtype=bool)
        img[5, 2:18] = True
        img[0:5, 10] = True  # 5-pixel branch
        out = raster.prune(img, max_spur=3)
        assert out[0:5, 10].all()


class TestNormalize:
    def test_dims_and_edges(self):
        img = np.zeros((37, 61), dtype=bool)
        img[3, 5:50] = True
        img[3:30, 49] = True
        out = raster.normalize(img)
        assert out.shape == (100, 100)
        assert raster.is_one_pixel_wide(out)
        box = raster.bounding_box(out)
        # re-thinning may erode at most one pixel per edge
        assert box.row_min <= 1 and box.col_min <= 1
        assert box.row_max >= 98 and box.col_max >= 98

    def test_identity_scale_on_stable_skeleton(self):
        img = np.zeros((100, 100), dtype=bool)
        img[0, :] = True
        img[:, 0] = True
        assert np.array_equal(raster.normalize(img), img)

    def test_diagonal_upscale_matches_forward_map_oracle(self):
        img = np.zeros((50, 50), dtype=bool)
        for i in range(50):
            img[i, i] = True
        out = raster.normalize(img)
        # oracle: paint each source pixel's 2x2 destination block, then thin
        expect = np.zeros((100, 100), dtype=bool)
        for r in range(50):
            for c in range(50):
                if img[r, c]:
                    expect[2 * r : 2 * r + 2, 2 * c : 2 * c + 2] = True
        expect = raster.thin_to_convergence(expect)
        assert np.array_equal(out, expect)

    def test_downscale_never_empties(self):
        img = np.zeros((400, 400), dtype=bool)
        img[200, 10:390] = True
        out = raster.normalize(img)
        assert out.any() and out.shape == (100, 100)

    def test_empty_raises(self):
        with pytest.raises(EmptyImageError):
            raster.normalize(np.zeros((10, 10), dtype=bool))
