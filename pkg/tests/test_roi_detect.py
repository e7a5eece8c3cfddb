import numpy as np
import pytest

from roiskip.errors import GridMismatch
from roiskip.geometry import Frame, Homography, Point, invert, warp_point
from roiskip.roi_detect import (MO, NA, NA_AND_MO, NONROI, MoConfig, RoiMask,
                                detect_moving_objects, detect_new_area,
                                first_frame_mask, mask_to_pgm_bytes,
                                merge_masks, moving_object_pels,
                                new_area_pels, pack_mask, unpack_mask)
from roiskip.synthetic import value_noise


def textured(w, h, seed=0):
    rng = np.random.default_rng(seed)
    return Frame(np.clip(np.rint(value_noise((h, w), rng)), 0,
                         255).astype(np.uint8))


class TestFirstFrameMask:
    def test_64x64(self):
        m = first_frame_mask(64, 64, 16)
        assert m.cells.shape == (4, 4)
        assert (m.cells == NA).all()

    def test_1080p(self):
        m = first_frame_mask(1920, 1080, 16)
        assert m.cells.shape == (68, 120)
        assert (m.cells == NA).all()

    def test_partial_blocks(self):
        m = first_frame_mask(17, 17, 16)
        assert m.cells.shape == (2, 2)
        assert (m.cells == NA).all()


def brute_force_na(h, width, height):
    hi = invert(h)
    out = np.zeros((height, width), dtype=bool)
    for y in range(height):
        for x in range(width):
            s = warp_point(hi, Point(float(x), float(y)))
            out[y, x] = not (0 <= s.x <= width - 1 and 0 <= s.y <= height - 1)
    return out


class TestDetectNewArea:
    def test_identity(self):
        m = detect_new_area(Homography.identity(), 128, 128, 16)
        assert (m.cells == NONROI).all()

    def test_translation_16(self):
        m = detect_new_area(Homography.translation(16.0, 0.0), 1920, 1080, 16)
        assert (m.cells[:, 0] == NA).all()
        assert (m.cells[:, 1:] == NONROI).all()
        na = new_area_pels(Homography.translation(16.0, 0.0), 1920, 1080)
        assert na.sum() == 16 * 1080

    def test_translation_8_partial_block(self):
        m = detect_new_area(Homography.translation(8.0, 0.0), 256, 256, 16)
        assert (m.cells[:, 0] == NA).all()
        assert (m.cells[:, 1:] == NONROI).all()

    @pytest.mark.parametrize("tx,ty", [(3, 0), (0, 5), (-7, 2), (32, -32),
                                       (12, 12)])
    def test_pel_count_formula(self, tx, ty):
        # |NA| = H*|tx| + W*|ty| - |tx*ty| for pure integer translation
        w, h = 80, 64
        na = new_area_pels(Homography.translation(float(tx), float(ty)), w, h)
        expected = brute_force_na(Homography.translation(float(tx), float(ty)),
                                  w, h).sum()
        assert na.sum() == expected
        assert expected == h * abs(tx) + w * abs(ty) - abs(tx * ty)

    def test_matches_brute_force_projective(self):
        h = Homography(a1=1.01, a2=0.004, a3=-2.0, a4=-0.003, a5=0.99,
                       a6=1.0, a7=1e-4, a8=-5e-5)
        na = new_area_pels(h, 48, 40)
        assert np.array_equal(na, brute_force_na(h, 48, 40))


class TestDetectMovingObjects:
    def test_no_difference(self):
        f = textured(128, 128)
        cov = np.ones((128, 128), dtype=bool)
        m = detect_moving_objects(f, f, cov, MoConfig())
        assert (m.cells == NONROI).all()

    def test_sprite_oracle(self):
        # perfect GMC: identical background, sprite moved 4 pels
        bg = textured(160, 160, seed=2).y
        prev = bg.copy()
        curr = bg.copy()
        prev[64:88, 64:88] = 250
        curr[64:88, 68:92] = 250
        cov = np.ones((160, 160), dtype=bool)
        cfg = MoConfig(dilate_radius=4)
        m = detect_moving_objects(Frame(curr), Frame(prev), cov, cfg)
        # every sprite pel (old and new position) is inside an MO cell
        sprite = np.zeros((160, 160), dtype=bool)
        sprite[64:88, 64:92] = True
        per_pel = np.repeat(np.repeat(m.cells == MO, 16, axis=0), 16, axis=1)
        assert per_pel[sprite].all()
        # nothing detected far away from the sprite
        assert not (m.cells[:2, :2] == MO).any()
        assert not (m.cells[8:, 8:] == MO).any()

    def test_salt_noise_filtered(self):
        f = textured(128, 128, seed=3)
        noisy = f.y.copy()
        noisy[10, 10] = 255  # single hot pel, blob area 1 < min_blob_area
        cov = np.ones((128, 128), dtype=bool)
        m = detect_moving_objects(Frame(noisy), f, cov,
                                  MoConfig(blur_radius=0))
        assert (m.cells == NONROI).all()

    def test_uncovered_pels_excluded(self):
        f = textured(128, 128, seed=4)
        other = Frame(np.zeros_like(f.y))
        cov = np.zeros((128, 128), dtype=bool)
        m = detect_moving_objects(f, other, cov, MoConfig())
        assert (m.cells == NONROI).all()

    def test_translation_equivariance(self):
        bg = textured(192, 160, seed=5).y
        cfg = MoConfig(dilate_radius=4)
        cov = np.ones((160, 192), dtype=bool)

        def cells_for(offset):
            prev = bg.copy()
            curr = bg.copy()
            prev[48 + offset:72 + offset, 48:72] = 250
            curr[48 + offset:72 + offset, 52:76] = 250
            return detect_moving_objects(Frame(curr), Frame(prev), cov,
                                         cfg).cells

        a = cells_for(0)
        b = cells_for(32)  # exactly two block rows down
        assert np.array_equal(np.roll(a, 2, axis=0), b)

    def test_no_misses_property(self):
        # every thresholded blob pel >= min area ends up in an MO block
        rng = np.random.default_rng(6)
        bg = textured(128, 128, seed=7).y
        curr = bg.copy()
        curr[30:50, 80:100] = 255
        cfg = MoConfig()
        cov = np.ones((128, 128), dtype=bool)
        hot = moving_object_pels(Frame(curr), Frame(bg), cov, cfg)
        m = detect_moving_objects(Frame(curr), Frame(bg), cov, cfg)
        per_pel = np.repeat(np.repeat(m.cells == MO, 16, axis=0), 16, axis=1)
        assert per_pel[hot].all()


class TestMergeMasks:
    def mask(self, cells):
        return RoiMask(np.array(cells, dtype=np.uint8), 16)

    def test_all_nonroi(self):
        z = self.mask([[NONROI, NONROI]])
        assert (merge_masks(z, z).cells == NONROI).all()

    def test_disjoint_union(self):
        na = self.mask([[NA, NONROI]])
        mo = self.mask([[NONROI, MO]])
        merged = merge_masks(na, mo)
        assert merged.cells[0, 0] == NA
        assert merged.cells[0, 1] == MO

    def test_overlap(self):
        na = self.mask([[NA]])
        mo = self.mask([[MO]])
        assert merge_masks(na, mo).cells[0, 0] == NA_AND_MO

    def test_commutative_on_roi_bit(self):
        rng = np.random.default_rng(8)
        na = RoiMask(np.where(rng.random((4, 5)) < 0.4, NA, NONROI)
                     .astype(np.uint8))
        mo = RoiMask(np.where(rng.random((4, 5)) < 0.4, MO, NONROI)
                     .astype(np.uint8))
        ab = merge_masks(na, mo)
        # idempotent on the ROI bit
        again = merge_masks(ab, RoiMask(np.zeros((4, 5), dtype=np.uint8)))
        assert np.array_equal(ab.roi_cells, again.roi_cells)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            merge_masks(self.mask([[NA]]), self.mask([[NA, NA]]))


class TestSerialization:
    def test_pgm_values(self):
        m = RoiMask(np.array([[NONROI, MO], [NA, NA_AND_MO]], dtype=np.uint8))
        data = mask_to_pgm_bytes(m)
        assert data.startswith(b"P5\n2 2\n255\n")
        assert list(data[-4:]) == [0, 85, 170, 255]

    def test_pack_roundtrip(self):
        rng = np.random.default_rng(9)
        cells = rng.integers(0, 4, (7, 11)).astype(np.uint8)
        m = RoiMask(cells, 16, frame_index=5)
        packed = pack_mask(m)
        assert len(packed) == -(-7 * 11 // 4)
        back = unpack_mask(packed, 11, 7, 16, 5)
        assert np.array_equal(back.cells, cells)

    def test_pack_lsb_first(self):
        m = RoiMask(np.array([[1, 2, 3, 0]], dtype=np.uint8))
        assert pack_mask(m) == bytes([1 | (2 << 2) | (3 << 4)])
