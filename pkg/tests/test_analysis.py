import csv
import math

import numpy as np
import pytest

from roiskip.analysis import (FrameStats, SequenceReport,
                              bit_distribution_ratio, format_rate_table,
                              frame_stats_from_ctus, na_intra_fraction,
                              rate_diff_table, render_heatmap,
                              render_mode_map, render_report_figures,
                              roi_area_ratio, roi_bit_ratio)
from roiskip.codec import CtuStat, Mode
from roiskip.errors import EmptyFrame, ZeroArea, ZeroReference
from roiskip.roi_detect import MO, NA, NONROI, RoiMask


def make_stats(bit_list, roi_flags, ctu=16, modes=None):
    ctus = []
    for i, (bits, roi) in enumerate(zip(bit_list, roi_flags)):
        mode = modes[i] if modes else Mode.INTRA
        x = (i % 4) * ctu
        y = (i // 4) * ctu
        ctus.append(CtuStat(x=x, y=y, bits=bits, is_roi=roi,
                            leaves=[(x, y, ctu, mode)]))
    return frame_stats_from_ctus(0, ctu, 4 * ctu, ctu * (-(-len(ctus) // 4)),
                                 ctus, sum(bit_list) + 32)


class TestRatios:
    def test_all_roi_bits(self):
        st = make_stats([100, 200], [True, True])
        assert roi_bit_ratio(st) == 1.0

    def test_direct_ratio(self):
        st = make_stats([750, 250], [True, False])
        assert roi_bit_ratio(st) == 0.75

    def test_empty_frame(self):
        st = make_stats([0, 0], [True, False])
        with pytest.raises(EmptyFrame):
            roi_bit_ratio(st)

    def test_area_ratio(self):
        cells = np.zeros((10, 12), dtype=np.uint8)
        cells.ravel()[:12] = NA
        assert roi_area_ratio(RoiMask(cells)) == pytest.approx(0.1)
        assert roi_area_ratio(RoiMask(np.full((2, 2), MO, np.uint8))) == 1.0

    def test_bit_distribution_ratio(self):
        assert bit_distribution_ratio(0.3, 0.1) == pytest.approx(3.0)
        assert bit_distribution_ratio(0.2, 0.2) == pytest.approx(1.0)
        assert bit_distribution_ratio(0.15, 0.1) == pytest.approx(1.5)
        with pytest.raises(ZeroArea):
            bit_distribution_ratio(0.5, 0.0)


class TestRateDiffTable:
    def test_known_percentages(self):
        rows = rate_diff_table([("a", 634.0), ("b", 943.0)], 943.0)
        assert rows[0][2] == pytest.approx(-32.8, abs=0.05)
        assert rows[1][2] == 0.0

    def test_second_reference(self):
        rows = rate_diff_table([("x", 6489.0)], 9287.0)
        assert rows[0][2] == pytest.approx(-30.1, abs=0.05)

    def test_zero_reference(self):
        with pytest.raises(ZeroReference):
            rate_diff_table([("a", 1.0)], 0.0)

    def test_format(self):
        text = format_rate_table([("coder-a", 634.0)], 943.0)
        assert "coder-a" in text and "-32.8" in text


class TestHeatmap:
    def test_uniform_mid_ramp(self):
        st = make_stats([64] * 8, [True] * 8)
        img = render_heatmap(st)
        assert (img == img[0, 0]).all()
        r, g, b = (int(v) for v in img[0, 0])
        assert abs(r - 127) <= 1 and abs(b - 127) <= 1 and g == 0

    def test_single_hot(self):
        st = make_stats([1000, 0, 0, 0], [True, False, False, False])
        img = render_heatmap(st)
        assert tuple(img[0, 0]) == (255, 0, 0)
        assert tuple(img[0, 1]) == (0, 0, 255)

    def test_rank_order(self):
        bits = [10, 500, 80, 3000]
        st = make_stats(bits, [True] * 4)
        img = render_heatmap(st)
        red = [int(img[0, i, 0]) for i in range(4)]
        order = np.argsort(bits)
        assert list(np.argsort(red)) == list(order)

    def test_empty(self):
        with pytest.raises(EmptyFrame):
            render_heatmap(frame_stats_from_ctus(0, 16, 64, 64, [], 0))


class TestModeMap:
    def test_all_intra_red(self):
        st = make_stats([10] * 4, [True] * 4, modes=[Mode.INTRA] * 4)
        img = render_mode_map(st, 64, 16)
        # interiors are pure red (outline pels are darkened)
        assert tuple(img[8, 8]) == (255, 0, 0)

    def test_all_skip_gray(self):
        st = make_stats([1] * 4, [False] * 4, modes=[Mode.SKIP] * 4)
        img = render_mode_map(st, 64, 16)
        assert tuple(img[8, 8]) == (128, 128, 128)

    def test_crop_to_frame(self):
        st = make_stats([1] * 4, [True] * 4)
        img = render_mode_map(st, 60, 14)
        assert img.shape == (14, 60, 3)


def test_na_intra_fraction():
    cells = np.zeros((1, 4), dtype=np.uint8)
    cells[0, 0] = NA
    mask = RoiMask(cells)
    st = make_stats([10, 10, 10, 10], [True, False, False, False],
                    modes=[Mode.INTRA, Mode.SKIP, Mode.SKIP, Mode.SKIP])
    assert na_intra_fraction(st, mask) == 1.0


class TestSequenceReport:
    def build(self):
        st = make_stats([300, 100], [True, False])
        cells = np.zeros((2, 4), dtype=np.uint8)
        cells[0, 0] = NA
        cells[0, 1] = MO
        return SequenceReport.build(30.0, [st], [RoiMask(cells)], [41.5])

    def test_row_values(self):
        rep = self.build()
        row = rep.rows[0]
        assert row["C"] == 0.75
        assert row["A"] == 0.25
        assert row["R"] == 3.0
        assert row["roi_psnr"] == 41.5

    def test_mean_rate(self):
        rep = self.build()
        assert rep.mean_rate_kbps == pytest.approx(432 * 30 / 1000.0)

    def test_csv(self, tmp_path):
        rep = self.build()
        path = tmp_path / "report.csv"
        rep.write_csv(path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0].keys()) == ["frame_index", "bits", "C", "A", "R",
                                        "roi_psnr", "intra", "inter", "skip"]
        assert float(rows[0]["R"]) == pytest.approx(3.0)

    def test_figures(self, tmp_path):
        rep = self.build()
        paths = render_report_figures(rep, tmp_path)
        assert len(paths) == 2
        for p in paths:
            assert p.exists() and p.stat().st_size > 1000
