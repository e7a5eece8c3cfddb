"""Spatial bit-distribution analytics.

Per-CTU heat maps and mode maps, the ROI-bit-ratio C, ROI-area-ratio A and
bit-distribution-ratio R = C / A, plus rate comparison tables.  All inputs
come from per-CTU bit accounting that the decoder reproduces exactly in
stats mode, so every number here is re-derivable from the stream alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .codec import CtuStat, Mode
from .errors import EmptyFrame, ZeroArea, ZeroReference
from .roi_detect import NA, NA_AND_MO, RoiMask


@dataclass
class FrameStats:
    frame_index: int
    ctu_size: int
    grid_width: int
    grid_height: int
    ctus: list[CtuStat]
    payload_bits: int

    @property
    def total_ctu_bits(self) -> int:
        return sum(c.bits for c in self.ctus)

    @property
    def overhead_bits(self) -> int:
        """Range-coder init/flush bits not attributable to any CTU."""
        return self.payload_bits - self.total_ctu_bits

    def mode_counts(self) -> dict[Mode, int]:
        counts = {Mode.SKIP: 0, Mode.INTRA: 0, Mode.INTER: 0}
        for ctu in self.ctus:
            for _, _, _, mode in ctu.leaves:
                counts[mode] += 1
        return counts


def frame_stats_from_ctus(frame_index: int, ctu_size: int, width: int,
                          height: int, ctus: list[CtuStat],
                          payload_bits: int) -> FrameStats:
    return FrameStats(frame_index=frame_index, ctu_size=ctu_size,
                      grid_width=-(-width // ctu_size),
                      grid_height=-(-height // ctu_size),
                      ctus=ctus, payload_bits=payload_bits)


def roi_bit_ratio(stats: FrameStats) -> float:
    total = stats.total_ctu_bits
    if total <= 0:
        raise EmptyFrame(f"frame {stats.frame_index} carries no bits")
    roi = sum(c.bits for c in stats.ctus if c.is_roi)
    return roi / total


def roi_area_ratio(mask: RoiMask) -> float:
    return float(mask.roi_cells.sum()) / mask.cells.size


def bit_distribution_ratio(c: float, a: float) -> float:
    if a <= 0:
        raise ZeroArea("ROI area ratio is zero")
    return c / a


def _bits_grid(stats: FrameStats) -> np.ndarray:
    grid = np.zeros((stats.grid_height, stats.grid_width), dtype=np.float64)
    for ctu in stats.ctus:
        grid[ctu.y // stats.ctu_size, ctu.x // stats.ctu_size] = ctu.bits
    return grid


def render_heatmap(stats: FrameStats) -> np.ndarray:
    """Per-CTU blue-to-red ramp over log-scaled bits (RGB array).

    Normalization is range-based on the log scale; a frame with uniform bit
    usage renders as the mid-ramp color.
    """
    if not stats.ctus:
        raise EmptyFrame("no CTU statistics")
    grid = np.log1p(_bits_grid(stats))
    lo, hi = grid.min(), grid.max()
    if hi > lo:
        t = (grid - lo) / (hi - lo)
    else:
        t = np.full_like(grid, 0.5)
    rgb = np.zeros(grid.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.rint(255 * t)
    rgb[..., 2] = np.rint(255 * (1 - t))
    return rgb


MODE_COLORS = {
    Mode.INTRA: (255, 0, 0),
    Mode.INTER: (0, 200, 0),
    Mode.SKIP: (128, 128, 128),
}


def render_mode_map(stats: FrameStats, width: int,
                    height: int) -> np.ndarray:
    """Pel-resolution leaf-mode map: red intra, green inter, gray skip."""
    if not stats.ctus:
        raise EmptyFrame("no CTU statistics")
    pw = stats.grid_width * stats.ctu_size
    ph = stats.grid_height * stats.ctu_size
    rgb = np.zeros((ph, pw, 3), dtype=np.uint8)
    for ctu in stats.ctus:
        for x, y, size, mode in ctu.leaves:
            rgb[y:y + size, x:x + size] = MODE_COLORS[mode]
            # 1-pel partition outline for readability
            rgb[y, x:x + size] = np.maximum(rgb[y, x:x + size] // 2, 32)
            rgb[y:y + size, x] = np.maximum(rgb[y:y + size, x] // 2, 32)
    return rgb[:height, :width]


def na_intra_fraction(stats: FrameStats, mask: RoiMask) -> float:
    """Fraction of coded (non-skip) leaves inside NA cells that are intra."""
    na_cells = np.isin(mask.cells, (NA, NA_AND_MO))
    coded = 0
    intra = 0
    for ctu in stats.ctus:
        for x, y, size, mode in ctu.leaves:
            if mode == Mode.SKIP:
                continue
            cx = min(x // mask.block_size, mask.grid_width - 1)
            cy = min(y // mask.block_size, mask.grid_height - 1)
            if na_cells[cy, cx]:
                coded += 1
                if mode == Mode.INTRA:
                    intra += 1
    if coded == 0:
        return 0.0
    return intra / coded


def rate_diff_table(rates: Sequence[tuple[str, float]],
                    reference: float) -> list[tuple[str, float, float]]:
    """Percent rate differences against a reference, one decimal place."""
    if reference <= 0:
        raise ZeroReference("reference rate must be positive")
    return [(label, rate, round(100.0 * (rate - reference) / reference, 1))
            for label, rate in rates]


def format_rate_table(rates: Sequence[tuple[str, float]],
                      reference: float) -> str:
    rows = rate_diff_table(rates, reference)
    lines = [f"{'coder':<24} {'rate kbit/s':>12} {'diff %':>8}"]
    for label, rate, diff in rows:
        lines.append(f"{label:<24} {rate:>12.1f} {diff:>+8.1f}")
    return "\n".join(lines)


@dataclass
class SequenceReport:
    fps: float
    rows: list[dict] = field(default_factory=list)

    @classmethod
    def build(cls, fps: float, stats: list[FrameStats],
              masks: list[RoiMask],
              roi_psnrs: list[float] | None = None) -> "SequenceReport":
        report = cls(fps=fps)
        for i, (st, mask) in enumerate(zip(stats, masks)):
            c = roi_bit_ratio(st)
            a = roi_area_ratio(mask)
            r = bit_distribution_ratio(c, a) if a > 0 else math.nan
            modes = st.mode_counts()
            report.rows.append({
                "frame_index": st.frame_index,
                "bits": st.payload_bits,
                "C": c,
                "A": a,
                "R": r,
                "roi_psnr": (roi_psnrs[i] if roi_psnrs is not None
                             else math.nan),
                "intra": modes[Mode.INTRA],
                "inter": modes[Mode.INTER],
                "skip": modes[Mode.SKIP],
            })
        return report

    @property
    def mean_rate_kbps(self) -> float:
        if not self.rows:
            return 0.0
        total_bits = sum(r["bits"] for r in self.rows)
        return total_bits * self.fps / len(self.rows) / 1000.0

    def mean(self, key: str) -> float:
        vals = [r[key] for r in self.rows if not math.isnan(r[key])]
        return sum(vals) / len(vals) if vals else math.nan

    def write_csv(self, path: str | Path) -> None:
        fieldnames = ["frame_index", "bits", "C", "A", "R", "roi_psnr",
                      "intra", "inter", "skip"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            for row in self.rows:
                out = dict(row)
                out["C"] = f"{row['C']:.6f}"
                out["A"] = f"{row['A']:.6f}"
                out["R"] = f"{row['R']:.6f}"
                out["roi_psnr"] = ("" if math.isnan(row["roi_psnr"])
                                   else f"{row['roi_psnr']:.3f}")
                writer.writerow(out)


def render_report_figures(report: SequenceReport, out_dir: str | Path,
                          prefix: str = "report") -> list[Path]:
    """Matplotlib summary figures next to the CSV output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = [r["frame_index"] for r in report.rows]
    paths = []

    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(frames, [r["bits"] / 1000.0 for r in report.rows],
            marker="o", lw=1)
    ax.set_xlabel("frame")
    ax.set_ylabel("kbit")
    ax.set_title(f"bits per frame (mean rate {report.mean_rate_kbps:.1f}"
                 " kbit/s)")
    fig.tight_layout()
    p = out_dir / f"{prefix}_bits.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 3.5))
    for key in ("C", "A", "R"):
        ax.plot(frames, [r[key] for r in report.rows], marker=".", lw=1,
                label=key)
    ax.set_xlabel("frame")
    ax.set_title("ROI bit ratio C, area ratio A, distribution ratio R")
    ax.legend()
    fig.tight_layout()
    p = out_dir / f"{prefix}_ratios.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    paths.append(p)
    return paths
