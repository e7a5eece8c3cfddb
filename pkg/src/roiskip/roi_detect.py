"""ROI classification on the coding block grid.

Two detectors feed the coding control: new areas (NA) derived from the
global motion model, and moving objects (MO) found as high-energy spots in
the motion-compensated difference image.  Block cells are labeled
conservatively: a single ROI pel marks the whole cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, GridMismatch
from .geometry import Frame, Homography, inverse_map_grid

NONROI = 0
MO = 1
NA = 2
NA_AND_MO = 3

PGM_VALUES = {NONROI: 0, MO: 85, NA: 170, NA_AND_MO: 255}

DEFAULT_BLOCK_SIZE = 16


@dataclass(frozen=True)
class MoConfig:
    diff_threshold: float = 25.0
    blur_radius: int = 2
    min_blob_area: int = 16
    dilate_radius: int = 8


@dataclass
class RoiMask:
    cells: np.ndarray          # (grid_height, grid_width) uint8 labels
    block_size: int = DEFAULT_BLOCK_SIZE
    frame_index: int = 0

    @property
    def grid_height(self) -> int:
        return self.cells.shape[0]

    @property
    def grid_width(self) -> int:
        return self.cells.shape[1]

    @property
    def roi_cells(self) -> np.ndarray:
        return self.cells != NONROI

    def cell_at_pel(self, x: int, y: int) -> int:
        return int(self.cells[y // self.block_size, x // self.block_size])


def grid_shape(width: int, height: int, block_size: int) -> tuple[int, int]:
    return (-(-height // block_size), -(-width // block_size))


def _pel_mask_to_blocks(pel_mask: np.ndarray, block_size: int) -> np.ndarray:
    """Any-pel block reduction; partial edge blocks are padded with False."""
    h, w = pel_mask.shape
    gh, gw = grid_shape(w, h, block_size)
    padded = np.zeros((gh * block_size, gw * block_size), dtype=bool)
    padded[:h, :w] = pel_mask
    return padded.reshape(gh, block_size, gw, block_size).any(axis=(1, 3))


def first_frame_mask(width: int, height: int,
                     block_size: int = DEFAULT_BLOCK_SIZE,
                     frame_index: int = 0) -> RoiMask:
    """Bootstrap mask: no predecessor, so everything is new area."""
    gh, gw = grid_shape(width, height, block_size)
    return RoiMask(np.full((gh, gw), NA, dtype=np.uint8), block_size,
                   frame_index)


def new_area_pels(h: Homography, width: int, height: int) -> np.ndarray:
    """Pel-wise NA: true where the inverse map leaves the previous frame."""
    sx, sy = inverse_map_grid(h, width, height)
    inside = (sx >= 0) & (sx <= width - 1) & (sy >= 0) & (sy <= height - 1)
    return ~inside


def detect_new_area(h: Homography, width: int, height: int,
                    block_size: int = DEFAULT_BLOCK_SIZE,
                    frame_index: int = 0) -> RoiMask:
    na = new_area_pels(h, width, height)
    blocks = _pel_mask_to_blocks(na, block_size)
    cells = np.where(blocks, NA, NONROI).astype(np.uint8)
    return RoiMask(cells, block_size, frame_index)


def _disk(radius: int) -> np.ndarray:
    if radius <= 0:
        return np.ones((1, 1), dtype=bool)
    ys, xs = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return xs * xs + ys * ys <= radius * radius


def moving_object_pels(curr: Frame, gmc_prev: Frame, coverage: np.ndarray,
                       cfg: MoConfig) -> np.ndarray:
    """Pel-wise MO map: blur -> threshold -> blob area filter -> dilate."""
    if curr.y.shape != gmc_prev.y.shape or curr.y.shape != coverage.shape:
        raise DimensionMismatch("curr, gmc_prev and coverage must align")
    diff = np.abs(curr.y.astype(np.float64) - gmc_prev.y.astype(np.float64))
    diff[~coverage] = 0.0  # uncovered pels are NA business, never MO
    if cfg.blur_radius > 0:
        diff = ndimage.uniform_filter(diff, size=2 * cfg.blur_radius + 1,
                                      mode="constant")
    hot = diff > cfg.diff_threshold
    if cfg.min_blob_area > 0 and hot.any():
        labels, count = ndimage.label(hot)
        areas = np.bincount(labels.ravel())
        small = np.nonzero(areas < cfg.min_blob_area)[0]
        hot &= ~np.isin(labels, small[small > 0])
    if cfg.dilate_radius > 0 and hot.any():
        hot = ndimage.binary_dilation(hot, structure=_disk(cfg.dilate_radius))
    return hot


def detect_moving_objects(curr: Frame, gmc_prev: Frame, coverage: np.ndarray,
                          cfg: MoConfig | None = None,
                          block_size: int = DEFAULT_BLOCK_SIZE) -> RoiMask:
    cfg = cfg or MoConfig()
    hot = moving_object_pels(curr, gmc_prev, coverage, cfg)
    blocks = _pel_mask_to_blocks(hot, block_size)
    cells = np.where(blocks, MO, NONROI).astype(np.uint8)
    return RoiMask(cells, block_size, curr.index)


def merge_masks(na: RoiMask, mo: RoiMask) -> RoiMask:
    if (na.cells.shape != mo.cells.shape or na.block_size != mo.block_size):
        raise GridMismatch("mask grids differ")
    # label-bit union: commutative and idempotent
    is_na = np.isin(na.cells, (NA, NA_AND_MO)) | np.isin(mo.cells,
                                                         (NA, NA_AND_MO))
    is_mo = np.isin(na.cells, (MO, NA_AND_MO)) | np.isin(mo.cells,
                                                         (MO, NA_AND_MO))
    merged = np.zeros_like(na.cells)
    merged[is_na] = NA
    merged[is_mo] = MO
    merged[is_na & is_mo] = NA_AND_MO
    return RoiMask(merged, na.block_size, na.frame_index)


def mask_to_pgm_bytes(mask: RoiMask) -> bytes:
    vals = np.zeros_like(mask.cells)
    for label, value in PGM_VALUES.items():
        vals[mask.cells == label] = value
    header = f"P5\n{mask.grid_width} {mask.grid_height}\n255\n".encode()
    return header + vals.astype(np.uint8).tobytes()


def pack_mask(mask: RoiMask) -> bytes:
    """Packed 2 bits per cell in raster order, zero-padded to a byte."""
    flat = mask.cells.ravel().astype(np.uint8)
    pad = (-len(flat)) % 4
    if pad:
        flat = np.concatenate([flat, np.zeros(pad, dtype=np.uint8)])
    quads = flat.reshape(-1, 4)
    packed = (quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4)
              | (quads[:, 3] << 6))
    return packed.astype(np.uint8).tobytes()


def unpack_mask(data: bytes, grid_width: int, grid_height: int,
                block_size: int = DEFAULT_BLOCK_SIZE,
                frame_index: int = 0) -> RoiMask:
    packed = np.frombuffer(data, dtype=np.uint8)
    quads = np.stack([packed & 3, (packed >> 2) & 3, (packed >> 4) & 3,
                      (packed >> 6) & 3], axis=1).ravel()
    cells = quads[:grid_width * grid_height].reshape(grid_height, grid_width)
    return RoiMask(cells.astype(np.uint8), block_size, frame_index)


def packed_mask_size(grid_width: int, grid_height: int) -> int:
    return -(-grid_width * grid_height // 4)
