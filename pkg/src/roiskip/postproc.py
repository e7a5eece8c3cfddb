"""Decoder-side postprocessing: background mosaic and output rendering.

The mosaic accumulates background in the coordinate system of the first
frame, on a canvas that grows as the camera moves.  Decoded ROI content is
pasted into the canvas each frame (one resampling); rendering warps the
canvas into the current view (a second resampling).  Because content is
never re-warped frame over frame, interpolation blur does not accumulate
with sequence length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyRoi
from .geometry import (Frame, Homography, bilinear_sample, compose, invert,
                       warp_points)
from .roi_detect import RoiMask, MO, NA, NA_AND_MO

# bilinear-sampled boolean planes count only when all four taps agree
FULL_TAP = 0.999


@dataclass
class Mosaic:
    plane: np.ndarray          # float64 canvas, first-frame coordinates
    validity: np.ndarray       # bool, true where some frame contributed
    cumulative: Homography     # frame 0 -> current view
    origin: tuple[int, int] = (0, 0)   # canvas pel (0,0) minus reference (0,0)
    fill: float = 128.0

    @classmethod
    def empty(cls, width: int, height: int, fill: float = 128.0) -> "Mosaic":
        return cls(plane=np.full((height, width), fill, dtype=np.float64),
                   validity=np.zeros((height, width), dtype=bool),
                   cumulative=Homography.identity(), fill=fill)


def _cell_pel_mask(mask: RoiMask, labels: tuple[int, ...],
                   width: int, height: int) -> np.ndarray:
    hit = np.isin(mask.cells, labels)
    per_pel = np.repeat(np.repeat(hit, mask.block_size, axis=0),
                        mask.block_size, axis=1)
    return per_pel[:height, :width]


def _frame_bbox_in_reference(cum: Homography, width: int,
                             height: int) -> tuple[int, int, int, int]:
    """Integer reference-coordinate bounding box of the current view."""
    cx = np.array([0.0, width - 1.0, 0.0, width - 1.0])
    cy = np.array([0.0, 0.0, height - 1.0, height - 1.0])
    rx, ry = warp_points(invert(cum), cx, cy)
    return (int(np.floor(rx.min())), int(np.floor(ry.min())),
            int(np.ceil(rx.max())), int(np.ceil(ry.max())))


def _grow_canvas(m: Mosaic, bbox: tuple[int, int, int, int]) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    """Expand the canvas so the bbox (reference coords) fits entirely."""
    ox, oy = m.origin
    h, w = m.plane.shape
    left = max(0, -(bbox[0] + ox))
    top = max(0, -(bbox[1] + oy))
    right = max(0, bbox[2] + ox + left - (w - 1))
    bottom = max(0, bbox[3] + oy + top - (h - 1))
    if not (left or top or right or bottom):
        return m.plane, m.validity, m.origin
    plane = np.full((h + top + bottom, w + left + right), m.fill,
                    dtype=np.float64)
    validity = np.zeros_like(plane, dtype=bool)
    plane[top:top + h, left:left + w] = m.plane
    validity[top:top + h, left:left + w] = m.validity
    return plane, validity, (ox + left, oy + top)


def update_mosaic(m: Mosaic, decoded: Frame, mask: RoiMask,
                  h: Homography) -> Mosaic:
    """Advance the view by h and paste decoded ROI content into the canvas."""
    height, width = decoded.y.shape
    cum = compose(h, m.cumulative)
    bbox = _frame_bbox_in_reference(cum, width, height)
    plane, validity, origin = _grow_canvas(m, bbox)
    plane = plane.copy()
    validity = validity.copy()
    ox, oy = origin

    # canvas region covering the current view, mapped into frame coords
    cys, cxs = np.mgrid[bbox[1] + oy:bbox[3] + oy + 1,
                        bbox[0] + ox:bbox[2] + ox + 1]
    fx, fy = warp_points(cum, (cxs - ox).astype(np.float64),
                         (cys - oy).astype(np.float64))
    vals, inb = bilinear_sample(decoded.y, fx, fy)
    roi = _cell_pel_mask(mask, (NA, MO, NA_AND_MO), width, height)
    rvals, _ = bilinear_sample(roi.astype(np.float64), fx, fy)
    paste = inb & (rvals >= FULL_TAP)
    plane[cys[paste], cxs[paste]] = vals[paste]
    validity[cys[paste], cxs[paste]] = True
    return Mosaic(plane=plane, validity=validity, cumulative=cum,
                  origin=origin, fill=m.fill)


def render_output(m: Mosaic, decoded: Frame, mask: RoiMask) -> Frame:
    """Viewable frame: warped mosaic background, decoded ROI blocks on top."""
    height, width = decoded.y.shape
    ox, oy = m.origin
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    rx, ry = warp_points(invert(m.cumulative), xs, ys)
    vals, inb = bilinear_sample(m.plane, rx + ox, ry + oy)
    vv, _ = bilinear_sample(m.validity.astype(np.float64), rx + ox, ry + oy)
    valid = inb & (vv >= FULL_TAP)
    out = np.where(valid, vals, m.fill)
    roi = _cell_pel_mask(mask, (NA, MO, NA_AND_MO), width, height)
    out[roi] = decoded.y[roi]
    out = np.clip(np.rint(out), 0, decoded.max_value).astype(decoded.y.dtype)
    return Frame(out, index=decoded.index, bitdepth=decoded.bitdepth,
                 fps=decoded.fps)


def roi_psnr(orig: Frame, recon: Frame, mask: RoiMask) -> float:
    """Luma PSNR restricted to ROI-labeled blocks; +inf when error-free."""
    if orig.y.shape != recon.y.shape:
        raise DimensionMismatch(f"{orig.y.shape} vs {recon.y.shape}")
    roi = _cell_pel_mask(mask, (NA, MO, NA_AND_MO), orig.width, orig.height)
    if not roi.any():
        raise EmptyRoi("mask has no ROI cell")
    diff = orig.y.astype(np.float64)[roi] - recon.y.astype(np.float64)[roi]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(orig.max_value ** 2 / mse)


def psnr(a: np.ndarray, b: np.ndarray, maxval: int = 255) -> float:
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(maxval ** 2 / mse)
