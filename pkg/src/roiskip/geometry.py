"""Projective transforms and global motion compensation primitives.

A homography is stored as the 8 free parameters of the 3x3 matrix

    [[a1, a2, a3],
     [a4, a5, a6],
     [a7, a8,  1]]

mapping pel coordinates of frame k-1 onto frame k.  The ninth matrix entry
is pinned to 1 whenever a homography is constructed from a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMapping, DimensionMismatch, SingularHomography

DET_EPS = 1e-12
DENOM_EPS = 1e-9


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True)
class Homography:
    a1: float = 1.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    a5: float = 1.0
    a6: float = 0.0
    a7: float = 0.0
    a8: float = 0.0
    frame_index: int = 0

    @classmethod
    def identity(cls, frame_index: int = 0) -> "Homography":
        return cls(frame_index=frame_index)

    @classmethod
    def translation(cls, tx: float, ty: float, frame_index: int = 0) -> "Homography":
        return cls(a3=tx, a6=ty, frame_index=frame_index)

    @classmethod
    def from_matrix(cls, m: np.ndarray, frame_index: int = 0) -> "Homography":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("homography matrix must be 3x3")
        if abs(m[2, 2]) < DET_EPS:
            raise SingularHomography("cannot normalize: matrix[2,2] ~ 0")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) < DET_EPS:
            raise SingularHomography("determinant magnitude below 1e-12")
        return cls(m[0, 0], m[0, 1], m[0, 2], m[1, 0], m[1, 1], m[1, 2],
                   m[2, 0], m[2, 1], frame_index=frame_index)

    @property
    def params(self) -> tuple[float, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a5, self.a6,
                self.a7, self.a8)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2, self.a3],
                         [self.a4, self.a5, self.a6],
                         [self.a7, self.a8, 1.0]], dtype=np.float64)


@dataclass
class Frame:
    """Single luma plane plus optional 4:2:0 chroma."""

    y: np.ndarray
    index: int = 0
    bitdepth: int = 8
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    fps: tuple[int, int] = field(default=(30, 1))

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def max_value(self) -> int:
        return (1 << self.bitdepth) - 1


def warp_point(h: Homography, p: Point) -> Point:
    """Map a single point through the projective transform."""
    d = h.a7 * p.x + h.a8 * p.y + 1.0
    if abs(d) <= DENOM_EPS:
        raise DegenerateMapping(f"denominator {d!r} at ({p.x}, {p.y})")
    return Point((h.a1 * p.x + h.a2 * p.y + h.a3) / d,
                 (h.a4 * p.x + h.a5 * p.y + h.a6) / d)


def warp_points(h: Homography, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized warp_point over coordinate arrays (no degeneracy check)."""
    d = h.a7 * xs + h.a8 * ys + 1.0
    return ((h.a1 * xs + h.a2 * ys + h.a3) / d,
            (h.a4 * xs + h.a5 * ys + h.a6) / d)


def invert(h: Homography) -> Homography:
    m = h.matrix
    if abs(np.linalg.det(m)) < DET_EPS:
        raise SingularHomography("determinant magnitude below 1e-12")
    return Homography.from_matrix(np.linalg.inv(m), frame_index=h.frame_index)


def compose(h2: Homography, h1: Homography) -> Homography:
    """Transform applying h1 first, then h2."""
    return Homography.from_matrix(h2.matrix @ h1.matrix,
                                  frame_index=h2.frame_index)


def bilinear_sample(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample a plane at real coordinates.

    Returns (values, in_bounds).  A coordinate counts as in bounds when it
    lies within [0, w-1] x [0, h-1], i.e. fully interpolable.  Out-of-bounds
    samples are returned as 0 and flagged False.
    """
    h, w = plane.shape
    inside = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    xc = np.clip(xs, 0, w - 1)
    yc = np.clip(ys, 0, h - 1)
    x0 = np.floor(xc).astype(np.int64)
    y0 = np.floor(yc).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    p = plane.astype(np.float64)
    v = ((1 - fy) * ((1 - fx) * p[y0, x0] + fx * p[y0, x1])
         + fy * ((1 - fx) * p[y1, x0] + fx * p[y1, x1]))
    v = np.where(inside, v, 0.0)
    return v, inside


def inverse_map_grid(h: Homography, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Source coordinates for every destination pel under backward warping."""
    hi = invert(h)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    return warp_points(hi, xs, ys)


def warp_frame(src: Frame, h: Homography, out_width: int, out_height: int,
               fill: float | None = None) -> tuple[Frame, np.ndarray]:
    """Warp a frame forward by h via backward sampling.

    Returns the warped frame and a boolean coverage mask marking output pels
    whose inverse-mapped coordinates fall inside the source bounds.
    Uncovered pels get the fill value (default mid-gray).
    """
    if fill is None:
        fill = float(1 << (src.bitdepth - 1))
    sx, sy = inverse_map_grid(h, out_width, out_height)
    vals, coverage = bilinear_sample(src.y, sx, sy)
    out = np.where(coverage, vals, fill)
    out = np.clip(np.rint(out), 0, src.max_value).astype(src.y.dtype)
    return Frame(out, index=src.index, bitdepth=src.bitdepth, fps=src.fps), coverage


def warp_plane_float(plane: np.ndarray, h: Homography, out_width: int,
                     out_height: int) -> tuple[np.ndarray, np.ndarray]:
    """Float-valued warp used by the decoder-side mosaic (no rounding)."""
    sx, sy = inverse_map_grid(h, out_width, out_height)
    vals, coverage = bilinear_sample(plane, sx, sy)
    return vals, coverage


def require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
