"""Video container I/O: Y4M (canonical), raw planar YUV, PGM/PPM images."""

from __future__ import annotations

from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np

from .errors import MalformedHeader, TruncatedFrame
from .geometry import Frame

Y4M_SIGNATURE = b"YUV4MPEG2"

_C420_ALIASES = {"420", "420jpeg", "420mpeg2", "420paldv"}


def parse_y4m(fh: BinaryIO) -> Iterator[Frame]:
    """Yield frames from a Y4M stream (C420 variants and Cmono supported)."""
    header = fh.readline()
    if not header.startswith(Y4M_SIGNATURE):
        raise MalformedHeader("missing YUV4MPEG2 signature")
    width = height = 0
    fps = (30, 1)
    colorspace = "420"
    for token in header.decode("ascii", "replace").split()[1:]:
        tag, val = token[0], token[1:]
        if tag == "W":
            width = int(val)
        elif tag == "H":
            height = int(val)
        elif tag == "F":
            num, den = val.split(":")
            fps = (int(num), int(den))
        elif tag == "C":
            colorspace = val
        # I, A and X tokens are accepted and ignored
    if width <= 0 or height <= 0:
        raise MalformedHeader("Y4M header missing W or H")
    if colorspace in _C420_ALIASES:
        mono = False
        if width % 2 or height % 2:
            raise MalformedHeader("odd dimensions with 4:2:0 chroma")
    elif colorspace == "mono":
        mono = True
    else:
        raise MalformedHeader(f"unsupported colorspace C{colorspace}")

    ysize = width * height
    csize = 0 if mono else (width // 2) * (height // 2)
    index = 0
    while True:
        line = fh.readline()
        if not line:
            return
        if not line.startswith(b"FRAME"):
            raise TruncatedFrame(index, "missing FRAME marker")
        data = fh.read(ysize + 2 * csize)
        if len(data) != ysize + 2 * csize:
            raise TruncatedFrame(index)
        y = np.frombuffer(data[:ysize], dtype=np.uint8).reshape(height, width)
        u = v = None
        if not mono:
            u = np.frombuffer(data[ysize:ysize + csize],
                              dtype=np.uint8).reshape(height // 2, width // 2)
            v = np.frombuffer(data[ysize + csize:],
                              dtype=np.uint8).reshape(height // 2, width // 2)
        yield Frame(y.copy(), index=index, u=None if u is None else u.copy(),
                    v=None if v is None else v.copy(), fps=fps)
        index += 1


def write_y4m(fh: BinaryIO, frames, width: int, height: int,
              fps: tuple[int, int] = (30, 1), mono: bool = True) -> int:
    """Write frames as Y4M; returns the frame count.

    With mono=False, missing chroma planes are filled with neutral gray.
    """
    cs = b"mono" if mono else b"420"
    fh.write(b"YUV4MPEG2 W%d H%d F%d:%d Ip A1:1 C%s\n"
             % (width, height, fps[0], fps[1], cs))
    count = 0
    for frame in frames:
        fh.write(b"FRAME\n")
        fh.write(frame.y.astype(np.uint8).tobytes())
        if not mono:
            for plane in (frame.u, frame.v):
                if plane is None:
                    plane = np.full((height // 2, width // 2), 128,
                                    dtype=np.uint8)
                fh.write(plane.astype(np.uint8).tobytes())
        count += 1
    return count


def read_raw_yuv(fh: BinaryIO, width: int, height: int,
                 fps: tuple[int, int] = (30, 1),
                 chroma: bool = True) -> Iterator[Frame]:
    """Raw planar 8-bit frames (I420 when chroma, else luma only)."""
    ysize = width * height
    csize = (width // 2) * (height // 2) if chroma else 0
    index = 0
    while True:
        data = fh.read(ysize + 2 * csize)
        if not data:
            return
        if len(data) != ysize + 2 * csize:
            raise TruncatedFrame(index)
        y = np.frombuffer(data[:ysize], dtype=np.uint8).reshape(height, width)
        yield Frame(y.copy(), index=index, fps=fps)
        index += 1


def write_pgm(path: str | Path, plane: np.ndarray) -> None:
    h, w = plane.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(plane.astype(np.uint8).tobytes())


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.astype(np.uint8).tobytes())
