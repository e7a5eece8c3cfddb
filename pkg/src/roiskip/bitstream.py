"""Bitstream container (bit-exact file format).

Layout, all little-endian:

    magic "RSKP", version u8,
    header { width u16, height u16, fps_num u16, fps_den u16, bitdepth u8,
             ctu_size u8, max_depth u8, skip_policy u8, gop u8, qp u8 }
    per frame:
        frame_index u32,
        8 x f64 homography parameters,
        packed 2-bit ROI mask (raster, LSB-first within each byte),
        payload_length u32,
        range-coded payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

from .codec import CodecConfig, CodedFrame, Gop, SkipPolicy
from .errors import CorruptStream, MalformedHeader, TruncatedFrame
from .geometry import Homography
from .roi_detect import grid_shape, pack_mask, packed_mask_size, unpack_mask

MAGIC = b"RSKP"
VERSION = 1

_HEADER = struct.Struct("<HHHHBBBBBB")
_FRAME_HEAD = struct.Struct("<I8d")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    fps_num: int = 30
    fps_den: int = 1
    bitdepth: int = 8
    ctu_size: int = 16
    max_depth: int = 2
    skip_policy: SkipPolicy = SkipPolicy.SUBSKIP
    gop: Gop = Gop.LOW_DELAY_P
    qp: int = 25

    @property
    def fps(self) -> float:
        return self.fps_num / self.fps_den

    def codec_config(self, search_range: int = 8) -> CodecConfig:
        return CodecConfig(ctu_size=self.ctu_size,
                           max_partition_depth=self.max_depth, qp=self.qp,
                           skip_policy=self.skip_policy, gop=self.gop,
                           search_range=search_range)


def write_header(fh: BinaryIO, header: StreamHeader) -> None:
    fh.write(MAGIC)
    fh.write(bytes([VERSION]))
    fh.write(_HEADER.pack(header.width, header.height, header.fps_num,
                          header.fps_den, header.bitdepth, header.ctu_size,
                          header.max_depth, int(header.skip_policy),
                          int(header.gop), header.qp))


def write_frame(fh: BinaryIO, coded: CodedFrame) -> None:
    fh.write(_FRAME_HEAD.pack(coded.frame_index,
                              *coded.homography.params))
    fh.write(pack_mask(coded.roi_mask))
    fh.write(_U32.pack(len(coded.payload)))
    fh.write(coded.payload)


def write_stream(fh: BinaryIO, header: StreamHeader,
                 frames: Iterable[CodedFrame]) -> None:
    write_header(fh, header)
    for coded in frames:
        write_frame(fh, coded)


def read_header(fh: BinaryIO) -> StreamHeader:
    magic = fh.read(4)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    version = fh.read(1)
    if len(version) != 1 or version[0] != VERSION:
        raise MalformedHeader(f"unsupported version {version!r}")
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise MalformedHeader("truncated stream header")
    (width, height, fps_num, fps_den, bitdepth, ctu, depth, policy, gop,
     qp) = _HEADER.unpack(raw)
    try:
        return StreamHeader(width, height, fps_num, fps_den, bitdepth, ctu,
                            depth, SkipPolicy(policy), Gop(gop), qp)
    except ValueError as exc:
        raise MalformedHeader(str(exc)) from exc


def read_frames(fh: BinaryIO, header: StreamHeader,
                block_size: int = 16) -> Iterator[CodedFrame]:
    gh, gw = grid_shape(header.width, header.height, block_size)
    mask_bytes = packed_mask_size(gw, gh)
    count = 0
    while True:
        head = fh.read(_FRAME_HEAD.size)
        if not head:
            return
        if len(head) != _FRAME_HEAD.size:
            raise TruncatedFrame(count)
        vals = _FRAME_HEAD.unpack(head)
        frame_index = vals[0]
        h = Homography(*vals[1:9], frame_index=frame_index)
        packed = fh.read(mask_bytes)
        if len(packed) != mask_bytes:
            raise TruncatedFrame(count)
        mask = unpack_mask(packed, gw, gh, block_size, frame_index)
        lenraw = fh.read(_U32.size)
        if len(lenraw) != _U32.size:
            raise TruncatedFrame(count)
        (plen,) = _U32.unpack(lenraw)
        payload = fh.read(plen)
        if len(payload) != plen:
            raise TruncatedFrame(count)
        yield CodedFrame(frame_index=frame_index, width=header.width,
                         height=header.height, homography=h, roi_mask=mask,
                         payload=payload, ctu_stats=[])
        count += 1


def read_stream(fh: BinaryIO) -> tuple[StreamHeader, list[CodedFrame]]:
    header = read_header(fh)
    try:
        frames = list(read_frames(fh, header))
    except TruncatedFrame:
        raise
    except struct.error as exc:
        raise CorruptStream(str(exc)) from exc
    return header, frames
