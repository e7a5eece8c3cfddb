"""Block codec with externally forced skip mode.

Non-ROI CTUs are forced to skip (co-located zero-motion copy, merge index
pinned to 0) regardless of rate-distortion cost.  ROI CTUs run a normal
mode decision over intra {DC, planar, horizontal, vertical}, integer-pel
inter prediction and quadtree splitting -- with skip candidates disabled so
no ROI block ever inherits non-ROI prediction data.  Under the SUBSKIP
policy, quadtree children of a ROI CTU that contain no ROI are themselves
forced to skip; under NS the whole CTU is coded.

The encoder embeds the decode path, so its reconstruction is bit-exact with
the decoder's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import CorruptStream, GridMismatch, MissingReference
from .geometry import Frame, Homography
from .rangecoder import RangeDecoder, RangeEncoder, new_context
from .roi_detect import RoiMask
from .transform import (QuantParams, reconstruct_residual, transform_quantize,
                        zigzag_order)

MAX_TB_SIZE = 32
MIN_CU_SIZE = 4


class SkipPolicy(IntEnum):
    NS = 0
    SUBSKIP = 1


class Gop(IntEnum):
    LOW_DELAY_P = 0
    ALL_INTRA = 1


class Mode(IntEnum):
    SKIP = 0
    INTRA = 1
    INTER = 2


class IntraDir(IntEnum):
    DC = 0
    PLANAR = 1
    H = 2
    V = 3


@dataclass(frozen=True)
class CodecConfig:
    ctu_size: int = 16
    max_partition_depth: int = 2
    qp: int = 25
    skip_policy: SkipPolicy = SkipPolicy.SUBSKIP
    gop: Gop = Gop.LOW_DELAY_P
    search_range: int = 8

    def __post_init__(self):
        if self.ctu_size not in (16, 32, 64):
            raise ValueError("ctu_size must be 16, 32 or 64")
        if self.ctu_size >> self.max_partition_depth < MIN_CU_SIZE:
            raise ValueError("partition depth yields CUs below 4x4")
        if not 0 <= self.qp <= 51:
            raise ValueError("qp out of range 0..51")
        if self.search_range < 0:
            raise ValueError("search_range must be >= 0")

    @property
    def min_cu_size(self) -> int:
        return self.ctu_size >> self.max_partition_depth

    @property
    def lagrangian(self) -> float:
        return 0.85 * QuantParams(self.qp).qstep ** 2


@dataclass
class CtuStat:
    x: int
    y: int
    bits: int
    is_roi: bool
    leaves: list[tuple[int, int, int, Mode]] = field(default_factory=list)


@dataclass
class CodedFrame:
    frame_index: int
    width: int
    height: int
    homography: Homography
    roi_mask: RoiMask
    payload: bytes
    ctu_stats: list[CtuStat]
    recon: np.ndarray | None = None  # padded, encoder side only

    @property
    def payload_bits(self) -> int:
        return 8 * len(self.payload)


class _Contexts:
    """One probability state per syntax element (split per depth / region)."""

    def __init__(self):
        self.ctu_skip = new_context()
        self.sub_skip = new_context()
        self.merge_idx = new_context()
        self.split = [new_context() for _ in range(4)]
        self.pred_mode = new_context()
        self.intra_dir = [new_context(), new_context()]
        self.mvx = new_context()
        self.mvy = new_context()
        self.cbf = new_context()
        self.last = new_context()
        self.sig = [new_context() for _ in range(4)]
        self.level = new_context()


def _sig_region(i: int) -> int:
    if i < 1:
        return 0
    if i < 4:
        return 1
    if i < 16:
        return 2
    return 3


def pad_to_multiple(plane: np.ndarray, size: int) -> np.ndarray:
    h, w = plane.shape
    ph = (-h) % size
    pw = (-w) % size
    if ph == 0 and pw == 0:
        return plane.astype(np.int64)
    return np.pad(plane.astype(np.int64), ((0, ph), (0, pw)), mode="edge")


def _roi_pel_map(mask: RoiMask, pw: int, ph: int) -> np.ndarray:
    """ROI flag per padded pel; pels beyond the mask grid count as non-ROI."""
    per_pel = np.repeat(np.repeat(mask.roi_cells, mask.block_size, axis=0),
                        mask.block_size, axis=1)
    out = np.zeros((ph, pw), dtype=bool)
    h = min(ph, per_pel.shape[0])
    w = min(pw, per_pel.shape[1])
    out[:h, :w] = per_pel[:h, :w]
    return out


def _ssd(a: np.ndarray, b: np.ndarray) -> float:
    d = a.astype(np.float64) - b.astype(np.float64)
    return float(np.sum(d * d))


# ---------------------------------------------------------------------------
# prediction

def _intra_predict(recon: np.ndarray, x: int, y: int, size: int,
                   direction: IntraDir, mid: int) -> np.ndarray:
    top = recon[y - 1, x:x + size] if y > 0 else None
    left = recon[y:y + size, x - 1] if x > 0 else None

    if top is None and left is None:
        dc = mid
    elif top is None:
        dc = int(np.rint(left.mean()))
    elif left is None:
        dc = int(np.rint(top.mean()))
    else:
        dc = int(np.rint((top.sum() + left.sum()) / (2 * size)))

    if direction == IntraDir.DC or (top is None and left is None):
        return np.full((size, size), dc, dtype=np.int64)
    if direction == IntraDir.H:
        col = left if left is not None else np.full(size, dc, dtype=np.int64)
        return np.tile(col[:, None], (1, size))
    if direction == IntraDir.V:
        row = top if top is not None else np.full(size, dc, dtype=np.int64)
        return np.tile(row[None, :], (size, 1))
    # planar: average of the two linear interpolations toward the
    # replicated top-right / bottom-left samples
    trow = top if top is not None else np.full(size, dc, dtype=np.int64)
    lcol = left if left is not None else np.full(size, dc, dtype=np.int64)
    tr = trow[-1]
    bl = lcol[-1]
    j = np.arange(size)
    horiz = (lcol[:, None] * (size - 1 - j)[None, :] + tr * (j + 1)[None, :])
    vert = (trow[None, :] * (size - 1 - j)[:, None] + bl * (j + 1)[:, None])
    return np.rint((horiz + vert) / (2.0 * size)).astype(np.int64)


def motion_search(curr_block: np.ndarray, ref: np.ndarray, center_x: int,
                  center_y: int, search_range: int) -> tuple[tuple[int, int], float]:
    """Full-search integer-pel minimum-SSD displacement within +-range.

    Ties break toward smaller |mv| (squared norm), then raster order of
    (dy, dx).  Candidates are restricted to patches fully inside the plane.
    """
    size = curr_block.shape[0]
    h, w = ref.shape
    x0 = max(center_x - search_range, 0)
    y0 = max(center_y - search_range, 0)
    x1 = min(center_x + search_range, w - size)
    y1 = min(center_y + search_range, h - size)
    if x1 < x0 or y1 < y0:
        return (0, 0), _ssd(curr_block, ref[center_y:center_y + size,
                                            center_x:center_x + size])
    region = ref[y0:y1 + size, x0:x1 + size]
    windows = np.lib.stride_tricks.sliding_window_view(region, (size, size))
    diff = windows.astype(np.float64) - curr_block.astype(np.float64)
    ssd = np.einsum("ijkl,ijkl->ij", diff, diff)
    dys, dxs = np.mgrid[y0 - center_y:y1 - center_y + 1,
                        x0 - center_x:x1 - center_x + 1]
    norm = dys * dys + dxs * dxs
    flat = np.lexsort((dxs.ravel(), dys.ravel(), norm.ravel(), ssd.ravel()))
    best = flat[0]
    return ((int(dxs.ravel()[best]), int(dys.ravel()[best])),
            float(ssd.ravel()[best]))


# ---------------------------------------------------------------------------
# bit-length estimates for the mode decision (deterministic, context-free)

def _eg0_len(v: int) -> int:
    return 2 * (v + 1).bit_length() - 1


def _ue_len(v: int, cap: int = 8) -> int:
    return v + 1 if v < cap else cap + _eg0_len(v - cap)


def _se_len(v: int) -> int:
    mapped = 2 * v - 1 if v > 0 else -2 * v
    return _ue_len(mapped)


def _coeff_bits_est(zz: np.ndarray) -> float:
    nz = np.nonzero(zz)[0]
    if len(nz) == 0:
        return 1.0
    last = int(nz[-1])
    mags = np.abs(zz[nz]).astype(np.float64)
    level_bits = float(np.sum(2 * np.floor(np.log2(mags + 1)) + 1)) + len(nz)
    return 1.0 + _ue_len(last) + 0.8 * (last + 1 - len(nz)) + level_bits


# ---------------------------------------------------------------------------
# leaf records: ("skip",) | ("leaf", mode, dir, mv, [tb levels]) |
#               ("split", [children])

def _tb_grid(size: int) -> list[tuple[int, int, int]]:
    n = min(size, MAX_TB_SIZE)
    return [(tx, ty, n) for ty in range(0, size, n) for tx in range(0, size, n)]


class _FrameCoder:
    """Shared state for encoding one frame."""

    def __init__(self, curr: np.ndarray, ref: np.ndarray | None,
                 roi_pels: np.ndarray, cfg: CodecConfig, inter: bool,
                 bitdepth: int):
        self.curr = curr
        self.ref = ref
        self.roi = roi_pels
        self.roi_ii = np.pad(np.cumsum(np.cumsum(
            roi_pels.astype(np.int64), axis=0), axis=1), ((1, 0), (1, 0)))
        self.cfg = cfg
        self.inter = inter
        self.q = QuantParams(cfg.qp)
        self.lam = cfg.lagrangian
        self.mid = 1 << (bitdepth - 1)
        self.maxval = (1 << bitdepth) - 1
        self.recon = np.empty_like(curr)

    def roi_any(self, x: int, y: int, size: int) -> bool:
        ii = self.roi_ii
        s = (ii[y + size, x + size] - ii[y, x + size]
             - ii[y + size, x] + ii[y, x])
        return s > 0

    def roi_all(self, x: int, y: int, size: int) -> bool:
        ii = self.roi_ii
        s = (ii[y + size, x + size] - ii[y, x + size]
             - ii[y + size, x] + ii[y, x])
        return s == size * size

    # -- mode decision ------------------------------------------------------

    def _code_leaf_candidates(self, x: int, y: int, size: int):
        src = self.curr[y:y + size, x:x + size]
        best = None
        dirs = (IntraDir.DC, IntraDir.PLANAR, IntraDir.H, IntraDir.V)
        candidates = [(Mode.INTRA, d, (0, 0)) for d in dirs]
        if self.inter and self.cfg.gop == Gop.LOW_DELAY_P:
            mv, _ = motion_search(src, self.ref, x, y, self.cfg.search_range)
            candidates.append((Mode.INTER, IntraDir.DC, mv))

        for mode, direction, mv in candidates:
            if mode == Mode.INTRA:
                pred = _intra_predict(self.recon, x, y, size, direction,
                                      self.mid)
                head_bits = (1 if self.inter
                             and self.cfg.gop == Gop.LOW_DELAY_P else 0) + 2
            else:
                pred = self.ref[y + mv[1]:y + mv[1] + size,
                                x + mv[0]:x + mv[0] + size]
                head_bits = 1 + _se_len(mv[0]) + _se_len(mv[1])
            residual = src - pred
            tbs = []
            bits = float(head_bits)
            recon_block = np.empty((size, size), dtype=np.int64)
            for tx, ty, n in _tb_grid(size):
                levels = transform_quantize(residual[ty:ty + n, tx:tx + n],
                                            self.q)
                zz = levels.ravel()[zigzag_order(n)]
                if np.any(zz):
                    tbs.append(levels)
                    bits += _coeff_bits_est(zz)
                    res = reconstruct_residual(levels, self.q)
                else:
                    tbs.append(None)
                    bits += 1.0
                    res = 0
                block = pred[ty:ty + n, tx:tx + n] + res
                recon_block[ty:ty + n, tx:tx + n] = block
            np.clip(recon_block, 0, self.maxval, out=recon_block)
            j = _ssd(recon_block, src) + self.lam * bits
            if best is None or j < best[0]:
                best = (j, ("leaf", mode, direction, mv, tbs), recon_block)
        return best

    def encode_node(self, x: int, y: int, size: int, depth: int):
        """Returns (J, record); leaves the chosen reconstruction in place."""
        cfg = self.cfg
        if (self.inter and not self.roi_any(x, y, size)
                and (depth == 0 or cfg.skip_policy == SkipPolicy.SUBSKIP)):
            block = self.ref[y:y + size, x:x + size]
            self.recon[y:y + size, x:x + size] = block
            src = self.curr[y:y + size, x:x + size]
            return _ssd(block, src) + self.lam * 2.0, ("skip",)

        can_split = (size > cfg.min_cu_size
                     and depth < cfg.max_partition_depth)
        # a mixed ROI/non-ROI node is always worth splitting so its non-ROI
        # children can be skipped
        must_split = (can_split and self.inter
                      and cfg.skip_policy == SkipPolicy.SUBSKIP
                      and not self.roi_all(x, y, size))

        leaf = None
        if not must_split:
            leaf = self._code_leaf_candidates(x, y, size)

        if not can_split:
            j, record, recon_block = leaf
            self.recon[y:y + size, x:x + size] = recon_block
            return j, record

        half = size // 2
        j_split = self.lam * 1.0  # split flag
        children = []
        for dy in (0, half):
            for dx in (0, half):
                cj, crec = self.encode_node(x + dx, y + dy, half, depth + 1)
                j_split += cj
                children.append(crec)
        if leaf is not None and leaf[0] + self.lam * 1.0 <= j_split:
            j, record, recon_block = leaf
            self.recon[y:y + size, x:x + size] = recon_block
            return j + self.lam * 1.0, record
        return j_split, ("split", children)


# ---------------------------------------------------------------------------
# syntax writer / reader

def _write_coeffs(enc: RangeEncoder, ctx: _Contexts, levels: np.ndarray):
    n = levels.shape[0]
    zz = levels.ravel()[zigzag_order(n)]
    nz = np.nonzero(zz)[0]
    last = int(nz[-1])
    enc.encode_ue(ctx.last, last)
    for i in range(last + 1):
        v = int(zz[i])
        if i < last:
            enc.encode_bit(ctx.sig[_sig_region(i)], 1 if v else 0)
            if not v:
                continue
        mag = abs(v) - 1
        rem = enc.encode_unary(ctx.level, mag, 2)
        if mag >= 2:
            enc.encode_eg0_bypass(rem)
        enc.encode_bit_bypass(1 if v < 0 else 0)


def _read_coeffs(dec: RangeDecoder, ctx: _Contexts, n: int) -> np.ndarray:
    zz = np.zeros(n * n, dtype=np.int64)
    last = dec.decode_ue(ctx.last)
    for i in range(last + 1):
        if i < last:
            if not dec.decode_bit(ctx.sig[_sig_region(i)]):
                continue
        mag = dec.decode_unary(ctx.level, 2)
        if mag == 2:
            mag += dec.decode_eg0_bypass()
        sign = dec.decode_bit_bypass()
        zz[i] = -(mag + 1) if sign else mag + 1
    levels = np.zeros(n * n, dtype=np.int64)
    levels[zigzag_order(n)] = zz
    return levels.reshape(n, n)


def _write_leaf(enc: RangeEncoder, ctx: _Contexts, record, size: int,
                inter: bool, gop: Gop):
    _, mode, direction, mv, tbs = record
    if inter and gop == Gop.LOW_DELAY_P:
        enc.encode_bit(ctx.pred_mode, 1 if mode == Mode.INTER else 0)
    if mode == Mode.INTRA:
        d = int(direction)
        enc.encode_bit(ctx.intra_dir[0], (d >> 1) & 1)
        enc.encode_bit(ctx.intra_dir[1], d & 1)
    else:
        enc.encode_se(ctx.mvx, mv[0])
        enc.encode_se(ctx.mvy, mv[1])
    for levels in tbs:
        enc.encode_bit(ctx.cbf, 0 if levels is None else 1)
        if levels is not None:
            _write_coeffs(enc, ctx, levels)


def _write_node(enc: RangeEncoder, ctx: _Contexts, record, x: int, y: int,
                size: int, depth: int, cfg: CodecConfig, inter: bool):
    if inter and cfg.skip_policy == SkipPolicy.SUBSKIP and depth > 0:
        is_skip = record[0] == "skip"
        enc.encode_bit(ctx.sub_skip, 1 if is_skip else 0)
        if is_skip:
            enc.encode_bit(ctx.merge_idx, 0)
            return
    can_split = size > cfg.min_cu_size and depth < cfg.max_partition_depth
    if can_split:
        is_split = record[0] == "split"
        enc.encode_bit(ctx.split[depth], 1 if is_split else 0)
        if is_split:
            half = size // 2
            for i, (dy, dx) in enumerate(((0, 0), (0, half), (half, 0),
                                          (half, half))):
                _write_node(enc, ctx, record[1][i], x + dx, y + dy, half,
                            depth + 1, cfg, inter)
            return
    _write_leaf(enc, ctx, record, size, inter, cfg.gop)


def _leaf_list(record, x: int, y: int, size: int, out: list):
    kind = record[0]
    if kind == "split":
        half = size // 2
        for i, (dy, dx) in enumerate(((0, 0), (0, half), (half, 0),
                                      (half, half))):
            _leaf_list(record[1][i], x + dx, y + dy, half, out)
    elif kind == "skip":
        out.append((x, y, size, Mode.SKIP))
    else:
        out.append((x, y, size, record[1]))


# ---------------------------------------------------------------------------
# public entry points

def _check_mask(mask: RoiMask, width: int, height: int):
    gh = -(-height // mask.block_size)
    gw = -(-width // mask.block_size)
    if mask.cells.shape != (gh, gw):
        raise GridMismatch(
            f"mask grid {mask.cells.shape} vs expected {(gh, gw)}")


def encode_frame(curr: Frame, ref: np.ndarray | None, mask: RoiMask,
                 h: Homography, cfg: CodecConfig) -> CodedFrame:
    """Encode one frame.

    `ref` is the padded reconstruction of the previous frame (None only for
    the bootstrap frame).  Returns the coded frame with the padded
    reconstruction attached for use as the next reference.
    """
    _check_mask(mask, curr.width, curr.height)
    if ref is None and curr.index > 0:
        raise MissingReference(f"frame {curr.index} encoded without reference")
    curr_pad = pad_to_multiple(curr.y, cfg.ctu_size)
    ph, pw = curr_pad.shape
    if ref is not None and ref.shape != curr_pad.shape:
        raise GridMismatch("reference reconstruction has wrong padded shape")
    inter = ref is not None
    roi_pels = _roi_pel_map(mask, pw, ph)

    coder = _FrameCoder(curr_pad, ref, roi_pels, cfg, inter, curr.bitdepth)
    enc = RangeEncoder()
    ctx = _Contexts()
    stats: list[CtuStat] = []
    for y in range(0, ph, cfg.ctu_size):
        for x in range(0, pw, cfg.ctu_size):
            b0 = enc.bytes_done
            ctu_roi = coder.roi_any(x, y, cfg.ctu_size)
            if inter:
                if not ctu_roi:
                    _, record = coder.encode_node(x, y, cfg.ctu_size, 0)
                    enc.encode_bit(ctx.ctu_skip, 1)
                    enc.encode_bit(ctx.merge_idx, 0)
                else:
                    _, record = coder.encode_node(x, y, cfg.ctu_size, 0)
                    enc.encode_bit(ctx.ctu_skip, 0)
                    _write_node(enc, ctx, record, x, y, cfg.ctu_size, 0,
                                cfg, inter)
            else:
                _, record = coder.encode_node(x, y, cfg.ctu_size, 0)
                _write_node(enc, ctx, record, x, y, cfg.ctu_size, 0,
                            cfg, inter)
            leaves: list = []
            _leaf_list(record, x, y, cfg.ctu_size, leaves)
            stats.append(CtuStat(x=x, y=y, bits=8 * (enc.bytes_done - b0),
                                 is_roi=bool(ctu_roi), leaves=leaves))
    payload = enc.flush()
    return CodedFrame(frame_index=curr.index, width=curr.width,
                      height=curr.height, homography=h, roi_mask=mask,
                      payload=payload, ctu_stats=stats, recon=coder.recon)


def decode_frame(coded: CodedFrame, ref: np.ndarray | None, cfg: CodecConfig,
                 bitdepth: int = 8,
                 collect_stats: bool = False) -> tuple[np.ndarray, list[CtuStat] | None]:
    """Decode one frame to its padded reconstruction plane.

    With `collect_stats`, per-CTU bit counts and leaf modes are re-derived
    from the payload alone (bit-accounting re-parse).
    """
    if ref is None and coded.frame_index > 0:
        raise MissingReference(
            f"frame {coded.frame_index} decoded without reference")
    ctu = cfg.ctu_size
    pw = -(-coded.width // ctu) * ctu
    ph = -(-coded.height // ctu) * ctu
    inter = ref is not None
    roi_pels = _roi_pel_map(coded.roi_mask, pw, ph)
    roi_ii = np.pad(np.cumsum(np.cumsum(roi_pels.astype(np.int64), axis=0),
                              axis=1), ((1, 0), (1, 0)))

    def roi_any(x, y, size):
        return (roi_ii[y + size, x + size] - roi_ii[y, x + size]
                - roi_ii[y + size, x] + roi_ii[y, x]) > 0

    recon = np.empty((ph, pw), dtype=np.int64)
    dec = RangeDecoder(coded.payload)
    ctx = _Contexts()
    q = QuantParams(cfg.qp)
    mid = 1 << (bitdepth - 1)
    maxval = (1 << bitdepth) - 1
    stats: list[CtuStat] = []

    def read_leaf(x, y, size) -> Mode:
        mode = Mode.INTRA
        if inter and cfg.gop == Gop.LOW_DELAY_P:
            if dec.decode_bit(ctx.pred_mode):
                mode = Mode.INTER
        if mode == Mode.INTRA:
            d = (dec.decode_bit(ctx.intra_dir[0]) << 1) \
                | dec.decode_bit(ctx.intra_dir[1])
            pred = _intra_predict(recon, x, y, size, IntraDir(d), mid)
        else:
            mvx = dec.decode_se(ctx.mvx)
            mvy = dec.decode_se(ctx.mvy)
            if (y + mvy < 0 or x + mvx < 0 or y + mvy + size > ph
                    or x + mvx + size > pw):
                raise CorruptStream("motion vector outside reference")
            pred = ref[y + mvy:y + mvy + size, x + mvx:x + mvx + size]
        block = np.empty((size, size), dtype=np.int64)
        for tx, ty, n in _tb_grid(size):
            if dec.decode_bit(ctx.cbf):
                levels = _read_coeffs(dec, ctx, n)
                res = reconstruct_residual(levels, q)
            else:
                res = 0
            block[ty:ty + n, tx:tx + n] = pred[ty:ty + n, tx:tx + n] + res
        np.clip(block, 0, maxval, out=block)
        recon[y:y + size, x:x + size] = block
        return mode

    def read_node(x, y, size, depth, leaves):
        if inter and cfg.skip_policy == SkipPolicy.SUBSKIP and depth > 0:
            if dec.decode_bit(ctx.sub_skip):
                dec.decode_bit(ctx.merge_idx)
                recon[y:y + size, x:x + size] = ref[y:y + size, x:x + size]
                leaves.append((x, y, size, Mode.SKIP))
                return
        can_split = size > cfg.min_cu_size and depth < cfg.max_partition_depth
        if can_split and dec.decode_bit(ctx.split[depth]):
            half = size // 2
            for dy, dx in ((0, 0), (0, half), (half, 0), (half, half)):
                read_node(x + dx, y + dy, half, depth + 1, leaves)
            return
        leaves.append((x, y, size, read_leaf(x, y, size)))

    for y in range(0, ph, ctu):
        for x in range(0, pw, ctu):
            b0 = dec.bytes_done
            leaves: list = []
            is_roi = bool(roi_any(x, y, ctu))
            if inter and dec_skip_flag(dec, ctx):
                dec.decode_bit(ctx.merge_idx)
                recon[y:y + ctu, x:x + ctu] = ref[y:y + ctu, x:x + ctu]
                leaves.append((x, y, ctu, Mode.SKIP))
            else:
                read_node(x, y, ctu, 0, leaves)
            if collect_stats:
                stats.append(CtuStat(x=x, y=y,
                                     bits=8 * (dec.bytes_done - b0),
                                     is_roi=is_roi, leaves=leaves))
    return recon, (stats if collect_stats else None)


def dec_skip_flag(dec: RangeDecoder, ctx: _Contexts) -> int:
    return dec.decode_bit(ctx.ctu_skip)


def crop_recon(recon: np.ndarray, width: int, height: int,
               index: int = 0, bitdepth: int = 8) -> Frame:
    return Frame(recon[:height, :width].astype(
        np.uint8 if bitdepth <= 8 else np.uint16), index=index,
        bitdepth=bitdepth)
