"""End-to-end encode and decode pipelines tying the modules together.

Encoder side per frame: global motion estimation against the previous
original frame, ROI-NA from the homography, ROI-MO from the compensated
difference image, then skip-controlled encoding against the previous
reconstruction.  Decoder side: frame decoding plus mosaic postprocessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import FrameStats, frame_stats_from_ctus
from .bitstream import StreamHeader
from .codec import CodecConfig, CodedFrame, decode_frame, encode_frame
from .geometry import Frame, Homography, warp_frame
from .global_motion import GmeConfig, GmeResult, estimate_global_motion
from .postproc import Mosaic, render_output, roi_psnr, update_mosaic
from .roi_detect import (DEFAULT_BLOCK_SIZE, MoConfig, RoiMask,
                         detect_moving_objects, detect_new_area,
                         first_frame_mask, merge_masks)


@dataclass
class EncodedSequence:
    header: StreamHeader
    coded: list[CodedFrame] = field(default_factory=list)
    gme: list[GmeResult | None] = field(default_factory=list)
    stats: list[FrameStats] = field(default_factory=list)
    roi_psnrs: list[float] = field(default_factory=list)


def detect_frame_roi(prev: Frame, curr: Frame, gme_cfg: GmeConfig,
                     mo_cfg: MoConfig,
                     block_size: int = DEFAULT_BLOCK_SIZE
                     ) -> tuple[GmeResult, RoiMask]:
    """GME + both ROI detectors for one frame pair."""
    gme = estimate_global_motion(prev, curr, gme_cfg)
    h = gme.homography
    na = detect_new_area(h, curr.width, curr.height, block_size,
                         frame_index=curr.index)
    gmc_prev, coverage = warp_frame(prev, h, curr.width, curr.height)
    mo = detect_moving_objects(curr, gmc_prev, coverage, mo_cfg, block_size)
    return gme, merge_masks(na, mo)


def encode_sequence(frames: list[Frame], cfg: CodecConfig,
                    gme_cfg: GmeConfig | None = None,
                    mo_cfg: MoConfig | None = None,
                    fps: tuple[int, int] | None = None,
                    block_size: int = DEFAULT_BLOCK_SIZE,
                    masks: list[RoiMask] | None = None) -> EncodedSequence:
    """Encode a sequence; `masks` overrides the detectors when given."""
    if not frames:
        raise ValueError("no frames to encode")
    gme_cfg = gme_cfg or GmeConfig()
    mo_cfg = mo_cfg or MoConfig()
    if fps is None:
        fps = frames[0].fps
    header = StreamHeader(width=frames[0].width, height=frames[0].height,
                          fps_num=fps[0], fps_den=fps[1],
                          bitdepth=frames[0].bitdepth, ctu_size=cfg.ctu_size,
                          max_depth=cfg.max_partition_depth,
                          skip_policy=cfg.skip_policy, gop=cfg.gop,
                          qp=cfg.qp)
    result = EncodedSequence(header=header)
    ref = None
    prev = None
    for k, frame in enumerate(frames):
        if k == 0:
            h = Homography.identity(0)
            mask = (masks[0] if masks is not None
                    else first_frame_mask(frame.width, frame.height,
                                          block_size))
            gme = None
        else:
            if masks is not None:
                gme = estimate_global_motion(prev, frame, gme_cfg)
                h = gme.homography
                mask = masks[k]
            else:
                gme, mask = detect_frame_roi(prev, frame, gme_cfg, mo_cfg,
                                             block_size)
                h = gme.homography
        coded = encode_frame(frame, ref, mask, h, cfg)
        stats = frame_stats_from_ctus(k, cfg.ctu_size, frame.width,
                                      frame.height, coded.ctu_stats,
                                      coded.payload_bits)
        result.coded.append(coded)
        result.gme.append(gme)
        result.stats.append(stats)
        ref = coded.recon
        prev = frame
    return result


@dataclass
class DecodedSequence:
    frames: list[Frame] = field(default_factory=list)       # rendered output
    recon_frames: list[Frame] = field(default_factory=list)  # codec recon
    masks: list[RoiMask] = field(default_factory=list)
    stats: list[FrameStats] = field(default_factory=list)


def decode_sequence(header: StreamHeader, coded_frames: list[CodedFrame],
                    collect_stats: bool = False,
                    search_range: int = 8) -> DecodedSequence:
    cfg = header.codec_config(search_range)
    out = DecodedSequence()
    ref = None
    mosaic = Mosaic.empty(header.width, header.height,
                          fill=float(1 << (header.bitdepth - 1)))
    for coded in coded_frames:
        recon, stats = decode_frame(coded, ref, cfg, header.bitdepth,
                                    collect_stats=collect_stats)
        decoded = Frame(
            recon[:header.height, :header.width].astype(np.uint8),
            index=coded.frame_index, bitdepth=header.bitdepth,
            fps=(header.fps_num, header.fps_den))
        mosaic = update_mosaic(mosaic, decoded, coded.roi_mask,
                               coded.homography)
        out.frames.append(render_output(mosaic, decoded, coded.roi_mask))
        out.recon_frames.append(decoded)
        out.masks.append(coded.roi_mask)
        if collect_stats:
            out.stats.append(frame_stats_from_ctus(
                coded.frame_index, cfg.ctu_size, header.width, header.height,
                stats, coded.payload_bits))
        ref = recon
    return out


def sequence_roi_psnrs(originals: list[Frame], recons: list[Frame],
                       masks: list[RoiMask]) -> list[float]:
    return [roi_psnr(o, r, m)
            for o, r, m in zip(originals, recons, masks)]
