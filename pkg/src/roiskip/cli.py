"""Command-line entry points: encode, decode, detect, analyze, synth."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, bitstream, video_io
from .codec import CodecConfig, Gop, SkipPolicy
from .errors import RoiSkipError
from .geometry import Frame
from .global_motion import GmeConfig
from .pipeline import (decode_sequence, detect_frame_roi, encode_sequence,
                       sequence_roi_psnrs)
from .roi_detect import MoConfig, first_frame_mask, mask_to_pgm_bytes
from .synthetic import generate_synthetic, parse_spec_file

SKIP_POLICIES = {"ns": SkipPolicy.NS, "subskip": SkipPolicy.SUBSKIP}
GOPS = {"ldp": Gop.LOW_DELAY_P, "ai": Gop.ALL_INTRA}


def _add_gme_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("global motion estimation")
    g.add_argument("--gme-max-features", type=int, default=500)
    g.add_argument("--gme-harris-k", type=float, default=0.04)
    g.add_argument("--gme-harris-quality", type=float, default=0.01)
    g.add_argument("--gme-min-distance", type=float, default=8.0)
    g.add_argument("--gme-window", type=int, default=21)
    g.add_argument("--gme-pyramid-levels", type=int, default=3)
    g.add_argument("--gme-max-iterations", type=int, default=30)
    g.add_argument("--gme-ransac-iterations", type=int, default=500)
    g.add_argument("--gme-inlier-threshold", type=float, default=1.5)
    g.add_argument("--gme-min-inliers", type=int, default=20)
    g.add_argument("--gme-seed", type=int, default=0)


def _add_mo_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("moving object detection")
    g.add_argument("--mo-threshold", type=float, default=25.0)
    g.add_argument("--mo-blur", type=int, default=2)
    g.add_argument("--mo-min-area", type=int, default=16)
    g.add_argument("--mo-dilate", type=int, default=8)


def _gme_config(args) -> GmeConfig:
    return GmeConfig(max_features=args.gme_max_features,
                     harris_k=args.gme_harris_k,
                     harris_quality=args.gme_harris_quality,
                     min_feature_distance=args.gme_min_distance,
                     klt_window=args.gme_window,
                     klt_pyramid_levels=args.gme_pyramid_levels,
                     klt_max_iterations=args.gme_max_iterations,
                     ransac_iterations=args.gme_ransac_iterations,
                     ransac_inlier_threshold=args.gme_inlier_threshold,
                     min_inliers=args.gme_min_inliers,
                     seed=args.gme_seed)


def _mo_config(args) -> MoConfig:
    return MoConfig(diff_threshold=args.mo_threshold,
                    blur_radius=args.mo_blur,
                    min_blob_area=args.mo_min_area,
                    dilate_radius=args.mo_dilate)


def _load_frames(args) -> list[Frame]:
    with open(args.input, "rb") as fh:
        if args.raw:
            if not (args.width and args.height):
                raise RoiSkipError("--raw needs --width and --height")
            num, den = (int(v) for v in args.fps.split(":"))
            frames = list(video_io.read_raw_yuv(fh, args.width, args.height,
                                                (num, den)))
        else:
            frames = list(video_io.parse_y4m(fh))
    if not frames:
        raise RoiSkipError("input contains no frames")
    return frames


def _dump_masks(masks, directory: str):
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, mask in enumerate(masks):
        (out / f"mask_{i:04d}.pgm").write_bytes(mask_to_pgm_bytes(mask))


def cmd_encode(args) -> int:
    frames = _load_frames(args)
    cfg = CodecConfig(ctu_size=args.ctu, max_partition_depth=args.depth,
                      qp=args.qp, skip_policy=SKIP_POLICIES[args.skip_policy],
                      gop=GOPS[args.gop], search_range=args.search_range)
    result = encode_sequence(frames, cfg, _gme_config(args),
                             _mo_config(args))
    with open(args.output, "wb") as fh:
        bitstream.write_stream(fh, result.header, result.coded)
    if args.dump_masks:
        _dump_masks([c.roi_mask for c in result.coded], args.dump_masks)
    if args.stats:
        recons = [Frame(c.recon[:c.height, :c.width].astype(np.uint8),
                        index=c.frame_index) for c in result.coded]
        psnrs = sequence_roi_psnrs(frames, recons,
                                   [c.roi_mask for c in result.coded])
        report = analysis.SequenceReport.build(
            result.header.fps, result.stats,
            [c.roi_mask for c in result.coded], psnrs)
        report.write_csv(args.stats)
    total = sum(len(c.payload) for c in result.coded)
    print(f"encoded {len(result.coded)} frames, {total} payload bytes")
    return 0


def cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        header, coded = bitstream.read_stream(fh)
    out = decode_sequence(header, coded)
    with open(args.output, "wb") as fh:
        video_io.write_y4m(fh, out.frames, header.width, header.height,
                           (header.fps_num, header.fps_den),
                           mono=not args.c420)
    if args.dump_masks:
        _dump_masks(out.masks, args.dump_masks)
    print(f"decoded {len(out.frames)} frames")
    return 0


def cmd_detect(args) -> int:
    frames = _load_frames(args)
    gme_cfg = _gme_config(args)
    mo_cfg = _mo_config(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    masks = [first_frame_mask(frames[0].width, frames[0].height)]
    log_lines = []
    for k in range(1, len(frames)):
        gme, mask = detect_frame_roi(frames[k - 1], frames[k], gme_cfg,
                                     mo_cfg)
        masks.append(mask)
        log_lines.append(gme.log_line())
    _dump_masks(masks, str(out))
    (out / "gme_log.txt").write_text("\n".join(log_lines) + "\n")
    print(f"detected ROI on {len(frames)} frames")
    return 0


def cmd_analyze(args) -> int:
    with open(args.input, "rb") as fh:
        header, coded = bitstream.read_stream(fh)
    out = decode_sequence(header, coded, collect_stats=True)
    psnrs = None
    if args.orig:
        with open(args.orig, "rb") as fh:
            originals = list(video_io.parse_y4m(fh))
        psnrs = sequence_roi_psnrs(originals[:len(out.frames)],
                                   out.recon_frames, out.masks)
    report = analysis.SequenceReport.build(header.fps, out.stats, out.masks,
                                           psnrs)
    report.write_csv(args.report)
    if args.heatmap:
        d = Path(args.heatmap)
        d.mkdir(parents=True, exist_ok=True)
        for st in out.stats:
            video_io.write_ppm(d / f"heatmap_{st.frame_index:04d}.ppm",
                               analysis.render_heatmap(st))
    if args.modemap:
        d = Path(args.modemap)
        d.mkdir(parents=True, exist_ok=True)
        for st in out.stats:
            video_io.write_ppm(
                d / f"modemap_{st.frame_index:04d}.ppm",
                analysis.render_mode_map(st, header.width, header.height))
    if args.figures:
        analysis.render_report_figures(report, args.figures)
    print(f"mean rate {report.mean_rate_kbps:.1f} kbit/s, "
          f"C={report.mean('C'):.3f} A={report.mean('A'):.3f} "
          f"R={report.mean('R'):.3f}")
    return 0


def cmd_synth(args) -> int:
    spec = parse_spec_file(args.spec)
    frames, truth = generate_synthetic(spec)
    with open(args.output, "wb") as fh:
        video_io.write_y4m(fh, frames, spec.width, spec.height, spec.fps)
    if args.truth:
        out = Path(args.truth)
        out.mkdir(parents=True, exist_ok=True)
        lines = [" ".join(f"{v:.10g}" for v in h.params)
                 for h in truth.homographies]
        (out / "homographies.txt").write_text("\n".join(lines) + "\n")
        for k, (na, sp) in enumerate(zip(truth.na_pels, truth.sprite_pels)):
            video_io.write_pgm(out / f"na_{k:04d}.pgm",
                               na.astype(np.uint8) * 255)
            video_io.write_pgm(out / f"sprite_{k:04d}.pgm",
                               sp.astype(np.uint8) * 255)
    print(f"generated {len(frames)} frames")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roiskip",
        description="ROI-based skip-mode video coding for aerial footage")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode video to a ROI-skip stream")
    enc.add_argument("--input", required=True)
    enc.add_argument("--output", required=True)
    enc.add_argument("--raw", action="store_true",
                     help="input is raw I420 instead of Y4M")
    enc.add_argument("--width", type=int)
    enc.add_argument("--height", type=int)
    enc.add_argument("--fps", default="30:1")
    enc.add_argument("--qp", type=int, default=25)
    enc.add_argument("--ctu", type=int, choices=(16, 32, 64), default=16)
    enc.add_argument("--depth", type=int, default=2)
    enc.add_argument("--skip-policy", choices=sorted(SKIP_POLICIES),
                     default="subskip")
    enc.add_argument("--gop", choices=sorted(GOPS), default="ldp")
    enc.add_argument("--search-range", type=int, default=8)
    enc.add_argument("--dump-masks", metavar="DIR")
    enc.add_argument("--stats", metavar="CSV")
    _add_gme_flags(enc)
    _add_mo_flags(enc)
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a stream to Y4M")
    dec.add_argument("--input", required=True)
    dec.add_argument("--output", required=True)
    dec.add_argument("--dump-masks", metavar="DIR")
    dec.add_argument("--c420", action="store_true",
                     help="write 4:2:0 with neutral chroma instead of mono")
    dec.set_defaults(func=cmd_decode)

    det = sub.add_parser("detect", help="run GME and ROI detection only")
    det.add_argument("--input", required=True)
    det.add_argument("--output-dir", required=True)
    det.add_argument("--raw", action="store_true")
    det.add_argument("--width", type=int)
    det.add_argument("--height", type=int)
    det.add_argument("--fps", default="30:1")
    _add_gme_flags(det)
    _add_mo_flags(det)
    det.set_defaults(func=cmd_detect)

    ana = sub.add_parser("analyze", help="bit-distribution report")
    ana.add_argument("--input", required=True)
    ana.add_argument("--report", required=True, metavar="CSV")
    ana.add_argument("--heatmap", metavar="DIR")
    ana.add_argument("--modemap", metavar="DIR")
    ana.add_argument("--figures", metavar="DIR")
    ana.add_argument("--orig", metavar="Y4M",
                     help="original video for ROI-PSNR columns")
    ana.set_defaults(func=cmd_analyze)

    syn = sub.add_parser("synth", help="generate a synthetic test sequence")
    syn.add_argument("--spec", required=True)
    syn.add_argument("--output", required=True)
    syn.add_argument("--truth", metavar="DIR")
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RoiSkipError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
