"""ROI-based skip-mode video coding toolkit for moving-camera footage.

Global motion estimation, new-area / moving-object ROI detection on a
block grid, a quadtree block codec with externally forced skip modes, a
decoder-side mosaic renderer and bit-distribution analytics.
"""

from .bitstream import (StreamHeader, read_header, read_stream, write_header,
                        write_stream)
from .codec import (CodecConfig, CodedFrame, CtuStat, Gop, IntraDir, Mode,
                    SkipPolicy, decode_frame, encode_frame)
from .errors import (CorruptStream, DegenerateMapping, DimensionMismatch,
                     EmptyFrame, EmptyRoi, EstimationFailed, GridMismatch,
                     MalformedHeader, MissingReference, RoiSkipError,
                     SingularHomography, TooFewFeatures, TruncatedFrame,
                     ZeroArea, ZeroReference)
from .geometry import (Frame, Homography, Point, bilinear_sample, compose,
                       invert, warp_frame, warp_point, warp_points)
from .global_motion import (GmeConfig, GmeResult, detect_corners,
                            estimate_global_motion, estimate_homography,
                            track_features)
from .pipeline import (DecodedSequence, EncodedSequence, decode_sequence,
                       detect_frame_roi, encode_sequence)
from .postproc import Mosaic, render_output, roi_psnr, update_mosaic
from .roi_detect import (MO, NA, NA_AND_MO, NONROI, MoConfig, RoiMask,
                         detect_moving_objects, detect_new_area,
                         first_frame_mask, mask_to_pgm_bytes, merge_masks,
                         pack_mask, unpack_mask)
from .synthetic import SpriteSpec, SyntheticSpec, generate_synthetic
from .video_io import parse_y4m, read_raw_yuv, write_y4m

__version__ = "0.1.0"
