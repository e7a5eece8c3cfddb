"""Exception hierarchy shared across the toolkit.

Every error carries a stable category name (the class name) that the CLI
prints verbatim, so scripts can match on it.
"""


class RoiSkipError(Exception):
    """Base class for all toolkit errors."""


class DegenerateMapping(RoiSkipError):
    """Projective denominator vanished at the queried point."""


class SingularHomography(RoiSkipError):
    """Homography matrix is not invertible."""


class TooFewFeatures(RoiSkipError):
    """Not enough trackable corners for global motion estimation."""


class DimensionMismatch(RoiSkipError):
    """Frames (or planes) that must agree in size do not."""


class EstimationFailed(RoiSkipError):
    """RANSAC consensus below the configured minimum inlier count."""


class GridMismatch(RoiSkipError):
    """ROI mask grids (or mask vs frame geometry) are incompatible."""


class MissingReference(RoiSkipError):
    """Inter frame encoded or decoded without a reference reconstruction."""


class CorruptStream(RoiSkipError):
    """Bitstream failed to parse (bad magic, desync, out-of-range symbol)."""


class EmptyRoi(RoiSkipError):
    """Operation requires at least one ROI cell in the mask."""


class EmptyFrame(RoiSkipError):
    """Frame statistics carry zero total bits."""


class ZeroArea(RoiSkipError):
    """ROI area ratio is zero where a ratio denominator is needed."""


class ZeroReference(RoiSkipError):
    """Rate comparison table needs a strictly positive reference rate."""


class MalformedHeader(RoiSkipError):
    """Container header did not parse."""


class TruncatedFrame(RoiSkipError):
    """Container ended mid-frame; carries the frame index."""

    def __init__(self, frame_index: int, message: str | None = None):
        self.frame_index = frame_index
        super().__init__(message or f"truncated at frame {frame_index}")
