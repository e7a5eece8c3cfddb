"""Frame-to-frame global motion estimation.

Pipeline: Harris corners in frame k-1, pyramidal Lucas-Kanade tracking into
frame k, seeded RANSAC over exact 4-point projective fits, and a final
normalized least-squares refinement on the consensus set.  The returned
homography maps frame k-1 coordinates onto frame k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, EstimationFailed, TooFewFeatures
from .geometry import Frame, Homography, Point, bilinear_sample

BORDER_MARGIN = 4          # Harris response is filter-contaminated near edges
KLT_CONV_EPS = 0.01        # pel; LK update norm below this counts as converged
MIN_EIG_THRESHOLD = 1e-3   # per-pel minimum eigenvalue of the gradient matrix


@dataclass(frozen=True)
class GmeConfig:
    max_features: int = 500
    harris_k: float = 0.04
    harris_quality: float = 0.01
    min_feature_distance: float = 8.0
    klt_window: int = 21
    klt_pyramid_levels: int = 3
    klt_max_iterations: int = 30
    ransac_iterations: int = 500
    ransac_inlier_threshold: float = 1.5
    min_inliers: int = 20
    seed: int = 0


@dataclass
class FeatureTrack:
    p_prev: Point
    p_curr: Point
    status: str            # "tracked" or "lost"
    residual: float = 0.0


@dataclass
class GmeResult:
    homography: Homography
    inlier_count: int
    inlier_ratio: float
    mean_inlier_residual: float

    def log_line(self) -> str:
        p = " ".join(f"{v:.10g}" for v in self.homography.params)
        return (f"{self.homography.frame_index} {p} "
                f"{self.inlier_count} {self.inlier_ratio:.4f} "
                f"{self.mean_inlier_residual:.4f}")


def harris_response(plane: np.ndarray, k: float) -> np.ndarray:
    img = plane.astype(np.float64)
    ix = ndimage.sobel(img, axis=1, mode="nearest") / 8.0
    iy = ndimage.sobel(img, axis=0, mode="nearest") / 8.0
    sxx = ndimage.gaussian_filter(ix * ix, sigma=1.5, mode="nearest")
    syy = ndimage.gaussian_filter(iy * iy, sigma=1.5, mode="nearest")
    sxy = ndimage.gaussian_filter(ix * iy, sigma=1.5, mode="nearest")
    return sxx * syy - sxy * sxy - k * (sxx + syy) ** 2


def detect_corners(frame: Frame, cfg: GmeConfig) -> list[Point]:
    """Harris corner candidates, non-max suppressed and distance-separated."""
    if frame.width < 32 or frame.height < 32:
        raise TooFewFeatures("frame smaller than 32x32")
    r = harris_response(frame.y, cfg.harris_k)
    r[:BORDER_MARGIN, :] = 0
    r[-BORDER_MARGIN:, :] = 0
    r[:, :BORDER_MARGIN] = 0
    r[:, -BORDER_MARGIN:] = 0
    rmax = r.max()
    if rmax <= 0:
        raise TooFewFeatures("no positive Harris response")
    peaks = (r == ndimage.maximum_filter(r, size=3, mode="nearest"))
    peaks &= r > cfg.harris_quality * rmax
    ys, xs = np.nonzero(peaks)
    order = np.argsort(-r[ys, xs], kind="stable")
    ys, xs = ys[order], xs[order]

    # greedy min-distance pass over descending response, hashed on a grid
    cell = max(1.0, cfg.min_feature_distance)
    occupied: dict[tuple[int, int], list[tuple[float, float]]] = {}
    points: list[Point] = []
    d2 = cfg.min_feature_distance ** 2
    for x, y in zip(xs, ys):
        cx, cy = int(x // cell), int(y // cell)
        ok = True
        for nx in (cx - 1, cx, cx + 1):
            for ny in (cy - 1, cy, cy + 1):
                for px, py in occupied.get((nx, ny), ()):
                    if (px - x) ** 2 + (py - y) ** 2 < d2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            points.append(Point(float(x), float(y)))
            occupied.setdefault((cx, cy), []).append((float(x), float(y)))
            if len(points) >= cfg.max_features:
                break
    if len(points) < 4:
        raise TooFewFeatures(f"only {len(points)} corners found")
    return points


def _build_pyramid(plane: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [plane.astype(np.float64)]
    for _ in range(1, levels):
        blurred = ndimage.gaussian_filter(pyr[-1], sigma=1.0, mode="nearest")
        pyr.append(blurred[::2, ::2])
    return pyr


def _sample_windows(plane: np.ndarray, centers: np.ndarray,
                    offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear windows around (n, 2) centers; offsets is (w*w, 2).

    Window pels beyond the plane are edge-replicated; a feature only counts
    as out of bounds when its center leaves the plane.
    """
    h, w = plane.shape
    xs = np.clip(centers[:, None, 0] + offsets[None, :, 0], 0.0, w - 1.0)
    ys = np.clip(centers[:, None, 1] + offsets[None, :, 1], 0.0, h - 1.0)
    vals, _ = bilinear_sample(plane, xs, ys)
    ok = ((centers[:, 0] >= 0) & (centers[:, 0] <= w - 1)
          & (centers[:, 1] >= 0) & (centers[:, 1] <= h - 1))
    return vals, ok


def _window_inside(plane: np.ndarray, centers: np.ndarray,
                   radius: int) -> np.ndarray:
    h, w = plane.shape
    return ((centers[:, 0] - radius >= 0) & (centers[:, 0] + radius <= w - 1)
            & (centers[:, 1] - radius >= 0)
            & (centers[:, 1] + radius <= h - 1))


def track_features(prev: Frame, curr: Frame, points: list[Point],
                   cfg: GmeConfig) -> list[FeatureTrack]:
    """Pyramidal inverse-compositional LK, batched over all features."""
    if prev.y.shape != curr.y.shape:
        raise DimensionMismatch(f"{prev.y.shape} vs {curr.y.shape}")
    if not points:
        raise ValueError("need at least one point to track")
    n = len(points)
    p0 = np.array([[p.x, p.y] for p in points], dtype=np.float64)
    r = cfg.klt_window // 2
    off = np.mgrid[-r:r + 1, -r:r + 1].reshape(2, -1).T[:, ::-1].astype(np.float64)

    levels = cfg.klt_pyramid_levels
    prev_pyr = _build_pyramid(prev.y, levels)
    curr_pyr = _build_pyramid(curr.y, levels)

    lost = np.zeros(n, dtype=bool)
    d = np.zeros((n, 2), dtype=np.float64)  # displacement at current level
    residual = np.zeros(n, dtype=np.float64)

    for lvl in range(levels - 1, -1, -1):
        scale = 2.0 ** (-lvl)
        centers = p0 * scale
        t_win, t_ok = _sample_windows(prev_pyr[lvl], centers, off)
        gx, _ = _sample_windows(
            np.gradient(prev_pyr[lvl], axis=1), centers, off)
        gy, _ = _sample_windows(
            np.gradient(prev_pyr[lvl], axis=0), centers, off)
        gxx = np.sum(gx * gx, axis=1)
        gxy = np.sum(gx * gy, axis=1)
        gyy = np.sum(gy * gy, axis=1)
        trace = gxx + gyy
        det = gxx * gyy - gxy * gxy
        # smaller eigenvalue of the 2x2 gradient matrix, per pel
        min_eig = (trace - np.sqrt(np.maximum(trace * trace - 4 * det, 0.0))) / 2
        min_eig /= off.shape[0]
        lost |= ~t_ok | (min_eig < MIN_EIG_THRESHOLD)

        converged = lost.copy()  # lost features take no iterations
        inv_det = np.where(det > 0, 1.0 / np.where(det > 0, det, 1.0), 0.0)
        for _ in range(cfg.klt_max_iterations):
            active = ~converged
            if not active.any():
                break
            i_win, i_ok = _sample_windows(curr_pyr[lvl],
                                          centers[active] + d[active], off)
            e = i_win - t_win[active]
            bx = np.sum(gx[active] * e, axis=1)
            by = np.sum(gy[active] * e, axis=1)
            dx = inv_det[active] * (gyy[active] * bx - gxy[active] * by)
            dy = inv_det[active] * (gxx[active] * by - gxy[active] * bx)
            step = np.stack([dx, dy], axis=1)
            d[active] -= step
            newly_lost = ~i_ok
            conv = np.hypot(step[:, 0], step[:, 1]) < KLT_CONV_EPS
            idx = np.nonzero(active)[0]
            lost[idx[newly_lost]] = True
            converged[idx[conv | newly_lost]] = True
        lost |= ~converged
        if lvl > 0:
            d *= 2.0

    # final residual at full resolution; clamped (edge-replicated) windows
    # bias the solution, so both endpoint windows must fit entirely
    t_win, _ = _sample_windows(prev_pyr[0], p0, off)
    i_win, _ = _sample_windows(curr_pyr[0], p0 + d, off)
    residual = np.mean(np.abs(i_win - t_win), axis=1)
    p1 = p0 + d
    lost |= ~_window_inside(prev_pyr[0], p0, r)
    lost |= ~_window_inside(curr_pyr[0], p1, r)

    tracks = []
    for i, p in enumerate(points):
        tracks.append(FeatureTrack(
            p_prev=p,
            p_curr=Point(float(p1[i, 0]), float(p1[i, 1])),
            status="lost" if lost[i] else "tracked",
            residual=float(residual[i])))
    return tracks


def _exact_fit_system(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked 8x8 systems for exact 4-point projective fits.

    src/dst have shape (m, 4, 2); returns A (m, 8, 8) and b (m, 8).
    """
    m = src.shape[0]
    a = np.zeros((m, 8, 8))
    b = np.zeros((m, 8))
    x, y = src[..., 0], src[..., 1]
    u, v = dst[..., 0], dst[..., 1]
    for i in range(4):
        a[:, 2 * i, 0] = x[:, i]
        a[:, 2 * i, 1] = y[:, i]
        a[:, 2 * i, 2] = 1.0
        a[:, 2 * i, 6] = -u[:, i] * x[:, i]
        a[:, 2 * i, 7] = -u[:, i] * y[:, i]
        a[:, 2 * i + 1, 3] = x[:, i]
        a[:, 2 * i + 1, 4] = y[:, i]
        a[:, 2 * i + 1, 5] = 1.0
        a[:, 2 * i + 1, 6] = -v[:, i] * x[:, i]
        a[:, 2 * i + 1, 7] = -v[:, i] * y[:, i]
        b[:, 2 * i] = u[:, i]
        b[:, 2 * i + 1] = v[:, i]
    return a, b


def _reprojection_errors(mats: np.ndarray, src: np.ndarray,
                         dst: np.ndarray) -> np.ndarray:
    """Errors (m, n) of stacked 3x3 mats applied to (n, 2) correspondences."""
    src_h = np.column_stack([src, np.ones(len(src))])
    proj = np.einsum("mij,nj->mni", mats, src_h)
    den = proj[..., 2]
    bad = np.abs(den) < 1e-9
    den = np.where(bad, 1.0, den)
    ex = proj[..., 0] / den - dst[:, 0]
    ey = proj[..., 1] / den - dst[:, 1]
    err = np.hypot(ex, ey)
    return np.where(bad, np.inf, err)


def _dlt_refine(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Normalized direct linear transform over all correspondences."""
    def normalize(pts):
        c = pts.mean(axis=0)
        scale = np.sqrt(2.0) / max(np.mean(np.linalg.norm(pts - c, axis=1)), 1e-12)
        t = np.array([[scale, 0, -scale * c[0]],
                      [0, scale, -scale * c[1]],
                      [0, 0, 1.0]])
        return (pts - c) * scale, t

    sn, ts = normalize(src)
    dn, td = normalize(dst)
    n = len(src)
    a = np.zeros((2 * n, 9))
    a[0::2, 0] = -sn[:, 0]
    a[0::2, 1] = -sn[:, 1]
    a[0::2, 2] = -1.0
    a[0::2, 6] = dn[:, 0] * sn[:, 0]
    a[0::2, 7] = dn[:, 0] * sn[:, 1]
    a[0::2, 8] = dn[:, 0]
    a[1::2, 3] = -sn[:, 0]
    a[1::2, 4] = -sn[:, 1]
    a[1::2, 5] = -1.0
    a[1::2, 6] = dn[:, 1] * sn[:, 0]
    a[1::2, 7] = dn[:, 1] * sn[:, 1]
    a[1::2, 8] = dn[:, 1]
    _, _, vt = np.linalg.svd(a)
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(td) @ hn @ ts
    if abs(h[2, 2]) < 1e-12:
        return None
    return h / h[2, 2]


def estimate_homography(tracks: list[FeatureTrack], cfg: GmeConfig) -> GmeResult:
    """RANSAC over tracked correspondences plus least-squares refinement."""
    good = [t for t in tracks if t.status == "tracked"]
    if len(good) < 8:
        raise EstimationFailed(f"only {len(good)} tracked features")
    src = np.array([[t.p_prev.x, t.p_prev.y] for t in good])
    dst = np.array([[t.p_curr.x, t.p_curr.y] for t in good])
    n = len(good)

    rng = np.random.default_rng(cfg.seed)
    samples = np.array([rng.choice(n, size=4, replace=False)
                        for _ in range(cfg.ransac_iterations)])
    a, b = _exact_fit_system(src[samples], dst[samples])
    dets = np.abs(np.linalg.det(a))
    # degenerate (e.g. collinear) samples drop out here; the remaining
    # hypotheses stand in for their resampled replacements
    valid = dets > 1e-9 * max(1.0, dets.max())
    if not valid.any():
        raise EstimationFailed("all RANSAC samples degenerate")
    params = np.linalg.solve(a[valid], b[valid][..., None])[..., 0]
    mats = np.tile(np.eye(3), (params.shape[0], 1, 1))
    mats[:, 0, :] = params[:, 0:3]
    mats[:, 1, :] = params[:, 3:6]
    mats[:, 2, 0:2] = params[:, 6:8]

    errs = _reprojection_errors(mats, src, dst)
    inlier_sets = errs < cfg.ransac_inlier_threshold
    counts = inlier_sets.sum(axis=1)
    best = int(np.argmax(counts))
    if counts[best] < cfg.min_inliers:
        raise EstimationFailed(
            f"best consensus {counts[best]} < min_inliers {cfg.min_inliers}")
    inliers = inlier_sets[best]

    refined = _dlt_refine(src[inliers], dst[inliers])
    h_mat = refined if refined is not None else mats[best]
    final_err = _reprojection_errors(h_mat[None], src, dst)[0]
    final_in = final_err < cfg.ransac_inlier_threshold
    if final_in.sum() < counts[best]:
        # refinement made things worse; keep the RANSAC hypothesis
        h_mat = mats[best]
        final_err = errs[best]
        final_in = inliers
    homography = Homography.from_matrix(h_mat)
    return GmeResult(
        homography=homography,
        inlier_count=int(final_in.sum()),
        inlier_ratio=float(final_in.sum()) / n,
        mean_inlier_residual=float(final_err[final_in].mean()))


def estimate_global_motion(prev: Frame, curr: Frame,
                           cfg: GmeConfig | None = None) -> GmeResult:
    """Full GME chain: corners in prev, LK into curr, robust projective fit."""
    cfg = cfg or GmeConfig()
    if prev.y.shape != curr.y.shape:
        raise DimensionMismatch(f"{prev.y.shape} vs {curr.y.shape}")
    points = detect_corners(prev, cfg)
    tracks = track_features(prev, curr, points, cfg)
    result = estimate_homography(tracks, cfg)
    result.homography = Homography(*result.homography.params,
                                   frame_index=curr.index)
    return result
