import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import BinaryMask, DepthMap, Landmark, Point3, apply_mask
from .errors import DimensionMismatchError, NoCandidateError
from .smooth import SmoothingConfig, smooth_depth_map


def window_sums(depth_map: DepthMap, mask: BinaryMask) -> np.ndarray:
    """
    3x3 depth sums for interior pixels, shape (height - 2, width - 2). Entries whose window is
    not entirely valid foreground are -inf.
    """
    if mask.shape != depth_map.shape:
        raise DimensionMismatchError("mask", depth_map.shape[::-1], mask.shape[::-1])
    if depth_map.height < 3 or depth_map.width < 3:
        raise NoCandidateError(
            f"a {depth_map.width}x{depth_map.height} map has no interior pixel with a 3x3 window"
        )

    usable = depth_map.valid & mask.bits
    depth = np.where(usable, depth_map.depth, 0.0)
    sums = sliding_window_view(depth, (3, 3)).sum(axis=(2, 3))
    eligible = sliding_window_view(usable, (3, 3)).all(axis=(2, 3))
    return np.where(eligible, sums, -np.inf)


def find_nose_tip(depth_map: DepthMap, mask: BinaryMask) -> Landmark:
    """
    Maximum-intensity nose tip: the interior pixel whose fully valid foreground 3x3 window has
    the largest depth sum. The first maximum in row-major order wins.
    """
    sums = window_sums(depth_map, mask)
    if not np.isfinite(sums).any():
        raise NoCandidateError("no interior pixel has a fully valid foreground 3x3 window")

    # argmax returns the first occurrence in row-major order
    best = int(np.argmax(sums))
    row, col = np.unravel_index(best, sums.shape)
    row, col = int(row) + 1, int(col) + 1

    return Landmark(
        row=row,
        col=col,
        point=Point3(float(col), float(row), float(depth_map.depth[row, col])),
        score=float(sums[row - 1, col - 1]),
    )


def find_nose_tip_unsmoothed_vs_smoothed(
    depth_map: DepthMap, mask: BinaryMask, config: SmoothingConfig
) -> tuple[Landmark, Landmark]:
    masked = apply_mask(depth_map, mask)
    raw = find_nose_tip(masked, mask)
    smoothed = find_nose_tip(smooth_depth_map(masked, config), mask)
    return raw, smoothed
