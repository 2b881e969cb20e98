"""
Synthetic range faces and sensor noise.

A face is an elliptical head dome on a flat background wall with a Gaussian nose bump;
larger depth is closer to the camera. Posed faces rotate the head surface (not the wall)
about the nose tip, then re-sample it onto the pixel grid: the surface is sampled
`oversample` x `oversample` times per pixel, each sample lands in the nearest cell, and the
frontmost sample wins. Cells inside the head outline that no sample reaches are dropouts.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import ndimage

from .align import rotation_matrix
from .core import DepthMap, Landmark, Point3, RotationSpec
from .errors import InvalidParameterError, PoseOutOfGridError

FACE_SEMI_AXIS_X = 0.38
FACE_SEMI_AXIS_Y = 0.45
MAX_SPIKE_FRACTION = 0.2


@dataclass(frozen=True)
class FaceParams:
    width: int = 64
    height: int = 64
    nose_center: tuple[int, int] = (32, 32)
    nose_height: float = 20.0
    nose_sigma: float = 4.0
    base_depth: float = 100.0
    dome_amplitude: float = 10.0
    background_depth: float = 0.0
    oversample: int = 4

    def __post_init__(self):
        problems = []
        if self.width < 3 or self.height < 3:
            problems.append(f"grid must be at least 3x3, got {self.width}x{self.height}")
        row, col = self.nose_center
        if not (1 <= row <= self.height - 2 and 1 <= col <= self.width - 2):
            problems.append(f"nose center {self.nose_center} is not interior to the grid")
        if not self.nose_height > 0:
            problems.append(f"nose height must be > 0, got {self.nose_height}")
        if not self.nose_sigma >= 1:
            problems.append(f"nose sigma must be >= 1, got {self.nose_sigma}")
        if not self.base_depth > self.background_depth:
            problems.append("base depth must exceed background depth")
        if self.oversample < 1:
            problems.append(f"oversample must be >= 1, got {self.oversample}")
        if problems:
            raise InvalidParameterError("; ".join(problems))

    @property
    def face_center(self) -> tuple[int, int]:
        return self.height // 2, self.width // 2


@dataclass(frozen=True)
class NoiseParams:
    spike_fraction: float = 0.05
    spike_amplitude: float = 60.0
    gaussian_sigma: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.spike_fraction <= MAX_SPIKE_FRACTION:
            raise InvalidParameterError(
                f"spike fraction must be in [0, {MAX_SPIKE_FRACTION}], got {self.spike_fraction}"
            )
        if not self.gaussian_sigma >= 0:
            raise InvalidParameterError(f"gaussian sigma must be >= 0, got {self.gaussian_sigma}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}")

    def with_seed(self, seed: int) -> "NoiseParams":
        return replace(self, seed=seed)


def face_surface(params: FaceParams, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Head depth at continuous pixel coordinates, and whether each point lies on the head."""
    center_row, center_col = params.face_center
    a = FACE_SEMI_AXIS_X * params.width
    b = FACE_SEMI_AXIS_Y * params.height
    rho2 = ((x - center_col) / a) ** 2 + ((y - center_row) / b) ** 2
    on_head = rho2 <= 1.0

    nose_row, nose_col = params.nose_center
    bump = params.nose_height * np.exp(
        -((x - nose_col) ** 2 + (y - nose_row) ** 2) / (2 * params.nose_sigma**2)
    )
    depth = params.base_depth + params.dome_amplitude * (1.0 - rho2) + bump
    return np.where(on_head, depth, params.background_depth), on_head


def _window_sum(depth: np.ndarray, valid: np.ndarray, row: int, col: int) -> float:
    window = np.where(valid, depth, 0.0)[row - 1 : row + 2, col - 1 : col + 2]
    return float(window.sum())


def _frontal_depth(params: FaceParams) -> np.ndarray:
    rows, cols = np.mgrid[0 : params.height, 0 : params.width].astype(np.float64)
    depth, _ = face_surface(params, cols, rows)
    return depth


def _posed_depth(params: FaceParams, pose: RotationSpec, nose_depth: float) -> tuple[np.ndarray, np.ndarray]:
    step = 1.0 / params.oversample
    offsets = (np.arange(params.oversample) + 0.5) * step - 0.5
    ys = (np.arange(params.height)[:, np.newaxis] + offsets).ravel()
    xs = (np.arange(params.width)[:, np.newaxis] + offsets).ravel()
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")

    depth, on_head = face_surface(params, grid_x, grid_y)
    nose_row, nose_col = params.nose_center
    pivot = np.array([nose_col, nose_row, nose_depth], dtype=np.float64)
    points = np.column_stack([grid_x[on_head], grid_y[on_head], depth[on_head]])
    posed = rotation_matrix(pose).apply(points - pivot) + pivot

    cols = np.rint(posed[:, 0]).astype(np.int64)
    rows = np.rint(posed[:, 1]).astype(np.int64)
    inside = (rows >= 0) & (rows < params.height) & (cols >= 0) & (cols < params.width)

    frontmost = np.full((params.height, params.width), -np.inf)
    np.maximum.at(frontmost, (rows[inside], cols[inside]), posed[inside, 2])

    hit = np.isfinite(frontmost)
    outline = ndimage.binary_fill_holes(hit)
    valid = hit | ~outline
    result = np.where(hit, frontmost, params.background_depth)
    return np.where(valid, result, np.nan), valid


def generate_face(
    params: FaceParams, pose: Optional[RotationSpec] = None
) -> tuple[DepthMap, Landmark]:
    nose_row, nose_col = params.nose_center
    nose_depth = float(face_surface(params, np.float64(nose_col), np.float64(nose_row))[0])

    if pose is None:
        depth = _frontal_depth(params)
        valid = np.ones(depth.shape, dtype=bool)
    else:
        depth, valid = _posed_depth(params, pose, nose_depth)
        if not valid[nose_row, nose_col] or np.isnan(depth[nose_row, nose_col]):
            raise PoseOutOfGridError(f"pose {pose.label()} leaves no surface at the nose tip")
        if depth[nose_row, nose_col] - nose_depth > 0.5 * params.nose_height:
            raise PoseOutOfGridError(f"pose {pose.label()} hides the nose tip behind the head")

    truth = Landmark(
        row=nose_row,
        col=nose_col,
        point=Point3(float(nose_col), float(nose_row), nose_depth),
        score=_window_sum(depth, valid, nose_row, nose_col),
    )
    return DepthMap(depth=depth, valid=valid), truth


def inject_noise(depth_map: DepthMap, noise: NoiseParams) -> DepthMap:
    """Gaussian jitter on every valid pixel, then positive spikes on a random subset of them."""
    rng = np.random.default_rng(noise.seed)
    depth = np.array(depth_map.depth)
    rows, cols = np.nonzero(depth_map.valid)

    if noise.gaussian_sigma > 0:
        depth[rows, cols] += rng.normal(0.0, noise.gaussian_sigma, size=rows.size)

    spikes = int(round(noise.spike_fraction * rows.size))
    if spikes:
        chosen = rng.choice(rows.size, size=spikes, replace=False)
        depth[rows[chosen], cols[chosen]] += noise.spike_amplitude

    return depth_map.with_depth(depth)
