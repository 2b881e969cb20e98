"""
Pose normalization by axis rotations about the nose tip.

Symmetry scoring mirrors the rotated cloud across a plane through the pivot and measures
how far the mirror image lies from the cloud itself. For rotations about Y and Z the mirror
plane is the vertical plane x = pivot.x (left/right symmetry). A rotation about X leaves
x untouched and cannot change left/right symmetry, so X sweeps mirror across the
horizontal plane y = pivot.y instead.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import Axis, Point3, RotationSpec
from .errors import InvalidParameterError

ORTHONORMAL_TOLERANCE = 1e-9
MIN_SYMMETRY_POINTS = 10


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64, copy=True)
        if m.shape != (3, 3):
            raise InvalidParameterError(f"rotation matrix must be 3x3, got shape {m.shape}")
        if np.max(np.abs(m.T @ m - np.eye(3))) > ORTHONORMAL_TOLERANCE:
            raise InvalidParameterError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(m) - 1.0) > ORTHONORMAL_TOLERANCE:
            raise InvalidParameterError("rotation matrix determinant is not +1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64).reshape(-1, 3) @ self.m.T


def rotation_matrix(spec: RotationSpec) -> RotationMatrix:
    c, s = math.cos(spec.theta), math.sin(spec.theta)
    if spec.axis is Axis.X:
        m = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    elif spec.axis is Axis.Y:
        m = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    else:
        m = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    return RotationMatrix(np.array(m))


def align_cloud(points: np.ndarray, pivot: Point3, spec: RotationSpec) -> np.ndarray:
    """R (p - pivot) + pivot for every row; order preserved."""
    center = pivot.as_array()
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    return rotation_matrix(spec).apply(points - center) + center


def mirror_axis(axis: Axis) -> int:
    """Coordinate negated by the symmetry mirror for a sweep about `axis`."""
    return 1 if Axis(axis) is Axis.X else 0


def symmetry_score(points: np.ndarray, pivot: Point3, axis: Axis) -> float:
    """Negative mean distance from each mirrored point to its nearest neighbour in the cloud."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    k = mirror_axis(axis)
    mirrored = points.copy()
    mirrored[:, k] = 2 * pivot.as_array()[k] - mirrored[:, k]
    distances, _ = cKDTree(points).query(mirrored, k=1)
    return -float(np.mean(distances))


def estimate_pose_by_symmetry(
    points: np.ndarray, pivot: Point3, axis: Axis, sweep: Sequence[float]
) -> RotationSpec:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(sweep) == 0:
        raise InvalidParameterError("symmetry sweep has no angles")
    if len(points) < MIN_SYMMETRY_POINTS:
        raise InvalidParameterError(
            f"symmetry estimation needs at least {MIN_SYMMETRY_POINTS} points, got {len(points)}"
        )

    axis = Axis(axis)
    best_theta, best_score = None, -math.inf
    for theta in sorted(float(t) for t in sweep):
        rotated = align_cloud(points, pivot, RotationSpec(axis, theta))
        score = symmetry_score(rotated, pivot, axis)
        if score > best_score:
            best_theta, best_score = theta, score

    return RotationSpec(axis, best_theta)


def align_pose(
    points: np.ndarray, pivot: Point3, axis: Axis, sweep: Sequence[float]
) -> tuple[RotationSpec, np.ndarray]:
    """Pick the most symmetric orientation from the sweep and rotate the cloud into it."""
    spec = estimate_pose_by_symmetry(points, pivot, axis, sweep)
    return spec, align_cloud(points, pivot, spec)


def sweep_angles(start_deg: float, stop_deg: float, step_deg: float) -> list[float]:
    """Angles in radians from start to stop inclusive, every step degrees."""
    if step_deg <= 0:
        raise InvalidParameterError(f"sweep step must be positive, got {step_deg}")
    if stop_deg < start_deg:
        raise InvalidParameterError(f"sweep stop {stop_deg} is below start {start_deg}")
    count = int(math.floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1
    return [math.radians(start_deg + i * step_deg) for i in range(count)]
