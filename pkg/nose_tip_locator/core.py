"""
Domain types shared by every pipeline stage.

A range image is kept as a regular grid: `depth[row, col]` holds the camera-distance value
(larger = closer to the camera, so the nose tip carries the highest value) and
`valid[row, col]` marks pixels that received sensor data. Point clouds are (N, 3) arrays of
(x, y, z) rows with x = col, y = row, z = depth.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DepthMap:
    depth: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        depth = _frozen(self.depth, np.float64)
        valid = _frozen(self.valid, bool)

        if depth.ndim != 2 or depth.shape[0] < 1 or depth.shape[1] < 1:
            raise InvalidParameterError(f"depth must be a non-empty 2-D grid, got shape {depth.shape}")
        if valid.shape != depth.shape:
            raise DimensionMismatchError("validity mask", depth.shape[::-1], valid.shape[::-1])
        if not np.all(np.isfinite(depth[valid])):
            raise InvalidParameterError("non-finite depth at a valid pixel")

        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_array(cls, depth, valid=None) -> "DepthMap":
        """Build a map from a 2-D array; NaN marks missing samples when no mask is given."""
        depth = np.asarray(depth, dtype=np.float64)
        if valid is None:
            valid = np.isfinite(depth)
        return cls(depth=np.where(valid, depth, np.nan), valid=valid)

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape

    def valid_count(self) -> int:
        return int(np.count_nonzero(self.valid))

    def valid_depths(self) -> np.ndarray:
        return self.depth[self.valid]

    def with_depth(self, depth: np.ndarray) -> "DepthMap":
        return DepthMap(depth=depth, valid=self.valid)

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.depth[self.valid], other.depth[other.valid])
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryMask:
    bits: np.ndarray

    def __post_init__(self):
        bits = _frozen(self.bits, bool)
        if bits.ndim != 2:
            raise InvalidParameterError(f"mask must be a 2-D grid, got shape {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def full(cls, height: int, width: int, value: bool = True) -> "BinaryMask":
        return cls(np.full((height, width), value, dtype=bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise InvalidParameterError(f"point has non-finite coordinates: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @classmethod
    def from_array(cls, xyz) -> "Point3":
        return cls(float(xyz[0]), float(xyz[1]), float(xyz[2]))


@dataclass(frozen=True)
class Landmark:
    row: int
    col: int
    point: Point3
    score: float


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"


@dataclass(frozen=True)
class RotationSpec:
    axis: Axis
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        if not math.isfinite(self.theta):
            raise InvalidParameterError(f"rotation angle must be finite, got {self.theta}")

    @classmethod
    def from_degrees(cls, axis, degrees: float) -> "RotationSpec":
        return cls(Axis(axis), math.radians(degrees))

    @property
    def degrees(self) -> float:
        return math.degrees(self.theta)

    def label(self) -> str:
        return f"{self.axis.value.upper()} {self.degrees:+g}"


def pose_label(pose: Optional[RotationSpec]) -> str:
    return "frontal" if pose is None else pose.label()


def depth_map_to_point_cloud(depth_map: DepthMap) -> np.ndarray:
    """One (col, row, depth) row per valid pixel, row-major."""
    rows, cols = np.nonzero(depth_map.valid)
    return np.column_stack(
        [cols.astype(np.float64), rows.astype(np.float64), depth_map.depth[rows, cols]]
    ).reshape(-1, 3)


def apply_mask(depth_map: DepthMap, mask: BinaryMask) -> DepthMap:
    if mask.shape != depth_map.shape:
        raise DimensionMismatchError("mask", depth_map.shape[::-1], mask.shape[::-1])
    return DepthMap(depth=depth_map.depth, valid=depth_map.valid & mask.bits)
