"""
Weighted-median smoothing of range images and triangle meshes.

Grid smoothing: the structuring element is an N x N x N weight array h(i, j, k), with i
along x (columns), j along y (rows) and k along depth. A range image has one depth per
(x, y), so every valid pixel in the N x N spatial window contributes its depth once per
k-layer, weighted h(i, j, k). For N = 3 with unit weights that is 27 samples and the
result is the 14th smallest. Samples with the same value can be merged by adding their
weights without changing the weighted median, so the filter runs on the N x N spatial
weights sum_k h(i, j, k).

Mesh smoothing: every face takes the vector median of the unit normals of itself and its
edge and vertex neighbours, then vertices move along the median normals of the faces
around them.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .core import DepthMap
from .errors import DegenerateFaceError, InvalidParameterError, KernelSizeError

DEFAULT_KERNEL_SIDE = 3
DEFAULT_ITERATIONS = 100


class Boundary(str, Enum):
    CLAMP = "clamp"
    SKIP = "skip"


@dataclass(frozen=True, eq=False)
class WeightKernel:
    side: int
    weights: np.ndarray

    def __post_init__(self):
        if self.side < 3 or self.side % 2 == 0:
            raise InvalidParameterError(f"kernel side must be odd and >= 3, got {self.side}")
        weights = np.asarray(self.weights).ravel()
        if weights.size != self.side**3:
            raise InvalidParameterError(
                f"a side-{self.side} kernel needs {self.side ** 3} weights, got {weights.size}"
            )
        if not np.all(np.equal(np.mod(weights, 1), 0)) or np.any(weights < 1):
            raise InvalidParameterError("kernel weights must be positive integers")
        weights = weights.astype(np.int64)
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, side: int = DEFAULT_KERNEL_SIDE) -> "WeightKernel":
        return cls(side=side, weights=np.ones(side**3, dtype=np.int64))

    def cube(self) -> np.ndarray:
        """Weights as h[i, j, k]: i along x, j along y, k along depth."""
        return self.weights.reshape(self.side, self.side, self.side)

    def spatial_weights(self) -> np.ndarray:
        """(rows, cols) window weights, each the sum of its N depth-layer weights."""
        return self.cube().sum(axis=2).T

    def __eq__(self, other):
        if not isinstance(other, WeightKernel):
            return NotImplemented
        return self.side == other.side and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True)
class SmoothingConfig:
    kernel: WeightKernel = field(default_factory=WeightKernel.uniform)
    iterations: int = DEFAULT_ITERATIONS
    boundary: Boundary = Boundary.CLAMP

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidParameterError(f"iterations must be >= 1, got {self.iterations}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))


def weighted_median(values: Sequence[float], weights: Sequence[int]) -> float:
    """
    Lower weighted median: the smallest value whose cumulative weight reaches half the total.
    Equivalent to repeating each value weight times and taking element ceil(total / 2) of the
    sorted multiset.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    weights = np.asarray(weights).ravel()
    if values.size == 0:
        raise InvalidParameterError("weighted median of an empty sample")
    if values.size != weights.size:
        raise InvalidParameterError(f"{values.size} values but {weights.size} weights")
    if np.any(weights < 1):
        raise InvalidParameterError("weights must be positive")

    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(weights[order].astype(np.int64))
    index = int(np.searchsorted(2 * cumulative, cumulative[-1], side="left"))
    return float(values[order][index])


def _smoothing_pass(
    depth: np.ndarray, valid: np.ndarray, spatial: np.ndarray, boundary: Boundary
) -> np.ndarray:
    side = spatial.shape[0]
    radius = side // 2
    height, width = depth.shape

    if boundary is Boundary.CLAMP:
        padded_depth = np.pad(depth, radius, mode="edge")
        padded_valid = np.pad(valid, radius, mode="edge")
    else:
        padded_depth = np.pad(depth, radius, mode="constant", constant_values=np.nan)
        padded_valid = np.pad(valid, radius, mode="constant", constant_values=False)

    samples = np.empty((side * side, height, width))
    weights = np.empty((side * side, height, width), dtype=np.int64)
    for n, (dy, dx) in enumerate(product(range(side), range(side))):
        window_valid = padded_valid[dy : dy + height, dx : dx + width]
        samples[n] = np.where(window_valid, padded_depth[dy : dy + height, dx : dx + width], np.inf)
        weights[n] = np.where(window_valid, spatial[dy, dx], 0)

    order = np.argsort(samples, axis=0, kind="stable")
    sorted_samples = np.take_along_axis(samples, order, axis=0)
    cumulative = np.cumsum(np.take_along_axis(weights, order, axis=0), axis=0)
    median_index = np.argmax(2 * cumulative >= cumulative[-1], axis=0)
    medians = np.take_along_axis(sorted_samples, median_index[np.newaxis], axis=0)[0]

    return np.where(valid, medians, depth)


def smooth_depth_map(depth_map: DepthMap, config: SmoothingConfig) -> DepthMap:
    side = config.kernel.side
    if side > min(depth_map.width, depth_map.height):
        raise KernelSizeError(
            f"kernel side {side} exceeds the {depth_map.width}x{depth_map.height} map"
        )

    spatial = config.kernel.spatial_weights()
    depth = np.array(depth_map.depth)
    for _ in range(config.iterations):
        depth = _smoothing_pass(depth, depth_map.valid, spatial, config.boundary)

    return depth_map.with_depth(depth)


# --- triangle meshes ---


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=np.float64, copy=True).reshape(-1, 3)
        faces = np.array(self.faces, dtype=np.int64, copy=True).reshape(-1, 3)

        if not np.all(np.isfinite(vertices)):
            raise InvalidParameterError("mesh vertices must be finite")
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise InvalidParameterError("face index out of range")
        if np.any(
            (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
        ):
            raise InvalidParameterError("degenerate face: repeated vertex index")

        directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        if len(np.unique(directed, axis=0)) != len(directed):
            raise InvalidParameterError("faces are not consistently oriented")

        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def with_vertices(self, vertices: np.ndarray) -> "TriangleMesh":
        return TriangleMesh(vertices=vertices, faces=self.faces)


@dataclass(frozen=True)
class TriangleNeighborhood:
    edge_neighbors: tuple[int, ...]
    vertex_neighbors: tuple[int, ...]
    weights: tuple[int, ...]

    def members(self) -> tuple[int, ...]:
        return self.edge_neighbors + self.vertex_neighbors


@dataclass(frozen=True, eq=False)
class FaceGeometry:
    normals: np.ndarray
    areas: np.ndarray
    centroids: np.ndarray


def face_geometry(mesh: TriangleMesh) -> FaceGeometry:
    """Unit normal n(T), area A(T) and centroid C(T) of every face."""
    corners = mesh.vertices[mesh.faces]
    cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    lengths = np.linalg.norm(cross, axis=1)

    degenerate = np.flatnonzero(lengths == 0)
    if degenerate.size:
        raise DegenerateFaceError(int(degenerate[0]))

    return FaceGeometry(
        normals=cross / lengths[:, np.newaxis],
        areas=lengths / 2,
        centroids=corners.mean(axis=1),
    )


def build_neighborhoods(
    mesh: TriangleMesh, edge_weight: int = 1, vertex_weight: int = 1
) -> list[TriangleNeighborhood]:
    if edge_weight < 1 or vertex_weight < 1:
        raise InvalidParameterError("neighbour weights must be positive integers")

    faces_of_vertex: list[set[int]] = [set() for _ in range(mesh.vertex_count)]
    for index, face in enumerate(mesh.faces.tolist()):
        for vertex in face:
            faces_of_vertex[vertex].add(index)

    neighborhoods = []
    for index, face in enumerate(mesh.faces.tolist()):
        shared: dict[int, int] = {}
        for vertex in face:
            for other in faces_of_vertex[vertex]:
                if other != index:
                    shared[other] = shared.get(other, 0) + 1

        edge = tuple(sorted(f for f, n in shared.items() if n >= 2))
        vertex_only = tuple(sorted(f for f, n in shared.items() if n == 1))
        neighborhoods.append(
            TriangleNeighborhood(
                edge_neighbors=edge,
                vertex_neighbors=vertex_only,
                weights=(edge_weight,) * len(edge) + (vertex_weight,) * len(vertex_only),
            )
        )
    return neighborhoods


def vector_median(normals: np.ndarray, weights: np.ndarray) -> int:
    """
    Index of the normal minimizing the weighted sum of angular distances to all the others.
    Callers order the rows so that the first minimum is the preferred tie-break.
    """
    cosines = np.clip(normals @ normals.T, -1.0, 1.0)
    costs = np.arccos(cosines) @ weights
    return int(np.argmin(costs))


def median_normals(
    mesh: TriangleMesh,
    neighborhoods: list[TriangleNeighborhood],
    geometry: Optional[FaceGeometry] = None,
) -> np.ndarray:
    """Median normal m(T) of every face over N_e(T), N_v(T) and T itself (weight 1)."""
    geometry = face_geometry(mesh) if geometry is None else geometry
    medians = np.empty_like(geometry.normals)

    for index, hood in enumerate(neighborhoods):
        members = np.array((index,) + hood.members(), dtype=np.int64)
        weights = np.array((1,) + hood.weights, dtype=np.float64)
        order = np.argsort(members, kind="stable")
        members, weights = members[order], weights[order]
        medians[index] = geometry.normals[members[vector_median(geometry.normals[members], weights)]]

    return medians


def smooth_mesh(
    mesh: TriangleMesh, iterations: int, edge_weight: int = 1, vertex_weight: int = 1
) -> TriangleMesh:
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    if mesh.face_count == 0:
        raise InvalidParameterError("mesh has no faces")

    neighborhoods = build_neighborhoods(mesh, edge_weight, vertex_weight)
    vertices = mesh.vertices.copy()

    for _ in range(iterations):
        current = mesh.with_vertices(vertices)
        geometry = face_geometry(current)
        medians = median_normals(current, neighborhoods, geometry)

        displacement = np.zeros_like(vertices)
        area_sum = np.zeros(len(vertices))
        for corner in range(3):
            v_index = mesh.faces[:, corner]
            offset = geometry.centroids - vertices[v_index]
            projection = np.einsum("ij,ij->i", medians, offset)
            np.add.at(
                displacement,
                v_index,
                (geometry.areas * projection)[:, np.newaxis] * medians,
            )
            np.add.at(area_sum, v_index, geometry.areas)

        touched = area_sum > 0
        vertices[touched] += displacement[touched] / area_sum[touched, np.newaxis]

    return mesh.with_vertices(vertices)


def depth_map_to_mesh(depth_map: DepthMap) -> TriangleMesh:
    """
    Triangulate the valid pixels. Each 2x2 block of valid pixels gives two faces with normals
    facing the camera (+z); vertices are (col, row, depth) in row-major pixel order.
    """
    valid = depth_map.valid
    index = np.full(valid.shape, -1, dtype=np.int64)
    index[valid] = np.arange(np.count_nonzero(valid))

    rows, cols = np.nonzero(valid)
    vertices = np.column_stack([cols, rows, depth_map.depth[rows, cols]]).astype(np.float64)

    top_left = index[:-1, :-1]
    top_right = index[:-1, 1:]
    bottom_left = index[1:, :-1]
    bottom_right = index[1:, 1:]
    full = (top_left >= 0) & (top_right >= 0) & (bottom_left >= 0) & (bottom_right >= 0)

    first = np.stack([top_left[full], top_right[full], bottom_left[full]], axis=1)
    second = np.stack([top_right[full], bottom_right[full], bottom_left[full]], axis=1)
    faces = np.stack([first, second], axis=1).reshape(-1, 3)

    return TriangleMesh(vertices=vertices.reshape(-1, 3), faces=faces)
