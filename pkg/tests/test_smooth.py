import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from nose_tip_locator.core import DepthMap, apply_mask
from nose_tip_locator.errors import DegenerateFaceError, InvalidParameterError, KernelSizeError
from nose_tip_locator.smooth import (
    Boundary,
    SmoothingConfig,
    TriangleMesh,
    WeightKernel,
    build_neighborhoods,
    depth_map_to_mesh,
    face_geometry,
    median_normals,
    smooth_depth_map,
    smooth_mesh,
    weighted_median,
)
from nose_tip_locator.synth import FaceParams, NoiseParams, generate_face, inject_noise
from nose_tip_locator.threshold import otsu_mask


def one_pass(boundary=Boundary.CLAMP, side=3):
    return SmoothingConfig(kernel=WeightKernel.uniform(side), iterations=1, boundary=boundary)


# --- weighted median ---


def test_weighted_median_examples():
    assert weighted_median([5.0], [4]) == 5.0
    assert weighted_median([1, 2, 3], [1, 1, 1]) == 2.0
    assert weighted_median([1, 2, 3], [5, 1, 1]) == 1.0


def test_weighted_median_rejects_bad_weights():
    with pytest.raises(InvalidParameterError):
        weighted_median([1, 2], [1, 0])
    with pytest.raises(InvalidParameterError):
        weighted_median([], [])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(min_value=-50, max_value=50), st.integers(min_value=1, max_value=6)),
        min_size=1,
        max_size=30,
    )
)
def test_weighted_median_matches_expanded_multiset(pairs):
    values = [v for v, _ in pairs]
    weights = [w for _, w in pairs]
    expanded = sorted(v for v, w in pairs for _ in range(w))
    assert weighted_median(values, weights) == expanded[math.ceil(len(expanded) / 2) - 1]


def test_weighted_median_matches_expansion_on_seeded_samples(rng):
    for _ in range(1000):
        size = int(rng.integers(1, 31))
        values = rng.integers(-1000, 1000, size=size).astype(np.float64)
        weights = rng.integers(1, 301, size=size)
        expanded = np.sort(np.repeat(values, weights))
        assert weighted_median(values, weights) == expanded[math.ceil(expanded.size / 2) - 1]


def test_unit_weights_over_27_samples_pick_the_14th(rng):
    for _ in range(1000):
        values = rng.normal(size=27)
        assert weighted_median(values, np.ones(27, dtype=np.int64)) == np.sort(values)[13]


# --- kernel ---


def test_kernel_rejects_even_side():
    with pytest.raises(InvalidParameterError):
        WeightKernel.uniform(4)


def test_kernel_rejects_zero_weight():
    weights = np.ones(27, dtype=np.int64)
    weights[5] = 0
    with pytest.raises(InvalidParameterError):
        WeightKernel(side=3, weights=weights)


def test_spatial_weights_sum_depth_layers():
    cube = np.ones((3, 3, 3), dtype=np.int64)
    cube[2, 0, :] = 2
    kernel = WeightKernel(side=3, weights=cube.ravel())
    spatial = kernel.spatial_weights()
    # h[i, j, k]: i is x (column), j is y (row)
    assert spatial[0, 2] == 6
    assert spatial.sum() == 27 + 3


# --- grid smoothing ---


def test_constant_map_is_fixed_point():
    depth_map = DepthMap.from_array(np.full((6, 7), 3.5))
    config = SmoothingConfig(kernel=WeightKernel.uniform(5), iterations=7)
    assert smooth_depth_map(depth_map, config) == depth_map


def test_single_spike_removed_in_one_pass():
    depth = np.ones((5, 5))
    depth[2, 2] = 100.0
    smoothed = smooth_depth_map(DepthMap.from_array(depth), one_pass())
    assert np.all(smoothed.depth == 1.0)


def test_uniform_kernel_matches_plain_median_filter(rng):
    for _ in range(100):
        depth = rng.integers(0, 50, size=(9, 9)).astype(np.float64)
        depth_map = DepthMap.from_array(depth)
        expected = depth
        for _ in range(3):
            expected = ndimage.median_filter(expected, size=3, mode="nearest")
            depth_map = smooth_depth_map(depth_map, one_pass())
            assert np.array_equal(depth_map.depth, expected)


def test_boundary_modes_differ_at_corner():
    depth_map = DepthMap.from_array(np.arange(9.0).reshape(3, 3))
    clamped = smooth_depth_map(depth_map, one_pass(Boundary.CLAMP))
    skipped = smooth_depth_map(depth_map, one_pass(Boundary.SKIP))
    assert clamped.depth[2, 2] == 7.0
    assert skipped.depth[2, 2] == 5.0
    assert clamped.depth[1, 1] == skipped.depth[1, 1] == 4.0


def test_invalid_pixels_stay_invalid_and_are_ignored():
    depth = np.full((5, 5), 2.0)
    depth[1, 1:4] = np.nan
    depth[2, 2] = 50.0
    depth_map = DepthMap.from_array(depth)
    smoothed = smooth_depth_map(depth_map, one_pass())
    assert np.array_equal(smoothed.valid, depth_map.valid)
    assert smoothed.depth[2, 2] == 2.0


def test_output_stays_within_window_range(rng):
    for _ in range(20):
        depth = rng.normal(50.0, 10.0, size=(8, 8))
        smoothed = smooth_depth_map(DepthMap.from_array(depth), one_pass()).depth
        assert np.all(smoothed >= ndimage.minimum_filter(depth, size=3, mode="nearest"))
        assert np.all(smoothed <= ndimage.maximum_filter(depth, size=3, mode="nearest"))


def test_iterations_compose(rng):
    depth = rng.normal(size=(9, 9))
    depth[rng.random((9, 9)) < 0.1] = np.nan
    depth_map = DepthMap.from_array(depth)
    kernel = WeightKernel.uniform(3)
    in_steps = smooth_depth_map(
        smooth_depth_map(depth_map, SmoothingConfig(kernel, iterations=2)), SmoothingConfig(kernel, iterations=3)
    )
    at_once = smooth_depth_map(depth_map, SmoothingConfig(kernel, iterations=5))
    assert np.array_equal(in_steps.depth, at_once.depth, equal_nan=True)
    assert in_steps == at_once


def test_smoothing_reduces_error_against_clean_face():
    face, _ = generate_face(FaceParams())
    mask, _, _ = otsu_mask(face)
    clean = apply_mask(face, mask)
    config = SmoothingConfig(iterations=3)
    for seed in range(30):
        noise = NoiseParams(spike_fraction=0.05, spike_amplitude=60.0, gaussian_sigma=0.5, seed=seed)
        noisy = inject_noise(clean, noise)
        smoothed = smooth_depth_map(noisy, config)
        noisy_error = np.mean(np.abs(noisy.valid_depths() - clean.valid_depths()))
        smoothed_error = np.mean(np.abs(smoothed.valid_depths() - clean.valid_depths()))
        assert smoothed_error < noisy_error


def test_non_uniform_kernel_matches_per_pixel_weighted_median(rng):
    cube = rng.integers(1, 5, size=(3, 3, 3))
    kernel = WeightKernel(side=3, weights=cube.ravel())
    spatial = kernel.spatial_weights()
    depth = rng.integers(0, 40, size=(6, 7)).astype(np.float64)
    padded = np.pad(depth, 1, mode="edge")
    expected = np.array(
        [
            [weighted_median(padded[r : r + 3, c : c + 3], spatial) for c in range(depth.shape[1])]
            for r in range(depth.shape[0])
        ]
    )
    config = SmoothingConfig(kernel=kernel, iterations=1)
    assert np.array_equal(smooth_depth_map(DepthMap.from_array(depth), config).depth, expected)


def test_heavy_centre_weight_keeps_spike():
    cube = np.ones((3, 3, 3), dtype=np.int64)
    cube[1, 1, :] = 10
    depth = np.ones((5, 5))
    depth[2, 2] = 100.0
    config = SmoothingConfig(kernel=WeightKernel(side=3, weights=cube.ravel()), iterations=1)
    assert smooth_depth_map(DepthMap.from_array(depth), config).depth[2, 2] == 100.0


def test_kernel_larger_than_map():
    with pytest.raises(KernelSizeError):
        smooth_depth_map(DepthMap.from_array(np.ones((4, 9))), one_pass(side=5))


def test_smoothing_leaves_input_untouched():
    depth = np.ones((5, 5))
    depth[2, 2] = 100.0
    depth_map = DepthMap.from_array(depth)
    smooth_depth_map(depth_map, one_pass())
    assert depth_map.depth[2, 2] == 100.0


# --- triangle meshes ---


def flat_grid_mesh(raise_corner: float = 0.0) -> TriangleMesh:
    """3x3 vertex grid, 8 faces; optionally lift vertex 0, which only face 0 touches."""
    depth = np.zeros((3, 3))
    depth[0, 0] = raise_corner
    return depth_map_to_mesh(DepthMap.from_array(depth))


def test_mesh_rejects_out_of_range_index():
    with pytest.raises(InvalidParameterError):
        TriangleMesh(vertices=np.zeros((3, 3)), faces=[[0, 1, 3]])


def test_mesh_rejects_inconsistent_orientation():
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    with pytest.raises(InvalidParameterError):
        TriangleMesh(vertices=vertices, faces=[[0, 1, 2], [1, 2, 3]])


def test_depth_map_mesh_faces_point_at_camera():
    geometry = face_geometry(flat_grid_mesh())
    assert np.allclose(geometry.normals, [0.0, 0.0, 1.0])
    assert np.allclose(geometry.areas, 0.5)


def test_zero_area_face():
    mesh = TriangleMesh(vertices=[[0, 0, 0], [1, 1, 1], [2, 2, 2]], faces=[[0, 1, 2]])
    with pytest.raises(DegenerateFaceError) as excinfo:
        face_geometry(mesh)
    assert excinfo.value.face_index == 0


def test_neighborhoods_split_edge_and_vertex_sharing():
    hoods = build_neighborhoods(flat_grid_mesh(), edge_weight=2, vertex_weight=1)
    # face 0 = (0, 1, 3) shares edge 1-3 with face 1, vertex 1 with face 2, vertex 3 with face 4
    assert hoods[0].edge_neighbors == (1,)
    assert hoods[0].vertex_neighbors == (2, 4)
    assert hoods[0].weights == (2, 1, 1)


def test_planar_mesh_unchanged():
    mesh = depth_map_to_mesh(DepthMap.from_array(np.full((4, 5), 9.0)))
    smoothed = smooth_mesh(mesh, iterations=4)
    assert np.allclose(smoothed.vertices, mesh.vertices)


def test_single_triangle_unchanged():
    mesh = TriangleMesh(vertices=[[0, 0, 0], [2, 0, 1], [0, 3, 2]], faces=[[0, 1, 2]])
    smoothed = smooth_mesh(mesh, iterations=3)
    assert np.allclose(smoothed.vertices, mesh.vertices)


def test_perturbed_face_takes_majority_normal():
    mesh = flat_grid_mesh(raise_corner=0.4)
    hoods = build_neighborhoods(mesh)
    geometry = face_geometry(mesh)
    medians = median_normals(mesh, hoods, geometry)

    members = (0,) + hoods[0].members()
    normals = geometry.normals[list(members)]
    costs = [sum(math.acos(min(1.0, max(-1.0, float(n @ m)))) for m in normals) for n in normals]
    oracle = normals[int(np.argmin(costs))]

    assert np.allclose(medians[0], oracle)
    assert np.allclose(medians[0], [0.0, 0.0, 1.0])


def test_mesh_smoothing_keeps_connectivity():
    mesh = depth_map_to_mesh(DepthMap.from_array(np.arange(20.0).reshape(4, 5) ** 1.5))
    smoothed = smooth_mesh(mesh, iterations=2)
    assert smoothed.vertex_count == mesh.vertex_count
    assert smoothed.face_count == mesh.face_count
    assert np.array_equal(smoothed.faces, mesh.faces)


def test_mesh_smoothing_pulls_lifted_vertex_down():
    mesh = flat_grid_mesh(raise_corner=0.4)
    smoothed = smooth_mesh(mesh, iterations=1)
    assert smoothed.vertices[0, 2] < 0.4
