"""
The three command-line commands. Each returns an exit status: 0 when every requested output
was written, 1 after reporting the stage that failed.
"""

import math
import os
from contextlib import contextmanager
from typing import Optional

import numpy as np

from .align import align_pose, sweep_angles
from .bench import run_benchmark
from .config import LANDMARK_SUFFIX, TRUTH_SUFFIX, PipelineConfig, check_pipeline_config
from .core import DepthMap, RotationSpec, apply_mask, depth_map_to_point_cloud, pose_label
from .errors import InvalidParameterError, NoseTipError
from .ingest import (
    DepthFileFormat,
    format_number,
    load_depth_map,
    load_landmark,
    save_depth_map,
    save_landmark,
    save_mesh_obj,
    save_point_cloud,
)
from .landmark import find_nose_tip
from .log_utils import (
    log_benchmark_summary,
    log_detect_summary,
    log_stage_failure,
    log_synth_summary,
    log_truth_check,
    log_written,
)
from .smooth import Boundary, SmoothingConfig, WeightKernel, depth_map_to_mesh, smooth_depth_map, smooth_mesh
from .synth import FaceParams, NoiseParams, generate_face, inject_noise
from .threshold import otsu_mask


class StageFailure(Exception):
    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {error}")
        self.stage = stage
        self.error = error


@contextmanager
def stage(name: str):
    """Tags pipeline and filesystem errors with the stage they came from."""
    try:
        yield
    except (NoseTipError, OSError) as e:
        raise StageFailure(name, e) from e


def _write_depth_map(depth_map: DepthMap, path: str, fmt: DepthFileFormat, pgm_scale: float, kind: str):
    save_depth_map(depth_map, path, fmt, pgm_scale)
    log_written(kind, path)


def _dump_intermediates(
    dump_dir: str,
    config: PipelineConfig,
    stages: dict,
) -> None:
    """Writes every stage output into dump_dir, numbered in pipeline order."""
    os.makedirs(dump_dir, exist_ok=True)
    fmt = DepthFileFormat(config.input_format)
    ext = fmt.value

    _write_depth_map(stages["input"], os.path.join(dump_dir, f"01_input.{ext}"), fmt, config.pgm_scale, "input")

    hist, threshold = stages["histogram"], stages["threshold"]
    hist_path = os.path.join(dump_dir, "02_histogram.txt")
    with open(hist_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# min_depth={format_number(hist.min_depth)} max_depth={format_number(hist.max_depth)}\n")
        f.write(f"# threshold={threshold}\n")
        f.writelines(f"{level} {count}\n" for level, count in enumerate(hist.bins))
    log_written("histogram", hist_path)

    mask = stages["mask"]
    mask_map = DepthMap.from_array(mask.bits.astype(np.float64))
    _write_depth_map(mask_map, os.path.join(dump_dir, "03_mask.grid"), DepthFileFormat.ASCII_GRID, 1.0, "mask")

    _write_depth_map(stages["masked"], os.path.join(dump_dir, f"04_masked.{ext}"), fmt, config.pgm_scale, "masked")
    if config.smooth:
        _write_depth_map(
            stages["smoothed"], os.path.join(dump_dir, f"05_smoothed.{ext}"), fmt, config.pgm_scale, "smoothed"
        )

    landmark_path = os.path.join(dump_dir, f"06_nose_tip{LANDMARK_SUFFIX}")
    save_landmark(stages["landmark"], landmark_path)
    log_written("landmark", landmark_path)

    if stages.get("aligned") is not None:
        cloud_path = os.path.join(dump_dir, "07_aligned.xyz")
        save_point_cloud(stages["aligned"], cloud_path)
        log_written("aligned cloud", cloud_path)


def cmd_detect(config: PipelineConfig) -> int:
    stages = {}
    pose: Optional[RotationSpec] = None
    try:
        with stage("config"):
            check_pipeline_config(config)
            fmt = DepthFileFormat(config.input_format)

        with stage("load"):
            depth_map = load_depth_map(config.input_path, fmt, config.pgm_scale)
        stages["input"] = depth_map

        with stage("threshold"):
            mask, threshold, hist = otsu_mask(depth_map)
            masked = apply_mask(depth_map, mask)
        stages.update(histogram=hist, threshold=threshold, mask=mask, masked=masked)

        working = masked
        if config.smooth:
            with stage("smooth"):
                working = smooth_depth_map(masked, config.smoothing_config())
            stages["smoothed"] = working

        with stage("landmark"):
            landmark = find_nose_tip(working, mask)
        stages["landmark"] = landmark

        if config.align_axis is not None:
            with stage("align"):
                cloud = depth_map_to_point_cloud(working)
                pose, aligned = align_pose(cloud, landmark.point, config.align_axis, sweep_angles(*config.sweep))
            stages["aligned"] = aligned

        mesh = None
        if config.out_mesh:
            with stage("mesh"):
                mesh = smooth_mesh(depth_map_to_mesh(working), config.mesh_iterations)

        truth = None
        if config.truth_path:
            with stage("truth"):
                truth = load_landmark(config.truth_path)

        with stage("write"):
            save_landmark(landmark, config.landmark_path)
            log_written("landmark", config.landmark_path)
            if config.out_smoothed:
                kind = "smoothed map" if config.smooth else "masked map"
                _write_depth_map(working, config.out_smoothed, fmt, config.pgm_scale, kind)
            if config.out_cloud:
                save_point_cloud(stages["aligned"], config.out_cloud)
                log_written("aligned cloud", config.out_cloud)
            if mesh is not None:
                save_mesh_obj(mesh, config.out_mesh)
                log_written("mesh", config.out_mesh)
            if config.dump_dir:
                _dump_intermediates(config.dump_dir, config, stages)

    except StageFailure as failure:
        log_stage_failure(failure.stage, failure.error)
        return 1

    log_detect_summary(landmark, config.smooth, config.iterations, pose)
    if truth is not None:
        distance = math.hypot(landmark.row - truth.row, landmark.col - truth.col)
        log_truth_check(distance, config.tolerance_px)
    return 0


def _synth_pose(args) -> Optional[RotationSpec]:
    if args.pose_axis is None:
        if args.pose_deg != 0:
            raise InvalidParameterError("--pose-deg needs --pose-axis")
        return None
    return RotationSpec.from_degrees(args.pose_axis, args.pose_deg)


def cmd_synth(args) -> int:
    try:
        with stage("parameters"):
            if not args.out:
                raise InvalidParameterError("output path is empty")
            row = args.height // 2 if args.nose_row is None else args.nose_row
            col = args.width // 2 if args.nose_col is None else args.nose_col
            face = FaceParams(
                width=args.width,
                height=args.height,
                nose_center=(row, col),
                nose_height=args.nose_height,
                nose_sigma=args.nose_sigma,
            )
            noise = NoiseParams(
                spike_fraction=args.spike_frac,
                spike_amplitude=args.spike_amp,
                gaussian_sigma=args.gauss_sigma,
                seed=args.seed,
            )
            pose = _synth_pose(args)
            fmt = DepthFileFormat(args.format)

        with stage("generate"):
            clean, truth = generate_face(face, pose)
            depth_map = inject_noise(clean, noise)

        landmark_path = args.out_landmark or f"{args.out}{TRUTH_SUFFIX}"
        with stage("write"):
            _write_depth_map(depth_map, args.out, fmt, 1.0, "depth map")
            save_landmark(truth, landmark_path)
            log_written("ground truth", landmark_path)

    except StageFailure as failure:
        log_stage_failure(failure.stage, failure.error)
        return 1

    log_synth_summary(depth_map, truth, pose_label(pose))
    return 0


def cmd_bench(args) -> int:
    try:
        with stage("parameters"):
            noise = NoiseParams(
                spike_fraction=args.spike_frac,
                spike_amplitude=args.spike_amp,
                gaussian_sigma=args.gauss_sigma,
                seed=args.seed,
            )
            config = SmoothingConfig(
                kernel=WeightKernel.uniform(args.kernel_side),
                iterations=args.iterations,
                boundary=Boundary(args.boundary),
            )

        with stage("benchmark"):
            report = run_benchmark(args.faces, args.poses, noise, config, args.tolerance_px)

        log_benchmark_summary(report)

        with stage("write"):
            for path, text, kind in (
                (args.out_csv, report.to_csv, "csv report"),
                (args.out_summary, report.to_summary, "summary"),
            ):
                if path:
                    with open(path, "w", encoding="utf-8", newline="\n") as f:
                        f.write(text())
                    log_written(kind, path)

    except StageFailure as failure:
        log_stage_failure(failure.stage, failure.error)
        return 1

    return 0
