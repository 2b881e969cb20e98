from dataclasses import dataclass
from typing import Optional

from .core import Axis
from .errors import InvalidParameterError
from .ingest import DepthFileFormat
from .smooth import DEFAULT_ITERATIONS, DEFAULT_KERNEL_SIDE, Boundary, SmoothingConfig, WeightKernel

DEFAULT_BOUNDARY = Boundary.CLAMP.value
DEFAULT_TOLERANCE_PX = 3.0
DEFAULT_SWEEP_DEG = (-45.0, 45.0, 1.0)
DEFAULT_MESH_ITERATIONS = 5

DEFAULT_FACES = 200
DEFAULT_BENCH_ITERATIONS = 10
DEFAULT_SEED = 0

LANDMARK_SUFFIX = ".landmark"
TRUTH_SUFFIX = ".truth.landmark"


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    input_format: DepthFileFormat
    pgm_scale: float = 1.0
    smooth: bool = True
    kernel_side: int = DEFAULT_KERNEL_SIDE
    iterations: int = DEFAULT_ITERATIONS
    boundary: str = DEFAULT_BOUNDARY
    align_axis: Optional[Axis] = None
    sweep: tuple[float, float, float] = DEFAULT_SWEEP_DEG
    out_landmark: Optional[str] = None
    out_smoothed: Optional[str] = None
    out_cloud: Optional[str] = None
    out_mesh: Optional[str] = None
    mesh_iterations: int = DEFAULT_MESH_ITERATIONS
    dump_dir: Optional[str] = None
    truth_path: Optional[str] = None
    tolerance_px: float = DEFAULT_TOLERANCE_PX

    @property
    def landmark_path(self) -> str:
        return self.out_landmark or f"{self.input_path}{LANDMARK_SUFFIX}"

    def smoothing_config(self) -> SmoothingConfig:
        return SmoothingConfig(
            kernel=WeightKernel.uniform(self.kernel_side),
            iterations=self.iterations,
            boundary=Boundary(self.boundary),
        )


def check_pipeline_config(config: PipelineConfig) -> None:
    """
    Checks every setting and raises one InvalidParameterError listing all problems found.
    """
    problems = []
    if not config.input_path:
        problems.append("input path is empty")
    for name in ("out_landmark", "out_smoothed", "out_cloud", "out_mesh", "dump_dir", "truth_path"):
        if getattr(config, name) == "":
            problems.append(f"{name.replace('_', '-')} path is empty")
    if not config.pgm_scale > 0:
        problems.append(f"PGM scale must be positive, got {config.pgm_scale}")
    if config.kernel_side < 3 or config.kernel_side % 2 == 0:
        problems.append(f"kernel side must be odd and >= 3, got {config.kernel_side}")
    if config.iterations < 1:
        problems.append(f"iterations must be >= 1, got {config.iterations}")
    if config.mesh_iterations < 1:
        problems.append(f"mesh iterations must be >= 1, got {config.mesh_iterations}")
    if config.align_axis is not None:
        start, stop, step = config.sweep
        if not step > 0:
            problems.append(f"sweep step must be > 0, got {step:g}")
        if stop < start:
            problems.append(f"sweep stop {stop:g} is below start {start:g}")
    if config.out_cloud and config.align_axis is None:
        problems.append("--out-cloud needs --align-axis")
    if not config.tolerance_px >= 0:
        problems.append(f"tolerance must be >= 0, got {config.tolerance_px}")

    if problems:
        raise InvalidParameterError(
            f"Invalid pipeline configuration: {'; '.join(problems)}."
        )
