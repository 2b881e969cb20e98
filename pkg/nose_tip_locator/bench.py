"""
Synthetic A/B benchmark: nose-tip localisation with and without smoothing, per viewpoint.

Every face gets its own generator seeded from (master seed, bucket index, face index), so a
run is reproducible and independent of the order faces are processed in.
"""

import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCE_PX
from .core import Axis, RotationSpec, pose_label
from .errors import InvalidParameterError, NoseTipError
from .landmark import find_nose_tip_unsmoothed_vs_smoothed
from .smooth import SmoothingConfig
from .synth import FaceParams, NoiseParams, generate_face, inject_noise
from .threshold import otsu_mask
from .utils import increment_counter

ARMS = ("unsmoothed", "smoothed")
DEFAULT_JITTER_PX = 3
NOSE_HEIGHT_SPREAD = 0.15

TESTED_VIEWPOINTS = {
    Axis.Y: (30, -30, 38, -38, 40, -40),
    Axis.Z: (18, -18, 30, -30, 38, -38, 40, -40),
    Axis.X: (5, -5, 18, -18, 40, -40),
}


def default_pose_set() -> list[Optional[RotationSpec]]:
    """Frontal plus the viewpoints tested per axis."""
    poses: list[Optional[RotationSpec]] = [None]
    for axis, degrees in TESTED_VIEWPOINTS.items():
        poses += [RotationSpec.from_degrees(axis, d) for d in degrees]
    return poses


@dataclass
class BucketResult:
    pose: Optional[RotationSpec]
    counters: dict = field(
        default_factory=lambda: {arm: {"correct": 0, "failed": 0} for arm in ARMS}
    )

    @property
    def label(self) -> str:
        return pose_label(self.pose)

    def total(self, arm: str) -> int:
        return self.counters[arm]["correct"] + self.counters[arm]["failed"]

    def correct(self, arm: str) -> int:
        return self.counters[arm]["correct"]

    def percentages(self, arm: str) -> tuple[float, float]:
        return success_percentages(self.correct(arm), self.total(arm))


def success_percentages(correct: int, total: int) -> tuple[float, float]:
    """(% success, % failure) rounded to two decimals; the pair always sums to 100."""
    if total == 0:
        return 0.0, 0.0
    success = round(100.0 * correct / total, 2)
    return success, round(100.0 - success, 2)


@dataclass
class BenchmarkReport:
    buckets: list[BucketResult]
    n_faces: int
    noise: NoiseParams
    config: SmoothingConfig
    tolerance_px: float

    def overall(self, arm: str) -> tuple[int, int]:
        correct = sum(b.correct(arm) for b in self.buckets)
        total = sum(b.total(arm) for b in self.buckets)
        return correct, total

    def overall_success(self, arm: str) -> float:
        correct, total = self.overall(arm)
        return success_percentages(correct, total)[0]

    def header_lines(self) -> list[str]:
        kernel = self.config.kernel
        uniform = bool(np.all(kernel.weights == 1))
        return [
            f"faces_per_viewpoint={self.n_faces}",
            f"kernel_side={kernel.side}",
            f"kernel_weights={'uniform' if uniform else 'custom'}",
            f"iterations={self.config.iterations}",
            f"boundary={self.config.boundary.value}",
            f"spike_fraction={self.noise.spike_fraction:g}",
            f"spike_amplitude={self.noise.spike_amplitude:g}",
            f"gaussian_sigma={self.noise.gaussian_sigma:g}",
            f"seed={self.noise.seed}",
            f"tolerance_px={self.tolerance_px:g}",
        ]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("arm,viewpoint,axis,degrees,count,correct,success_pct,failure_pct\n")
        for arm in ARMS:
            for bucket in self.buckets:
                total, correct = bucket.total(arm), bucket.correct(arm)
                success, failure = success_percentages(correct, total)
                axis = "" if bucket.pose is None else bucket.pose.axis.value
                degrees = "0" if bucket.pose is None else f"{bucket.pose.degrees:g}"
                out.write(
                    f"{arm},{bucket.label},{axis},{degrees},{total},{correct},"
                    f"{success:.2f},{failure:.2f}\n"
                )
        return out.getvalue()

    def to_summary(self) -> str:
        """key=value header, one table per arm, then the overall rates."""
        lines = [f"# {line}" for line in self.header_lines()]
        for arm in ARMS:
            lines.append("")
            lines.append(f"[{arm}]")
            lines.append(f"{'viewpoint':<12}{'count':>8}{'correct':>9}{'success%':>10}{'failure%':>10}")
            for bucket in self.buckets:
                total, correct = bucket.total(arm), bucket.correct(arm)
                success, failure = success_percentages(correct, total)
                lines.append(f"{bucket.label:<12}{total:>8}{correct:>9}{success:>10.2f}{failure:>10.2f}")
            correct, total = self.overall(arm)
            success, failure = success_percentages(correct, total)
            lines.append(f"{'overall':<12}{total:>8}{correct:>9}{success:>10.2f}{failure:>10.2f}")
        return "\n".join(lines) + "\n"


def _face_for(
    face: FaceParams, rng: np.random.Generator, jitter_px: int
) -> FaceParams:
    row, col = face.nose_center
    if jitter_px:
        row += int(rng.integers(-jitter_px, jitter_px + 1))
        col += int(rng.integers(-jitter_px, jitter_px + 1))
    scale = rng.uniform(1.0 - NOSE_HEIGHT_SPREAD, 1.0 + NOSE_HEIGHT_SPREAD)
    return replace(face, nose_center=(row, col), nose_height=face.nose_height * scale)


def run_benchmark(
    n_faces: int,
    pose_set: Sequence[Optional[RotationSpec]],
    noise: NoiseParams,
    config: SmoothingConfig,
    tolerance_px: float = DEFAULT_TOLERANCE_PX,
    face: FaceParams = FaceParams(),
    jitter_px: int = DEFAULT_JITTER_PX,
) -> BenchmarkReport:
    if n_faces < 1:
        raise InvalidParameterError(f"benchmark needs at least one face, got {n_faces}")
    if not tolerance_px >= 0:
        raise InvalidParameterError(f"tolerance must be >= 0, got {tolerance_px}")

    poses = list(pose_set) or [None]
    buckets = []
    for bucket_index, pose in enumerate(poses):
        bucket = BucketResult(pose)
        for face_index in range(n_faces):
            rng = np.random.default_rng([noise.seed, bucket_index, face_index])
            params = _face_for(face, rng, jitter_px)
            face_noise = noise.with_seed(int(rng.integers(2**62)))

            try:
                clean, truth = generate_face(params, pose)
                noisy = inject_noise(clean, face_noise)
                mask, _, _ = otsu_mask(noisy)
                found = find_nose_tip_unsmoothed_vs_smoothed(noisy, mask, config)
            except NoseTipError:
                found = (None, None)

            for arm, landmark in zip(ARMS, found):
                hit = landmark is not None and (
                    math.hypot(landmark.row - truth.row, landmark.col - truth.col) <= tolerance_px
                )
                increment_counter(hit, bucket.counters[arm])
        buckets.append(bucket)

    return BenchmarkReport(
        buckets=buckets,
        n_faces=n_faces,
        noise=noise,
        config=config,
        tolerance_px=tolerance_px,
    )
