import argparse
import sys

from .bench import default_pose_set
from .config import (
    DEFAULT_BENCH_ITERATIONS,
    DEFAULT_BOUNDARY,
    DEFAULT_FACES,
    DEFAULT_MESH_ITERATIONS,
    DEFAULT_SEED,
    DEFAULT_SWEEP_DEG,
    DEFAULT_TOLERANCE_PX,
)
from .core import RotationSpec
from .ingest import DepthFileFormat
from .smooth import DEFAULT_ITERATIONS, DEFAULT_KERNEL_SIDE, Boundary
from .synth import FaceParams, NoiseParams

FORMATS = [f.value for f in DepthFileFormat]
BOUNDARIES = [b.value for b in Boundary]
AXES = ["x", "y", "z"]


def parse_sweep(text):
    """'START:STOP:STEP' in degrees."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"sweep must be START:STOP:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep values must be numbers, got {text!r}") from None
    return start, stop, step


def parse_poses(text):
    """
    Comma-separated viewpoints: 'frontal', 'all' (frontal plus every tested viewpoint) or
    AXIS:DEGREES such as 'y:30'.
    """
    poses = []
    for item in (part.strip().lower() for part in text.split(",")):
        if not item:
            continue
        if item == "frontal":
            poses.append(None)
        elif item == "all":
            poses.extend(default_pose_set())
        else:
            axis, _, degrees = item.partition(":")
            if axis not in AXES or not degrees:
                raise argparse.ArgumentTypeError(f"bad viewpoint {item!r}, expected AXIS:DEGREES")
            try:
                poses.append(RotationSpec.from_degrees(axis, float(degrees)))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad viewpoint angle in {item!r}") from None
    return poses


def _add_smoothing_flags(parser, iterations):
    parser.add_argument(
        "--kernel-side",
        type=int,
        default=DEFAULT_KERNEL_SIDE,
        help=f"Odd window dimension N of the N x N x N weighted-median kernel (default: {DEFAULT_KERNEL_SIDE}).",
    )
    parser.add_argument(
        "--iterations",
        type=int,
        default=iterations,
        help=f"Smoothing passes (default: {iterations}).",
    )
    parser.add_argument(
        "--boundary",
        choices=BOUNDARIES,
        default=DEFAULT_BOUNDARY,
        help="'clamp' (default) replicates edge pixels, 'skip' uses in-bounds pixels only.",
    )


def _add_noise_flags(parser, defaults: NoiseParams):
    parser.add_argument(
        "--spike-frac",
        type=float,
        default=defaults.spike_fraction,
        help=f"Fraction of valid pixels hit by a spike, 0..0.2 (default: {defaults.spike_fraction:g}).",
    )
    parser.add_argument(
        "--spike-amp",
        type=float,
        default=defaults.spike_amplitude,
        help=f"Depth added by a spike (default: {defaults.spike_amplitude:g}).",
    )
    parser.add_argument(
        "--gauss-sigma",
        type=float,
        default=defaults.gaussian_sigma,
        help=f"Standard deviation of Gaussian depth noise (default: {defaults.gaussian_sigma:g}).",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"Random seed (default: {DEFAULT_SEED}).",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nose_tip_locator",
        description="""
    Detect the nose tip in 3D range images: Otsu thresholding, iterative weighted-median
    smoothing, maximum-intensity localisation and symmetry-based pose alignment.

    Examples:
    python -m nose_tip_locator synth --out face.grid --pose-axis y --pose-deg 30 --spike-frac 0.05
    python -m nose_tip_locator detect --input face.grid --format grid --out-landmark nose.txt
    python -m nose_tip_locator detect --input face.grid --no-smooth
    python -m nose_tip_locator detect --input face.grid --align-axis y --sweep -45:45:1 --out-cloud aligned.xyz
    python -m nose_tip_locator bench --faces 200 --poses all --iterations 10 --out-csv bench.csv
    """,
        formatter_class=argparse.RawTextHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    # --- detect ---
    detect = commands.add_parser(
        "detect",
        help="Locate the nose tip in a depth map.",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    detect.add_argument("--input", required=True, help="Depth map to process.")
    detect.add_argument(
        "--format",
        choices=FORMATS,
        default=DepthFileFormat.ASCII_GRID.value,
        help="Input format: 'pgm16', 'grid' (default) or 'xyz'. Smoothed maps are written in the same format.",
    )
    detect.add_argument(
        "--pgm-scale",
        type=float,
        default=1.0,
        help="PGM16 samples per depth unit (default: 1).",
    )
    detect.add_argument(
        "--no-smooth",
        action="store_true",
        default=False,
        help="Skip weighted-median smoothing (baseline pipeline).",
    )
    _add_smoothing_flags(detect, DEFAULT_ITERATIONS)
    detect.add_argument(
        "--align-axis",
        choices=AXES,
        default=None,
        help="Estimate and remove the rotation about this axis by symmetry.",
    )
    detect.add_argument(
        "--sweep",
        type=parse_sweep,
        default=DEFAULT_SWEEP_DEG,
        help="Candidate angles START:STOP:STEP in degrees (default: -45:45:1).",
    )
    detect.add_argument("--out-landmark", default=None, help="Landmark record (default: <input>.landmark).")
    detect.add_argument("--out-smoothed", default=None, help="Write the smoothed, masked depth map here.")
    detect.add_argument("--out-cloud", default=None, help="Write the aligned point cloud here (needs --align-axis).")
    detect.add_argument("--out-mesh", default=None, help="Write a mesh-median smoothed OBJ of the face here.")
    detect.add_argument(
        "--mesh-iterations",
        type=int,
        default=DEFAULT_MESH_ITERATIONS,
        help=f"Mesh-median passes for --out-mesh (default: {DEFAULT_MESH_ITERATIONS}).",
    )
    detect.add_argument("--dump-dir", default=None, help="Directory for every stage intermediate.")
    detect.add_argument("--truth", default=None, help="Ground-truth landmark record to compare against.")
    detect.add_argument(
        "--tolerance-px",
        type=float,
        default=DEFAULT_TOLERANCE_PX,
        help=f"Pixel radius for --truth comparisons (default: {DEFAULT_TOLERANCE_PX:g}).",
    )

    # --- synth ---
    face = FaceParams()
    synth = commands.add_parser("synth", help="Generate a synthetic range face and its ground truth.")
    synth.add_argument("--width", type=int, default=face.width, help=f"Grid width (default: {face.width}).")
    synth.add_argument("--height", type=int, default=face.height, help=f"Grid height (default: {face.height}).")
    synth.add_argument("--nose-row", type=int, default=None, help="Nose row (default: grid centre).")
    synth.add_argument("--nose-col", type=int, default=None, help="Nose column (default: grid centre).")
    synth.add_argument(
        "--nose-height", type=float, default=face.nose_height, help=f"Nose bump amplitude (default: {face.nose_height:g})."
    )
    synth.add_argument(
        "--nose-sigma", type=float, default=face.nose_sigma, help=f"Nose bump radius in pixels (default: {face.nose_sigma:g})."
    )
    synth.add_argument("--pose-axis", choices=AXES, default=None, help="Rotate the head about this axis.")
    synth.add_argument("--pose-deg", type=float, default=0.0, help="Head rotation in degrees (default: 0).")
    _add_noise_flags(synth, NoiseParams(spike_fraction=0.0, gaussian_sigma=0.0))
    synth.add_argument("--out", required=True, help="Depth map to write.")
    synth.add_argument(
        "--format",
        choices=FORMATS,
        default=DepthFileFormat.ASCII_GRID.value,
        help="Output format (default: grid).",
    )
    synth.add_argument("--out-landmark", default=None, help="Ground-truth landmark (default: <out>.truth.landmark).")

    # --- bench ---
    bench = commands.add_parser("bench", help="Run the smoothed-vs-unsmoothed benchmark on synthetic faces.")
    bench.add_argument(
        "--faces", type=int, default=DEFAULT_FACES, help=f"Faces per viewpoint (default: {DEFAULT_FACES})."
    )
    bench.add_argument(
        "--poses",
        type=parse_poses,
        default=[None],
        help="Viewpoints: 'frontal' (default), 'all', or a list like 'frontal,y:30,z:-18'.",
    )
    bench.add_argument(
        "--tolerance-px",
        type=float,
        default=DEFAULT_TOLERANCE_PX,
        help=f"Success radius in pixels (default: {DEFAULT_TOLERANCE_PX:g}).",
    )
    _add_smoothing_flags(bench, DEFAULT_BENCH_ITERATIONS)
    _add_noise_flags(bench, NoiseParams())
    bench.add_argument("--out-csv", default=None, help="CSV report (one row per viewpoint per arm).")
    bench.add_argument("--out-summary", default=None, help="Text summary report.")

    return parser


def _bind_sweep_values(argv):
    """Joins '--sweep X' into '--sweep=X' so a negative start is not read as an option."""
    bound = []
    it = iter(argv)
    for token in it:
        if token == "--sweep":
            value = next(it, None)
            bound.append(token if value is None else f"--sweep={value}")
        else:
            bound.append(token)
    return bound


def parse_args(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    return build_parser().parse_args(_bind_sweep_values(argv))
